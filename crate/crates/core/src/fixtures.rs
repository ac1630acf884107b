//! Bundled worked examples, shipped as JSON under `fixtures/`.

use crate::efficient_set::LimitPoint;
use crate::market::{Market, MarketData, OptionSpec, PathRecord, PathSet};
use crate::oneperiod_poly::PolyMarket;
use crate::priors::{PriorSet, PriorsFile};
use crate::rat::Rat;
use crate::superhedge::Claim;

pub const BINOM: &str = include_str!("../fixtures/binom.json");
pub const GAP: &str = include_str!("../fixtures/gap.json");
pub const EX35: &str = include_str!("../fixtures/ex35.json");
pub const INTA: &str = include_str!("../fixtures/inta.json");
pub const BINOM_OMEGA_PRIORS: &str = include_str!("../fixtures/binom-omega-priors.json");
pub const GAP_OMEGA_PRIORS: &str = include_str!("../fixtures/gap-omega-priors.json");
pub const GAP_12_PRIORS: &str = include_str!("../fixtures/gap-12-priors.json");
pub const INTA_PRIORS: &str = include_str!("../fixtures/inta-priors.json");
pub const GAP_ZERO_INDICATOR: &str = include_str!("../fixtures/gap-zero-indicator.json");
pub const BINOM_CALL: &str = include_str!("../fixtures/binom-call.json");
pub const BINOM_FAIR_CALL: &str = include_str!("../fixtures/binom-fair-call.json");
pub const EX35_CLAIM: &str = include_str!("../fixtures/ex35-claim.json");
pub const SAUSA: &str = include_str!("../fixtures/sausa.json");
pub const EX31: &str = include_str!("../fixtures/ex31.json");

fn market(src: &str) -> Market {
    let data: MarketData = serde_json::from_str(src).expect("bundled market parses");
    Market::new(data).expect("bundled market is valid")
}

fn priors(m: &Market, src: &str) -> PriorSet {
    let file: PriorsFile = serde_json::from_str(src).expect("bundled priors parse");
    PriorSet::from_records(m, &file).expect("bundled priors are valid")
}

fn claim(src: &str) -> Claim {
    serde_json::from_str(src).expect("bundled claim parses")
}

/// `S₀ = 1`, `S₁ ∈ {2, 1/2}`.
pub fn binom() -> Market {
    market(BINOM)
}

/// `S₀ = 1`, `S₁ ∈ {0, 1, 2}` with ids `s0, s1, s2`.
pub fn gap() -> Market {
    market(GAP)
}

pub fn ex35() -> Market {
    market(EX35)
}

/// Three outcomes with a call struck above `S₀` offered at price zero.
pub fn inta() -> Market {
    market(INTA)
}

pub fn binom_omega_priors(m: &Market) -> PriorSet {
    priors(m, BINOM_OMEGA_PRIORS)
}

pub fn gap_omega_priors(m: &Market) -> PriorSet {
    priors(m, GAP_OMEGA_PRIORS)
}

/// Priors charging only `S₁ ∈ {1, 2}`.
pub fn gap_12_priors(m: &Market) -> PriorSet {
    priors(m, GAP_12_PRIORS)
}

pub fn inta_priors(m: &Market) -> PriorSet {
    priors(m, INTA_PRIORS)
}

pub fn gap_zero_indicator() -> Claim {
    claim(GAP_ZERO_INDICATOR)
}

/// `(S₁ - 1)⁺` on the binomial market.
pub fn binom_call() -> Claim {
    claim(BINOM_CALL)
}

/// The call net of its replication price, as a static option.
pub fn binom_fair_call() -> OptionSpec {
    serde_json::from_str(BINOM_FAIR_CALL).expect("bundled option parses")
}

/// The binomial market with the fairly priced call traded statically.
pub fn binom_with_fair_call() -> Market {
    let mut data = binom().data().clone();
    data.options.push(binom_fair_call());
    Market::new(data).expect("valid")
}

pub fn ex35_claim(m: &Market) -> Claim {
    let c = claim(EX35_CLAIM);
    assert_eq!(c.g.len(), m.num_paths());
    c
}

/// `Ω` for the three-asset example: every path except the closure point `b2_0`.
pub fn ex35_scope(m: &Market) -> PathSet {
    let lim = m.path_index("b2_0").expect("fixture path");
    m.all_paths().into_iter().filter(|&w| w != lim).collect()
}

/// `b2_0` is the limit of the `b2` scenarios, active while either remains.
pub fn ex35_limit_points(m: &Market) -> Vec<LimitPoint> {
    let ids = ["b2_1/4", "b2_2/5"];
    vec![LimitPoint { path: m.path_index("b2_0").expect("fixture path"), parents: m.set_from_ids(&ids).expect("fixture paths") }]
}

fn isqrt(n: u64) -> u64 {
    let r = (n as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&m| m * m == n).expect("perfect square")
}

/// Truncation of the two-asset divergence example: `S₀ = (2, 2)` with
/// `S₁ ∈ {(2,2), (2,0), (2,7), (2 + 1/n, 7 + 1/√n)}`; `n` must be a perfect square.
pub fn ex32(n: u64) -> Market {
    let m = isqrt(n) as i64;
    let two = Rat::from_int(2);
    let s0 = vec![two.clone(), two.clone()];
    let mk = |id: &str, x: Rat, y: Rat| PathRecord { id: id.into(), prices: vec![s0.clone(), vec![x, y]] };
    let data = MarketData {
        horizon: 1,
        d: 2,
        paths: vec![
            mk("a", two.clone(), two.clone()),
            mk("b", two.clone(), Rat::zero()),
            mk("c", two.clone(), Rat::from_int(7)),
            mk("v", &two + &Rat::frac(1, n as i64), Rat::from_int(7) + Rat::frac(1, m)),
        ],
        options: vec![],
    };
    Market::new(data).expect("valid")
}

/// `g = ΔS²` if `ΔS² ≤ 5`, else `5(ΔS² - 4)`.
pub fn ex32_claim(m: &Market) -> Claim {
    let five = Rat::from_int(5);
    let g = (0..m.num_paths())
        .map(|w| {
            let d2 = m.increment(w, 0)[1].clone();
            if d2 <= five {
                d2
            } else {
                &five * &(d2 - Rat::from_int(4))
            }
        })
        .collect();
    Claim { name: "ex32".into(), g }
}

/// `(1, 2]` with `s₀ = 1`.
pub fn sausa() -> PolyMarket {
    serde_json::from_str(SAUSA).expect("bundled polyhedral market parses")
}

/// `(2, ∞)` with `s₀ = 2`; prices are taken on the closure `[2, ∞)`.
pub fn ex31() -> PolyMarket {
    serde_json::from_str(EX31).expect("bundled polyhedral market parses")
}
