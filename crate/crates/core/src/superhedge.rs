//! Superhedging prices with martingale duals.
//!
//! Pathwise prices are one LP over `(x, h, H)`; the row multipliers of an
//! optimal solution are the maximizing calibrated martingale measure, so the
//! duality gap is checked exactly. Also here: the quasi-sure price, the
//! duality chain, backward induction with one-step prices, and the checker
//! for extending superhedges from the efficient set to the full scope.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbitrage::{detect_quasi_sure, ArbitrageError, Certified};
use crate::efficient_set::{aggregate, omega_star_oracle, EfficientSetError, LimitPoint, Separator, SweepOrder};
use crate::exactlp::{solve, Bounds, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::linalg::{project, rank};
use crate::market::{is_martingale_measure, Market, MarketError, Measure, NodeRef, PathSet, Strategy};
use crate::model::{measure_from_rows, MeasureLp, StrategyLp};
use crate::priors::{full_support_measure, priors_from_scenarios, quasi_sure_support, PriorError, PriorSet};
use crate::rat::{ExtRat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuperhedgeError {
    #[error("scope is empty")]
    EmptyScope,
    #[error("claim has {0} entries, market has {1} paths")]
    ClaimLength(usize, usize),
    #[error("static options are not supported here")]
    OptionsPresent,
    #[error("{0} is not a perfect square")]
    NotPerfectSquare(u64),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Priors(#[from] PriorError),
    #[error(transparent)]
    EfficientSet(#[from] EfficientSetError),
    #[error(transparent)]
    Arbitrage(#[from] ArbitrageError),
}

/// A claim file: one payoff per path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub g: Vec<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeTag {
    PathwiseOmega,
    PathwiseOmegaStar,
    QuasiSure,
    SingleP,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperhedgeResult {
    pub price: ExtRat,
    pub strategy: Option<Strategy>,
    pub dual_measure: Option<Measure>,
    /// Price minus the dual expectation; zero whenever both are finite.
    pub gap: Rat,
    pub scope: ScopeTag,
    pub paths: Vec<String>,
    pub certificate: Certified,
}

fn check_claim(market: &Market, g: &[Rat]) -> Result<(), SuperhedgeError> {
    if g.len() != market.num_paths() {
        return Err(SuperhedgeError::ClaimLength(g.len(), market.num_paths()));
    }
    Ok(())
}

/// Builds `min x` s.t. `x + payoff >= g` on `scope`; returns rows per path.
fn superhedge_lp<'a>(market: &'a Market, scope: &PathSet, g: &[Rat]) -> (StrategyLp<'a>, usize, Vec<(usize, usize)>) {
    let mut slp = StrategyLp::free(market, scope, Sense::Minimize);
    let x = slp.lp.add_var(Rat::one(), Bounds::free());
    let mut rows = Vec::new();
    for &w in scope {
        let mut terms = slp.payoff_terms(w);
        terms.push((x, Rat::one()));
        let r = slp.lp.add_labeled_row(&terms, Relation::Ge, g[w].clone(), format!("superhedge at {}", market.path_id(w)));
        rows.push((w, r));
    }
    (slp, x, rows)
}

/// `π_scope(g)`: least capital superhedging `g` on `scope`.
pub fn price_pathwise(market: &Market, scope: &PathSet, g: &[Rat]) -> Result<SuperhedgeResult, SuperhedgeError> {
    price_tagged(market, scope, g, ScopeTag::PathwiseOmega)
}

fn price_tagged(market: &Market, scope: &PathSet, g: &[Rat], tag: ScopeTag) -> Result<SuperhedgeResult, SuperhedgeError> {
    check_claim(market, g)?;
    if scope.is_empty() {
        return Err(SuperhedgeError::EmptyScope);
    }
    let (slp, _, rows) = superhedge_lp(market, scope, g);
    let outcome = solve(&slp.lp)?;
    let (price, strategy, dual) = match outcome.status {
        LpStatus::Optimal => {
            let v = outcome.value.clone().expect("optimal value");
            let s = slp.strategy(outcome.primal());
            let q = outcome.dual.as_ref().and_then(|d| measure_from_rows(market, &rows, &d.rows));
            (ExtRat::Finite(v), Some(s), q)
        }
        LpStatus::Unbounded => (ExtRat::NegInf, None, None),
        LpStatus::Infeasible => unreachable!("x = max g is always feasible"),
    };
    let gap = match (&price, &dual) {
        (ExtRat::Finite(p), Some(q)) => p - &q.expectation(g),
        _ => Rat::zero(),
    };
    Ok(SuperhedgeResult { price, strategy, dual_measure: dual, gap, scope: tag, paths: market.ids(scope), certificate: Certified { lp: slp.lp, outcome } })
}

/// Extended value with the convention `π_∅ = -∞`.
pub fn price_value(market: &Market, scope: &PathSet, g: &[Rat]) -> Result<ExtRat, SuperhedgeError> {
    if scope.is_empty() {
        return Ok(ExtRat::NegInf);
    }
    Ok(price_pathwise(market, scope, g)?.price)
}

/// Feasibility of superhedging `g` on `scope` from exactly `capital`.
pub fn capital_check(market: &Market, scope: &PathSet, g: &[Rat], capital: &Rat) -> Result<(bool, Certified), SuperhedgeError> {
    check_claim(market, g)?;
    let (mut slp, x, _) = superhedge_lp(market, scope, g);
    slp.lp.bounds[x] = Bounds::between(capital.clone(), capital.clone());
    slp.lp.objective[x] = Rat::zero();
    let outcome = solve(&slp.lp)?;
    Ok((outcome.is_optimal(), Certified { lp: slp.lp, outcome }))
}

/// `sup E_Q[g]` over calibrated martingale probability measures on `support`.
pub fn dual_value(market: &Market, support: &PathSet, g: &[Rat]) -> Result<(ExtRat, Option<Measure>), SuperhedgeError> {
    check_claim(market, g)?;
    if support.is_empty() {
        return Ok((ExtRat::NegInf, None));
    }
    let mut mlp = MeasureLp::new(market, support, Sense::Maximize, true);
    for (&w, &v) in &mlp.mu {
        mlp.lp.objective[v] = g[w].clone();
    }
    mlp.add_normalization();
    let out = solve(&mlp.lp)?;
    Ok(match out.status {
        LpStatus::Optimal => (ExtRat::Finite(out.value.clone().unwrap()), Some(mlp.measure(market, out.primal()))),
        LpStatus::Infeasible => (ExtRat::NegInf, None),
        LpStatus::Unbounded => (ExtRat::PosInf, None),
    })
}

/// Re-checks a pricing result exactly.
pub fn verify_result(market: &Market, g: &[Rat], r: &SuperhedgeResult) -> Vec<String> {
    let mut fails = Vec::new();
    let cr = crate::exactlp::check_certificate(&r.certificate.lp, &r.certificate.outcome);
    fails.extend(cr.failures);
    let scope = match market.set_from_ids(&r.paths) {
        Ok(s) => s,
        Err(e) => return vec![e.to_string()],
    };
    if let ExtRat::Finite(p) = &r.price {
        match &r.strategy {
            Some(s) => {
                for &w in &scope {
                    if p + &crate::market::path_payoff(market, s, w) < g[w] {
                        fails.push(format!("strategy fails to superhedge at {}", market.path_id(w)));
                    }
                }
            }
            None => fails.push("finite price without an attaining strategy".into()),
        }
        match &r.dual_measure {
            Some(q) => match is_martingale_measure(market, q, &scope) {
                Ok(c) if c.holds => {
                    if q.expectation(g) != *p {
                        fails.push("dual expectation differs from the price".into());
                    }
                }
                Ok(_) => fails.push("dual measure is not a calibrated martingale measure".into()),
                Err(e) => fails.push(e.to_string()),
            },
            None => fails.push("finite price without a dual measure".into()),
        }
        if !r.gap.is_zero() {
            fails.push(format!("duality gap {}", r.gap));
        }
    }
    fails
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiSureResult {
    pub result: SuperhedgeResult,
    /// `P^g`: the full-support prior.
    pub extremal: Measure,
    /// `π^{P^g}(g)` computed on the support of `P^g`.
    pub extremal_price: ExtRat,
    /// `Ω^𝔓_g`.
    pub omega_g: Vec<String>,
}

/// `π^𝔓(g)`: superhedging outside polar sets, i.e. on `Ω^𝔓`.
pub fn price_quasisure(market: &Market, priors: &PriorSet, g: &[Rat]) -> Result<QuasiSureResult, SuperhedgeError> {
    let support = quasi_sure_support(priors, market).paths;
    let result = price_tagged(market, &support, g, ScopeTag::QuasiSure)?;
    let extremal = full_support_measure(priors, market);
    let extremal_price = price_tagged(market, &extremal.support(), g, ScopeTag::SingleP)?.price;
    Ok(QuasiSureResult { result, extremal, extremal_price, omega_g: market.ids(&support) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityChain {
    /// False when `A(𝔓)` is present; the values are then not computed.
    pub applicable: bool,
    pub values: Vec<(String, ExtRat)>,
    pub all_equal: bool,
    /// The four-term chain for `𝔓 = priors_from_scenarios(Ω*)`.
    pub converse: Option<Vec<(String, ExtRat)>>,
    pub converse_equal: Option<bool>,
}

fn all_same(v: &[(String, ExtRat)]) -> bool {
    v.windows(2).all(|w| w[0].1 == w[1].1)
}

/// The five values of the superhedging duality under `NA(𝔓)`, computed independently.
pub fn duality_chain(market: &Market, priors: &PriorSet, g: &[Rat]) -> Result<DualityChain, SuperhedgeError> {
    check_claim(market, g)?;
    if detect_quasi_sure(market, priors)?.present {
        return Ok(DualityChain { applicable: false, values: vec![], all_equal: false, converse: None, converse_equal: None });
    }
    let omega_g = quasi_sure_support(priors, market).paths;
    let star = omega_star_oracle(market, &omega_g)?.retained;
    let p_full = full_support_measure(priors, market);
    let values = vec![
        ("sup over calibrated martingale measures on Omega_g".to_string(), dual_value(market, &omega_g, g)?.0),
        ("pathwise price on the efficient set of Omega_g".to_string(), price_value(market, &star, g)?),
        ("price under the extremal prior".to_string(), price_value(market, &p_full.support(), g)?),
        ("quasi-sure price".to_string(), price_quasisure(market, priors, g)?.result.price),
        ("sup over dominated calibrated martingale measures".to_string(), dual_value(market, &p_full.support(), g)?.0),
    ];
    let all_equal = all_same(&values);
    let (converse, converse_equal) = if star.is_empty() {
        (None, None)
    } else {
        let c = duality_chain_converse(market, &omega_g, g)?;
        let eq = all_same(&c);
        (Some(c), Some(eq))
    };
    Ok(DualityChain { applicable: true, values, all_equal, converse, converse_equal })
}

/// Four-term chain on a scenario set `Ω` with `Ω* ≠ ∅`, using priors whose
/// polar sets are those of the calibrated martingale measures on `Ω`.
pub fn duality_chain_converse(market: &Market, omega: &PathSet, g: &[Rat]) -> Result<Vec<(String, ExtRat)>, SuperhedgeError> {
    let star = omega_star_oracle(market, omega)?.retained;
    let priors = priors_from_scenarios(market, &star)?;
    Ok(vec![
        ("sup over calibrated martingale measures on Omega".to_string(), dual_value(market, omega, g)?.0),
        ("pathwise price on the efficient set".to_string(), price_value(market, &star, g)?),
        ("quasi-sure price".to_string(), price_quasisure(market, &priors, g)?.result.price),
        ("sup over dominated calibrated martingale measures".to_string(), dual_value(market, &full_support_measure(&priors, market).support(), g)?.0),
    ])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePrice {
    pub node: NodeRef,
    pub value: ExtRat,
    pub hedge: Option<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackwardInduction {
    /// One-step prices for every node meeting the scope, `t = 0..=T`.
    pub nodes: Vec<Vec<NodePrice>>,
    pub root: ExtRat,
}

/// One-step superhedging prices from `T` down to `0`.
pub fn backward_induction(market: &Market, scope: &PathSet, g: &[Rat]) -> Result<BackwardInduction, SuperhedgeError> {
    check_claim(market, g)?;
    if market.num_options() > 0 {
        return Err(SuperhedgeError::OptionsPresent);
    }
    if scope.is_empty() {
        return Err(SuperhedgeError::EmptyScope);
    }
    let tt = market.horizon();
    let mut value: Vec<std::collections::BTreeMap<usize, ExtRat>> = vec![Default::default(); tt + 1];
    let mut table: Vec<Vec<NodePrice>> = vec![Vec::new(); tt + 1];
    for ni in market.nodes_meeting(tt, scope) {
        let v = market.tree().node(tt, ni).paths.iter().filter(|w| scope.contains(w)).map(|&w| g[w].clone()).max().expect("node meets scope");
        value[tt].insert(ni, ExtRat::Finite(v.clone()));
        table[tt].push(NodePrice { node: market.node_label(tt, ni), value: ExtRat::Finite(v), hedge: None });
    }
    for t in (0..tt).rev() {
        for ni in market.nodes_meeting(t, scope) {
            let kids: Vec<usize> = market.tree().node(t, ni).children.iter().copied().filter(|c| value[t + 1].contains_key(c)).collect();
            let mut lp = LinearProgram::new(Sense::Minimize);
            let x = lp.add_var(Rat::one(), Bounds::free());
            let h: Vec<usize> = (0..market.assets()).map(|_| lp.add_var(Rat::zero(), Bounds::free())).collect();
            let mut any = false;
            for &c in &kids {
                let ExtRat::Finite(target) = &value[t + 1][&c] else {
                    continue;
                };
                any = true;
                let inc = market.increment(market.tree().node(t + 1, c).paths[0], t);
                let mut terms: Vec<(usize, Rat)> = h.iter().zip(inc).map(|(&v, a)| (v, a)).collect();
                terms.push((x, Rat::one()));
                lp.add_row(&terms, Relation::Ge, target.clone());
            }
            let (v, hedge) = if !any {
                (ExtRat::NegInf, None)
            } else {
                let out = solve(&lp)?;
                match out.status {
                    LpStatus::Optimal => {
                        let p = out.primal();
                        (ExtRat::Finite(p[x].clone()), Some(h.iter().map(|&i| p[i].clone()).collect()))
                    }
                    _ => (ExtRat::NegInf, None),
                }
            };
            value[t].insert(ni, v.clone());
            table[t].push(NodePrice { node: market.node_label(t, ni), value: v, hedge });
        }
    }
    let root = value[0][&0].clone();
    Ok(BackwardInduction { nodes: table, root })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeExtension {
    pub node: NodeRef,
    /// `A_t^ω`: successors whose projected increment misses the efficient increments.
    pub a_set: Vec<String>,
    /// Limit points and `A` points whose increment lies in the efficient span but not in its increment set.
    pub span_violations: Vec<String>,
    pub efficient_nonempty: bool,
    /// Separators applied at this node, in order.
    pub separators: Vec<Separator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub nodes: Vec<NodeExtension>,
    pub omega_star: Vec<String>,
    /// Every node meeting `Ω` meets `Ω*`.
    pub efficient_nodes_ok: bool,
    pub assumption_3_4_ok: bool,
    pub assumption_3_6_ok: bool,
    /// Price on `Ω` together with its closure points.
    pub price_on_omega: ExtRat,
    pub price_on_omega_star: ExtRat,
    pub extension_holds: bool,
}

/// Checks the extension assumptions at every node and compares `π_Ω` with `π_{Ω*}`.
///
/// `limit_points` are closure points of `Ω` that are not scenarios: they
/// are excluded from `Ω*`, but constrain separators and the `Ω` superhedge.
pub fn extension_report(market: &Market, scope: &PathSet, g: &[Rat], limit_points: &[LimitPoint]) -> Result<ExtensionReport, SuperhedgeError> {
    check_claim(market, g)?;
    if market.num_options() > 0 {
        return Err(SuperhedgeError::OptionsPresent);
    }
    if scope.is_empty() {
        return Err(SuperhedgeError::EmptyScope);
    }
    let star = omega_star_oracle(market, scope)?.retained;
    let agg = aggregate(market, scope, limit_points, SweepOrder::Forward)?;
    let mut nodes = Vec::new();
    for t in 0..market.horizon() {
        for ni in market.nodes_meeting(t, scope) {
            let node = market.tree().node(t, ni);
            let eff_incs: Vec<Vec<Rat>> = node.paths.iter().filter(|w| star.contains(w)).map(|&w| market.increment(w, t)).collect();
            let span = rank(&eff_incs, market.assets());
            let mut a_set = Vec::new();
            let mut span_violations = Vec::new();
            for &w in node.paths.iter().filter(|w| scope.contains(w)) {
                let inc = market.increment(w, t);
                let p = project(&eff_incs, &inc);
                if !eff_incs.contains(&p) {
                    a_set.push(market.path_id(w).to_string());
                    if p == inc {
                        span_violations.push(market.path_id(w).to_string());
                    }
                }
            }
            for l in limit_points.iter().filter(|l| market.tree().node_of[t][l.path] == ni) {
                let inc = market.increment(l.path, t);
                let mut aug = eff_incs.clone();
                aug.push(inc.clone());
                if rank(&aug, market.assets()) == span && !eff_incs.contains(&inc) {
                    span_violations.push(market.path_id(l.path).to_string());
                }
            }
            let separators = agg.steps.iter().filter(|s| s.t == t && s.node == ni).map(|s| s.separator.clone()).collect();
            nodes.push(NodeExtension {
                node: market.node_label(t, ni),
                a_set,
                span_violations,
                efficient_nonempty: !eff_incs.is_empty(),
                separators,
            });
        }
    }
    let efficient_nodes_ok = nodes.iter().all(|n| n.efficient_nonempty);
    let assumption_3_4_ok = nodes.iter().all(|n| n.span_violations.is_empty());
    let assumption_3_6_ok = nodes.iter().all(|n| n.separators.len() <= 1);
    let mut closure = scope.clone();
    closure.extend(limit_points.iter().map(|l| l.path));
    let price_on_omega = price_value(market, &closure, g)?;
    let price_on_omega_star = price_value(market, &star, g)?;
    let extension_holds = price_on_omega == price_on_omega_star;
    Ok(ExtensionReport {
        nodes,
        omega_star: market.ids(&star),
        efficient_nodes_ok,
        assumption_3_4_ok,
        assumption_3_6_ok,
        price_on_omega,
        price_on_omega_star,
        extension_holds,
    })
}

fn exact_sqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&m| m * m == n)
}

/// Least `H¹` among zero-capital superhedges of the modified gap claim on
/// the truncation with boundary point `(2 + 1/n, 7 + 1/√n)`.
pub fn divergence_probe_ex32(n: u64) -> Result<Rat, SuperhedgeError> {
    if n == 0 {
        return Err(SuperhedgeError::NotPerfectSquare(n));
    }
    exact_sqrt(n).ok_or(SuperhedgeError::NotPerfectSquare(n))?;
    let market = crate::fixtures::ex32(n);
    let claim = crate::fixtures::ex32_claim(&market);
    let all = market.all_paths();
    let (mut slp, x, _) = superhedge_lp(&market, &all, &claim.g);
    slp.lp.bounds[x] = Bounds::between(Rat::zero(), Rat::zero());
    slp.lp.objective[x] = Rat::zero();
    let h1 = slp.dynv[0][0].as_ref().expect("root meets the scope")[0];
    slp.lp.objective[h1] = Rat::one();
    let out = solve(&slp.lp)?;
    Ok(out.primal()[h1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::market::{MarketData, PathRecord};

    #[test]
    fn pathwise_examples() {
        let g = fixtures::gap();
        let c = fixtures::gap_zero_indicator();
        let r = price_pathwise(&g, &g.all_paths(), &c.g).unwrap();
        assert_eq!(r.price, ExtRat::Finite(Rat::frac(1, 2)));
        assert_eq!(r.strategy.as_ref().unwrap().dynamic[0][0], vec![Rat::frac(-1, 2)]);
        assert_eq!(r.dual_measure.as_ref().unwrap().weights, vec![Rat::frac(1, 2), Rat::zero(), Rat::frac(1, 2)]);
        assert!(verify_result(&g, &c.g, &r).is_empty());
        let b = fixtures::binom();
        let c = fixtures::binom_call();
        let r = price_pathwise(&b, &b.all_paths(), &c.g).unwrap();
        assert_eq!(r.price, ExtRat::Finite(Rat::frac(1, 3)));
        assert_eq!(r.strategy.as_ref().unwrap().dynamic[0][0], vec![Rat::frac(2, 3)]);
        assert_eq!(r.dual_measure.as_ref().unwrap().weights, vec![Rat::frac(1, 3), Rat::frac(2, 3)]);
        let r = price_pathwise(&b, &[0].into(), &[Rat::zero(), Rat::zero()]).unwrap();
        assert_eq!(r.price, ExtRat::NegInf);
        assert!(matches!(price_pathwise(&b, &PathSet::new(), &c.g), Err(SuperhedgeError::EmptyScope)));
    }

    #[test]
    fn quasi_sure_examples() {
        let g = fixtures::gap();
        let c = fixtures::gap_zero_indicator();
        let r = price_quasisure(&g, &fixtures::gap_12_priors(&g), &c.g).unwrap();
        assert_eq!(r.result.price, ExtRat::Finite(Rat::zero()));
        assert_eq!(r.extremal_price, r.result.price);
        let r = price_quasisure(&g, &fixtures::gap_omega_priors(&g), &c.g).unwrap();
        assert_eq!(r.result.price, ExtRat::Finite(Rat::frac(1, 2)));
        let k = vec![Rat::from_int(7); 3];
        let r = price_quasisure(&g, &fixtures::gap_12_priors(&g), &k).unwrap();
        assert_eq!(r.result.price, ExtRat::Finite(Rat::from_int(7)));
    }

    #[test]
    fn duality_chain_examples() {
        let b = fixtures::binom();
        let ch = duality_chain(&b, &fixtures::binom_omega_priors(&b), &fixtures::binom_call().g).unwrap();
        assert!(ch.applicable && ch.all_equal);
        assert_eq!(ch.values[0].1, ExtRat::Finite(Rat::frac(1, 3)));
        assert_eq!(ch.converse_equal, Some(true));
        let g = fixtures::gap();
        let c = fixtures::gap_zero_indicator();
        let ch = duality_chain(&g, &fixtures::gap_omega_priors(&g), &c.g).unwrap();
        assert!(ch.all_equal);
        assert_eq!(ch.values[3].1, ExtRat::Finite(Rat::frac(1, 2)));
        // The {1,2} priors carry an arbitrage; restricting to their efficient part gives value 0.
        let ch = duality_chain(&g, &fixtures::gap_12_priors(&g), &c.g).unwrap();
        assert!(!ch.applicable);
        let p1 = crate::priors::priors_from_scenarios(&g, &[1].into()).unwrap();
        let ch = duality_chain(&g, &p1, &c.g).unwrap();
        assert!(ch.all_equal);
        assert!(ch.values.iter().all(|(_, v)| *v == ExtRat::Finite(Rat::zero())));
    }

    #[test]
    fn backward_examples() {
        let b = fixtures::binom();
        let r = backward_induction(&b, &b.all_paths(), &fixtures::binom_call().g).unwrap();
        assert_eq!(r.root, ExtRat::Finite(Rat::frac(1, 3)));
        let rr = Rat::from_int;
        let h = Rat::frac(1, 2);
        let mk = |id: &str, s1: Rat, s2: Rat| PathRecord { id: id.into(), prices: vec![vec![rr(1)], vec![s1], vec![s2]] };
        let m = Market::new(MarketData {
            horizon: 2,
            d: 1,
            paths: vec![mk("uu", rr(2), rr(4)), mk("ud", rr(2), rr(1)), mk("du", h.clone(), rr(1)), mk("dd", h.clone(), Rat::frac(1, 4))],
            options: vec![],
        })
        .unwrap();
        let g: Vec<Rat> = (0..4).map(|w| (m.price(w, 2)[0].clone() - rr(1)).max(Rat::zero())).collect();
        let r = backward_induction(&m, &m.all_paths(), &g).unwrap();
        assert_eq!(r.root, price_pathwise(&m, &m.all_paths(), &g).unwrap().price);
        let k = vec![rr(3); 4];
        let r = backward_induction(&m, &m.all_paths(), &k).unwrap();
        assert!(r.nodes.iter().flatten().all(|n| n.value == ExtRat::Finite(rr(3))));
    }

    #[test]
    fn extension_gap_trivial() {
        let g = fixtures::gap();
        let rep = extension_report(&g, &g.all_paths(), &fixtures::gap_zero_indicator().g, &[]).unwrap();
        assert!(rep.assumption_3_4_ok && rep.assumption_3_6_ok && rep.extension_holds);
    }

    #[test]
    fn extension_ex35() {
        let m = fixtures::ex35();
        let scope = fixtures::ex35_scope(&m);
        let limits = fixtures::ex35_limit_points(&m);
        let g = fixtures::ex35_claim(&m).g;
        let rep = extension_report(&m, &scope, &g, &limits).unwrap();
        assert!(!rep.assumption_3_6_ok);
        let seps = &rep.nodes[0].separators;
        assert_eq!(seps.len(), 2);
        assert!(seps[0].xi[0].is_zero() && seps[0].xi[1].is_zero() && seps[0].xi[2].is_positive());
        assert!(seps[1].xi[0].is_negative() && seps[1].xi[1].is_zero() && seps[1].xi[2].is_zero());
        assert_eq!(rep.price_on_omega_star, ExtRat::Finite(Rat::zero()));
        assert!(rep.price_on_omega > ExtRat::Finite(Rat::frac(1, 2)));
        let mut closure = scope.clone();
        closure.extend(limits.iter().map(|l| l.path));
        let (ok, cert) = capital_check(&m, &closure, &g, &Rat::frac(1, 2)).unwrap();
        assert!(!ok);
        assert!(crate::exactlp::check_certificate(&cert.lp, &cert.outcome).passed);
    }

    #[test]
    fn divergence_ex32() {
        assert_eq!(divergence_probe_ex32(4).unwrap(), Rat::from_int(8));
        assert_eq!(divergence_probe_ex32(100).unwrap(), Rat::from_int(40));
        assert!(matches!(divergence_probe_ex32(5), Err(SuperhedgeError::NotPerfectSquare(5))));
    }
}
