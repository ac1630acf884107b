//! Seeded random instances for property suites, benches and the CLI.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::market::{Market, MarketData, OptionSpec, PathRecord, PathSet};
use crate::oneperiod_poly::{AffinePiece, Cell, PolyMarket};
use crate::priors::{NodePriorsRecord, PriorSet, PriorsFile};
use crate::rat::{ExtRat, Rat};

#[derive(Debug, Clone, Copy)]
pub struct MarketParams {
    pub max_horizon: usize,
    pub max_assets: usize,
    pub max_paths: usize,
    pub max_branch: usize,
    pub max_options: usize,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams { max_horizon: 3, max_assets: 2, max_paths: 25, max_branch: 3, max_options: 2 }
    }
}

fn small<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Rat {
    let den = if rng.gen_bool(0.25) { 2 } else { 1 };
    Rat::frac(rng.gen_range(lo * den..=hi * den), den)
}

/// A random scenario tree. Most nodes are centred: their last increment
/// cancels the others, so the uniform one-step measure is a martingale.
/// Some add one unconstrained child, which often leaves the efficient set.
/// Options are priced under the uniform product measure, sometimes off by
/// a small amount, so both calibrated and miscalibrated instances occur.
pub fn market<R: Rng>(rng: &mut R, p: &MarketParams) -> Market {
    let tt = rng.gen_range(1..=p.max_horizon);
    let d = rng.gen_range(1..=p.max_assets);
    let root: Vec<Rat> = (0..d).map(|_| Rat::from_int(rng.gen_range(2..=5))).collect();
    let mut paths: Vec<(Vec<Vec<Rat>>, Rat)> = vec![(vec![root], Rat::one())];
    for _ in 0..tt {
        let mut next = Vec::new();
        let n = paths.len();
        for (i, (hist, q)) in paths.iter().enumerate() {
            let left = p.max_paths.saturating_sub(next.len() + (n - i - 1));
            let b = rng.gen_range(1..=p.max_branch.min(left.max(1)));
            // Centred nodes, centred nodes with one extra free child, or fully random ones.
            let mode = rng.gen_range(0..20);
            let centred_len = if mode < 12 { b } else if mode < 17 { b.max(2) - 1 } else { 0 };
            let mut incs: Vec<Vec<Rat>> = (0..b).map(|_| (0..d).map(|_| small(rng, -2, 2)).collect()).collect();
            if centred_len > 0 {
                let mut last = vec![Rat::zero(); d];
                for inc in &incs[..centred_len - 1] {
                    for (l, x) in last.iter_mut().zip(inc) {
                        *l -= x;
                    }
                }
                incs[centred_len - 1] = last;
            }
            let share = q * &Rat::frac(1, b as i64);
            let cur = hist.last().unwrap().clone();
            for inc in incs {
                let mut h = hist.clone();
                h.push(cur.iter().zip(&inc).map(|(a, b)| a + b).collect());
                next.push((h, share.clone()));
            }
        }
        paths = next;
    }
    let k = rng.gen_range(0..=p.max_options);
    let options = (0..k)
        .map(|l| {
            let raw: Vec<Rat> = paths.iter().map(|_| small(rng, -2, 2)).collect();
            let mut price: Rat = raw.iter().zip(&paths).map(|(x, (_, q))| x * q).sum();
            if rng.gen_bool(0.3) {
                price += small(rng, -1, 1);
            }
            OptionSpec { name: format!("phi{l}"), payoff: raw.iter().map(|x| x - &price).collect() }
        })
        .collect();
    let data = MarketData {
        horizon: tt,
        d,
        paths: paths.into_iter().enumerate().map(|(i, (prices, _))| PathRecord { id: format!("w{i}"), prices }).collect(),
        options,
    };
    Market::new(data).expect("generated market is valid")
}

/// A random claim with small rational payoffs.
pub fn claim<R: Rng>(rng: &mut R, m: &Market) -> Vec<Rat> {
    (0..m.num_paths()).map(|_| small(rng, -3, 3)).collect()
}

/// One to three random generators at every nonterminal node.
pub fn priors<R: Rng>(rng: &mut R, m: &Market) -> PriorSet {
    let mut file: PriorsFile = Vec::new();
    for t in 0..m.horizon() {
        let mut level = Vec::new();
        for (ni, node) in m.tree().nodes(t).iter().enumerate() {
            let kids = &node.children;
            let ng = rng.gen_range(1..=3);
            let gens = (0..ng)
                .map(|_| {
                    let size = rng.gen_range(1..=kids.len());
                    let chosen: Vec<usize> = kids.choose_multiple(rng, size).copied().collect();
                    let wts: Vec<i64> = chosen.iter().map(|_| rng.gen_range(1..=3)).collect();
                    let total: i64 = wts.iter().sum();
                    chosen
                        .iter()
                        .zip(&wts)
                        .map(|(&c, &w)| (m.node_label(t + 1, c).path, Rat::frac(w, total)))
                        .collect::<BTreeMap<String, Rat>>()
                })
                .collect();
            level.push(NodePriorsRecord { node: m.node_label(t, ni), generators: gens });
        }
        file.push(level);
    }
    PriorSet::from_records(m, &file).expect("generated priors are valid")
}

/// A random nonempty subset of the paths.
pub fn subset<R: Rng>(rng: &mut R, m: &Market) -> PathSet {
    loop {
        let s: PathSet = (0..m.num_paths()).filter(|_| rng.gen_bool(0.6)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// One to three random subsets, as a class of sets.
pub fn class_sets<R: Rng>(rng: &mut R, m: &Market) -> Vec<PathSet> {
    (0..rng.gen_range(1..=3)).map(|_| subset(rng, m)).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct PolyParams {
    pub max_dim: usize,
    pub max_cells: usize,
    pub max_options: usize,
    pub closed: bool,
    pub compact: bool,
}

impl Default for PolyParams {
    fn default() -> Self {
        PolyParams { max_dim: 3, max_cells: 4, max_options: 1, closed: true, compact: true }
    }
}

pub fn poly_market<R: Rng>(rng: &mut R, p: &PolyParams) -> PolyMarket {
    let d = rng.gen_range(1..=p.max_dim);
    let s0: Vec<Rat> = (0..d).map(|_| Rat::from_int(rng.gen_range(1..=3))).collect();
    let nc = rng.gen_range(1..=p.max_cells);
    let cells: Vec<Cell> = (0..nc)
        .map(|_| {
            let mut cell = Cell { lo: vec![], hi: vec![], lo_open: vec![], hi_open: vec![] };
            for _ in 0..d {
                let lo = small(rng, 0, 5);
                let w = rng.gen_range(0..=2);
                let hi = if !p.compact && rng.gen_bool(0.25) { ExtRat::PosInf } else { ExtRat::Finite(&lo + &Rat::from_int(w)) };
                let deg = w == 0 && matches!(hi, ExtRat::Finite(_));
                let open = |rng: &mut R| !p.closed && !deg && rng.gen_bool(0.3);
                cell.lo_open.push(open(rng));
                cell.hi_open.push(open(rng));
                cell.lo.push(lo);
                cell.hi.push(hi);
            }
            cell
        })
        .collect();
    let k = rng.gen_range(0..=p.max_options);
    let options = (0..k)
        .map(|_| (0..nc).map(|_| AffinePiece { a: (0..d).map(|_| small(rng, -1, 1)).collect(), b: small(rng, -2, 2) }).collect())
        .collect();
    PolyMarket { s0, cells, options }
}
