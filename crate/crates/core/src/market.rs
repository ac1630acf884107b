//! Finite path-space markets.
//!
//! A market is a finite list of price trajectories `S_0, …, S_T` in `Q^d`
//! plus `k` static options stored as payoff vectors. Level sets (nodes of
//! the scenario tree) are computed once by exact prefix equality.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::{dot, Rat};

/// Path indices, always kept sorted.
pub type PathSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("market has no paths")]
    NoPaths,
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("asset count must be positive")]
    ZeroAssets,
    #[error("paths disagree at time 0 ({0} vs {1})")]
    InconsistentS0(String, String),
    #[error("duplicate path id {0:?}")]
    DuplicatePathId(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("measure weights do not sum to one")]
    NotNormalized,
    #[error("measure has a negative weight")]
    NegativeWeight,
    #[error("unknown path id {0:?}")]
    UnknownPath(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub id: String,
    #[serde(rename = "S")]
    pub prices: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub name: String,
    pub payoff: Vec<Rat>,
}

/// The raw market as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketData {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub d: usize,
    pub paths: Vec<PathRecord>,
    #[serde(default)]
    pub options: Vec<OptionSpec>,
}

/// One level set at time `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub t: usize,
    pub paths: Vec<usize>,
    /// Indices into the node list at `t + 1` (empty at `T`).
    pub children: Vec<usize>,
    /// Index into the node list at `t - 1` (none at the root).
    pub parent: Option<usize>,
}

/// Level sets for `t = 0, …, T`; the last level groups identical trajectories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSetPartition {
    pub levels: Vec<Vec<Node>>,
    /// `node_of[t][path]` is the index of the node containing `path` at `t`.
    pub node_of: Vec<Vec<usize>>,
}

impl LevelSetPartition {
    pub fn node(&self, t: usize, i: usize) -> &Node {
        &self.levels[t][i]
    }

    pub fn nodes(&self, t: usize) -> &[Node] {
        &self.levels[t]
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Builds the exact-equality level-set partition, rejecting invalid markets.
pub fn validate(data: &MarketData) -> Result<LevelSetPartition, MarketError> {
    if data.paths.is_empty() {
        return Err(MarketError::NoPaths);
    }
    if data.horizon == 0 {
        return Err(MarketError::ZeroHorizon);
    }
    if data.d == 0 {
        return Err(MarketError::ZeroAssets);
    }
    let mut seen = BTreeSet::new();
    for p in &data.paths {
        if !seen.insert(p.id.as_str()) {
            return Err(MarketError::DuplicatePathId(p.id.clone()));
        }
        if p.prices.len() != data.horizon + 1 {
            return Err(MarketError::DimensionMismatch(format!(
                "path {:?} has {} dates, expected {}",
                p.id,
                p.prices.len(),
                data.horizon + 1
            )));
        }
        if let Some(s) = p.prices.iter().find(|s| s.len() != data.d) {
            return Err(MarketError::DimensionMismatch(format!(
                "path {:?} has a price vector of length {}, expected {}",
                p.id,
                s.len(),
                data.d
            )));
        }
    }
    let first = &data.paths[0];
    if let Some(p) = data.paths.iter().find(|p| p.prices[0] != first.prices[0]) {
        return Err(MarketError::InconsistentS0(first.id.clone(), p.id.clone()));
    }
    for o in &data.options {
        if o.payoff.len() != data.paths.len() {
            return Err(MarketError::DimensionMismatch(format!(
                "option {:?} has {} payoffs for {} paths",
                o.name,
                o.payoff.len(),
                data.paths.len()
            )));
        }
    }

    let n = data.paths.len();
    let mut levels: Vec<Vec<Node>> = Vec::with_capacity(data.horizon + 1);
    let mut node_of = vec![vec![0usize; n]; data.horizon + 1];
    levels.push(vec![Node { t: 0, paths: (0..n).collect(), children: Vec::new(), parent: None }]);
    for t in 1..=data.horizon {
        let mut next: Vec<Node> = Vec::new();
        for (pi, parent) in levels[t - 1].iter_mut().enumerate() {
            // Group by S_t within the parent; first-occurrence order keeps ids deterministic.
            let mut groups: Vec<(&Vec<Rat>, Vec<usize>)> = Vec::new();
            for &w in &parent.paths {
                let s = &data.paths[w].prices[t];
                match groups.iter_mut().find(|(k, _)| *k == s) {
                    Some((_, v)) => v.push(w),
                    None => groups.push((s, vec![w])),
                }
            }
            for (_, paths) in groups {
                let idx = next.len();
                for &w in &paths {
                    node_of[t][w] = idx;
                }
                parent.children.push(idx);
                next.push(Node { t, paths, children: Vec::new(), parent: Some(pi) });
            }
        }
        levels.push(next);
    }
    Ok(LevelSetPartition { levels, node_of })
}

/// A validated market with its level-set partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    data: MarketData,
    tree: LevelSetPartition,
    index: BTreeMap<String, usize>,
}

impl Market {
    pub fn new(data: MarketData) -> Result<Self, MarketError> {
        let tree = validate(&data)?;
        let index = data.paths.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();
        Ok(Market { data, tree, index })
    }

    pub fn data(&self) -> &MarketData {
        &self.data
    }

    pub fn tree(&self) -> &LevelSetPartition {
        &self.tree
    }

    pub fn horizon(&self) -> usize {
        self.data.horizon
    }

    pub fn assets(&self) -> usize {
        self.data.d
    }

    pub fn num_paths(&self) -> usize {
        self.data.paths.len()
    }

    pub fn num_options(&self) -> usize {
        self.data.options.len()
    }

    pub fn all_paths(&self) -> PathSet {
        (0..self.num_paths()).collect()
    }

    pub fn path_id(&self, w: usize) -> &str {
        &self.data.paths[w].id
    }

    pub fn path_index(&self, id: &str) -> Result<usize, MarketError> {
        self.index.get(id).copied().ok_or_else(|| MarketError::UnknownPath(id.to_string()))
    }

    pub fn ids(&self, set: &PathSet) -> Vec<String> {
        set.iter().map(|&w| self.path_id(w).to_string()).collect()
    }

    pub fn price(&self, w: usize, t: usize) -> &[Rat] {
        &self.data.paths[w].prices[t]
    }

    /// `S_{t+1}(w) - S_t(w)`.
    pub fn increment(&self, w: usize, t: usize) -> Vec<Rat> {
        let p = &self.data.paths[w].prices;
        p[t + 1].iter().zip(&p[t]).map(|(a, b)| a - b).collect()
    }

    pub fn option_payoff(&self, lambda: usize, w: usize) -> &Rat {
        &self.data.options[lambda].payoff[w]
    }

    /// Same market with the static options removed.
    pub fn without_options(&self) -> Market {
        let mut data = self.data.clone();
        data.options.clear();
        Market::new(data).expect("dropping options keeps a valid market")
    }

    /// Nodes at time `t` that meet `scope`, in index order.
    pub fn nodes_meeting(&self, t: usize, scope: &PathSet) -> Vec<usize> {
        let mut v: Vec<usize> = scope.iter().map(|&w| self.tree.node_of[t][w]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `(t, representative path id)` naming a node in reports.
    pub fn node_label(&self, t: usize, node: usize) -> NodeRef {
        NodeRef { t, path: self.path_id(self.tree.levels[t][node].paths[0]).to_string() }
    }

    pub fn find_node(&self, r: &NodeRef) -> Result<usize, MarketError> {
        if r.t > self.horizon() {
            return Err(MarketError::DimensionMismatch(format!("time {} beyond horizon", r.t)));
        }
        let w = self.path_index(&r.path)?;
        Ok(self.tree.node_of[r.t][w])
    }

    pub fn set_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<PathSet, MarketError> {
        ids.iter().map(|s| self.path_index(s.as_ref())).collect()
    }
}

/// A node named by its time and any path through it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub t: usize,
    pub path: String,
}

/// Semistatic strategy: `h` static, `H[t][node]` held over `(t, t+1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub h: Vec<Rat>,
    #[serde(rename = "H")]
    pub dynamic: Vec<Vec<Vec<Rat>>>,
}

impl Strategy {
    pub fn zero(market: &Market) -> Self {
        let dynamic = (0..market.horizon())
            .map(|t| vec![vec![Rat::zero(); market.assets()]; market.tree().nodes(t).len()])
            .collect();
        Strategy { h: vec![Rat::zero(); market.num_options()], dynamic }
    }

    pub fn scaled_add(&self, alpha: &Rat, other: &Strategy) -> Strategy {
        let h = self.h.iter().zip(&other.h).map(|(a, b)| alpha * a + b).collect();
        let dynamic = self
            .dynamic
            .iter()
            .zip(&other.dynamic)
            .map(|(lv, lw)| {
                lv.iter()
                    .zip(lw)
                    .map(|(v, w)| v.iter().zip(w).map(|(a, b)| alpha * a + b).collect())
                    .collect()
            })
            .collect();
        Strategy { h, dynamic }
    }
}

fn check_dims(market: &Market, s: &Strategy) -> Result<(), MarketError> {
    if s.h.len() != market.num_options() {
        return Err(MarketError::DimensionMismatch(format!(
            "static position has length {}, market has {} options",
            s.h.len(),
            market.num_options()
        )));
    }
    if s.dynamic.len() != market.horizon() {
        return Err(MarketError::DimensionMismatch("dynamic position has the wrong number of dates".into()));
    }
    for (t, lv) in s.dynamic.iter().enumerate() {
        if lv.len() != market.tree().nodes(t).len() || lv.iter().any(|v| v.len() != market.assets()) {
            return Err(MarketError::DimensionMismatch(format!("dynamic position at time {t} has the wrong shape")));
        }
    }
    Ok(())
}

/// Payoff of a single path: `h·Φ(w) + Σ_t H_t(node)·ΔS_{t+1}(w)`.
pub fn path_payoff(market: &Market, s: &Strategy, w: usize) -> Rat {
    let mut v = Rat::zero();
    for (l, h) in s.h.iter().enumerate() {
        if !h.is_zero() {
            v += h * market.option_payoff(l, w);
        }
    }
    for t in 0..market.horizon() {
        let node = market.tree().node_of[t][w];
        v += dot(&s.dynamic[t][node], &market.increment(w, t));
    }
    v
}

/// Payoff vector of a strategy, exact.
pub fn payoff(market: &Market, s: &Strategy) -> Result<Vec<Rat>, MarketError> {
    check_dims(market, s)?;
    Ok((0..market.num_paths()).map(|w| path_payoff(market, s, w)).collect())
}

/// Nonnegative weights per path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    pub weights: Vec<Rat>,
}

impl Measure {
    pub fn new(weights: Vec<Rat>) -> Result<Self, MarketError> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(MarketError::NegativeWeight);
        }
        Ok(Measure { weights })
    }

    pub fn point(n: usize, w: usize) -> Self {
        let mut weights = vec![Rat::zero(); n];
        weights[w] = Rat::one();
        Measure { weights }
    }

    pub fn support(&self) -> PathSet {
        self.weights.iter().enumerate().filter(|(_, w)| w.is_positive()).map(|(i, _)| i).collect()
    }

    pub fn total(&self) -> Rat {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.total().is_one()
    }

    /// Rescales to total mass one; `None` for the zero measure.
    pub fn normalized(&self) -> Option<Measure> {
        let t = self.total();
        let inv = t.recip().ok()?;
        Some(Measure { weights: self.weights.iter().map(|w| w * &inv).collect() })
    }

    pub fn expectation(&self, f: &[Rat]) -> Rat {
        dot(&self.weights, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutsideScope { path: String },
    Martingale { node: NodeRef, asset: usize, residual: Rat },
    Calibration { option: String, residual: Rat },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    pub holds: bool,
    pub violations: Vec<Violation>,
}

/// Checks support, per-node martingale rows and option calibration exactly.
pub fn is_martingale_measure(market: &Market, q: &Measure, scope: &PathSet) -> Result<MartingaleCheck, MarketError> {
    if q.weights.len() != market.num_paths() {
        return Err(MarketError::DimensionMismatch("measure length differs from path count".into()));
    }
    if q.weights.iter().any(|w| w.is_negative()) {
        return Err(MarketError::NegativeWeight);
    }
    if !q.is_normalized() {
        return Err(MarketError::NotNormalized);
    }
    let mut violations = Vec::new();
    for w in q.support() {
        if !scope.contains(&w) {
            violations.push(Violation::OutsideScope { path: market.path_id(w).to_string() });
        }
    }
    for t in 0..market.horizon() {
        for (ni, node) in market.tree().nodes(t).iter().enumerate() {
            let mut acc = vec![Rat::zero(); market.assets()];
            for &w in &node.paths {
                if q.weights[w].is_zero() {
                    continue;
                }
                for (a, inc) in acc.iter_mut().zip(market.increment(w, t)) {
                    *a += &q.weights[w] * inc;
                }
            }
            for (asset, r) in acc.into_iter().enumerate() {
                if !r.is_zero() {
                    violations.push(Violation::Martingale { node: market.node_label(t, ni), asset, residual: r });
                }
            }
        }
    }
    for (l, o) in market.data().options.iter().enumerate() {
        let r: Rat = (0..market.num_paths())
            .filter(|&w| !q.weights[w].is_zero())
            .map(|w| &q.weights[w] * market.option_payoff(l, w))
            .sum();
        if !r.is_zero() {
            violations.push(Violation::Calibration { option: o.name.clone(), residual: r });
        }
    }
    Ok(MartingaleCheck { holds: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn binomial_single_root() {
        let m = fixtures::binom();
        assert_eq!(m.tree().nodes(0).len(), 1);
        assert_eq!(m.tree().nodes(0)[0].paths, vec![0, 1]);
    }

    #[test]
    fn two_period_partition() {
        let r = Rat::from_int;
        let h = Rat::frac(1, 2);
        let mk = |id: &str, s1: Rat, s2: Rat| PathRecord { id: id.into(), prices: vec![vec![r(1)], vec![s1], vec![s2]] };
        let data = MarketData {
            horizon: 2,
            d: 1,
            paths: vec![
                mk("uu", r(2), r(4)),
                mk("ud", r(2), r(1)),
                mk("du", h.clone(), r(1)),
                mk("dd", h.clone(), Rat::frac(1, 4)),
            ],
            options: vec![],
        };
        let m = Market::new(data).unwrap();
        let lv1: Vec<_> = m.tree().nodes(1).iter().map(|n| n.paths.clone()).collect();
        assert_eq!(lv1, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn inconsistent_s0_rejected() {
        let mut data = fixtures::binom().data().clone();
        data.paths[1].prices[0] = vec![Rat::from_int(3)];
        assert!(matches!(Market::new(data), Err(MarketError::InconsistentS0(..))));
        let mut data = fixtures::binom().data().clone();
        data.paths[1].id = data.paths[0].id.clone();
        assert!(matches!(Market::new(data), Err(MarketError::DuplicatePathId(_))));
    }

    #[test]
    fn payoff_examples() {
        let m = fixtures::binom();
        let mut s = Strategy::zero(&m);
        assert_eq!(payoff(&m, &s).unwrap(), vec![Rat::zero(), Rat::zero()]);
        s.dynamic[0][0] = vec![Rat::frac(2, 3)];
        assert_eq!(payoff(&m, &s).unwrap(), vec![Rat::frac(2, 3), Rat::frac(-1, 3)]);
        let g = fixtures::gap();
        let mut s = Strategy::zero(&g);
        s.dynamic[0][0] = vec![Rat::frac(-1, 2)];
        assert_eq!(payoff(&g, &s).unwrap(), vec![Rat::frac(1, 2), Rat::zero(), Rat::frac(-1, 2)]);
        s.h = vec![Rat::one()];
        assert!(matches!(payoff(&g, &s), Err(MarketError::DimensionMismatch(_))));
    }

    #[test]
    fn martingale_examples() {
        let m = fixtures::binom();
        let all = m.all_paths();
        let q = Measure::new(vec![Rat::frac(1, 3), Rat::frac(2, 3)]).unwrap();
        assert!(is_martingale_measure(&m, &q, &all).unwrap().holds);
        let q = Measure::new(vec![Rat::frac(1, 2), Rat::frac(1, 2)]).unwrap();
        let c = is_martingale_measure(&m, &q, &all).unwrap();
        assert!(!c.holds);
        assert!(matches!(&c.violations[0], Violation::Martingale { residual, .. } if *residual == Rat::frac(1, 4)));
        let c = is_martingale_measure(&m, &Measure::point(2, 0), &all).unwrap();
        assert!(!c.holds);
        let q = Measure::new(vec![Rat::frac(1, 2), Rat::frac(1, 3)]).unwrap();
        assert_eq!(is_martingale_measure(&m, &q, &all), Err(MarketError::NotNormalized));
    }
}
