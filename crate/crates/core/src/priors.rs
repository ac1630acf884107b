//! Product-structured prior families on finite trees.
//!
//! A prior set lists, for each reached node, finitely many one-step
//! generator measures over the node's children. The modeled family is every
//! product over nodes of convex combinations of the node's generators.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbitrage::{detect_class_s, detect_quasi_sure, detect_sa, ArbitrageError, ArbitrageVerdict};
use crate::efficient_set::{omega_star_oracle, EfficientSetError};
use crate::exactlp::{solve, LpError, Relation, Sense};
use crate::market::{Market, MarketError, Measure, NodeRef, PathSet};
use crate::model::MeasureLp;
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PriorError {
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("scope is empty")]
    EmptyScope,
    #[error("more than {0} distinct generator products")]
    TooManyProducts(usize),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    EfficientSet(#[from] EfficientSetError),
    #[error(transparent)]
    Arbitrage(Box<ArbitrageError>),
}

impl From<ArbitrageError> for PriorError {
    fn from(e: ArbitrageError) -> Self {
        PriorError::Arbitrage(Box::new(e))
    }
}

fn invalid(msg: impl Into<String>) -> PriorError {
    PriorError::InvalidPriors(msg.into())
}

/// Generator list for one node as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePriorsRecord {
    pub node: NodeRef,
    /// Weight maps keyed by any path id through the successor.
    pub generators: Vec<BTreeMap<String, Rat>>,
}

/// On-disk priors: an array over `t` of arrays over nodes.
pub type PriorsFile = Vec<Vec<NodePriorsRecord>>;

/// One-step measure over child node indices at `t + 1`.
pub type Generator = BTreeMap<usize, Rat>;

/// Validated generator lists, `nodes[t][node]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorSet {
    nodes: Vec<BTreeMap<usize, Vec<Generator>>>,
}

impl PriorSet {
    pub fn from_records(market: &Market, file: &PriorsFile) -> Result<Self, PriorError> {
        let mut nodes: Vec<BTreeMap<usize, Vec<Generator>>> = vec![BTreeMap::new(); market.horizon()];
        for rec in file.iter().flatten() {
            let t = rec.node.t;
            if t >= market.horizon() {
                return Err(invalid(format!("node at time {t} has no successors")));
            }
            let ni = market.find_node(&rec.node).map_err(|e| invalid(e.to_string()))?;
            if nodes[t].contains_key(&ni) {
                return Err(invalid(format!("node ({t}, {}) listed twice", rec.node.path)));
            }
            if rec.generators.is_empty() {
                return Err(invalid(format!("node ({t}, {}) has no generators", rec.node.path)));
            }
            let mut gens = Vec::new();
            for g in &rec.generators {
                let mut gen = Generator::new();
                let mut total = Rat::zero();
                for (id, wt) in g {
                    let w = market.path_index(id).map_err(|e| invalid(e.to_string()))?;
                    if market.tree().node_of[t][w] != ni {
                        return Err(invalid(format!("path {id} is not a successor of node ({t}, {})", rec.node.path)));
                    }
                    if wt.is_negative() {
                        return Err(invalid(format!("negative weight on {id}")));
                    }
                    total += wt;
                    *gen.entry(market.tree().node_of[t + 1][w]).or_insert_with(Rat::zero) += wt;
                }
                if !total.is_one() {
                    return Err(invalid(format!("generator at node ({t}, {}) sums to {total}", rec.node.path)));
                }
                gen.retain(|_, v| !v.is_zero());
                gens.push(gen);
            }
            nodes[t].insert(ni, gens);
        }
        let ps = PriorSet { nodes };
        // Every node the family can reach needs generators.
        let mut frontier = vec![(0usize, 0usize)];
        while let Some((t, ni)) = frontier.pop() {
            let Some(gens) = ps.nodes[t].get(&ni) else {
                return Err(invalid(format!("reached node ({t}, {}) has no generators", market.node_label(t, ni).path)));
            };
            if t + 1 < market.horizon() {
                let kids: BTreeSet<usize> = gens.iter().flat_map(|g| g.keys().copied()).collect();
                frontier.extend(kids.into_iter().map(|c| (t + 1, c)));
            }
        }
        Ok(ps)
    }

    pub fn to_records(&self, market: &Market) -> PriorsFile {
        self.nodes
            .iter()
            .enumerate()
            .map(|(t, lv)| {
                lv.iter()
                    .map(|(&ni, gens)| NodePriorsRecord {
                        node: market.node_label(t, ni),
                        generators: gens
                            .iter()
                            .map(|g| g.iter().map(|(&c, w)| (market.node_label(t + 1, c).path, w.clone())).collect())
                            .collect(),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn generators(&self, t: usize, node: usize) -> Option<&[Generator]> {
        self.nodes.get(t)?.get(&node).map(|v| v.as_slice())
    }

    /// Uniform mixture of the node's generators.
    pub fn mixture(&self, t: usize, node: usize) -> Option<Generator> {
        let gens = self.generators(t, node)?;
        let n = Rat::from_int(gens.len() as i64);
        let mut mix = Generator::new();
        for g in gens {
            for (&c, w) in g {
                *mix.entry(c).or_insert_with(Rat::zero) += w;
            }
        }
        for v in mix.values_mut() {
            *v = v.checked_div(&n).expect("nonempty generator list");
        }
        Some(mix)
    }
}

/// Product measure from a per-node choice of one-step measures; mass
/// reaching a terminal group of identical paths is split equally.
fn product_measure<F>(market: &Market, choose: F) -> Measure
where
    F: Fn(usize, usize) -> Generator,
{
    let mut weights = vec![Rat::zero(); market.num_paths()];
    let tt = market.horizon();
    let mut stack = vec![(0usize, 0usize, Rat::one())];
    while let Some((t, ni, mass)) = stack.pop() {
        if t == tt {
            let paths = &market.tree().node(t, ni).paths;
            let share = mass.checked_div(&Rat::from_int(paths.len() as i64)).expect("nonempty node");
            for &w in paths {
                weights[w] = share.clone();
            }
            continue;
        }
        for (c, p) in choose(t, ni) {
            stack.push((t + 1, c, &mass * &p));
        }
    }
    Measure { weights }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiSureSupport {
    /// `(node, supported children)` per time.
    pub node_support: Vec<BTreeMap<usize, BTreeSet<usize>>>,
    pub paths: PathSet,
}

/// Node supports and the path set `Ω^𝔓` of paths with all transitions supported.
pub fn quasi_sure_support(priors: &PriorSet, market: &Market) -> QuasiSureSupport {
    let mut node_support = vec![BTreeMap::new(); market.horizon()];
    let mut paths = PathSet::new();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((t, ni)) = stack.pop() {
        if t == market.horizon() {
            paths.extend(market.tree().node(t, ni).paths.iter().copied());
            continue;
        }
        let gens = priors.generators(t, ni).expect("validated priors cover reached nodes");
        let kids: BTreeSet<usize> = gens.iter().flat_map(|g| g.keys().copied()).collect();
        stack.extend(kids.iter().map(|&c| (t + 1, c)));
        node_support[t].insert(ni, kids);
    }
    QuasiSureSupport { node_support, paths }
}

/// Point masses on the successors present in `scope`, at every node it meets.
pub fn priors_from_scenarios(market: &Market, scope: &PathSet) -> Result<PriorSet, PriorError> {
    if scope.is_empty() {
        return Err(PriorError::EmptyScope);
    }
    let mut nodes = vec![BTreeMap::new(); market.horizon()];
    for (t, lv) in nodes.iter_mut().enumerate() {
        for ni in market.nodes_meeting(t, scope) {
            let kids: BTreeSet<usize> = market.tree().node(t, ni).paths.iter().filter(|w| scope.contains(w)).map(|&w| market.tree().node_of[t + 1][w]).collect();
            let gens = kids.into_iter().map(|c| Generator::from([(c, Rat::one())])).collect();
            lv.insert(ni, gens);
        }
    }
    Ok(PriorSet { nodes })
}

/// Product over nodes of the uniform generator mixtures; its support is `Ω^𝔓`.
pub fn full_support_measure(priors: &PriorSet, market: &Market) -> Measure {
    product_measure(market, |t, ni| priors.mixture(t, ni).expect("validated priors cover reached nodes"))
}

/// A set is polar iff it misses the support of the full-support prior.
pub fn is_polar(priors: &PriorSet, market: &Market, set: &PathSet) -> bool {
    let p = full_support_measure(priors, market);
    set.iter().all(|&w| p.weights[w].is_zero())
}

/// A product of one chosen generator per reached node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorProduct {
    /// `(node, generator index)` for every reached node.
    pub choice: Vec<(NodeRef, usize)>,
    pub measure: Measure,
}

/// Default cap for [`generator_products`].
pub const PRODUCT_CAP: usize = 20_000;

/// Enumerates generator products, keeping one generator per distinct
/// support at each node (products with equal supports share every
/// null-set property).
pub fn generator_products(priors: &PriorSet, market: &Market, cap: usize) -> Result<Vec<GeneratorProduct>, PriorError> {
    let mut out = Vec::new();
    let mut choice: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    enumerate(priors, market, vec![(0, 0)], &mut choice, &mut out, cap)?;
    Ok(out)
}

fn enumerate(
    priors: &PriorSet,
    market: &Market,
    mut frontier: Vec<(usize, usize)>,
    choice: &mut BTreeMap<(usize, usize), usize>,
    out: &mut Vec<GeneratorProduct>,
    cap: usize,
) -> Result<(), PriorError> {
    let Some((t, ni)) = frontier.pop() else {
        let chosen = choice.clone();
        let measure = product_measure(market, |t, ni| priors.generators(t, ni).unwrap()[chosen[&(t, ni)]].clone());
        let choice = chosen.iter().map(|(&(t, ni), &g)| (market.node_label(t, ni), g)).collect();
        if out.len() >= cap {
            return Err(PriorError::TooManyProducts(cap));
        }
        out.push(GeneratorProduct { choice, measure });
        return Ok(());
    };
    let gens = priors.generators(t, ni).expect("validated priors cover reached nodes");
    let mut seen: Vec<BTreeSet<usize>> = Vec::new();
    for (gi, g) in gens.iter().enumerate() {
        let supp: BTreeSet<usize> = g.keys().copied().collect();
        if seen.contains(&supp) {
            continue;
        }
        seen.push(supp.clone());
        choice.insert((t, ni), gi);
        let mut next = frontier.clone();
        if t + 1 < market.horizon() {
            // Reverse so that lower child indices are expanded first.
            next.extend(supp.iter().rev().map(|&c| (t + 1, c)));
        }
        enumerate(priors, market, next, choice, out, cap)?;
        choice.remove(&(t, ni));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatementWitness {
    Measure { measure: Measure },
    Set { paths: Vec<String> },
    Verdict { verdict: Box<ArbitrageVerdict> },
    Products { dominated: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub label: String,
    pub holds: bool,
    pub witness: Option<StatementWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FtapReport {
    pub theorem: String,
    /// The scenario set the statements are evaluated on.
    pub omega: Vec<String>,
    pub statements: Vec<Statement>,
    pub all_equivalent: bool,
}

impl FtapReport {
    fn new(theorem: &str, market: &Market, omega: &PathSet, statements: Vec<Statement>) -> Self {
        let all_equivalent = statements.windows(2).all(|w| w[0].holds == w[1].holds);
        FtapReport { theorem: theorem.into(), omega: market.ids(omega), statements, all_equivalent }
    }
}

fn stmt(label: &str, holds: bool, witness: Option<StatementWitness>) -> Statement {
    Statement { label: label.into(), holds, witness }
}

/// Calibrated martingale measure on `support` with `μ >= 1` on `charge`, if any.
fn charging_measure(market: &Market, support: &PathSet, charge: &PathSet) -> Result<Option<Measure>, PriorError> {
    let mut mlp = MeasureLp::new(market, support, Sense::Minimize, true);
    if charge.is_empty() {
        if support.is_empty() {
            return Ok(None);
        }
        mlp.add_normalization();
    }
    for w in charge {
        let Some(&v) = mlp.mu.get(w) else {
            return Ok(None);
        };
        mlp.lp.add_row(&[(v, Rat::one())], Relation::Ge, Rat::one());
    }
    let out = solve(&mlp.lp)?;
    if !out.is_optimal() {
        return Ok(None);
    }
    Ok(mlp.measure(market, out.primal()).normalized())
}

/// Calibrated martingale measure on `support` charging `set` somewhere.
fn measure_charging_some(market: &Market, support: &PathSet, set: &PathSet) -> Result<Option<Measure>, PriorError> {
    let mut mlp = MeasureLp::new(market, support, Sense::Minimize, true);
    let terms: Vec<(usize, Rat)> = set.iter().filter_map(|w| mlp.mu.get(w).map(|&v| (v, Rat::one()))).collect();
    if terms.is_empty() {
        return Ok(None);
    }
    mlp.lp.add_row(&terms, Relation::Ge, Rat::one());
    let out = solve(&mlp.lp)?;
    if !out.is_optimal() {
        return Ok(None);
    }
    Ok(mlp.measure(market, out.primal()).normalized())
}

/// The three statements of the quasi-sure FTAP on `Ω = Ω^𝔓`.
pub fn ftap_quasi_sure(market: &Market, priors: &PriorSet) -> Result<FtapReport, PriorError> {
    let omega = quasi_sure_support(priors, market).paths;
    let star = omega_star_oracle(market, &omega)?;
    let inefficient: PathSet = omega.difference(&star.retained).copied().collect();

    let s1_polar = is_polar(priors, market, &inefficient);
    let n1pa_star = star.retained.is_empty() || omega_star_oracle(market, &star.retained)?.retained == star.retained;
    let s1 = stmt(
        "(1) N1pA on the efficient set and Omega equals it quasi-surely",
        s1_polar && n1pa_star,
        Some(StatementWitness::Set { paths: market.ids(&inefficient) }),
    );

    let products = generator_products(priors, market, PRODUCT_CAP)?;
    let mut dominated = 0;
    for p in &products {
        if charging_measure(market, &omega, &p.measure.support())?.is_some() {
            dominated += 1;
        }
    }
    let s2_holds = dominated == products.len();
    // Product supports cover Ω^𝔓, so one measure charging all of it dominates every prior.
    let s2_witness = if s2_holds {
        charging_measure(market, &omega, &omega)?.map(|measure| StatementWitness::Measure { measure })
    } else {
        Some(StatementWitness::Products { dominated, total: products.len() })
    };
    let s2 = stmt("(2) every prior is dominated by a calibrated martingale measure", s2_holds, s2_witness);

    let qs = detect_quasi_sure(market, priors)?;
    let s3 = stmt("(3) NA(P) holds", !qs.present, Some(StatementWitness::Verdict { verdict: Box::new(qs) }));
    Ok(FtapReport::new("quasi-sure FTAP", market, &omega, vec![s1, s2, s3]))
}

/// The five statements of the robust DMW theorem on `Ω = Ω^𝔓`.
pub fn robust_dmw(market: &Market, priors: &PriorSet) -> Result<FtapReport, PriorError> {
    let omega = quasi_sure_support(priors, market).paths;
    let p_full = full_support_measure(priors, market);
    let support = p_full.support();
    let star = omega_star_oracle(market, &omega)?;

    let q1 = charging_measure(market, &support, &PathSet::new())?;
    let s1 = stmt("(1) a calibrated martingale measure dominated by a prior exists", q1.is_some(), q1.map(|measure| StatementWitness::Measure { measure }));

    let products = generator_products(priors, market, PRODUCT_CAP)?;
    let charging = products.iter().find(|p| p.measure.support().iter().any(|w| star.retained.contains(w)));
    let s2 = stmt(
        "(2) some prior charges the efficient set",
        charging.is_some(),
        charging.map(|p| StatementWitness::Measure { measure: p.measure.clone() }),
    );

    let q3 = charging_measure(market, &omega, &PathSet::new())?;
    let s3 = stmt("(3) a calibrated martingale measure on Omega exists", q3.is_some(), q3.map(|measure| StatementWitness::Measure { measure }));

    let s4 = stmt(
        "(4) the efficient set is nonempty",
        !star.retained.is_empty(),
        Some(StatementWitness::Set { paths: market.ids(&star.retained) }),
    );

    let sa = detect_sa(market, &omega)?;
    let s5 = stmt("(5) NSA on Omega", !sa.present, Some(StatementWitness::Verdict { verdict: Box::new(sa) }));
    Ok(FtapReport::new("robust DMW", market, &omega, vec![s1, s2, s3, s4, s5]))
}

/// The five statements of the class-𝒮 theorem on the constructed `Ω`.
///
/// `B` collects the class sets meeting `(Ω^𝔓)*` only in a polar set and
/// `Ω = Ω^𝔓 ∖ ((Ω^𝔓)* ∩ B)`. Class sets not contained in `Ω` are vacuous.
pub fn class_s_equivalence(market: &Market, priors: &PriorSet, class_sets: &[PathSet]) -> Result<FtapReport, PriorError> {
    let qs = quasi_sure_support(priors, market).paths;
    let qs_star = omega_star_oracle(market, &qs)?.retained;
    let mut b = PathSet::new();
    for c in class_sets {
        let meet: PathSet = c.intersection(&qs_star).copied().collect();
        if is_polar(priors, market, &meet) {
            b.extend(c.iter().copied());
        }
    }
    let omega: PathSet = qs.iter().copied().filter(|w| !(qs_star.contains(w) && b.contains(w))).collect();
    let star = if omega.is_empty() { PathSet::new() } else { omega_star_oracle(market, &omega)?.retained };
    let p_full = full_support_measure(priors, market);
    let inside: Vec<&PathSet> = class_sets.iter().filter(|c| !c.is_empty() && c.is_subset(&omega)).collect();
    let support = p_full.support();

    let mut s1 = true;
    let mut s3 = true;
    let mut s2 = true;
    let mut s4 = true;
    let mut failing: Option<&PathSet> = None;
    for c in &inside {
        let q1 = measure_charging_some(market, &support, c)?;
        let q3 = measure_charging_some(market, &omega, c)?;
        let seen = c.iter().any(|w| star.contains(w) && p_full.weights[*w].is_positive());
        let dead = c.iter().all(|w| !star.contains(w));
        s1 &= q1.is_some();
        s3 &= q3.is_some();
        s2 &= seen;
        s4 &= !dead;
        if q1.is_none() || q3.is_none() || !seen || dead {
            failing.get_or_insert(c);
        }
    }
    let fw = failing.map(|c| StatementWitness::Set { paths: market.ids(c) });
    let st1 = stmt("(1) every class set in Omega is charged by a dominated calibrated martingale measure", s1, fw.clone());
    let st2 = stmt("(2) every class set in Omega meets the efficient set with positive prior mass", s2, fw.clone());
    let st3 = stmt("(3) every class set in Omega is charged by a calibrated martingale measure on Omega", s3, fw.clone());
    let st4 = stmt("(4) no class set lies in Omega minus the efficient set", s4, fw);
    let st5 = if omega.is_empty() || inside.is_empty() {
        stmt("(5) no arbitrage of class S on Omega", true, None)
    } else {
        let owned: Vec<PathSet> = inside.iter().map(|c| (*c).clone()).collect();
        let res = detect_class_s(market, &omega, &owned)?;
        stmt("(5) no arbitrage of class S on Omega", !res.overall.present, Some(StatementWitness::Verdict { verdict: Box::new(res.overall) }))
    };
    Ok(FtapReport::new("class-S FTAP", market, &omega, vec![st1, st2, st3, st4, st5]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::market::{MarketData, PathRecord};

    #[test]
    fn support_and_full_measure() {
        let g = fixtures::gap();
        let p = fixtures::gap_12_priors(&g);
        let qs = quasi_sure_support(&p, &g);
        assert_eq!(qs.paths, [1, 2].into());
        let pf = full_support_measure(&p, &g);
        assert_eq!(pf.weights, vec![Rat::zero(), Rat::frac(1, 2), Rat::frac(1, 2)]);
        assert!(is_polar(&p, &g, &[0].into()));
        assert!(!is_polar(&p, &g, &[1].into()));
        assert!(is_polar(&p, &g, &PathSet::new()));
        let full = priors_from_scenarios(&g, &g.all_paths()).unwrap();
        assert_eq!(quasi_sure_support(&full, &g).paths, g.all_paths());
        let b = fixtures::binom();
        let pb = priors_from_scenarios(&b, &b.all_paths()).unwrap();
        assert_eq!(full_support_measure(&pb, &b).weights, vec![Rat::frac(1, 2), Rat::frac(1, 2)]);
        assert_eq!(pb, fixtures::binom_omega_priors(&b));
    }

    #[test]
    fn two_period_missing_successor() {
        let r = Rat::from_int;
        let mk = |id: &str, s1: i64, s2: i64| PathRecord { id: id.into(), prices: vec![vec![r(1)], vec![r(s1)], vec![r(s2)]] };
        let m = Market::new(MarketData {
            horizon: 2,
            d: 1,
            paths: vec![mk("uu", 2, 3), mk("ud", 2, 1), mk("du", 0, 1), mk("dd", 0, -1)],
            options: vec![],
        })
        .unwrap();
        let g = |pairs: &[(&str, Rat)]| pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        let file: PriorsFile = vec![
            vec![NodePriorsRecord { node: NodeRef { t: 0, path: "uu".into() }, generators: vec![g(&[("uu", Rat::frac(1, 2)), ("du", Rat::frac(1, 2))])] }],
            vec![
                NodePriorsRecord { node: NodeRef { t: 1, path: "uu".into() }, generators: vec![g(&[("uu", r(1))])] },
                NodePriorsRecord { node: NodeRef { t: 1, path: "du".into() }, generators: vec![g(&[("du", r(1))]), g(&[("dd", r(1))])] },
            ],
        ];
        let p = PriorSet::from_records(&m, &file).unwrap();
        assert_eq!(quasi_sure_support(&p, &m).paths, [0, 2, 3].into());
        assert_eq!(generator_products(&p, &m, 100).unwrap().len(), 2);
        let mut bad = file.clone();
        bad[1].pop();
        assert!(matches!(PriorSet::from_records(&m, &bad), Err(PriorError::InvalidPriors(_))));
    }

    #[test]
    fn ftap_examples() {
        let g = fixtures::gap();
        let full = priors_from_scenarios(&g, &g.all_paths()).unwrap();
        let r = ftap_quasi_sure(&g, &full).unwrap();
        assert!(r.all_equivalent && r.statements[0].holds);
        let r = ftap_quasi_sure(&g, &fixtures::gap_12_priors(&g)).unwrap();
        assert!(r.all_equivalent && !r.statements[0].holds);
        let b = fixtures::binom();
        let r = ftap_quasi_sure(&b, &fixtures::binom_omega_priors(&b)).unwrap();
        assert!(r.all_equivalent && r.statements[2].holds);
        match &r.statements[1].witness {
            Some(StatementWitness::Measure { measure }) => assert_eq!(measure.weights, vec![Rat::frac(1, 3), Rat::frac(2, 3)]),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn dmw_examples() {
        let b = fixtures::binom();
        let r = robust_dmw(&b, &fixtures::binom_omega_priors(&b)).unwrap();
        assert!(r.all_equivalent && r.statements[0].holds);
        let only_a = priors_from_scenarios(&b, &[0].into()).unwrap();
        let r = robust_dmw(&b, &only_a).unwrap();
        assert!(r.all_equivalent && !r.statements[4].holds);
        let g = fixtures::gap();
        let r = robust_dmw(&g, &fixtures::gap_12_priors(&g)).unwrap();
        assert!(r.all_equivalent && r.statements.iter().all(|s| s.holds));
    }

    #[test]
    fn class_s_examples() {
        let g = fixtures::gap();
        let p = fixtures::gap_12_priors(&g);
        let r = class_s_equivalence(&g, &p, &[[2].into()]).unwrap();
        assert!(r.all_equivalent);
        assert!(r.statements.iter().all(|s| !s.holds));
        let qs = quasi_sure_support(&p, &g).paths;
        let dmw = robust_dmw(&g, &p).unwrap();
        let r = class_s_equivalence(&g, &p, &[qs.clone()]).unwrap();
        assert!(r.all_equivalent);
        assert_eq!(r.statements[0].holds, dmw.statements[0].holds);
        let singles: Vec<PathSet> = qs.iter().map(|&w| [w].into()).collect();
        let r = class_s_equivalence(&g, &p, &singles).unwrap();
        let f = ftap_quasi_sure(&g, &p).unwrap();
        assert_eq!(r.statements[0].holds, f.statements[0].holds);
    }
}
