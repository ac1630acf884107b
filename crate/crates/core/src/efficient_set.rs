//! The efficient scenario set Ω*: union of supports of calibrated
//! martingale measures on a scope.
//!
//! Computed two ways: a single max-support LP (the oracle), and the
//! separator construction (per-node standard separators iterated to a
//! fixpoint, followed by the partition scheme peeling off hedgeable
//! option directions). The two must agree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlp::{solve, Bounds, LinearProgram, LpError, LpOutcome, Relation, Sense};
use crate::linalg::{null_space, rank};
use crate::market::{path_payoff, Market, MarketError, Measure, NodeRef, PathSet, Strategy};
use crate::model::{add_measure_rows, StrategyLp};
use crate::rat::{dot, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EfficientSetError {
    #[error("scope is empty")]
    EmptyScope,
    #[error("node not found or has no successor in the subset")]
    NodeNotFound,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oracle,
    Aggregator,
    Scheme,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RemovalReason {
    NoCalibratedMeasure,
    Separator { sweep: usize, node: NodeRef, xi: Vec<Rat> },
    /// Strictly positive for the hedge of scheme step `step`.
    SchemeStep { step: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficientSet {
    pub retained: PathSet,
    pub removed: Vec<(usize, RemovalReason)>,
    pub method: Method,
    /// A calibrated martingale measure charging every retained path.
    pub witness: Option<Measure>,
}

/// A point of the closure of the scope that is not itself a scenario.
///
/// It constrains separators and superhedges (continuity) while any of its
/// `parents` is still present, but never carries a martingale measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub path: usize,
    pub parents: PathSet,
}

fn check_scope(scope: &PathSet) -> Result<(), EfficientSetError> {
    if scope.is_empty() {
        Err(EfficientSetError::EmptyScope)
    } else {
        Ok(())
    }
}

/// Max-support LP: `max Σ s` over `μ = s + r`, `s ∈ [0,1]`, `r >= 0`, with
/// martingale and (optionally) calibration rows. Optimal `s` is the indicator of Ω*.
pub(crate) fn max_support(market: &Market, scope: &PathSet, options: bool) -> Result<(PathSet, Option<Measure>, LinearProgram, LpOutcome), LpError> {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut vars: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &w in scope {
        let s = lp.add_var(Rat::one(), Bounds::between(Rat::zero(), Rat::one()));
        let r = lp.add_var(Rat::zero(), Bounds::nonneg());
        vars.insert(w, vec![s, r]);
    }
    add_measure_rows(&mut lp, market, scope, &vars, options);
    let out = solve(&lp)?;
    let x = out.primal();
    let retained: PathSet = vars.iter().filter(|(_, v)| x[v[0]].is_one()).map(|(&w, _)| w).collect();
    let mut weights = vec![Rat::zero(); market.num_paths()];
    for (&w, v) in &vars {
        weights[w] = &x[v[0]] + &x[v[1]];
    }
    let witness = Measure { weights }.normalized();
    Ok((retained, witness, lp, out))
}

/// Ω*_Φ of `scope` via the max-support LP.
pub fn omega_star_oracle(market: &Market, scope: &PathSet) -> Result<EfficientSet, EfficientSetError> {
    omega_star_with(market, scope, true)
}

pub(crate) fn omega_star_with(market: &Market, scope: &PathSet, options: bool) -> Result<EfficientSet, EfficientSetError> {
    check_scope(scope)?;
    let (retained, witness, _, _) = max_support(market, scope, options)?;
    let removed = scope
        .iter()
        .filter(|w| !retained.contains(w))
        .map(|&w| (w, RemovalReason::NoCalibratedMeasure))
        .collect();
    Ok(EfficientSet { retained, removed, method: Method::Oracle, witness })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    pub node: NodeRef,
    pub xi: Vec<Rat>,
    /// Child node indices (at `t + 1`) with `ξ·ΔS > 0`.
    pub strict: Vec<usize>,
    /// Child node indices with `ξ·ΔS = 0`.
    pub null: Vec<usize>,
    /// Paths of `subset` passing through the strict children.
    pub strict_paths: PathSet,
}

/// Standard separator at node `(t, node)` over `subset`.
pub fn node_separator(market: &Market, subset: &PathSet, t: usize, node: usize) -> Result<Separator, EfficientSetError> {
    node_separator_with(market, subset, t, node, &[])
}

/// As [`node_separator`], additionally requiring `ξ·v >= 0` on `extra` increments.
pub fn node_separator_with(
    market: &Market,
    subset: &PathSet,
    t: usize,
    node: usize,
    extra: &[Vec<Rat>],
) -> Result<Separator, EfficientSetError> {
    if t >= market.horizon() || node >= market.tree().nodes(t).len() {
        return Err(EfficientSetError::NodeNotFound);
    }
    let n = market.tree().node(t, node);
    let children: Vec<usize> = n
        .children
        .iter()
        .copied()
        .filter(|&c| market.tree().node(t + 1, c).paths.iter().any(|w| subset.contains(w)))
        .collect();
    if children.is_empty() {
        return Err(EfficientSetError::NodeNotFound);
    }
    let incs: Vec<Vec<Rat>> =
        children.iter().map(|&c| market.increment(market.tree().node(t + 1, c).paths[0], t)).collect();
    let d = market.assets();

    // Maximal strict set: with ξ free, every achievable strict slack reaches 1.
    let mut lp = LinearProgram::new(Sense::Maximize);
    let xi: Vec<usize> = (0..d).map(|_| lp.add_var(Rat::zero(), Bounds::free())).collect();
    let s: Vec<usize> = children.iter().map(|_| lp.add_var(Rat::one(), Bounds::between(Rat::zero(), Rat::one()))).collect();
    for (i, inc) in incs.iter().enumerate() {
        let mut terms: Vec<(usize, Rat)> = xi.iter().zip(inc).map(|(&v, c)| (v, c.clone())).collect();
        terms.push((s[i], -Rat::one()));
        lp.add_row(&terms, Relation::Ge, Rat::zero());
    }
    for e in extra {
        let terms: Vec<(usize, Rat)> = xi.iter().zip(e).map(|(&v, c)| (v, c.clone())).collect();
        lp.add_row(&terms, Relation::Ge, Rat::zero());
    }
    let out = solve(&lp)?;
    let x = out.primal();
    let strict_idx: Vec<usize> = (0..children.len()).filter(|&i| x[s[i]].is_one()).collect();

    // Canonical ξ: least ℓ1 norm subject to the strict/null pattern.
    let xi_val = if strict_idx.is_empty() {
        vec![Rat::zero(); d]
    } else {
        let mut lp2 = LinearProgram::new(Sense::Minimize);
        let pos: Vec<usize> = (0..d).map(|_| lp2.add_var(Rat::one(), Bounds::nonneg())).collect();
        let neg: Vec<usize> = (0..d).map(|_| lp2.add_var(Rat::one(), Bounds::nonneg())).collect();
        let form = |v: &[Rat]| -> Vec<(usize, Rat)> {
            let mut t = Vec::new();
            for a in 0..d {
                if !v[a].is_zero() {
                    t.push((pos[a], v[a].clone()));
                    t.push((neg[a], -&v[a]));
                }
            }
            t
        };
        for (i, inc) in incs.iter().enumerate() {
            if strict_idx.contains(&i) {
                lp2.add_row(&form(inc), Relation::Ge, Rat::one());
            } else {
                lp2.add_row(&form(inc), Relation::Eq, Rat::zero());
            }
        }
        for e in extra {
            lp2.add_row(&form(e), Relation::Ge, Rat::zero());
        }
        let out2 = solve(&lp2)?;
        let y = out2.primal();
        (0..d).map(|a| &y[pos[a]] - &y[neg[a]]).collect()
    };
    let strict: Vec<usize> = strict_idx.iter().map(|&i| children[i]).collect();
    let null: Vec<usize> = (0..children.len()).filter(|i| !strict_idx.contains(i)).map(|i| children[i]).collect();
    let strict_paths = strict
        .iter()
        .flat_map(|&c| market.tree().node(t + 1, c).paths.iter().copied())
        .filter(|w| subset.contains(w))
        .collect();
    Ok(Separator { node: market.node_label(t, node), xi: xi_val, strict, null, strict_paths })
}

/// One nonempty separator application recorded by the aggregator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorStep {
    pub sweep: usize,
    pub t: usize,
    pub node: usize,
    pub separator: Separator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregation {
    pub retained: PathSet,
    pub steps: Vec<SeparatorStep>,
    pub sweeps: usize,
}

/// Node visiting order within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Forward,
    /// Nodes at each time in reverse index order.
    Reverse,
}

/// Iterated standard separators (options ignored), with optional limit points.
pub fn aggregate(market: &Market, scope: &PathSet, limits: &[LimitPoint], order: SweepOrder) -> Result<Aggregation, EfficientSetError> {
    check_scope(scope)?;
    let mut retained = scope.clone();
    let mut steps = Vec::new();
    let mut sweep = 0;
    loop {
        sweep += 1;
        let mut changed = false;
        for t in (0..market.horizon()).rev() {
            let mut nodes = market.nodes_meeting(t, &retained);
            if order == SweepOrder::Reverse {
                nodes.reverse();
            }
            for ni in nodes {
                if !market.tree().node(t, ni).paths.iter().any(|w| retained.contains(w)) {
                    continue;
                }
                let extra: Vec<Vec<Rat>> = limits
                    .iter()
                    .filter(|l| market.tree().node_of[t][l.path] == ni && l.parents.iter().any(|p| retained.contains(p)))
                    .map(|l| market.increment(l.path, t))
                    .collect();
                let sep = node_separator_with(market, &retained, t, ni, &extra)?;
                if sep.strict_paths.is_empty() {
                    continue;
                }
                for w in &sep.strict_paths {
                    retained.remove(w);
                }
                changed = true;
                steps.push(SeparatorStep { sweep, t, node: ni, separator: sep });
            }
        }
        if !changed || retained.is_empty() {
            break;
        }
    }
    Ok(Aggregation { retained, steps, sweeps: sweep })
}

/// Ω* of `scope` with options ignored, via the separator fixpoint.
pub fn aggregator_fixpoint(market: &Market, scope: &PathSet) -> Result<EfficientSet, EfficientSetError> {
    let agg = aggregate(market, scope, &[], SweepOrder::Forward)?;
    let mut removed = Vec::new();
    for st in &agg.steps {
        for &w in &st.separator.strict_paths {
            removed.push((w, RemovalReason::Separator { sweep: st.sweep, node: st.separator.node.clone(), xi: st.separator.xi.clone() }));
        }
    }
    removed.sort_by_key(|(w, _)| *w);
    let witness = if agg.retained.is_empty() {
        None
    } else {
        max_support(market, &agg.retained, false)?.1
    };
    Ok(EfficientSet { retained: agg.retained, removed, method: Method::Aggregator, witness })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeStep {
    pub alpha: Vec<Rat>,
    pub hedge: Strategy,
    /// `A_i`: the equality set of the step's payoff within `A*_{i-1}`.
    pub equality_set: PathSet,
    /// `A*_i`: the separator fixpoint of `A_i`.
    pub efficient: PathSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    /// `A*_0`.
    pub initial: PathSet,
    pub steps: Vec<SchemeStep>,
    pub beta: usize,
    pub final_set: PathSet,
}

/// Searches `α ∉ span(prev)` and `H` with `α·Φ + H∘S >= 0` on `set`.
fn escape_direction(market: &Market, set: &PathSet, prev: &[Vec<Rat>]) -> Result<Option<(Vec<Rat>, Strategy)>, EfficientSetError> {
    let k = market.num_options();
    let directions = if prev.is_empty() {
        (0..k)
            .map(|j| {
                let mut e = vec![Rat::zero(); k];
                e[j] = Rat::one();
                e
            })
            .collect()
    } else {
        null_space(prev, k)
    };
    for b in directions {
        for sign in [Rat::one(), -Rat::one()] {
            let mut slp = StrategyLp::new(
                market,
                set,
                Sense::Maximize,
                Bounds::between(-Rat::one(), Rat::one()),
                Bounds::free(),
                true,
            );
            for (l, &v) in slp.h.iter().enumerate() {
                slp.lp.objective[v] = &sign * &b[l];
            }
            for &w in set {
                let terms = slp.payoff_terms(w);
                slp.lp.add_row(&terms, Relation::Ge, Rat::zero());
            }
            let out = solve(&slp.lp)?;
            if out.value.as_ref().is_some_and(|v| v.is_positive()) {
                let s = slp.strategy(out.primal());
                return Ok(Some((s.h.clone(), s)));
            }
        }
    }
    Ok(None)
}

/// Partition scheme: alternate separator fixpoints with hedgeable option directions.
pub fn partition_scheme(market: &Market, scope: &PathSet) -> Result<PartitionScheme, EfficientSetError> {
    check_scope(scope)?;
    let k = market.num_options();
    let mut current = aggregate(market, scope, &[], SweepOrder::Forward)?.retained;
    let initial = current.clone();
    let mut alphas: Vec<Vec<Rat>> = Vec::new();
    let mut steps = Vec::new();
    while alphas.len() < k && !current.is_empty() {
        let Some((alpha, hedge)) = escape_direction(market, &current, &alphas)? else {
            break;
        };
        let equality_set: PathSet = current.iter().copied().filter(|&w| path_payoff(market, &hedge, w).is_zero()).collect();
        let efficient = if equality_set.is_empty() {
            PathSet::new()
        } else {
            aggregate(market, &equality_set, &[], SweepOrder::Forward)?.retained
        };
        alphas.push(alpha.clone());
        debug_assert_eq!(rank(&alphas, k), alphas.len());
        current = efficient.clone();
        steps.push(SchemeStep { alpha, hedge, equality_set, efficient });
    }
    let beta = steps.len();
    Ok(PartitionScheme { initial, steps, beta, final_set: current })
}

impl PartitionScheme {
    /// Re-checks the structural invariants of the scheme.
    pub fn check(&self, market: &Market) -> Vec<String> {
        let mut fails = Vec::new();
        let alphas: Vec<Vec<Rat>> = self.steps.iter().map(|s| s.alpha.clone()).collect();
        if rank(&alphas, market.num_options()) != alphas.len() {
            fails.push("alpha vectors are linearly dependent".into());
        }
        if self.beta > market.num_options() {
            fails.push("more steps than options".into());
        }
        let mut prev = self.initial.clone();
        for (i, s) in self.steps.iter().enumerate() {
            if s.hedge.h != s.alpha {
                fails.push(format!("step {i}: static part differs from alpha"));
            }
            for &w in &prev {
                let v = path_payoff(market, &s.hedge, w);
                if v.is_negative() {
                    fails.push(format!("step {i}: payoff negative on {}", market.path_id(w)));
                }
                if v.is_zero() != s.equality_set.contains(&w) {
                    fails.push(format!("step {i}: equality set wrong at {}", market.path_id(w)));
                }
            }
            prev = s.efficient.clone();
        }
        fails
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub oracle: EfficientSet,
    pub scheme: PartitionScheme,
    pub agree: bool,
    pub structural_failures: Vec<String>,
}

/// Runs both constructions and compares their final sets.
pub fn verify_scheme(market: &Market, scope: &PathSet) -> Result<SchemeReport, EfficientSetError> {
    let oracle = omega_star_oracle(market, scope)?;
    let scheme = partition_scheme(market, scope)?;
    let structural_failures = scheme.check(market);
    let agree = oracle.retained == scheme.final_set && structural_failures.is_empty();
    Ok(SchemeReport { oracle, scheme, agree, structural_failures })
}

/// `{Σ μ_v ΔS(v) = 0, μ_v >= 1}` over the successors of a node: feasible iff
/// zero lies in the relative interior of the successor increments.
pub fn zero_in_relative_interior(market: &Market, subset: &PathSet, t: usize, node: usize) -> Result<bool, EfficientSetError> {
    let n = market.tree().node(t, node);
    let children: Vec<usize> = n
        .children
        .iter()
        .copied()
        .filter(|&c| market.tree().node(t + 1, c).paths.iter().any(|w| subset.contains(w)))
        .collect();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mu: Vec<usize> = children.iter().map(|_| lp.add_var(Rat::zero(), Bounds { lower: Some(Rat::one()), upper: None })).collect();
    for a in 0..market.assets() {
        let terms: Vec<(usize, Rat)> = children
            .iter()
            .zip(&mu)
            .map(|(&c, &v)| (v, market.increment(market.tree().node(t + 1, c).paths[0], t)[a].clone()))
            .collect();
        lp.add_row(&terms, Relation::Eq, Rat::zero());
    }
    Ok(solve(&lp)?.is_optimal())
}

/// Checks the separator sign pattern against the subset's increments.
pub fn separator_is_sound(market: &Market, t: usize, sep: &Separator) -> bool {
    let inc = |c: usize| market.increment(market.tree().node(t + 1, c).paths[0], t);
    sep.strict.iter().all(|&c| dot(&sep.xi, &inc(c)).is_positive()) && sep.null.iter().all(|&c| dot(&sep.xi, &inc(c)).is_zero())
}
