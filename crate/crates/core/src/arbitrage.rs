//! Detectors for the arbitrage notions on finite path spaces.
//!
//! Every "strict" or "ε-uniform" condition is normalized to `>= 1` by cone
//! scaling, so each notion becomes LP feasibility. A present verdict carries
//! a strategy whose payoff re-checks exactly; an absent verdict carries the
//! LPs and outcomes that certify it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efficient_set::{max_support, node_separator, EfficientSetError};
use crate::exactlp::{solve, Bounds, LinearProgram, LpError, LpOutcome, Relation, Sense};
use crate::market::{path_payoff, Market, MarketError, Measure, NodeRef, PathSet, Strategy};
use crate::model::{measure_from_rows, StrategyLp};
use crate::priors::{full_support_measure, generator_products, quasi_sure_support, PriorError, PriorSet, PRODUCT_CAP};
use crate::rat::{dot, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArbitrageError {
    #[error("scope is empty")]
    EmptyScope,
    #[error("class set {0} is empty or not contained in the scope")]
    GammaNotInScope(usize),
    #[error("node not found or not reached by the priors")]
    NodeNotFound,
    #[error("{0} options exceed the sign-pattern bound of 12")]
    TooManyOptions(usize),
    #[error(transparent)]
    Priors(#[from] PriorError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    EfficientSet(#[from] EfficientSetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Notion {
    #[serde(rename = "1pA")]
    OnePoint,
    #[serde(rename = "OA")]
    Open,
    #[serde(rename = "SA")]
    Strong,
    #[serde(rename = "USA")]
    UniformlyStrong,
    #[serde(rename = "A_P")]
    QuasiSure,
    #[serde(rename = "WA")]
    Weak,
    #[serde(rename = "CA")]
    Classical,
    #[serde(rename = "IntA")]
    Interior,
    #[serde(rename = "locA")]
    Local,
    #[serde(rename = "ClassS")]
    ClassS,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    /// Paths where the payoff must be `>= 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<Rat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Rat>>,
}

/// An LP together with its solved outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certified {
    pub lp: LinearProgram,
    pub outcome: LpOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbitrageVerdict {
    pub notion: Notion,
    pub present: bool,
    /// Paths on which the defining inequalities are imposed.
    pub scope: Vec<String>,
    pub witness: Option<Witness>,
    pub absence: Vec<Certified>,
    /// An absent verdict may also carry the dual object, e.g. a martingale measure.
    pub dual: Option<Measure>,
    pub note: Option<String>,
}

impl ArbitrageVerdict {
    fn absent(notion: Notion, market: &Market, scope: &PathSet) -> Self {
        ArbitrageVerdict { notion, present: false, scope: market.ids(scope), witness: None, absence: vec![], dual: None, note: None }
    }

    fn retag(mut self, notion: Notion, note: &str) -> Self {
        self.notion = notion;
        self.note = Some(note.into());
        self
    }
}

fn nonempty(scope: &PathSet) -> Result<(), ArbitrageError> {
    if scope.is_empty() {
        Err(ArbitrageError::EmptyScope)
    } else {
        Ok(())
    }
}

/// Feasibility of `payoff >= 0` on `scope \ gamma` and `payoff >= 1` on `gamma`.
fn positive_on(market: &Market, scope: &PathSet, gamma: &PathSet) -> Result<(Option<Strategy>, Certified, Vec<(usize, usize)>), ArbitrageError> {
    let mut slp = StrategyLp::free(market, scope, Sense::Minimize);
    let mut rows = Vec::new();
    for &w in scope {
        let rhs = if gamma.contains(&w) { Rat::one() } else { Rat::zero() };
        let terms = slp.payoff_terms(w);
        let r = slp.lp.add_labeled_row(&terms, Relation::Ge, rhs, format!("payoff at {}", market.path_id(w)));
        rows.push((w, r));
    }
    let outcome = solve(&slp.lp)?;
    let strat = outcome.is_optimal().then(|| slp.strategy(outcome.primal()));
    Ok((strat, Certified { lp: slp.lp, outcome }, rows))
}

/// Uniformly strong arbitrage: payoff `>= 1` on the whole scope.
pub fn detect_usa(market: &Market, scope: &PathSet) -> Result<ArbitrageVerdict, ArbitrageError> {
    nonempty(scope)?;
    let (strat, cert, rows) = positive_on(market, scope, scope)?;
    let mut v = ArbitrageVerdict::absent(Notion::UniformlyStrong, market, scope);
    match strat {
        Some(s) => {
            v.present = true;
            v.witness = Some(Witness { strategy: Some(s), gamma: Some(market.ids(scope)), ..Default::default() });
        }
        None => {
            // Farkas multipliers on the payoff rows form a calibrated martingale measure.
            v.dual = cert.outcome.farkas().and_then(|f| measure_from_rows(market, &rows, &f.rows));
            v.absence.push(cert);
        }
    }
    Ok(v)
}

/// Strong arbitrage; on finite scopes it coincides with [`detect_usa`].
pub fn detect_sa(market: &Market, scope: &PathSet) -> Result<ArbitrageVerdict, ArbitrageError> {
    Ok(detect_usa(market, scope)?.retag(Notion::Strong, "strict positivity on a finite set scales to a uniform bound"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSResult {
    pub overall: ArbitrageVerdict,
    pub per_set: Vec<ArbitrageVerdict>,
}

/// Arbitrage of class 𝒮: payoff `>= 0` on the scope and `>= 1` on some Γ.
pub fn detect_class_s(market: &Market, scope: &PathSet, class_sets: &[PathSet]) -> Result<ClassSResult, ArbitrageError> {
    nonempty(scope)?;
    for (i, g) in class_sets.iter().enumerate() {
        if g.is_empty() || !g.is_subset(scope) {
            return Err(ArbitrageError::GammaNotInScope(i));
        }
    }
    let mut per_set = Vec::new();
    for g in class_sets {
        let (strat, cert, _) = positive_on(market, scope, g)?;
        let mut v = ArbitrageVerdict::absent(Notion::ClassS, market, scope);
        match strat {
            Some(s) => {
                v.present = true;
                v.witness = Some(Witness { strategy: Some(s), gamma: Some(market.ids(g)), ..Default::default() });
            }
            None => v.absence.push(cert),
        }
        per_set.push(v);
    }
    let overall = match per_set.iter().find(|v| v.present) {
        Some(v) => v.clone(),
        None => {
            let mut v = ArbitrageVerdict::absent(Notion::ClassS, market, scope);
            v.absence = per_set.iter().flat_map(|p| p.absence.clone()).collect();
            v
        }
    };
    Ok(ClassSResult { overall, per_set })
}

/// One-point arbitrage: present iff the scope is larger than its efficient set.
pub fn detect_1pa(market: &Market, scope: &PathSet) -> Result<ArbitrageVerdict, ArbitrageError> {
    nonempty(scope)?;
    let (retained, measure, lp, outcome) = max_support(market, scope, true)?;
    if retained == *scope {
        let mut v = ArbitrageVerdict::absent(Notion::OnePoint, market, scope);
        v.dual = measure;
        v.absence.push(Certified { lp, outcome });
        return Ok(v);
    }
    let first = scope
        .iter()
        .filter(|w| !retained.contains(w))
        .min_by(|a, b| market.path_id(**a).cmp(market.path_id(**b)))
        .copied()
        .expect("some path was removed");
    let res = detect_class_s(market, scope, &[[first].into()])?;
    Ok(res.overall.retag(Notion::OnePoint, "witness is strictly positive on the first path outside the efficient set"))
}

/// Open arbitrage; every subset of a finite discrete space is open.
pub fn detect_oa(market: &Market, scope: &PathSet) -> Result<ArbitrageVerdict, ArbitrageError> {
    Ok(detect_1pa(market, scope)?.retag(Notion::Open, "on a finite discrete space every nonempty set is open"))
}

/// Arbitrage on the support `u`: `u ≠ u*`; strict on all of `u \ u*`.
fn arbitrage_on_support(market: &Market, u: &PathSet, notion: Notion) -> Result<ArbitrageVerdict, ArbitrageError> {
    let (retained, measure, lp, outcome) = max_support(market, u, true)?;
    if retained == *u {
        let mut v = ArbitrageVerdict::absent(notion, market, u);
        v.dual = measure;
        v.absence.push(Certified { lp, outcome });
        return Ok(v);
    }
    let gamma: PathSet = u.difference(&retained).copied().collect();
    let (strat, _, _) = positive_on(market, u, &gamma)?;
    let mut v = ArbitrageVerdict::absent(notion, market, u);
    v.present = true;
    v.witness = Some(Witness { strategy: strat, gamma: Some(market.ids(&gamma)), ..Default::default() });
    Ok(v)
}

/// Quasi-sure arbitrage `A(𝔓)`, decided on `U = Ω^𝔓`.
pub fn detect_quasi_sure(market: &Market, priors: &PriorSet) -> Result<ArbitrageVerdict, ArbitrageError> {
    let u = quasi_sure_support(priors, market).paths;
    let mut v = arbitrage_on_support(market, &u, Notion::QuasiSure)?;
    if let Some(w) = v.witness.as_mut() {
        w.measure = Some(full_support_measure(priors, market));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductRow {
    pub product: crate::priors::GeneratorProduct,
    pub verdict: ArbitrageVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakClassical {
    pub weak: ArbitrageVerdict,
    pub classical: ArbitrageVerdict,
    pub table: Vec<ProductRow>,
}

/// Weak and classical arbitrage over the generator products of `priors`.
///
/// Products are those of [`generator_products`]; `A(P)` is decided on `supp(P)`.
pub fn detect_weak_and_classical(market: &Market, priors: &PriorSet) -> Result<WeakClassical, ArbitrageError> {
    let products = generator_products(priors, market, PRODUCT_CAP)?;
    let mut table = Vec::new();
    for p in products {
        let mut verdict = arbitrage_on_support(market, &p.measure.support(), Notion::QuasiSure)?;
        if let Some(w) = verdict.witness.as_mut() {
            w.measure = Some(p.measure.clone());
        }
        table.push(ProductRow { product: p, verdict });
    }
    let full = quasi_sure_support(priors, market).paths;
    let some = table.iter().find(|r| r.verdict.present);
    let weak = match some {
        Some(r) => {
            let mut v = r.verdict.clone();
            v.notion = Notion::Weak;
            v
        }
        None => {
            let mut v = ArbitrageVerdict::absent(Notion::Weak, market, &full);
            v.absence = table.iter().flat_map(|r| r.verdict.absence.clone()).collect();
            v
        }
    };
    let all = !table.is_empty() && table.iter().all(|r| r.verdict.present);
    let mut classical = ArbitrageVerdict::absent(Notion::Classical, market, &full);
    classical.present = all;
    classical.note = Some("one strategy per generator product; see the table".into());
    if let Some(r) = table.iter().find(|r| !r.verdict.present) {
        classical.absence = r.verdict.absence.clone();
    }
    Ok(WeakClassical { weak, classical, table })
}

/// Local arbitrage at node `(t, node)` on its quasi-sure successor support.
pub fn detect_local(market: &Market, priors: &PriorSet, t: usize, node: usize) -> Result<ArbitrageVerdict, ArbitrageError> {
    let qs = quasi_sure_support(priors, market);
    let kids = qs.node_support.get(t).and_then(|m| m.get(&node)).ok_or(ArbitrageError::NodeNotFound)?;
    let subset: PathSet = kids.iter().flat_map(|&c| market.tree().node(t + 1, c).paths.iter().copied()).collect();
    let sep = node_separator(market, &subset, t, node)?;
    let mut v = ArbitrageVerdict::absent(Notion::Local, market, &subset);
    if sep.strict.is_empty() {
        // Zero lies in the relative interior: a strictly positive balancing measure.
        let mut lp = LinearProgram::new(Sense::Minimize);
        let mu: Vec<usize> = kids.iter().map(|_| lp.add_var(Rat::zero(), Bounds { lower: Some(Rat::one()), upper: None })).collect();
        for a in 0..market.assets() {
            let terms: Vec<(usize, Rat)> =
                kids.iter().zip(&mu).map(|(&c, &m)| (m, market.increment(market.tree().node(t + 1, c).paths[0], t)[a].clone())).collect();
            lp.add_row(&terms, Relation::Eq, Rat::zero());
        }
        let outcome = solve(&lp)?;
        v.absence.push(Certified { lp, outcome });
    } else {
        v.present = true;
        v.witness = Some(Witness { node: Some(sep.node.clone()), xi: Some(sep.xi.clone()), gamma: Some(market.ids(&sep.strict_paths)), ..Default::default() });
    }
    Ok(v)
}

/// The fixed ε schedule for interior arbitrage.
pub fn int_epsilons() -> Vec<Rat> {
    (0..6).map(|i| Rat::frac(1, 1 << i)).collect()
}

/// Interior arbitrage: a sign pattern σ and a strategy with `sign(h) = σ`
/// that is a quasi-sure arbitrage for `Φ + σε` at every scheduled ε.
pub fn detect_int_arbitrage(market: &Market, priors: &PriorSet) -> Result<ArbitrageVerdict, ArbitrageError> {
    let k = market.num_options();
    if k > 12 {
        return Err(ArbitrageError::TooManyOptions(k));
    }
    let u = quasi_sure_support(priors, market).paths;
    let eps = int_epsilons();
    let mut absence = Vec::new();
    for code in 0..3usize.pow(k as u32) {
        let mut c = code;
        let sigma: Vec<i8> = (0..k)
            .map(|_| {
                let s = [0i8, 1, -1][c % 3];
                c /= 3;
                s
            })
            .collect();
        let mut all = true;
        let mut last = None;
        // Feasibility is monotone in ε, so test the smallest first.
        for e in eps.iter().rev() {
            let (strat, cert) = int_lp(market, &u, &sigma, e)?;
            match strat {
                // The smallest-ε strategy stays an arbitrage at every larger ε.
                Some(s) => {
                    last.get_or_insert(s);
                }
                None => {
                    all = false;
                    absence.push(cert);
                    break;
                }
            }
        }
        if all {
            let mut v = ArbitrageVerdict::absent(Notion::Interior, market, &u);
            v.present = true;
            v.note = Some("arbitrage payoff increases with ε for a fixed sign pattern".into());
            v.witness = Some(Witness {
                strategy: last,
                signs: Some(sigma),
                epsilons: Some(eps),
                measure: Some(full_support_measure(priors, market)),
                ..Default::default()
            });
            return Ok(v);
        }
    }
    let mut v = ArbitrageVerdict::absent(Notion::Interior, market, &u);
    v.absence = absence;
    Ok(v)
}

/// Max-support LP for a quasi-sure arbitrage in the shifted market at `eps`.
fn int_lp(market: &Market, u: &PathSet, sigma: &[i8], eps: &Rat) -> Result<(Option<Strategy>, Certified), ArbitrageError> {
    let mut slp = StrategyLp::free(market, u, Sense::Maximize);
    for (l, &s) in sigma.iter().enumerate() {
        slp.lp.bounds[slp.h[l]] = match s {
            1 => Bounds { lower: Some(Rat::one()), upper: None },
            -1 => Bounds { lower: None, upper: Some(-Rat::one()) },
            _ => Bounds::between(Rat::zero(), Rat::zero()),
        };
    }
    let svars: Vec<usize> = u.iter().map(|_| slp.lp.add_var(Rat::one(), Bounds::between(Rat::zero(), Rat::one()))).collect();
    for (&w, &sv) in u.iter().zip(&svars) {
        let mut terms = slp.payoff_terms(w);
        for (l, &s) in sigma.iter().enumerate() {
            if s != 0 {
                terms.push((slp.h[l], Rat::from_int(s as i64) * eps));
            }
        }
        terms.push((sv, -Rat::one()));
        slp.lp.add_row(&terms, Relation::Ge, Rat::zero());
    }
    let outcome = solve(&slp.lp)?;
    let strat = match (&outcome.value, outcome.is_optimal()) {
        (Some(v), true) if v.is_positive() => Some(slp.strategy(outcome.primal())),
        _ => None,
    };
    Ok((strat, Certified { lp: slp.lp, outcome }))
}

/// Shifted payoff `h·(Φ + σε) + H∘S` at one path.
pub fn shifted_payoff(market: &Market, s: &Strategy, sigma: &[i8], eps: &Rat, w: usize) -> Rat {
    let shift: Rat = s.h.iter().zip(sigma).map(|(h, &g)| h * &(Rat::from_int(g as i64) * eps)).sum();
    path_payoff(market, s, w) + shift
}

/// Re-checks a verdict exactly: witness inequalities for present verdicts,
/// certificates for absent ones.
pub fn verify_verdict(market: &Market, v: &ArbitrageVerdict) -> Vec<String> {
    let mut fails = Vec::new();
    for c in &v.absence {
        let r = crate::exactlp::check_certificate(&c.lp, &c.outcome);
        if !r.passed {
            fails.extend(r.failures);
        }
    }
    if !v.present {
        return fails;
    }
    let Some(w) = &v.witness else {
        fails.push("present verdict without witness".into());
        return fails;
    };
    let scope = match market.set_from_ids(&v.scope) {
        Ok(s) => s,
        Err(e) => return vec![e.to_string()],
    };
    let gamma = w.gamma.as_ref().map(|g| market.set_from_ids(g)).transpose();
    let gamma = match gamma {
        Ok(g) => g.unwrap_or_default(),
        Err(e) => return vec![e.to_string()],
    };
    match v.notion {
        Notion::Local => {
            let (Some(xi), Some(node)) = (&w.xi, &w.node) else {
                return vec!["local witness lacks a direction".into()];
            };
            let mut strict = false;
            for &p in &scope {
                let val = dot(xi, &market.increment(p, node.t));
                if val.is_negative() {
                    fails.push(format!("direction negative on {}", market.path_id(p)));
                }
                strict |= val.is_positive();
            }
            if !strict {
                fails.push("direction nowhere strictly positive".into());
            }
        }
        Notion::Interior => {
            let (Some(s), Some(sigma), Some(eps)) = (&w.strategy, &w.signs, &w.epsilons) else {
                return vec!["interior witness incomplete".into()];
            };
            for (l, (&g, h)) in sigma.iter().zip(&s.h).enumerate() {
                if h.signum() != g as i32 {
                    fails.push(format!("sign of h[{l}] differs from the pattern"));
                }
            }
            for e in eps {
                let vals: Vec<Rat> = scope.iter().map(|&p| shifted_payoff(market, s, sigma, e, p)).collect();
                if vals.iter().any(|x| x.is_negative()) || !vals.iter().any(|x| x.is_positive()) {
                    fails.push(format!("not an arbitrage at epsilon {e}"));
                }
            }
        }
        _ => {
            let Some(s) = &w.strategy else {
                return vec!["witness lacks a strategy".into()];
            };
            for &p in &scope {
                let val = path_payoff(market, s, p);
                if val.is_negative() {
                    fails.push(format!("payoff negative on {}", market.path_id(p)));
                }
                if gamma.contains(&p) && val < Rat::one() {
                    fails.push(format!("payoff below one on {}", market.path_id(p)));
                }
            }
            if gamma.is_empty() {
                fails.push("witness has empty strict set".into());
            }
            if let (Notion::QuasiSure, Some(m)) = (v.notion, &w.measure) {
                if !gamma.iter().any(|&p| m.weights[p].is_positive()) {
                    fails.push("witness measure does not charge the strict set".into());
                }
            }
        }
    }
    fails
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationsReport {
    pub verdicts: Vec<(Notion, bool)>,
    /// `(node, locA)` per reached node, `Φ = 0` only.
    pub local: Option<Vec<(NodeRef, bool)>>,
    pub class_s: Option<bool>,
    pub violations: Vec<String>,
}

fn implies(name: &str, a: bool, b: bool, out: &mut Vec<String>) {
    if a && !b {
        out.push(format!("{name} violated"));
    }
}

/// Runs every detector on `Ω = Ω^𝔓` and checks the implications between them.
pub fn lemma_relations_check(market: &Market, priors: &PriorSet, class_sets: &[PathSet]) -> Result<RelationsReport, ArbitrageError> {
    let qs = quasi_sure_support(priors, market);
    let omega = qs.paths.clone();
    let usa = detect_usa(market, &omega)?.present;
    let sa = detect_sa(market, &omega)?.present;
    let oa = detect_oa(market, &omega)?.present;
    let opa = detect_1pa(market, &omega)?.present;
    let ap = detect_quasi_sure(market, priors)?.present;
    let wc = detect_weak_and_classical(market, priors)?;
    let (wa, ca) = (wc.weak.present, wc.classical.present);
    let inta = if market.num_options() <= 12 { Some(detect_int_arbitrage(market, priors)?.present) } else { None };

    let mut violations = Vec::new();
    implies("USA => SA", usa, sa, &mut violations);
    implies("SA => OA", sa, oa, &mut violations);
    implies("OA => 1pA", oa, opa, &mut violations);
    implies("A(P) => WA", ap, wa, &mut violations);
    implies("CA => WA", ca, wa, &mut violations);
    if let Some(i) = inta {
        implies("A(P) => IntA", ap, i, &mut violations);
    }
    let singles: Vec<PathSet> = omega.iter().map(|&w| [w].into()).collect();
    let single_s = detect_class_s(market, &omega, &singles)?.overall.present;
    if single_s != opa {
        violations.push("A(S) with singletons differs from 1pA".into());
    }
    let class_s = if class_sets.is_empty() {
        None
    } else {
        let usable: Vec<PathSet> = class_sets.iter().filter(|c| !c.is_empty() && c.is_subset(&omega)).cloned().collect();
        if usable.is_empty() {
            None
        } else {
            Some(detect_class_s(market, &omega, &usable)?.overall.present)
        }
    };
    let local = if market.num_options() == 0 {
        let mut rows = Vec::new();
        for (t, lv) in qs.node_support.iter().enumerate() {
            for &ni in lv.keys() {
                rows.push((market.node_label(t, ni), detect_local(market, priors, t, ni)?.present));
            }
        }
        // Every reached node carries positive mass under the full-support prior.
        let any = rows.iter().any(|(_, p)| *p);
        if any != ap {
            violations.push("A(P) <=> locA on a charged node violated".into());
        }
        Some(rows)
    } else {
        None
    };
    let mut verdicts = vec![
        (Notion::UniformlyStrong, usa),
        (Notion::Strong, sa),
        (Notion::Open, oa),
        (Notion::OnePoint, opa),
        (Notion::QuasiSure, ap),
        (Notion::Weak, wa),
        (Notion::Classical, ca),
    ];
    if let Some(i) = inta {
        verdicts.push((Notion::Interior, i));
    }
    Ok(RelationsReport { verdicts, local, class_s, violations })
}
