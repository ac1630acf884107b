//! LP builders shared by the detectors and pricers.

use std::collections::BTreeMap;

use crate::exactlp::{Bounds, LinearProgram, Relation, Sense};
use crate::market::{Market, Measure, PathSet, Strategy};
use crate::rat::Rat;

/// A program whose first variables are a semistatic strategy on `scope`.
pub(crate) struct StrategyLp<'a> {
    pub lp: LinearProgram,
    market: &'a Market,
    pub h: Vec<usize>,
    /// `dynv[t][node]`: variable per asset, only for nodes meeting the scope.
    pub dynv: Vec<Vec<Option<Vec<usize>>>>,
}

impl<'a> StrategyLp<'a> {
    pub fn new(market: &'a Market, scope: &PathSet, sense: Sense, hb: Bounds, dynb: Bounds, options: bool) -> Self {
        let mut lp = LinearProgram::new(sense);
        let h = if options {
            (0..market.num_options()).map(|_| lp.add_var(Rat::zero(), hb.clone())).collect()
        } else {
            Vec::new()
        };
        let mut dynv = Vec::with_capacity(market.horizon());
        for t in 0..market.horizon() {
            let mut lv = vec![None; market.tree().nodes(t).len()];
            for ni in market.nodes_meeting(t, scope) {
                lv[ni] = Some((0..market.assets()).map(|_| lp.add_var(Rat::zero(), dynb.clone())).collect());
            }
            dynv.push(lv);
        }
        StrategyLp { lp, market, h, dynv }
    }

    pub fn free(market: &'a Market, scope: &PathSet, sense: Sense) -> Self {
        Self::new(market, scope, sense, Bounds::free(), Bounds::free(), true)
    }

    /// Sparse linear form of the payoff at path `w` (must lie in the scope).
    pub fn payoff_terms(&self, w: usize) -> Vec<(usize, Rat)> {
        let m = self.market;
        let mut terms = Vec::new();
        for (l, &v) in self.h.iter().enumerate() {
            let c = m.option_payoff(l, w);
            if !c.is_zero() {
                terms.push((v, c.clone()));
            }
        }
        for t in 0..m.horizon() {
            let ni = m.tree().node_of[t][w];
            let vars = self.dynv[t][ni].as_ref().expect("path lies in the scope");
            for (v, inc) in vars.iter().zip(m.increment(w, t)) {
                if !inc.is_zero() {
                    terms.push((*v, inc));
                }
            }
        }
        terms
    }

    pub fn strategy(&self, x: &[Rat]) -> Strategy {
        let mut s = Strategy::zero(self.market);
        for (l, &v) in self.h.iter().enumerate() {
            s.h[l] = x[v].clone();
        }
        for (t, lv) in self.dynv.iter().enumerate() {
            for (ni, vars) in lv.iter().enumerate() {
                if let Some(vars) = vars {
                    s.dynamic[t][ni] = vars.iter().map(|&v| x[v].clone()).collect();
                }
            }
        }
        s
    }
}

/// Homogeneous or normalized measure program over `support`.
pub(crate) struct MeasureLp {
    pub lp: LinearProgram,
    pub mu: BTreeMap<usize, usize>,
}

impl MeasureLp {
    /// Variables `μ_w >= 0` on `support` with martingale rows per node and,
    /// if requested, calibration rows per option.
    pub fn new(market: &Market, support: &PathSet, sense: Sense, options: bool) -> Self {
        let mut lp = LinearProgram::new(sense);
        let mu: BTreeMap<usize, usize> = support.iter().map(|&w| (w, lp.add_var(Rat::zero(), Bounds::nonneg()))).collect();
        let vars: BTreeMap<usize, Vec<usize>> = mu.iter().map(|(&w, &v)| (w, vec![v])).collect();
        add_measure_rows(&mut lp, market, support, &vars, options);
        MeasureLp { lp, mu }
    }

    pub fn add_normalization(&mut self) {
        let terms: Vec<(usize, Rat)> = self.mu.values().map(|&v| (v, Rat::one())).collect();
        self.lp.add_labeled_row(&terms, Relation::Eq, Rat::one(), "normalization");
    }

    pub fn measure(&self, market: &Market, x: &[Rat]) -> Measure {
        let mut w = vec![Rat::zero(); market.num_paths()];
        for (&p, &v) in &self.mu {
            w[p] = x[v].clone();
        }
        Measure { weights: w }
    }
}

/// Builds a measure from Farkas row multipliers indexed by path rows.
pub(crate) fn measure_from_rows(market: &Market, rows: &[(usize, usize)], y: &[Rat]) -> Option<Measure> {
    let mut w = vec![Rat::zero(); market.num_paths()];
    for &(path, row) in rows {
        w[path] += &y[row];
    }
    Measure { weights: w }.normalized()
}

/// Adds martingale rows per node (and calibration rows per option) for a
/// measure whose mass at path `w` is the sum of the variables `vars[w]`.
pub(crate) fn add_measure_rows(
    lp: &mut LinearProgram,
    market: &Market,
    support: &PathSet,
    vars: &BTreeMap<usize, Vec<usize>>,
    options: bool,
) {
    let spread = |w: usize, c: &Rat| -> Vec<(usize, Rat)> { vars[&w].iter().map(|&v| (v, c.clone())).collect() };
    for t in 0..market.horizon() {
        for ni in market.nodes_meeting(t, support) {
            let node = market.tree().node(t, ni);
            for a in 0..market.assets() {
                let terms: Vec<(usize, Rat)> = node
                    .paths
                    .iter()
                    .filter(|w| vars.contains_key(w))
                    .flat_map(|&w| spread(w, &market.increment(w, t)[a]))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                if !terms.is_empty() {
                    let lbl = format!("martingale t={t} node={} asset={a}", market.node_label(t, ni).path);
                    lp.add_labeled_row(&terms, Relation::Eq, Rat::zero(), lbl);
                }
            }
        }
    }
    if options {
        for l in 0..market.num_options() {
            let terms: Vec<(usize, Rat)> = vars
                .keys()
                .flat_map(|&w| spread(w, market.option_payoff(l, w)))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if !terms.is_empty() {
                let lbl = format!("calibration {}", market.data().options[l].name);
                lp.add_labeled_row(&terms, Relation::Eq, Rat::zero(), lbl);
            }
        }
    }
}
