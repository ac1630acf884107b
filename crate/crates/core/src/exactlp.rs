//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex with Bland's rule. Every outcome carries
//! a certificate that [`check_certificate`] verifies with arithmetic alone:
//! primal and dual solutions for optima, Farkas multipliers for infeasible
//! programs, and an improving ray plus a feasible point for unbounded ones.
//!
//! Multiplier conventions, stated for the program as a minimisation of
//! `c' = s·c` (`s = -1` when maximising):
//!
//! * row multipliers are `>= 0` on `Ge` rows, `<= 0` on `Le` rows, free on `Eq`;
//! * `lower[j] >= 0`, `upper[j] <= 0`, zero when the bound is absent;
//! * optimum: `Σ y_i a_i + lower + upper = c'` and `y·b + lower·l + upper·u = c'·x`;
//! * Farkas: `Σ y_i a_i + lower + upper = 0` and `y·b + lower·l + upper·u > 0`.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::{dot, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub relation: Relation,
    pub rhs: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Option<Rat>,
    pub upper: Option<Rat>,
}

impl Bounds {
    pub fn free() -> Self {
        Bounds { lower: None, upper: None }
    }

    pub fn nonneg() -> Self {
        Bounds { lower: Some(Rat::zero()), upper: None }
    }

    pub fn between(lo: Rat, hi: Rat) -> Self {
        Bounds { lower: Some(lo), upper: Some(hi) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rat>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { sense, objective: Vec::new(), constraints: Vec::new(), bounds: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a variable; existing rows get a zero coefficient.
    pub fn add_var(&mut self, cost: Rat, bounds: Bounds) -> usize {
        self.objective.push(cost);
        self.bounds.push(bounds);
        for c in &mut self.constraints {
            c.coeffs.push(Rat::zero());
        }
        self.objective.len() - 1
    }

    /// Appends a row from sparse terms; repeated indices accumulate.
    pub fn add_row(&mut self, terms: &[(usize, Rat)], relation: Relation, rhs: Rat) -> usize {
        let mut coeffs = vec![Rat::zero(); self.num_vars()];
        for (j, v) in terms {
            coeffs[*j] += v;
        }
        self.constraints.push(Constraint { coeffs, relation, rhs, label: None });
        self.constraints.len() - 1
    }

    pub fn add_labeled_row(
        &mut self,
        terms: &[(usize, Rat)],
        relation: Relation,
        rhs: Rat,
        label: impl Into<String>,
    ) -> usize {
        let i = self.add_row(terms, relation, rhs);
        self.constraints[i].label = Some(label.into());
        i
    }

    fn row_name(&self, i: usize) -> String {
        match &self.constraints[i].label {
            Some(l) => format!("row {i} ({l})"),
            None => format!("row {i}"),
        }
    }

    /// Objective coefficients of the equivalent minimisation.
    fn min_costs(&self) -> Vec<Rat> {
        match self.sense {
            Sense::Minimize => self.objective.clone(),
            Sense::Maximize => self.objective.iter().map(|c| -c).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Row and bound multipliers; see the module docs for sign conventions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multipliers {
    pub rows: Vec<Rat>,
    pub lower: Vec<Rat>,
    pub upper: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    Farkas(Multipliers),
    Ray(Vec<Rat>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: Option<Rat>,
    /// Optimal point, or a feasible point when unbounded.
    pub primal: Option<Vec<Rat>>,
    pub dual: Option<Multipliers>,
    pub certificate: Option<Certificate>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == LpStatus::Infeasible
    }

    pub fn primal(&self) -> &[Rat] {
        self.primal.as_deref().unwrap_or(&[])
    }

    pub fn farkas(&self) -> Option<&Multipliers> {
        match &self.certificate {
            Some(Certificate::Farkas(m)) => Some(m),
            _ => None,
        }
    }
}

enum VarForm {
    /// x = l + p
    Lower { col: usize, l: Rat },
    /// x = u - p
    Upper { col: usize, u: Rat },
    /// x = p - n
    Free { pos: usize, neg: usize },
    /// x = l + p with an internal row p <= u - l
    Boxed { col: usize, l: Rat, row: usize },
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    obj: Vec<Rat>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.ncols]
    }

    fn set_objective(&mut self, costs: &[Rat]) {
        let mut obj: Vec<Rat> = costs.to_vec();
        obj.push(Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let inv = self.rows[r][q].recip().expect("pivot element is nonzero");
        if !inv.is_one() {
            for v in &mut self.rows[r] {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rat>| {
            let f = row[q].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = q;
    }

    /// Bland's rule simplex. `Err(q)` reports an unbounded entering column.
    fn run(&mut self, allowed: usize) -> Result<(), usize> {
        loop {
            let Some(q) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) * a.recip().expect("positive");
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, q),
                None => return Err(q),
            }
        }
    }

    fn basic_values(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(i).clone();
        }
        x
    }
}

struct StandardForm {
    forms: Vec<VarForm>,
    tab: Tableau,
    n_struct: usize,
    n_art_start: usize,
    /// Per standard row: sign applied to make the rhs nonnegative.
    sigma: Vec<Rat>,
    /// Per standard row: the column that started as its unit vector.
    unit_col: Vec<usize>,
    /// Costs of the structural columns for phase two.
    costs: Vec<Rat>,
}

fn standard_form(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let c = lp.min_costs();
    let mut forms = Vec::with_capacity(n);
    let mut ncol = 0usize;
    let mut box_rows = 0usize;
    let m0 = lp.constraints.len();
    for b in &lp.bounds {
        let form = match (&b.lower, &b.upper) {
            (Some(l), Some(_)) => {
                box_rows += 1;
                VarForm::Boxed { col: ncol, l: l.clone(), row: m0 + box_rows - 1 }
            }
            (Some(l), None) => VarForm::Lower { col: ncol, l: l.clone() },
            (None, Some(u)) => VarForm::Upper { col: ncol, u: u.clone() },
            (None, None) => {
                ncol += 1;
                VarForm::Free { pos: ncol - 1, neg: ncol }
            }
        };
        ncol += 1;
        forms.push(form);
    }
    let n_struct = ncol;
    let m = m0 + box_rows;

    // Structural part of each standard row, its relation and rhs.
    let mut srows: Vec<(Vec<Rat>, Relation, Rat)> = Vec::with_capacity(m);
    for con in &lp.constraints {
        let mut row = vec![Rat::zero(); n_struct];
        let mut rhs = con.rhs.clone();
        for (j, a) in con.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &forms[j] {
                VarForm::Lower { col, l } | VarForm::Boxed { col, l, .. } => {
                    row[*col] += a;
                    rhs -= a * l;
                }
                VarForm::Upper { col, u } => {
                    row[*col] -= a;
                    rhs -= a * u;
                }
                VarForm::Free { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        srows.push((row, con.relation, rhs));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if let VarForm::Boxed { col, l, .. } = &forms[j] {
            let mut row = vec![Rat::zero(); n_struct];
            row[*col] = Rat::one();
            let u = b.upper.as_ref().expect("boxed has upper");
            srows.push((row, Relation::Le, u - l));
        }
    }

    let n_slack = srows.iter().filter(|r| r.1 != Relation::Eq).count();
    let mut sigma = Vec::with_capacity(m);
    let mut needs_art = Vec::with_capacity(m);
    for (_, rel, rhs) in &srows {
        let s = if rhs.is_negative() { -1 } else { 1 };
        sigma.push(Rat::from_int(s));
        let slack_unit = match rel {
            Relation::Le => s == 1,
            Relation::Ge => s == -1,
            Relation::Eq => false,
        };
        needs_art.push(!slack_unit);
    }
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let ncols = n_struct + n_slack + n_art;
    let n_art_start = n_struct + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut unit_col = Vec::with_capacity(m);
    let mut next_slack = n_struct;
    let mut next_art = n_art_start;
    for (i, (srow, rel, rhs)) in srows.into_iter().enumerate() {
        let neg = sigma[i].is_negative();
        let mut row: Vec<Rat> = srow.into_iter().map(|v| if neg { -v } else { v }).collect();
        row.resize(ncols + 1, Rat::zero());
        row[ncols] = if neg { -rhs } else { rhs };
        let mut slack_col = None;
        if rel != Relation::Eq {
            let coef = if rel == Relation::Le { Rat::one() } else { -Rat::one() };
            row[next_slack] = if neg { -coef } else { coef };
            slack_col = Some(next_slack);
            next_slack += 1;
        }
        let u = if needs_art[i] {
            row[next_art] = Rat::one();
            next_art += 1;
            next_art - 1
        } else {
            slack_col.expect("slack unit column")
        };
        unit_col.push(u);
        basis.push(u);
        rows.push(row);
    }

    let mut costs = vec![Rat::zero(); ncols];
    for (j, f) in forms.iter().enumerate() {
        match f {
            VarForm::Lower { col, .. } | VarForm::Boxed { col, .. } => costs[*col] = c[j].clone(),
            VarForm::Upper { col, .. } => costs[*col] = -&c[j],
            VarForm::Free { pos, neg } => {
                costs[*pos] = c[j].clone();
                costs[*neg] = -&c[j];
            }
        }
    }

    StandardForm {
        forms,
        tab: Tableau { rows, obj: Vec::new(), basis, ncols },
        n_struct,
        n_art_start,
        sigma,
        unit_col,
        costs,
    }
}

impl StandardForm {
    fn to_original(&self, p: &[Rat], shift: bool) -> Vec<Rat> {
        self.forms
            .iter()
            .map(|f| match f {
                VarForm::Lower { col, l } | VarForm::Boxed { col, l, .. } => {
                    if shift {
                        l + &p[*col]
                    } else {
                        p[*col].clone()
                    }
                }
                VarForm::Upper { col, u } => {
                    if shift {
                        u - &p[*col]
                    } else {
                        -&p[*col]
                    }
                }
                VarForm::Free { pos, neg } => &p[*pos] - &p[*neg],
            })
            .collect()
    }

    /// Original-space multipliers from the current reduced costs under `costs`.
    fn multipliers(&self, costs: &[Rat], m0: usize) -> Multipliers {
        let tab = &self.tab;
        let y: Vec<Rat> = (0..tab.rows.len())
            .map(|i| {
                let u = self.unit_col[i];
                (&costs[u] - &tab.obj[u]) * &self.sigma[i]
            })
            .collect();
        let n = self.forms.len();
        let mut lower = vec![Rat::zero(); n];
        let mut upper = vec![Rat::zero(); n];
        for (j, f) in self.forms.iter().enumerate() {
            match f {
                VarForm::Lower { col, .. } => lower[j] = tab.obj[*col].clone(),
                VarForm::Upper { col, .. } => upper[j] = -&tab.obj[*col],
                VarForm::Free { .. } => {}
                VarForm::Boxed { col, row, .. } => {
                    lower[j] = tab.obj[*col].clone();
                    upper[j] = y[*row].clone();
                }
            }
        }
        Multipliers { rows: y[..m0].to_vec(), lower, upper }
    }
}

fn validate(lp: &LinearProgram) -> Result<(), LpError> {
    let n = lp.num_vars();
    if lp.bounds.len() != n {
        return Err(LpError::MalformedProgram(format!(
            "{} bounds for {} variables",
            lp.bounds.len(),
            n
        )));
    }
    if n == 0 && !lp.constraints.is_empty() {
        return Err(LpError::MalformedProgram("rows present but no variables".into()));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::MalformedProgram(format!(
                "row {i} has width {} but objective has {n}",
                c.coeffs.len()
            )));
        }
    }
    Ok(())
}

static AUDIT: AtomicBool = AtomicBool::new(false);
static AUDITED: AtomicU64 = AtomicU64::new(0);
static AUDIT_FAILURES: AtomicU64 = AtomicU64::new(0);

/// When enabled, every [`solve`] result is passed through [`check_certificate`]
/// and counted; see [`audit_counts`].
pub fn set_audit(on: bool) {
    AUDIT.store(on, Ordering::SeqCst);
}

/// `(checked, failed)` since the process started.
pub fn audit_counts() -> (u64, u64) {
    (AUDITED.load(Ordering::SeqCst), AUDIT_FAILURES.load(Ordering::SeqCst))
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    let out = solve_unchecked(lp)?;
    if AUDIT.load(Ordering::Relaxed) {
        AUDITED.fetch_add(1, Ordering::SeqCst);
        if !check_certificate(lp, &out).passed {
            AUDIT_FAILURES.fetch_add(1, Ordering::SeqCst);
        }
    }
    Ok(out)
}

fn solve_unchecked(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    validate(lp)?;
    let m0 = lp.constraints.len();
    let mut sf = standard_form(lp);
    let ncols = sf.tab.ncols;

    let mut phase1 = vec![Rat::zero(); ncols];
    for c in phase1.iter_mut().skip(sf.n_art_start) {
        *c = Rat::one();
    }
    sf.tab.set_objective(&phase1);
    sf.tab.run(ncols).expect("phase one is bounded below by zero");
    if !sf.tab.obj[ncols].is_zero() {
        let mult = sf.multipliers(&phase1, m0);
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            value: None,
            primal: None,
            dual: None,
            certificate: Some(Certificate::Farkas(mult)),
        });
    }

    // Drive zero-level artificials out of the basis where a pivot exists.
    for r in 0..sf.tab.rows.len() {
        if sf.tab.basis[r] < sf.n_art_start {
            continue;
        }
        if let Some(q) = (0..sf.n_art_start).find(|&j| !sf.tab.rows[r][j].is_zero()) {
            sf.tab.pivot(r, q);
        }
    }

    let costs = sf.costs.clone();
    sf.tab.set_objective(&costs);
    let run = sf.tab.run(sf.n_art_start);
    let p = sf.tab.basic_values();
    let x = sf.to_original(&p, true);
    match run {
        Ok(()) => {
            let value = dot(&lp.objective, &x);
            let mult = sf.multipliers(&costs, m0);
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                value: Some(value),
                primal: Some(x),
                dual: Some(mult),
                certificate: None,
            })
        }
        Err(q) => {
            let mut dp = vec![Rat::zero(); ncols];
            dp[q] = Rat::one();
            for (i, &b) in sf.tab.basis.iter().enumerate() {
                let a = &sf.tab.rows[i][q];
                if !a.is_zero() {
                    dp[b] = -a;
                }
            }
            debug_assert!(sf.n_struct <= ncols);
            let ray = sf.to_original(&dp, false);
            Ok(LpOutcome {
                status: LpStatus::Unbounded,
                value: None,
                primal: Some(x),
                dual: None,
                certificate: Some(Certificate::Ray(ray)),
            })
        }
    }
}

/// Outcome of [`check_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub failures: Vec<String>,
}

fn check_primal(lp: &LinearProgram, x: &[Rat], fails: &mut Vec<String>) {
    if x.len() != lp.num_vars() {
        fails.push(format!("primal has length {} but program has {} variables", x.len(), lp.num_vars()));
        return;
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs = dot(&c.coeffs, x);
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Eq => lhs == c.rhs,
            Relation::Ge => lhs >= c.rhs,
        };
        if !ok {
            fails.push(format!("{} violated: lhs {} vs rhs {}", lp.row_name(i), lhs, c.rhs));
        }
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if b.lower.as_ref().is_some_and(|l| &x[j] < l) {
            fails.push(format!("lower bound of variable {j} violated"));
        }
        if b.upper.as_ref().is_some_and(|u| &x[j] > u) {
            fails.push(format!("upper bound of variable {j} violated"));
        }
    }
}

/// Checks signs and stationarity against `target`; returns the dual objective.
fn check_multipliers(lp: &LinearProgram, y: &Multipliers, target: &[Rat], fails: &mut Vec<String>) -> Option<Rat> {
    let n = lp.num_vars();
    if y.rows.len() != lp.constraints.len() || y.lower.len() != n || y.upper.len() != n {
        fails.push("multiplier vector has the wrong length".into());
        return None;
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let bad = match c.relation {
            Relation::Ge => y.rows[i].is_negative(),
            Relation::Le => y.rows[i].is_positive(),
            Relation::Eq => false,
        };
        if bad {
            fails.push(format!("sign condition on multiplier of {} violated", lp.row_name(i)));
        }
    }
    let mut dual_obj = dot(&y.rows, &lp.constraints.iter().map(|c| c.rhs.clone()).collect::<Vec<_>>());
    for (j, b) in lp.bounds.iter().enumerate() {
        match &b.lower {
            Some(l) => {
                if y.lower[j].is_negative() {
                    fails.push(format!("sign condition on lower-bound multiplier of variable {j} violated"));
                }
                dual_obj += &y.lower[j] * l;
            }
            None if !y.lower[j].is_zero() => {
                fails.push(format!("nonzero multiplier on absent lower bound of variable {j}"))
            }
            None => {}
        }
        match &b.upper {
            Some(u) => {
                if y.upper[j].is_positive() {
                    fails.push(format!("sign condition on upper-bound multiplier of variable {j} violated"));
                }
                dual_obj += &y.upper[j] * u;
            }
            None if !y.upper[j].is_zero() => {
                fails.push(format!("nonzero multiplier on absent upper bound of variable {j}"))
            }
            None => {}
        }
    }
    for j in 0..n {
        let mut s = &y.lower[j] + &y.upper[j];
        for (i, c) in lp.constraints.iter().enumerate() {
            if !c.coeffs[j].is_zero() && !y.rows[i].is_zero() {
                s += &y.rows[i] * &c.coeffs[j];
            }
        }
        if s != target[j] {
            fails.push(format!("stationarity at variable {j} violated"));
        }
    }
    Some(dual_obj)
}

/// Verifies every invariant of `out` against `lp` by exact arithmetic.
pub fn check_certificate(lp: &LinearProgram, out: &LpOutcome) -> CertificateReport {
    let mut fails = Vec::new();
    if validate(lp).is_err() {
        fails.push("program is malformed".into());
        return CertificateReport { passed: false, failures: fails };
    }
    let c = lp.min_costs();
    match out.status {
        LpStatus::Optimal => {
            let (Some(x), Some(y), Some(v)) = (&out.primal, &out.dual, &out.value) else {
                fails.push("optimal outcome lacks primal, dual or value".into());
                return CertificateReport { passed: false, failures: fails };
            };
            check_primal(lp, x, &mut fails);
            if x.len() == lp.num_vars() {
                if &dot(&lp.objective, x) != v {
                    fails.push("reported value differs from objective at primal".into());
                }
                if let Some(dobj) = check_multipliers(lp, y, &c, &mut fails) {
                    if dobj != dot(&c, x) {
                        fails.push("strong duality violated: dual objective differs from primal".into());
                    }
                }
            }
        }
        LpStatus::Infeasible => match out.farkas() {
            None => fails.push("infeasible outcome lacks a Farkas certificate".into()),
            Some(y) => {
                let zero = vec![Rat::zero(); lp.num_vars()];
                if let Some(dobj) = check_multipliers(lp, y, &zero, &mut fails) {
                    if !dobj.is_positive() {
                        fails.push("Farkas combination does not contradict feasibility".into());
                    }
                }
            }
        },
        LpStatus::Unbounded => {
            let (Some(x), Some(Certificate::Ray(d))) = (&out.primal, &out.certificate) else {
                fails.push("unbounded outcome lacks a feasible point or ray".into());
                return CertificateReport { passed: false, failures: fails };
            };
            check_primal(lp, x, &mut fails);
            if d.len() != lp.num_vars() {
                fails.push("ray has the wrong length".into());
            } else {
                for (i, con) in lp.constraints.iter().enumerate() {
                    let s = dot(&con.coeffs, d);
                    let ok = match con.relation {
                        Relation::Le => !s.is_positive(),
                        Relation::Eq => s.is_zero(),
                        Relation::Ge => !s.is_negative(),
                    };
                    if !ok {
                        fails.push(format!("ray leaves the feasible region at {}", lp.row_name(i)));
                    }
                }
                for (j, b) in lp.bounds.iter().enumerate() {
                    if (b.lower.is_some() && d[j].is_negative()) || (b.upper.is_some() && d[j].is_positive()) {
                        fails.push(format!("ray violates a bound of variable {j}"));
                    }
                }
                if !dot(&c, d).is_negative() {
                    fails.push("ray does not strictly improve the objective".into());
                }
            }
        }
    }
    CertificateReport { passed: fails.is_empty(), failures: fails }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::frac(n, d)
    }

    #[test]
    fn trivial_minimum() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(Rat::zero(), Bounds::nonneg());
        let out = solve(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.value, Some(Rat::zero()));
        assert_eq!(out.primal(), &[Rat::zero()]);
        assert!(check_certificate(&lp, &out).passed);
    }

    #[test]
    fn sign_contradiction_is_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(Rat::zero(), Bounds::free());
        lp.add_row(&[(x, Rat::one())], Relation::Ge, Rat::one());
        lp.add_row(&[(x, -Rat::one())], Relation::Ge, Rat::zero());
        let out = solve(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert_eq!(out.farkas().unwrap().rows, vec![Rat::one(), Rat::one()]);
        assert!(check_certificate(&lp, &out).passed);
    }

    fn binomial_dual() -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let q1 = lp.add_var(Rat::one(), Bounds::nonneg());
        let q2 = lp.add_var(Rat::zero(), Bounds::nonneg());
        lp.add_labeled_row(&[(q1, Rat::one()), (q2, Rat::one())], Relation::Eq, Rat::one(), "normalization");
        lp.add_labeled_row(&[(q1, Rat::one()), (q2, r(-1, 2))], Relation::Eq, Rat::zero(), "martingale");
        lp
    }

    #[test]
    fn binomial_dual_matches_hand_solution() {
        // q1 + q2 = 1 and q1 = q2/2 give q = (1/3, 2/3).
        let lp = binomial_dual();
        let out = solve(&lp).unwrap();
        assert_eq!(out.value, Some(r(1, 3)));
        assert_eq!(out.primal(), &[r(1, 3), r(2, 3)]);
        assert!(check_certificate(&lp, &out).passed);
    }

    #[test]
    fn tampered_primal_names_normalization_row() {
        let lp = binomial_dual();
        let mut out = solve(&lp).unwrap();
        let x = out.primal.as_mut().unwrap();
        x[0] = -x[0].clone();
        let rep = check_certificate(&lp, &out);
        assert!(!rep.passed);
        assert!(rep.failures.iter().any(|f| f.contains("normalization")), "{:?}", rep.failures);
    }

    #[test]
    fn tampered_farkas_names_sign() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(Rat::zero(), Bounds::free());
        lp.add_row(&[(x, Rat::one())], Relation::Ge, Rat::one());
        lp.add_row(&[(x, -Rat::one())], Relation::Ge, Rat::zero());
        let mut out = solve(&lp).unwrap();
        if let Some(Certificate::Farkas(m)) = &mut out.certificate {
            m.rows[1] = -Rat::one();
        }
        let rep = check_certificate(&lp, &out);
        assert!(!rep.passed);
        assert!(rep.failures.iter().any(|f| f.contains("sign condition")), "{:?}", rep.failures);
    }

    #[test]
    fn unbounded_gives_ray() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(-Rat::one(), Bounds::nonneg());
        let y = lp.add_var(Rat::zero(), Bounds::free());
        lp.add_row(&[(x, Rat::one()), (y, -Rat::one())], Relation::Le, Rat::from_int(3));
        let out = solve(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
        assert!(check_certificate(&lp, &out).passed, "{:?}", check_certificate(&lp, &out));
    }

    #[test]
    fn boxed_and_upper_bounds() {
        // maximize x + y with x in [-1, 2], y <= 1/2, x + y <= 2
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var(Rat::one(), Bounds::between(-Rat::one(), Rat::from_int(2)));
        let y = lp.add_var(Rat::one(), Bounds { lower: None, upper: Some(r(1, 2)) });
        lp.add_row(&[(x, Rat::one()), (y, Rat::one())], Relation::Le, Rat::from_int(2));
        let out = solve(&lp).unwrap();
        assert_eq!(out.value, Some(Rat::from_int(2)));
        assert!(check_certificate(&lp, &out).passed);
        // empty box is infeasible
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(Rat::zero(), Bounds::between(Rat::one(), Rat::zero()));
        let out = solve(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(check_certificate(&lp, &out).passed);
    }

    #[test]
    fn malformed_width() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(Rat::zero(), Bounds::free());
        lp.constraints.push(Constraint { coeffs: vec![], relation: Relation::Eq, rhs: Rat::zero(), label: None });
        assert!(matches!(solve(&lp), Err(LpError::MalformedProgram(_))));
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.constraints.push(Constraint { coeffs: vec![], relation: Relation::Eq, rhs: Rat::zero(), label: None });
        assert!(solve(&lp).is_err());
    }
}
