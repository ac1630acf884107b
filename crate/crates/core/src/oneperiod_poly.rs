//! One-period markets whose scenario set is a finite union of axis-aligned
//! boxes in `ℝ₊^d`, each finite bound flagged open or closed.
//!
//! Payoffs are affine on every cell, so conditions on a closed cell reduce
//! to its vertices plus the recession rays `e_i` of coordinates with an
//! infinite upper bound. Strict positivity on a partially open cell is
//! decided face by face: the zero set of a nonnegative affine function is a
//! face of the closure, and it misses the cell iff the function is not
//! identically zero on any minimal face whose relative interior lies in the cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbitrage::Certified;
use crate::exactlp::{solve, Bounds, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::rat::{dot, ExtRat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("invalid polyhedral market: {0}")]
    Invalid(String),
    #[error("a cell has an open face; the transform needs closed cells")]
    OpenCellPresent,
    #[error("input strategy is not strictly positive on the truncated scenario set")]
    EpsilonZero,
    #[error("cell {0} is unbounded")]
    NonCompactCell(usize),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("the efficient set is nonempty; its price is not computed on polyhedral markets")]
    EfficientSetNonempty,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub lo: Vec<Rat>,
    /// Finite or `"inf"`.
    pub hi: Vec<ExtRat>,
    pub lo_open: Vec<bool>,
    pub hi_open: Vec<bool>,
}

/// `a·S₁ + b` on one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: Vec<Rat>,
    pub b: Rat,
}

impl AffinePiece {
    pub fn eval(&self, s: &[Rat]) -> Rat {
        dot(&self.a, s) + &self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyMarket {
    pub s0: Vec<Rat>,
    pub cells: Vec<Cell>,
    /// `options[l][c]`: net payoff of option `l` on cell `c`.
    #[serde(default)]
    pub options: Vec<Vec<AffinePiece>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PolyStrategy {
    pub h: Vec<Rat>,
    pub H: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub cell: usize,
    pub point: Vec<Rat>,
    pub weight: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyWitness {
    Strategy(PolyStrategy),
    Measure(Vec<Atom>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolyNotion {
    SA,
    USA,
    WFLVR,
    #[serde(rename = "SM-exists")]
    SmExists,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyVerdict {
    pub notion: PolyNotion,
    pub present: bool,
    pub witness: Option<PolyWitness>,
    pub epsilon: Option<Rat>,
    pub boundary_note: Option<String>,
    #[serde(default)]
    pub certificates: Vec<Certified>,
}

/// Generators of a closed box: vertices and recession directions (coordinate indices).
struct Generators {
    vertices: Vec<Vec<Rat>>,
    rays: Vec<usize>,
}

#[derive(Clone)]
enum Coord {
    Fixed(Rat),
    Free,
}

impl PolyMarket {
    pub fn dim(&self) -> usize {
        self.s0.len()
    }

    pub fn num_options(&self) -> usize {
        self.options.len()
    }

    pub fn validate(&self) -> Result<(), PolyError> {
        let d = self.dim();
        let bad = |m: String| Err(PolyError::Invalid(m));
        if d == 0 {
            return bad("s0 is empty".into());
        }
        if self.s0.iter().any(|x| x.is_negative()) {
            return bad("s0 has a negative coordinate".into());
        }
        if self.cells.is_empty() {
            return bad("no cells".into());
        }
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.lo.len() != d || cell.hi.len() != d || cell.lo_open.len() != d || cell.hi_open.len() != d {
                return bad(format!("cell {c} has the wrong dimension"));
            }
            for i in 0..d {
                if cell.lo[i].is_negative() {
                    return bad(format!("cell {c} leaves the nonnegative orthant"));
                }
                match &cell.hi[i] {
                    ExtRat::Finite(h) if *h < cell.lo[i] => return bad(format!("cell {c} is empty in coordinate {i}")),
                    ExtRat::Finite(h) if *h == cell.lo[i] && (cell.lo_open[i] || cell.hi_open[i]) => {
                        return bad(format!("cell {c} is empty in coordinate {i}"))
                    }
                    ExtRat::NegInf => return bad(format!("cell {c} has upper bound -inf")),
                    _ => {}
                }
            }
        }
        for (l, pieces) in self.options.iter().enumerate() {
            if pieces.len() != self.cells.len() || pieces.iter().any(|p| p.a.len() != d) {
                return bad(format!("option {l} does not give one affine piece per cell"));
            }
        }
        Ok(())
    }

    pub fn is_compact(&self) -> bool {
        self.cells.iter().all(|c| c.hi.iter().all(|h| matches!(h, ExtRat::Finite(_))))
    }

    pub fn all_closed(&self) -> bool {
        self.cells.iter().all(|c| c.lo_open.iter().chain(&c.hi_open).all(|o| !o))
    }

    fn closure(&self, c: usize) -> Generators {
        let cell = &self.cells[c];
        let coords: Vec<Coord> = (0..self.dim()).map(|_| Coord::Free).collect();
        self.face_generators(cell, &coords)
    }

    fn face_generators(&self, cell: &Cell, coords: &[Coord]) -> Generators {
        let mut vertices = vec![Vec::new()];
        let mut rays = Vec::new();
        for (i, co) in coords.iter().enumerate() {
            let choices: Vec<Rat> = match co {
                Coord::Fixed(x) => vec![x.clone()],
                Coord::Free => match &cell.hi[i] {
                    ExtRat::Finite(h) if *h == cell.lo[i] => vec![h.clone()],
                    ExtRat::Finite(h) => vec![cell.lo[i].clone(), h.clone()],
                    _ => {
                        rays.push(i);
                        vec![cell.lo[i].clone()]
                    }
                },
            };
            vertices = vertices
                .into_iter()
                .flat_map(|v| {
                    choices.iter().map(move |x| {
                        let mut w = v.clone();
                        w.push(x.clone());
                        w
                    })
                })
                .collect();
        }
        Generators { vertices, rays }
    }

    /// Minimal faces of the closure whose relative interior lies in the cell.
    fn member_faces(&self, c: usize) -> Vec<Generators> {
        let cell = &self.cells[c];
        let mut faces: Vec<Vec<Coord>> = vec![Vec::new()];
        for i in 0..self.dim() {
            let mut opts = Vec::new();
            let deg = matches!(&cell.hi[i], ExtRat::Finite(h) if *h == cell.lo[i]);
            if deg || !cell.lo_open[i] {
                opts.push(Coord::Fixed(cell.lo[i].clone()));
            }
            if !deg {
                if let ExtRat::Finite(h) = &cell.hi[i] {
                    if !cell.hi_open[i] {
                        opts.push(Coord::Fixed(h.clone()));
                    }
                }
            }
            if opts.is_empty() {
                opts.push(Coord::Free);
            }
            faces = faces
                .into_iter()
                .flat_map(|f| {
                    opts.iter().map(move |o| {
                        let mut g = f.clone();
                        g.push(o.clone());
                        g
                    })
                })
                .collect();
        }
        faces.iter().map(|co| self.face_generators(cell, co)).collect()
    }

    /// LP terms of the net payoff at `s` on cell `c`; vars are `h` then `H`.
    fn point_terms(&self, c: usize, s: &[Rat]) -> (Vec<(usize, Rat)>, Rat) {
        let k = self.num_options();
        let mut t: Vec<(usize, Rat)> = self.options.iter().enumerate().map(|(l, p)| (l, p[c].eval(s))).collect();
        t.extend((0..self.dim()).map(|i| (k + i, &s[i] - &self.s0[i])));
        (t, Rat::zero())
    }

    fn ray_terms(&self, c: usize, i: usize) -> Vec<(usize, Rat)> {
        let k = self.num_options();
        let mut t: Vec<(usize, Rat)> = self.options.iter().enumerate().map(|(l, p)| (l, p[c].a[i].clone())).collect();
        t.push((k + i, Rat::one()));
        t
    }

    fn strategy_vars(&self, lp: &mut LinearProgram, b: &Bounds) -> PolyStrategyVars {
        let n = self.num_options() + self.dim();
        for _ in 0..n {
            lp.add_var(Rat::zero(), b.clone());
        }
        PolyStrategyVars { k: self.num_options(), n }
    }
}

struct PolyStrategyVars {
    k: usize,
    n: usize,
}

impl PolyStrategyVars {
    fn read(&self, x: &[Rat]) -> PolyStrategy {
        PolyStrategy { h: x[..self.k].to_vec(), H: x[self.k..self.n].to_vec() }
    }
}

/// Net payoff of `s` at point `p` of cell `c`.
pub fn strategy_payoff(pm: &PolyMarket, s: &PolyStrategy, c: usize, p: &[Rat]) -> Rat {
    let opt: Rat = pm.options.iter().zip(&s.h).map(|(o, h)| h * &o[c].eval(p)).sum();
    let inc: Rat = s.H.iter().zip(p.iter().zip(&pm.s0)).map(|(h, (x, y))| h * &(x - y)).sum();
    opt + inc
}

/// Coefficient of `S₁` in the payoff on cell `c`.
fn slope(pm: &PolyMarket, s: &PolyStrategy, c: usize) -> Vec<Rat> {
    (0..pm.dim())
        .map(|i| {
            let o: Rat = pm.options.iter().zip(&s.h).map(|(op, h)| h * &op[c].a[i]).sum();
            o + &s.H[i]
        })
        .collect()
}

/// Minimum of the payoff over the closure of cell `c` (`None` if unbounded below).
pub fn closure_min(pm: &PolyMarket, s: &PolyStrategy, c: usize) -> Option<Rat> {
    let g = pm.closure(c);
    let sl = slope(pm, s, c);
    if g.rays.iter().any(|&i| sl[i].is_negative()) {
        return None;
    }
    g.vertices.iter().map(|v| strategy_payoff(pm, s, c, v)).min()
}

/// Exact test of `payoff > 0` at every point of cell `c`, coordinate by coordinate.
pub fn strictly_positive_on_cell(pm: &PolyMarket, s: &PolyStrategy, c: usize) -> bool {
    let cell = &pm.cells[c];
    let sl = slope(pm, s, c);
    let zero = vec![Rat::zero(); pm.dim()];
    let mut inf = strategy_payoff(pm, s, c, &zero);
    let mut attained = true;
    for i in 0..pm.dim() {
        let ci = &sl[i];
        if ci.is_positive() {
            inf += ci * &cell.lo[i];
            attained &= !cell.lo_open[i];
        } else if ci.is_negative() {
            match &cell.hi[i] {
                ExtRat::Finite(h) => {
                    inf += ci * h;
                    attained &= !cell.hi_open[i] || *h == cell.lo[i];
                }
                _ => return false,
            }
        }
    }
    inf.is_positive() || (inf.is_zero() && !attained)
}

fn closure_rows(pm: &PolyMarket, lp: &mut LinearProgram, eps: Option<usize>, rhs: &Rat) {
    for c in 0..pm.cells.len() {
        let g = pm.closure(c);
        for v in &g.vertices {
            let (mut t, _) = pm.point_terms(c, v);
            if let Some(e) = eps {
                t.push((e, -Rat::one()));
            }
            lp.add_labeled_row(&t, Relation::Ge, rhs.clone(), format!("cell {c} vertex"));
        }
        for &i in &g.rays {
            lp.add_labeled_row(&pm.ray_terms(c, i), Relation::Ge, Rat::zero(), format!("cell {c} ray {i}"));
        }
    }
}

fn usa_impl(pm: &PolyMarket, no_short: bool) -> Result<PolyVerdict, PolyError> {
    pm.validate()?;
    let b = if no_short { Bounds::between(Rat::zero(), Rat::one()) } else { Bounds::between(-Rat::one(), Rat::one()) };
    let mut lp = LinearProgram::new(Sense::Maximize);
    let vars = pm.strategy_vars(&mut lp, &b);
    let e = lp.add_var(Rat::one(), Bounds::nonneg());
    closure_rows(pm, &mut lp, Some(e), &Rat::zero());
    let out = solve(&lp)?;
    let eps = out.primal()[e].clone();
    let present = eps.is_positive();
    let witness = present.then(|| PolyWitness::Strategy(vars.read(out.primal())));
    let mut certificates = vec![Certified { lp, outcome: out }];
    if !present {
        // The normalized system `payoff ≥ 1` is infeasible; keep its Farkas certificate.
        let mut f = LinearProgram::new(Sense::Minimize);
        let fb = if no_short { Bounds::nonneg() } else { Bounds::free() };
        pm.strategy_vars(&mut f, &fb);
        closure_rows(pm, &mut f, None, &Rat::one());
        let o = solve(&f)?;
        if o.status != LpStatus::Infeasible {
            return Err(PolyError::InternalInconsistency("normalized USA system is feasible but the maximal margin is zero".into()));
        }
        certificates.push(Certified { lp: f, outcome: o });
    }
    Ok(PolyVerdict { notion: PolyNotion::USA, present, witness, epsilon: Some(eps), boundary_note: None, certificates })
}

/// Uniformly strong arbitrage: payoff `≥ ε > 0` on the closure of every cell.
/// `epsilon` is the largest margin with every position in `[-1, 1]`.
pub fn usa_check(pm: &PolyMarket) -> Result<PolyVerdict, PolyError> {
    usa_impl(pm, false)
}

/// As [`usa_check`] with `h, H ≥ 0`.
pub fn usa_check_no_short(pm: &PolyMarket) -> Result<PolyVerdict, PolyError> {
    usa_impl(pm, true)
}

/// Strong arbitrage: payoff `> 0` at every point of every cell.
///
/// The strategies nonnegative on all closures form a polyhedral cone `C`.
/// For each minimal member face one LP maximizes the payoff summed over the
/// face's generators on `C`; the sum of the maximizers is strictly positive
/// on every cell iff every such maximum is positive.
pub fn sa_check(pm: &PolyMarket) -> Result<PolyVerdict, PolyError> {
    pm.validate()?;
    let n = pm.num_options() + pm.dim();
    let mut acc = vec![Rat::zero(); n];
    let mut certificates = Vec::new();
    let mut blocked = None;
    'cells: for c in 0..pm.cells.len() {
        for face in pm.member_faces(c) {
            let mut lp = LinearProgram::new(Sense::Maximize);
            pm.strategy_vars(&mut lp, &Bounds::between(-Rat::one(), Rat::one()));
            closure_rows(pm, &mut lp, None, &Rat::zero());
            for v in &face.vertices {
                for (j, a) in pm.point_terms(c, v).0 {
                    lp.objective[j] += &a;
                }
            }
            for &i in &face.rays {
                for (j, a) in pm.ray_terms(c, i) {
                    lp.objective[j] += &a;
                }
            }
            let out = solve(&lp)?;
            let val = out.value.clone().unwrap_or_else(Rat::zero);
            if val.is_positive() {
                for (a, x) in acc.iter_mut().zip(out.primal()) {
                    *a += x;
                }
                certificates.push(Certified { lp, outcome: out });
            } else {
                blocked = Some(c);
                certificates.push(Certified { lp, outcome: out });
                break 'cells;
            }
        }
    }
    let k = pm.num_options();
    let s = PolyStrategy { h: acc[..k].to_vec(), H: acc[k..].to_vec() };
    let present = blocked.is_none();
    if present && !(0..pm.cells.len()).all(|c| strictly_positive_on_cell(pm, &s, c)) {
        return Err(PolyError::InternalInconsistency("aggregated strong arbitrage is not strictly positive".into()));
    }
    let boundary_note = if present && !usa_check(pm)?.present { Some("SA without USA".to_string()) } else { None };
    Ok(PolyVerdict {
        notion: PolyNotion::SA,
        present,
        witness: present.then_some(PolyWitness::Strategy(s)),
        epsilon: None,
        boundary_note: boundary_note.or(blocked.map(|c| format!("payoff vanishes on a face of cell {c} for every nonnegative strategy"))),
        certificates,
    })
}

fn l1(v: &[Rat]) -> Rat {
    v.iter().map(Rat::abs).sum()
}

/// Turns a strong arbitrage on closed cells into one with payoff `≥ |s₀|₁`.
pub fn sa_to_usa(pm: &PolyMarket, strong_arb: &PolyStrategy) -> Result<PolyStrategy, PolyError> {
    pm.validate()?;
    if !pm.all_closed() {
        return Err(PolyError::OpenCellPresent);
    }
    if strong_arb.h.len() != pm.num_options() || strong_arb.H.len() != pm.dim() {
        return Err(PolyError::Invalid("strategy dimension".into()));
    }
    let norm = l1(&pm.s0);
    let two = Rat::from_int(2);
    let kmax: Vec<Rat> = pm.s0.iter().map(|x| x + &(&two * &norm)).collect();
    let mut eps: Option<Rat> = None;
    for c in 0..pm.cells.len() {
        let cell = &pm.cells[c];
        let mut cut = cell.clone();
        let mut empty = false;
        for i in 0..pm.dim() {
            let hi = match &cell.hi[i] {
                ExtRat::Finite(h) => Rat::min(h, &kmax[i]),
                _ => kmax[i].clone(),
            };
            if hi < cell.lo[i] {
                empty = true;
                break;
            }
            cut.hi[i] = ExtRat::Finite(hi);
        }
        if empty {
            continue;
        }
        let sub = PolyMarket { s0: pm.s0.clone(), cells: vec![cut], options: pm.options.iter().map(|o| vec![o[c].clone()]).collect() };
        for v in sub.closure(0).vertices {
            let p = strategy_payoff(pm, strong_arb, c, &v);
            eps = Some(match eps {
                Some(e) => Rat::min(&e, &p),
                None => p,
            });
        }
    }
    let lambda = match eps {
        None => Rat::one(),
        Some(e) if !e.is_positive() => return Err(PolyError::EpsilonZero),
        Some(e) => (&two * &norm).checked_div(&e).expect("positive epsilon"),
    };
    Ok(PolyStrategy {
        h: strong_arb.h.iter().map(|x| &lambda * x).collect(),
        H: strong_arb.H.iter().map(|x| &(&lambda * x) + &Rat::one()).collect(),
    })
}

/// Calibrated supermartingale measure supported on closure vertices.
pub fn supermartingale_exists(pm: &PolyMarket) -> Result<PolyVerdict, PolyError> {
    pm.validate()?;
    if let Some(c) = (0..pm.cells.len()).find(|&c| pm.cells[c].hi.iter().any(|h| !matches!(h, ExtRat::Finite(_)))) {
        return Err(PolyError::NonCompactCell(c));
    }
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut atoms = Vec::new();
    for c in 0..pm.cells.len() {
        for v in pm.closure(c).vertices {
            let q = lp.add_var(Rat::zero(), Bounds::nonneg());
            atoms.push((q, c, v));
        }
    }
    let all: Vec<(usize, Rat)> = atoms.iter().map(|(q, _, _)| (*q, Rat::one())).collect();
    lp.add_labeled_row(&all, Relation::Eq, Rat::one(), "total mass");
    for i in 0..pm.dim() {
        let t: Vec<(usize, Rat)> = atoms.iter().map(|(q, _, v)| (*q, &v[i] - &pm.s0[i])).collect();
        lp.add_labeled_row(&t, Relation::Le, Rat::zero(), format!("supermartingale in asset {i}"));
    }
    for (l, o) in pm.options.iter().enumerate() {
        let t: Vec<(usize, Rat)> = atoms.iter().map(|(q, c, v)| (*q, o[*c].eval(v))).collect();
        lp.add_labeled_row(&t, Relation::Le, Rat::zero(), format!("option {l}"));
    }
    let out = solve(&lp)?;
    let present = out.is_optimal();
    let witness = present.then(|| {
        PolyWitness::Measure(
            atoms
                .iter()
                .filter(|(q, _, _)| !out.primal()[*q].is_zero())
                .map(|(q, c, v)| Atom { cell: *c, point: v.clone(), weight: out.primal()[*q].clone() })
                .collect(),
        )
    });
    Ok(PolyVerdict { notion: PolyNotion::SmExists, present, witness, epsilon: None, boundary_note: None, certificates: vec![Certified { lp, outcome: out }] })
}

/// WFLVR on compact cells under no short selling, by both routes.
pub fn wflvr_check_compact(pm: &PolyMarket) -> Result<PolyVerdict, PolyError> {
    let sm = supermartingale_exists(pm)?;
    let usa = usa_check_no_short(pm)?;
    if usa.present == sm.present {
        return Err(PolyError::InternalInconsistency(format!("USA (no short selling) = {} but supermartingale measure exists = {}", usa.present, sm.present)));
    }
    let mut certificates = usa.certificates;
    certificates.extend(sm.certificates);
    Ok(PolyVerdict {
        notion: PolyNotion::WFLVR,
        present: usa.present,
        witness: if usa.present { usa.witness } else { sm.witness },
        epsilon: usa.epsilon,
        boundary_note: None,
        certificates,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyPrice {
    pub price: ExtRat,
    pub strategy: Option<PolyStrategy>,
    #[serde(default)]
    pub certificate: Option<Certified>,
}

/// Superhedging price on the closure of the cells of a claim affine on each cell.
pub fn price(pm: &PolyMarket, g: &[AffinePiece]) -> Result<PolyPrice, PolyError> {
    pm.validate()?;
    if g.len() != pm.cells.len() || g.iter().any(|p| p.a.len() != pm.dim()) {
        return Err(PolyError::Invalid("claim needs one affine piece per cell".into()));
    }
    let mut lp = LinearProgram::new(Sense::Minimize);
    let vars = pm.strategy_vars(&mut lp, &Bounds::free());
    let x = lp.add_var(Rat::one(), Bounds::free());
    for c in 0..pm.cells.len() {
        let gen = pm.closure(c);
        for v in &gen.vertices {
            let (mut t, _) = pm.point_terms(c, v);
            t.push((x, Rat::one()));
            lp.add_row(&t, Relation::Ge, g[c].eval(v));
        }
        for &i in &gen.rays {
            lp.add_row(&pm.ray_terms(c, i), Relation::Ge, g[c].a[i].clone());
        }
    }
    let out = solve(&lp)?;
    let (p, s) = match out.status {
        LpStatus::Optimal => (ExtRat::Finite(out.primal()[x].clone()), Some(vars.read(out.primal()))),
        LpStatus::Unbounded => (ExtRat::NegInf, None),
        LpStatus::Infeasible => (ExtRat::PosInf, None),
    };
    Ok(PolyPrice { price: p, strategy: s, certificate: Some(Certified { lp, outcome: out }) })
}

/// Price on the efficient set. In one period the efficient set is empty
/// exactly when a strong arbitrage exists, and then the price is `-∞`.
pub fn price_on_efficient_set(pm: &PolyMarket, _g: &[AffinePiece]) -> Result<ExtRat, PolyError> {
    if sa_check(pm)?.present {
        Ok(ExtRat::NegInf)
    } else {
        Err(PolyError::EfficientSetNonempty)
    }
}

/// Truncation `[0, m]` with calls `(S₁ - n)⁺ - pₙ`, `n = 1..=prices.len()`,
/// split into unit cells so every call is affine on each cell.
pub fn call_family_truncation(s0: &Rat, m: u32, prices: &[Rat]) -> PolyMarket {
    let cells: Vec<Cell> = (0..m)
        .map(|j| Cell {
            lo: vec![Rat::from_int(j as i64)],
            hi: vec![ExtRat::Finite(Rat::from_int(j as i64 + 1))],
            lo_open: vec![false],
            hi_open: vec![false],
        })
        .collect();
    let options = prices
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let k = n as i64 + 1;
            (0..m as i64)
                .map(|j| if j >= k { AffinePiece { a: vec![Rat::one()], b: -&(Rat::from_int(k) + p) } } else { AffinePiece { a: vec![Rat::zero()], b: -p } })
                .collect()
        })
        .collect();
    PolyMarket { s0: vec![s0.clone()], cells, options }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallFamilyReport {
    pub usa: bool,
    /// Indices `n ≥ m` with `pₙ > 0`; each one alone yields a riskless gain on the truncation.
    pub positive_tail: Vec<usize>,
}

/// On `[0, m]` calls struck at `n ≥ m` pay nothing, so any positive tail price
/// is a uniform arbitrage: prices must vanish along the tail.
pub fn call_family_check(s0: &Rat, m: u32, prices: &[Rat]) -> Result<CallFamilyReport, PolyError> {
    let pm = call_family_truncation(s0, m, prices);
    let usa = usa_check(&pm)?.present;
    let positive_tail = prices.iter().enumerate().filter(|(n, p)| *n + 1 >= m as usize && p.is_positive()).map(|(n, _)| n + 1).collect();
    Ok(CallFamilyReport { usa, positive_tail })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn interval(s0: i64, lo: Rat, hi: ExtRat, lo_open: bool, hi_open: bool) -> PolyMarket {
        PolyMarket { s0: vec![r(s0)], cells: vec![Cell { lo: vec![lo], hi: vec![hi], lo_open: vec![lo_open], hi_open: vec![hi_open] }], options: vec![] }
    }

    fn closed(s0: i64, lo: Rat, hi: Rat) -> PolyMarket {
        interval(s0, lo, ExtRat::Finite(hi), false, false)
    }

    #[test]
    fn sausa_boundary() {
        let pm = crate::fixtures::sausa();
        let usa = usa_check(&pm).unwrap();
        assert!(!usa.present);
        assert!(usa.certificates[1].outcome.is_infeasible());
        let sa = sa_check(&pm).unwrap();
        assert!(sa.present);
        assert_eq!(sa.boundary_note.as_deref(), Some("SA without USA"));
        let PolyWitness::Strategy(s) = sa.witness.unwrap() else { panic!() };
        assert!(s.H[0].is_positive());
    }

    #[test]
    fn usa_and_sa_examples() {
        let pm = closed(1, r(3), r(4));
        let v = usa_check(&pm).unwrap();
        assert!(v.present);
        assert_eq!(v.epsilon, Some(r(2)));
        assert_eq!(v.witness, Some(PolyWitness::Strategy(PolyStrategy { h: vec![], H: vec![r(1)] })));
        assert!(sa_check(&pm).unwrap().present);
        assert!(!sa_check(&closed(1, r(1), r(2))).unwrap().present);
        let ex31 = crate::fixtures::ex31();
        assert!(!usa_check(&ex31).unwrap().present);
        // Fully open interval: no member vertex, the whole segment is the member face.
        let open = interval(1, r(1), ExtRat::Finite(r(2)), true, true);
        assert!(sa_check(&open).unwrap().present);
        let open_at_s0 = interval(1, Rat::frac(1, 2), ExtRat::Finite(r(2)), true, true);
        assert!(!sa_check(&open_at_s0).unwrap().present);
    }

    #[test]
    fn two_dim_edge_member_face() {
        // Left and right facets open, bottom edge closed and through s0's level.
        let pm = PolyMarket {
            s0: vec![r(1), r(1)],
            cells: vec![Cell { lo: vec![r(1), r(1)], hi: vec![ExtRat::Finite(r(2)), ExtRat::Finite(r(2))], lo_open: vec![true, false], hi_open: vec![true, false] }],
            options: vec![],
        };
        assert!(sa_check(&pm).unwrap().present);
        assert!(!usa_check(&pm).unwrap().present);
    }

    #[test]
    fn ex31_prices() {
        let pm = crate::fixtures::ex31();
        let one = vec![AffinePiece { a: vec![r(0)], b: r(1) }];
        assert_eq!(price(&pm, &one).unwrap().price, ExtRat::Finite(r(1)));
        assert_eq!(price_on_efficient_set(&pm, &one).unwrap(), ExtRat::NegInf);
    }

    #[test]
    fn sa_to_usa_examples() {
        let pm = closed(1, r(3), r(4));
        let out = sa_to_usa(&pm, &PolyStrategy { h: vec![], H: vec![r(1)] }).unwrap();
        assert_eq!(out.H, vec![r(2)]);
        assert_eq!(closure_min(&pm, &out, 0), Some(r(4)));
        let pm2 = PolyMarket {
            s0: vec![r(1), r(1)],
            cells: vec![Cell { lo: vec![r(2), r(2)], hi: vec![ExtRat::Finite(r(3)), ExtRat::Finite(r(3))], lo_open: vec![false; 2], hi_open: vec![false; 2] }],
            options: vec![],
        };
        let out = sa_to_usa(&pm2, &PolyStrategy { h: vec![], H: vec![r(1), r(0)] }).unwrap();
        assert_eq!(out.H, vec![r(5), r(1)]);
        assert_eq!(closure_min(&pm2, &out, 0), Some(r(6)));
        assert_eq!(sa_to_usa(&pm, &PolyStrategy { h: vec![], H: vec![r(0)] }), Err(PolyError::EpsilonZero));
        assert_eq!(sa_to_usa(&crate::fixtures::sausa(), &PolyStrategy { h: vec![], H: vec![r(1)] }), Err(PolyError::OpenCellPresent));
    }

    #[test]
    fn supermartingale_examples() {
        let v = supermartingale_exists(&closed(1, Rat::frac(1, 2), r(2))).unwrap();
        assert!(v.present);
        let v = supermartingale_exists(&closed(1, r(3), r(4))).unwrap();
        assert!(!v.present);
        assert!(v.certificates[0].outcome.farkas().is_some());
        let binom = PolyMarket {
            s0: vec![r(1)],
            cells: vec![
                Cell { lo: vec![r(2)], hi: vec![ExtRat::Finite(r(2))], lo_open: vec![false], hi_open: vec![false] },
                Cell { lo: vec![Rat::frac(1, 2)], hi: vec![ExtRat::Finite(Rat::frac(1, 2))], lo_open: vec![false], hi_open: vec![false] },
            ],
            options: vec![],
        };
        assert!(supermartingale_exists(&binom).unwrap().present);
        assert_eq!(supermartingale_exists(&crate::fixtures::ex31()), Err(PolyError::NonCompactCell(0)));
    }

    #[test]
    fn wflvr_examples() {
        assert!(wflvr_check_compact(&closed(1, r(3), r(4))).unwrap().present);
        assert!(!wflvr_check_compact(&closed(1, Rat::frac(1, 2), r(2))).unwrap().present);
        assert!(!wflvr_check_compact(&closed(1, r(1), r(1))).unwrap().present);
    }

    #[test]
    fn call_family_tail() {
        let zero = vec![Rat::zero(); 6];
        let rep = call_family_check(&r(1), 4, &zero).unwrap();
        assert!(!rep.usa && rep.positive_tail.is_empty());
        let mut p = zero.clone();
        p[5] = Rat::frac(1, 2);
        let rep = call_family_check(&r(1), 4, &p).unwrap();
        assert!(rep.usa);
        assert_eq!(rep.positive_tail, vec![6]);
    }
}
