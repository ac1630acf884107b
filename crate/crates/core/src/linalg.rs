//! Small exact linear algebra over `Rat`: row reduction, null spaces and
//! orthogonal projection onto a span.

use crate::rat::{dot, Rat};

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[Vec<Rat>], ncols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().expect("nonzero pivot");
        for v in &mut m[r] {
            *v *= &inv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : row·x = 0 for every row}`.
pub fn null_space(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let (r, pivots) = rref(rows, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = -&row[free];
        }
        basis.push(v);
    }
    basis
}

/// Orthogonal projection of `v` onto the span of `gens`.
pub fn project(gens: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    let n = v.len();
    let (basis, _) = rref(gens, n);
    if basis.is_empty() {
        return vec![Rat::zero(); n];
    }
    // Solve (B Bᵀ) c = B v, then proj = Bᵀ c.
    let k = basis.len();
    let mut aug: Vec<Vec<Rat>> = (0..k)
        .map(|i| {
            let mut row: Vec<Rat> = (0..k).map(|j| dot(&basis[i], &basis[j])).collect();
            row.push(dot(&basis[i], v));
            row
        })
        .collect();
    let (red, _) = rref(&aug, k);
    aug = red;
    let mut out = vec![Rat::zero(); n];
    for (i, b) in basis.iter().enumerate() {
        let c = &aug[i][k];
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| Rat::from_int(x)).collect()
    }

    #[test]
    fn null_space_is_orthogonal() {
        let rows = vec![v(&[1, 2, 3]), v(&[2, 4, 6])];
        let ns = null_space(&rows, 3);
        assert_eq!(ns.len(), 2);
        for n in &ns {
            assert!(dot(&rows[0], n).is_zero());
        }
        assert_eq!(rank(&rows, 3), 1);
    }

    #[test]
    fn projection_onto_axis_and_plane() {
        let p = project(&[v(&[0, 1, 0])], &v(&[2, -3, 5]));
        assert_eq!(p, v(&[0, -3, 0]));
        let p = project(&[v(&[1, 1, 0])], &v(&[1, 0, 7]));
        assert_eq!(p, vec![Rat::frac(1, 2), Rat::frac(1, 2), Rat::zero()]);
        assert_eq!(project(&[], &v(&[1, 2])), v(&[0, 0]));
    }
}
