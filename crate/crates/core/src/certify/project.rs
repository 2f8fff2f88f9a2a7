//! Exact projection of a rounded Gram matrix onto its constraint space.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use super::{rationalize, RatMatrix};
use crate::algebra::Rat;
use crate::sdp::{jacobi_eigen, Constraint};

type Row = BTreeMap<usize, Rat>;

/// Position of `(i, j)`, `i ≤ j`, in the row-major upper triangle of a `p×p`
/// matrix.
fn slot(p: usize, i: usize, j: usize) -> usize {
    i * p - i * (i + 1) / 2 + j
}

fn axpy(row: &mut Row, f: &Rat, other: &Row) {
    for (k, v) in other {
        let e = row.entry(*k).or_insert_with(Rat::zero);
        *e -= &(f * v);
        if e.is_zero() {
            row.remove(k);
        }
    }
}

/// The symmetric matrix nearest to `q` (Euclidean norm on the upper
/// triangle) with `⟨A_t, Y⟩ = b_t` for every constraint and `Y k = 0` for
/// every `k` in `kernel`. `None` when these equations are inconsistent.
///
/// Feasible sets of Gram problems often lie in a proper face of the PSD
/// cone; rounding leaves that face, and the kernel equations bring the
/// point back.
pub fn project_gram(
    q: &RatMatrix,
    constraints: &[Constraint],
    kernel: &[Vec<Rat>],
) -> Option<RatMatrix> {
    let p = q.len();
    let n = p * (p + 1) / 2;
    let mut eqs: Vec<(Row, Rat)> = Vec::new();
    for c in constraints {
        let mut row = Row::new();
        for (i, j, a) in &c.entries {
            let a = if i == j { a.clone() } else { a + a };
            *row.entry(slot(p, *i, *j)).or_insert_with(Rat::zero) += &a;
        }
        row.retain(|_, v| !v.is_zero());
        eqs.push((row, c.rhs.clone()));
    }
    for k in kernel.iter().filter(|k| k.len() == p) {
        for i in 0..p {
            let mut row = Row::new();
            for (j, kj) in k.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                *row.entry(slot(p, i.min(j), i.max(j)))
                    .or_insert_with(Rat::zero) += kj;
            }
            row.retain(|_, v| !v.is_zero());
            eqs.push((row, Rat::zero()));
        }
    }

    // independent rows by elimination; the originals are kept for C Cᵀ
    let mut pivots: Vec<(usize, Row, Rat)> = Vec::new();
    let mut basis: Vec<(Row, Rat)> = Vec::new();
    for (row, rhs) in eqs {
        let (mut r, mut b) = (row.clone(), rhs.clone());
        for (col, prow, prhs) in &pivots {
            if let Some(v) = r.get(col).cloned() {
                axpy(&mut r, &v, prow);
                b -= &(&v * prhs);
            }
        }
        match r.keys().next().copied() {
            None if b.is_zero() => {}
            None => return None,
            Some(col) => {
                let inv = r[&col].recip();
                let r: Row = r.into_iter().map(|(k, v)| (k, &v * &inv)).collect();
                let b = &b * &inv;
                for (_, prow, prhs) in pivots.iter_mut() {
                    if let Some(v) = prow.get(&col).cloned() {
                        axpy(prow, &v, &r);
                        *prhs -= &(&v * &b);
                    }
                }
                pivots.push((col, r, b));
                basis.push((row, rhs));
            }
        }
    }

    let mut u = vec![Rat::zero(); n];
    for i in 0..p {
        for j in i..p {
            u[slot(p, i, j)] = q[i][j].clone();
        }
    }
    // u − Cᵀ (C Cᵀ)⁻¹ (C u − d)
    let m = basis.len();
    let dot =
        |a: &Row, b: &Row| -> Rat { a.iter().filter_map(|(k, v)| b.get(k).map(|w| v * w)).sum() };
    let mut g: Vec<Vec<Rat>> = (0..m)
        .map(|a| (0..m).map(|b| dot(&basis[a].0, &basis[b].0)).collect())
        .collect();
    let mut r: Vec<Rat> = basis
        .iter()
        .map(|(row, d)| row.iter().map(|(k, v)| v * &u[*k]).sum::<Rat>() - d)
        .collect();
    let lambda = solve_dense(&mut g, &mut r)?;
    for ((row, _), l) in basis.iter().zip(&lambda) {
        for (k, v) in row {
            u[*k] -= &(v * l);
        }
    }
    let mut y = vec![vec![Rat::zero(); p]; p];
    for i in 0..p {
        for j in i..p {
            y[i][j] = u[slot(p, i, j)].clone();
            y[j][i] = y[i][j].clone();
        }
    }
    Some(y)
}

/// Rational basis of the span of the eigenvectors of `x` beyond the leading
/// `rank`, read off the reduced row echelon form with entries rounded to
/// denominators up to `max_den`. `None` unless every vector `k` satisfies
/// `|x k|∞ ≤ tol·|x|∞·|k|∞`.
pub fn rational_kernel(
    x: &DMatrix<f64>,
    rank: usize,
    max_den: u64,
    tol: f64,
) -> Option<Vec<Vec<Rat>>> {
    let n = x.nrows();
    let (_, vecs) = jacobi_eigen(x).ok()?;
    let mut m: Vec<Vec<f64>> = (rank..n)
        .map(|c| vecs.column(c).iter().copied().collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m.len() {
            break;
        }
        let best = (r..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[best][c].abs() < 1e-6 {
            continue;
        }
        m.swap(r, best);
        let inv = 1.0 / m[r][c];
        m[r].iter_mut().for_each(|v| *v *= inv);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0.0 {
                let f = m[i][c];
                for k in 0..n {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let scale = x.amax().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for row in m.iter().take(r) {
        let k: Vec<Rat> = row.iter().map(|&v| rationalize(v, max_den)).collect();
        let kf: Vec<f64> = k.iter().map(Rat::to_f64).collect();
        let norm = kf.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let worst = (0..n)
            .map(|i| (0..n).map(|j| x[(i, j)] * kf[j]).sum::<f64>().abs())
            .fold(0.0, f64::max);
        if worst > tol * scale * norm {
            return None;
        }
        out.push(k);
    }
    Some(out)
}

/// Gauss-Jordan on a nonsingular system.
fn solve_dense(a: &mut [Vec<Rat>], b: &mut [Rat]) -> Option<Vec<Rat>> {
    let n = b.len();
    for c in 0..n {
        let r = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, r);
        b.swap(c, r);
        let inv = a[c][c].recip();
        for k in c..n {
            a[c][k] = &a[c][k] * &inv;
        }
        b[c] = &b[c] * &inv;
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in c..n {
                    let d = &f * &a[c][k];
                    a[r][k] -= &d;
                }
                let d = &f * &b[c];
                b[r] -= &d;
            }
        }
    }
    debug_assert!(a.iter().enumerate().all(|(i, row)| row[i].is_one()));
    Some(b.to_vec())
}
