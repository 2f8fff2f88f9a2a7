//! Rounding floats to small-denominator rationals and exact PSD checks.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::algebra::Rat;

/// Dense symmetric rational matrix, row major.
pub type RatMatrix = Vec<Vec<Rat>>;

/// Last continued-fraction convergent of `x` whose denominator is at most
/// `max_den`. The expansion runs on the exact binary value of `x`, so a
/// float that is exactly `p/q` with `q ≤ max_den` comes back as `p/q`.
pub fn rationalize(x: f64, max_den: u64) -> Rat {
    let Some(exact) = Rat::from_f64_exact(x) else {
        return Rat::zero();
    };
    let max_den = BigInt::from(max_den.max(1));
    let (mut num, mut den) = (exact.numer().clone(), exact.denom().clone());
    // convergents h/k with the usual three-term recurrence
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut best = Rat::from_integer(num.div_floor(&den));
    while !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > max_den {
            break;
        }
        best = Rat::new(h2.clone(), k2.clone());
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        (num, den) = (den, r);
    }
    best
}

/// Entrywise [`rationalize`], then the upper triangle is copied down so the
/// result is exactly symmetric.
pub fn round_gram(x: &DMatrix<f64>, max_den: u64) -> RatMatrix {
    let n = x.nrows();
    let mut q = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rationalize(x[(i, j)], max_den);
            q[j][i] = v.clone();
            q[i][j] = v;
        }
    }
    q
}

pub fn is_symmetric(q: &RatMatrix) -> bool {
    let n = q.len();
    q.iter().all(|r| r.len() == n) && (0..n).all(|i| (0..i).all(|j| q[i][j] == q[j][i]))
}

pub fn to_f64_matrix(q: &RatMatrix) -> DMatrix<f64> {
    let n = q.len();
    DMatrix::from_fn(n, n, |i, j| q[i][j].to_f64())
}

/// `PᵀQP = LDLᵀ` with `P` given as `perm` (`(PᵀQP)_{ab} = Q[perm[a]][perm[b]]`),
/// `L` unit lower triangular and `D ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LdlWitness {
    pub perm: Vec<usize>,
    pub l: RatMatrix,
    pub d: Vec<Rat>,
}

impl LdlWitness {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Number of nonzero pivots.
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|v| !v.is_zero()).count()
    }

    /// `P L D Lᵀ Pᵀ`.
    pub fn reconstruct(&self) -> RatMatrix {
        let n = self.dim();
        let mut q = vec![vec![Rat::zero(); n]; n];
        for a in 0..n {
            for b in 0..=a {
                let mut s = Rat::zero();
                for k in 0..=b {
                    if !self.d[k].is_zero() {
                        s += &(&(&self.l[a][k] * &self.l[b][k]) * &self.d[k]);
                    }
                }
                let (i, j) = (self.perm[a], self.perm[b]);
                q[j][i] = s.clone();
                q[i][j] = s;
            }
        }
        q
    }

    /// Shape, unit diagonal, nonnegative pivots and exact reproduction of `q`.
    pub fn certifies(&self, q: &RatMatrix) -> bool {
        let n = self.dim();
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return false;
            }
        }
        self.perm.len() == n
            && q.len() == n
            && self.l.len() == n
            && self.l.iter().enumerate().all(|(a, row)| {
                row.len() == n && row[a].is_one() && row[a + 1..].iter().all(Zero::is_zero)
            })
            && self.d.iter().all(|v| !v.is_negative())
            && self.reconstruct() == *q
    }
}

/// A principal submatrix with negative determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdFailure {
    /// Original row/column indices of the submatrix.
    pub indices: Vec<usize>,
    pub determinant: Rat,
    /// The offending pivot of the Schur complement.
    pub pivot: Rat,
}

/// Symmetric-pivoted LDLᵀ over the rationals, choosing the largest remaining
/// diagonal entry at each step. Succeeds exactly when `q` is PSD.
#[allow(clippy::result_large_err)]
pub fn psd_witness(q: &RatMatrix) -> Result<LdlWitness, PsdFailure> {
    assert!(
        is_symmetric(q),
        "psd_witness needs a square symmetric matrix"
    );
    let n = q.len();
    let mut a = q.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![vec![Rat::zero(); n]; n];
    let mut d = vec![Rat::zero(); n];
    let mut det = Rat::one();
    for k in 0..n {
        let j = (k..n)
            .max_by(|&x, &y| a[x][x].cmp(&a[y][y]).then(y.cmp(&x)))
            .unwrap();
        let pivot = a[j][j].clone();
        if pivot.is_negative() {
            let mut indices = perm[..k].to_vec();
            indices.push(perm[j]);
            return Err(PsdFailure {
                indices,
                determinant: &det * &pivot,
                pivot,
            });
        }
        if pivot.is_zero() {
            // the largest diagonal entry is zero; a negative one fails alone
            if let Some(r) = (k..n).find(|&r| a[r][r].is_negative()) {
                let mut indices = perm[..k].to_vec();
                indices.push(perm[r]);
                return Err(PsdFailure {
                    indices,
                    determinant: &det * &a[r][r],
                    pivot: a[r][r].clone(),
                });
            }
            // a PSD matrix with zero diagonal vanishes; any nonzero entry
            // gives a 2×2 minor −a² < 0
            for r in k..n {
                for c in k..r {
                    if !a[r][c].is_zero() {
                        let mut indices = perm[..k].to_vec();
                        indices.extend([perm[c], perm[r]]);
                        let m = -(&a[r][c] * &a[r][c]);
                        return Err(PsdFailure {
                            indices,
                            determinant: &det * &m,
                            pivot: m,
                        });
                    }
                }
            }
            for r in k..n {
                l[r][r] = Rat::one();
            }
            break;
        }
        // rows of L to the right of column k are still zero, so whole rows swap
        swap_sym(&mut a, k, j);
        perm.swap(k, j);
        l.swap(k, j);
        l[k][k] = Rat::one();
        for r in k + 1..n {
            let f = &a[r][k] / &pivot;
            for c in k + 1..=r {
                let delta = &f * &a[c][k];
                a[r][c] -= &delta;
                if r != c {
                    a[c][r] = a[r][c].clone();
                }
            }
            l[r][k] = f;
        }
        det *= &pivot;
        d[k] = pivot;
    }
    Ok(LdlWitness { perm, l, d })
}

fn swap_sym(a: &mut RatMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn mat(rows: &[&[i64]]) -> RatMatrix {
        rows.iter()
            .map(|row| row.iter().map(|&v| Rat::from(v)).collect())
            .collect()
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(rationalize(0.667, 99), r(2, 3));
        assert_eq!(rationalize(0.0, 99), Rat::zero());
        assert_eq!(rationalize(-2.667, 99), r(-8, 3));
        assert_eq!(rationalize(1.333, 99), r(4, 3));
        assert_eq!(rationalize(0.222, 99), r(2, 9));
        assert_eq!(rationalize(-0.445, 99), r(-4, 9));
        assert_eq!(rationalize(0.889, 99), r(8, 9));
        assert_eq!(rationalize(0.5, 1), Rat::zero());
        assert_eq!(rationalize(0.75, 1_000_000), r(3, 4));
        assert_eq!(rationalize(-7.0, 5), Rat::from(-7));
    }

    #[test]
    fn round_gram_symmetrizes_from_upper() {
        let x = DMatrix::from_row_slice(2, 2, &[1.333, 0.222, 0.9, 1.0]);
        let q = round_gram(&x, 99);
        assert_eq!(q, vec![vec![r(4, 3), r(2, 9)], vec![r(2, 9), Rat::one()]]);
        let id = round_gram(&DMatrix::identity(3, 3), 99);
        assert_eq!(id, mat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
    }

    #[test]
    fn identity_and_indefinite() {
        let w = psd_witness(&mat(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(w.d, vec![Rat::one(), Rat::one()]);
        let f = psd_witness(&mat(&[&[1, 2], &[2, 1]])).unwrap_err();
        assert_eq!(f.pivot, Rat::from(-3));
        assert_eq!(f.determinant, Rat::from(-3));
        assert_eq!(f.indices, vec![0, 1]);
    }

    #[test]
    fn zero_diagonal_cases() {
        let w = psd_witness(&mat(&[&[0, 0], &[0, 0]])).unwrap();
        assert_eq!(w.rank(), 0);
        assert!(w.certifies(&mat(&[&[0, 0], &[0, 0]])));
        let f = psd_witness(&mat(&[&[1, 0, 0], &[0, 0, 2], &[0, 2, 0]])).unwrap_err();
        assert_eq!(f.determinant, Rat::from(-4));
        assert_eq!(f.indices, vec![0, 1, 2]);
        let f = psd_witness(&mat(&[&[-1]])).unwrap_err();
        assert_eq!(f.indices, vec![0]);
        let f = psd_witness(&mat(&[&[0, 0], &[0, -1]])).unwrap_err();
        assert_eq!((f.indices, f.pivot), (vec![1], Rat::from(-1)));
    }

    #[test]
    fn pivoting_reproduces_matrix() {
        let q = mat(&[&[1, 2, 0], &[2, 5, 3], &[0, 3, 9]]);
        let w = psd_witness(&q).unwrap();
        assert_eq!(w.perm[0], 2);
        assert!(w.certifies(&q));
        let mut bad = w.clone();
        bad.d[0] = Rat::from(-1);
        assert!(!bad.certifies(&q));
    }

    #[test]
    fn rank_one_semidefinite() {
        // v vᵀ with v = (1, -2/3, 1/3)
        let v = [Rat::one(), r(-2, 3), r(1, 3)];
        let q: RatMatrix = v
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        let w = psd_witness(&q).unwrap();
        assert_eq!(w.rank(), 1);
        assert!(w.certifies(&q));
    }

    #[test]
    fn round_trip_small_denominators() {
        for den in 1i64..=20 {
            for num in -200i64..=200 {
                let exact = r(num, den);
                assert_eq!(
                    rationalize(num as f64 / den as f64, 20),
                    exact,
                    "{num}/{den}"
                );
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn exact_and_float_psd_agree(
            entries in proptest::collection::vec(-3i64..=3, 16),
            shift in -2i64..=4,
        ) {
            // B Bᵀ − shift·I, often singular or indefinite
            let b: Vec<Vec<Rat>> = entries.chunks(4).map(|c| c.iter().map(|&v| Rat::from(v)).collect()).collect();
            let mut q = vec![vec![Rat::zero(); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    q[i][j] = (0..2).map(|k| &b[i][k] * &b[j][k]).sum();
                }
                q[i][i] -= &Rat::from(shift);
            }
            let lmin = to_f64_matrix(&q).symmetric_eigenvalues().min();
            let exact = psd_witness(&q);
            proptest::prop_assert_eq!(exact.is_ok(), lmin >= -1e-9);
            if let Ok(w) = exact {
                proptest::prop_assert!(w.certifies(&q));
            }
        }
    }
}
