//! Eigendecomposition by cyclic Jacobi rotations, truncated square-root
//! factors `S` with `SᵀS ≈ X`, and column-based monomial masks.

use nalgebra::DMatrix;

use super::{MonomialMask, SdpError};
use crate::algebra::Monomial;

#[derive(Clone, Debug)]
pub struct SpectralFactor {
    /// One row per retained eigenvalue, one column per basis monomial.
    pub s: DMatrix<f64>,
    /// All eigenvalues of `X`, descending.
    pub eigenvalues: Vec<f64>,
    /// Absolute threshold below which eigenvalues were dropped.
    pub threshold: f64,
}

impl SpectralFactor {
    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.s.transpose() * &self.s
    }

    /// Largest entry of `|SᵀS − X|`.
    pub fn reconstruction_error(&self, x: &DMatrix<f64>) -> f64 {
        (self.reconstruct() - x).amax()
    }
}

/// Eigenvalues (descending) and matching eigenvectors as columns.
pub fn jacobi_eigen(x: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), SdpError> {
    let n = x.nrows();
    if x.ncols() != n {
        return Err(SdpError::Dimension(format!(
            "{}×{} matrix is not square",
            n,
            x.ncols()
        )));
    }
    let mut a = (x + x.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let (arp, arq) = (a[(r, p)], a[(r, q)]);
                        a[(r, p)] = c * arp - s * arq;
                        a[(p, r)] = a[(r, p)];
                        a[(r, q)] = s * arp + c * arq;
                        a[(q, r)] = a[(r, q)];
                    }
                    let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok((values, vectors))
}

/// `S = D^{1/2} Vᵀ` over the eigenvalues above `eig_tol · max(1, λ_max)`.
pub fn spectral_factor(x: &DMatrix<f64>, eig_tol: f64) -> Result<SpectralFactor, SdpError> {
    let (values, vectors) = jacobi_eigen(x)?;
    let lmax = values.first().copied().unwrap_or(0.0);
    let threshold = eig_tol * lmax.max(1.0);
    if let Some(&lmin) = values.last() {
        if lmin < -threshold {
            return Err(SdpError::Indefinite(lmin));
        }
    }
    let kept: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] > threshold)
        .collect();
    let n = x.nrows();
    let s = DMatrix::from_fn(kept.len(), n, |r, c| {
        values[kept[r]].sqrt() * vectors[(c, kept[r])]
    });
    Ok(SpectralFactor {
        s,
        eigenvalues: values,
        threshold,
    })
}

/// Keeps the columns of `S` with an entry above `col_tol` in absolute
/// value, plus the constant monomial of `basis` if present.
pub fn suggest_mask(factor: &SpectralFactor, col_tol: f64, basis: &[Monomial]) -> MonomialMask {
    let retained = (0..factor.s.ncols())
        .filter(|&c| {
            factor.s.column(c).amax() > col_tol || basis.get(c).is_some_and(Monomial::is_one)
        })
        .collect();
    MonomialMask::new(retained)
}
