//! Homogeneous self-dual interior-point method for
//! `min ⟨C,X⟩ s.t. ⟨A_t,X⟩ = b_t, X ⪰ 0`, using the HKM search direction
//! with Mehrotra predictor-corrector steps and dense linear algebra.
//!
//! The embedding iterates on `(X, y, Z, τ, κ)`. Feasibility shows up as
//! `τ > 0` with vanishing residuals; primal infeasibility as `bᵀy > 0`
//! with `Σ y_t A_t + Z → 0`, which yields the ray `y / bᵀy`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_traits::Zero;

use super::{independent_rows, Independence, SdpError, SdpProblem};
use crate::algebra::Rat;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// Relative residual and gap tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdpStatus {
    Feasible,
    Infeasible,
    Indeterminate,
}

impl SdpStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SdpStatus::Feasible => "feasible",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Indeterminate => "indeterminate",
        }
    }
}

/// Improving ray: multipliers with `Σ y_t b_t = 1` and `Σ y_t A_t ⪯ 0`.
/// For any feasible `X` weak duality would give `1 = ⟨Σ y_t A_t, X⟩ ≤ 0`.
#[derive(Clone, Debug)]
pub struct InfeasibilityWitness {
    pub y: Vec<f64>,
    /// Exact multipliers when infeasibility was found by exact elimination;
    /// then `Σ y_t A_t = 0` identically.
    pub exact: Option<Vec<Rat>>,
}

impl InfeasibilityWitness {
    /// `Σ y_t b_t`.
    pub fn objective(&self, problem: &SdpProblem) -> f64 {
        problem
            .constraints()
            .iter()
            .zip(&self.y)
            .map(|(c, y)| c.rhs.to_f64() * y)
            .sum()
    }

    /// Largest eigenvalue of `Σ y_t A_t`.
    pub fn max_eigenvalue(&self, problem: &SdpProblem) -> f64 {
        let data = Data::new(problem, None);
        let s = data.at(&DVector::from_column_slice(&self.y));
        s.symmetric_eigenvalues().max()
    }

    /// Mechanical check of the weak-duality pattern with margin `tol`.
    pub fn check(&self, problem: &SdpProblem, tol: f64) -> bool {
        if let Some(exact) = &self.exact {
            return exact_ray_holds(problem, exact);
        }
        self.y.len() == problem.num_constraints()
            && (self.objective(problem) - 1.0).abs() <= 1e-9
            && self.max_eigenvalue(problem) <= tol
    }
}

fn exact_ray_holds(problem: &SdpProblem, y: &[Rat]) -> bool {
    let mut rhs = Rat::zero();
    let mut acc = std::collections::BTreeMap::new();
    for (c, yt) in problem.constraints().iter().zip(y) {
        rhs += &(&c.rhs * yt);
        for (i, j, a) in &c.entries {
            *acc.entry((*i, *j)).or_insert_with(Rat::zero) += &(a * yt);
        }
    }
    y.len() == problem.num_constraints() && rhs == Rat::from(1) && acc.values().all(Zero::is_zero)
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal matrix `X/τ`; zero unless feasible or indeterminate.
    pub x: DMatrix<f64>,
    /// Dual multipliers `y/τ`, one per constraint.
    pub y: Vec<f64>,
    /// Largest `|⟨A_t,X⟩ − b_t|`.
    pub primal_residual: f64,
    /// Frobenius norm of `C − Σ y_t A_t − Z` (scaled by `1/τ`).
    pub dual_residual: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub iterations: usize,
    pub witness: Option<InfeasibilityWitness>,
}

/// Constraint data in floating point, restricted to independent rows.
struct Data {
    p: usize,
    rows: Vec<usize>,
    a: Vec<Vec<(usize, usize, f64)>>,
    b: DVector<f64>,
    c: DMatrix<f64>,
}

impl Data {
    fn new(problem: &SdpProblem, rows: Option<Vec<usize>>) -> Self {
        let p = problem.p();
        let rows = rows.unwrap_or_else(|| (0..problem.num_constraints()).collect());
        let a = rows
            .iter()
            .map(|&t| {
                problem.constraints()[t]
                    .entries
                    .iter()
                    .map(|(i, j, v)| (*i, *j, v.to_f64()))
                    .collect()
            })
            .collect();
        let b = DVector::from_iterator(
            rows.len(),
            rows.iter().map(|&t| problem.constraints()[t].rhs.to_f64()),
        );
        let mut c = DMatrix::zeros(p, p);
        for (i, j, v) in problem.objective() {
            c[(*i, *j)] = v.to_f64();
            c[(*j, *i)] = v.to_f64();
        }
        Data { p, rows, a, b, c }
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    /// `⟨A_t, W⟩` for every row; `W` need not be symmetric.
    fn apply(&self, w: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.a.iter().map(|row| inner(row, w)))
    }

    /// `Σ y_t A_t`.
    fn at(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.p, self.p);
        for (row, yt) in self.a.iter().zip(y.iter()) {
            for &(i, j, v) in row {
                s[(i, j)] += v * yt;
                if i != j {
                    s[(j, i)] += v * yt;
                }
            }
        }
        s
    }

    /// HKM Schur complement `M_ij = ⟨A_i, X A_j Z⁻¹⟩`.
    fn schur(&self, x: &DMatrix<f64>, zi: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        let mut t = DMatrix::zeros(self.p, self.p);
        for (j, row) in self.a.iter().enumerate() {
            t.fill(0.0);
            for &(a, b, v) in row {
                t.column_mut(b).axpy(v, &x.column(a), 1.0);
                if a != b {
                    t.column_mut(a).axpy(v, &x.column(b), 1.0);
                }
            }
            let u = &t * zi;
            for (i, other) in self.a.iter().enumerate().skip(j) {
                let v = inner(other, &u);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

fn inner(row: &[(usize, usize, f64)], w: &DMatrix<f64>) -> f64 {
    row.iter()
        .map(|&(i, j, v)| {
            if i == j {
                v * w[(i, i)]
            } else {
                v * (w[(i, j)] + w[(j, i)])
            }
        })
        .sum()
}

fn sym(w: DMatrix<f64>) -> DMatrix<f64> {
    let t = w.transpose();
    (w + t) * 0.5
}

/// Largest `α` keeping `X + α dX ⪰ 0`, given a Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let Some(y) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(w) = l.solve_lower_triangular(&y.transpose()) else {
        return 0.0;
    };
    let lmin = sym(w).symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn scalar_step(v: f64, dv: f64) -> f64 {
    if dv < 0.0 {
        -v / dv
    } else {
        f64::INFINITY
    }
}

struct Iterate {
    x: DMatrix<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Per-iteration quantities shared by the predictor and corrector.
struct Linearization<'a> {
    data: &'a Data,
    zi: DMatrix<f64>,
    m_chol: Cholesky<f64, Dyn>,
    w: DVector<f64>,
    gc: f64,
    q2: DVector<f64>,
    rp: DVector<f64>,
    rd: DMatrix<f64>,
    rg: f64,
    a_xrdzi: DVector<f64>,
    c_xrdzi: f64,
}

impl Linearization<'_> {
    /// Solves the Newton system with residual weight `eta`, right-hand
    /// side `r` for the HKM complementarity row and `rtau` for `τκ`.
    fn solve(&self, it: &Iterate, eta: f64, r: &DMatrix<f64>, rtau: f64) -> Direction {
        let d = self.data;
        let h1 = &self.rp * eta - d.apply(r) + &self.a_xrdzi * eta;
        let h2 = eta * self.rg + d.c.dot(r) - eta * self.c_xrdzi + rtau / it.tau;
        let q1 = self.m_chol.solve(&h1);
        let bw = &d.b - &self.w;
        let dtau = (h2 - bw.dot(&q1)) / (bw.dot(&self.q2) + self.gc + it.kappa / it.tau);
        let dy = q1 + &self.q2 * dtau;
        let dz = &self.rd * eta - d.at(&dy) + &d.c * dtau;
        let dx = r - sym(&it.x * &dz * &self.zi);
        let dkappa = (rtau - it.kappa * dtau) / it.tau;
        Direction {
            dx,
            dy,
            dz,
            dtau,
            dkappa,
        }
    }
}

fn regularized_cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = m
        .diagonal()
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1.0);
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += shift;
        }
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        shift = if shift == 0.0 {
            1e-14 * scale
        } else {
            shift * 100.0
        };
    }
    None
}

/// Solves the problem; the iteration is deterministic.
pub fn solve(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution, SdpError> {
    let p = problem.p();
    let m_all = problem.num_constraints();
    if p == 0 {
        return Err(SdpError::EmptyBasis);
    }
    let rows = match independent_rows(problem) {
        Independence::Rows(rows) => rows,
        Independence::Inconsistent(y) => {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                x: DMatrix::zeros(p, p),
                y: vec![0.0; m_all],
                primal_residual: f64::INFINITY,
                dual_residual: 0.0,
                gap: 0.0,
                iterations: 0,
                witness: Some(InfeasibilityWitness {
                    y: y.iter().map(Rat::to_f64).collect(),
                    exact: Some(y),
                }),
            });
        }
    };
    let data = Data::new(problem, Some(rows));
    let tol = settings.tol;
    let bnorm = 1.0 + data.b.amax();
    let cnorm = 1.0 + data.c.norm();
    let mut it = Iterate {
        x: DMatrix::identity(p, p),
        y: DVector::zeros(data.m()),
        z: DMatrix::identity(p, p),
        tau: 1.0,
        kappa: 1.0,
    };
    let expand = |y: &DVector<f64>, scale: f64| -> Vec<f64> {
        let mut out = vec![0.0; m_all];
        for (k, &t) in data.rows.iter().enumerate() {
            out[t] = y[k] * scale;
        }
        out
    };

    let mut last = (f64::INFINITY, f64::INFINITY);
    let mut done = 0;
    for iter in 0..=settings.max_iter {
        let ax = data.apply(&it.x);
        let rp = &data.b * it.tau - &ax;
        let rd = &data.c * it.tau - data.at(&it.y) - &it.z;
        let cx = data.c.dot(&it.x);
        let by = data.b.dot(&it.y);
        let rg = it.kappa + cx - by;
        let mu = (it.x.dot(&it.z) + it.tau * it.kappa) / (p as f64 + 1.0);

        let pres = rp.amax() / it.tau / bnorm;
        let dres = rd.norm() / it.tau / cnorm;
        let (pobj, dobj) = (cx / it.tau, by / it.tau);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        last = (rd.norm() / it.tau, gap);
        done = iter;
        log::trace!("sdp iter {iter}: pres {pres:.2e} dres {dres:.2e} gap {gap:.2e} tau {:.2e} kappa {:.2e} mu {mu:.2e}", it.tau, it.kappa);
        if pres <= tol && dres <= tol && gap <= tol {
            let x = sym(it.x.clone() / it.tau);
            return Ok(SdpSolution {
                status: SdpStatus::Feasible,
                primal_residual: problem.max_residual(&x),
                x,
                y: expand(&it.y, 1.0 / it.tau),
                dual_residual: rd.norm() / it.tau,
                gap,
                iterations: iter,
                witness: None,
            });
        }
        if by > 0.0 {
            let ray = (data.at(&it.y) + &it.z).norm() / by;
            if ray <= tol {
                return Ok(SdpSolution {
                    status: SdpStatus::Infeasible,
                    x: DMatrix::zeros(p, p),
                    y: expand(&it.y, 1.0 / by),
                    primal_residual: pres,
                    dual_residual: dres,
                    gap,
                    iterations: iter,
                    witness: Some(InfeasibilityWitness {
                        y: expand(&it.y, 1.0 / by),
                        exact: None,
                    }),
                });
            }
        }
        if iter == settings.max_iter {
            break;
        }

        let Some(zchol) = it.z.clone().cholesky() else {
            break;
        };
        let Some(xchol) = it.x.clone().cholesky() else {
            break;
        };
        let zi = sym(zchol.inverse());
        let Some(m_chol) = regularized_cholesky(data.schur(&it.x, &zi)) else {
            break;
        };
        let xczi = &it.x * &data.c * &zi;
        let w = data.apply(&xczi);
        let gc = data.c.dot(&xczi);
        let q2 = m_chol.solve(&(&w + &data.b));
        let xrdzi = &it.x * &rd * &zi;
        let lin = Linearization {
            data: &data,
            a_xrdzi: data.apply(&xrdzi),
            c_xrdzi: data.c.dot(&xrdzi),
            zi,
            m_chol,
            w,
            gc,
            q2,
            rp,
            rd,
            rg,
        };

        let step = |d: &Direction| -> f64 {
            max_step(&xchol, &d.dx)
                .min(max_step(&zchol, &d.dz))
                .min(scalar_step(it.tau, d.dtau))
                .min(scalar_step(it.kappa, d.dkappa))
        };

        // predictor
        let pred = lin.solve(&it, 1.0, &(-&it.x), -it.tau * it.kappa);
        let alpha_a = step(&pred).min(1.0);
        let mu_a = ((&it.x + &pred.dx * alpha_a).dot(&(&it.z + &pred.dz * alpha_a))
            + (it.tau + alpha_a * pred.dtau) * (it.kappa + alpha_a * pred.dkappa))
            / (p as f64 + 1.0);
        let sigma = (mu_a / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let r = sym(&lin.zi * (sigma * mu) - &it.x - &pred.dx * &pred.dz * &lin.zi);
        let rtau = sigma * mu - it.tau * it.kappa - pred.dtau * pred.dkappa;
        let dir = lin.solve(&it, 1.0 - sigma, &r, rtau);
        let alpha = (0.98 * step(&dir)).min(1.0);

        it.x = sym(&it.x + &dir.dx * alpha);
        it.y += &dir.dy * alpha;
        it.z = sym(&it.z + &dir.dz * alpha);
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
    }

    let x = sym(it.x.clone() / it.tau);
    Ok(SdpSolution {
        status: SdpStatus::Indeterminate,
        primal_residual: problem.max_residual(&x),
        x,
        y: expand(&it.y, 1.0 / it.tau),
        dual_residual: last.0,
        gap: last.1,
        iterations: done,
        witness: None,
    })
}
