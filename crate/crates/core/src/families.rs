//! Closed-form certificate families and the structured ansatz search.
//!
//! Every family writes its summands in terms of the row sums
//! `E_q(g) = Σ_{|S|=q} Π_{h∈S} x_gh`, the elementary symmetric polynomials of
//! the vertex variables in row `g`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, Monomial, Polynomial, QuadExt, Rat, VarTable};
use crate::certify::{
    certificate_residual, gram_residual, gram_to_polys, project_gram, round_gram, CertifyError,
    GramCertificate, PolyCertificate, RatMatrix,
};
use crate::groebner::{buchberger, GroebnerBasis, GroebnerError};
use crate::model::{build_fstar_in, build_ideal_sos, subsets, GraphClassParams};
use crate::oracle::fstar_zeros;
use crate::sdp::{solve, Constraint, SdpError, SdpProblem, SdpStatus, SolverSettings, SymEntries};
use crate::MonomialOrder;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("{family} is not defined at {params}: {reason}")]
    Domain {
        family: String,
        params: String,
        reason: String,
    },
    #[error("unknown family `{0}` (expected thm46, thm51, thm52 or conj54:<j>)")]
    Unknown(String),
    #[error("{0} has no closed form; use the ansatz search")]
    NoClosedForm(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Thm46,
    Thm51,
    Thm52,
    /// Degree-`j` ansatz.
    Conj54(usize),
}

impl FamilyId {
    /// Degree bound of the certificate.
    pub fn ell(&self) -> u32 {
        match self {
            FamilyId::Thm51 => 1,
            FamilyId::Thm46 | FamilyId::Thm52 => 2,
            FamilyId::Conj54(j) => *j as u32,
        }
    }

    pub fn check_domain(&self, p: GraphClassParams) -> Result<(), FamilyError> {
        let fail = |reason: &str| {
            Err(FamilyError::Domain {
                family: self.to_string(),
                params: p.to_string(),
                reason: reason.to_string(),
            })
        };
        match *self {
            FamilyId::Thm46 => {
                if p.n_g < 3 || p.k_g + 1 != p.n_g || p.n_h != 3 || p.k_h != 2 {
                    return fail("needs k_G = n_G-1, n_H = 3, k_H = 2, n_G >= 3");
                }
            }
            FamilyId::Thm51 => {
                if p.n_g < 2 || p.k_g != p.n_g || p.k_h < 2 || p.k_h + 1 != p.n_h {
                    return fail("needs k_G = n_G >= 2, k_H = n_H-1 >= 2");
                }
            }
            FamilyId::Thm52 => {
                if p.n_g < 2 || p.k_g != p.n_g || p.k_h < 2 || p.k_h + 2 != p.n_h {
                    return fail("needs k_G = n_G >= 2, k_H = n_H-2 >= 2");
                }
            }
            FamilyId::Conj54(j) => {
                if j < 3 {
                    return fail("needs j >= 3");
                }
                if p.k_g != p.n_g || p.k_h < 1 || p.k_h + j != p.n_h {
                    return fail("needs k_G = n_G, k_H = n_H-j >= 1");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::Thm46 => write!(f, "thm46"),
            FamilyId::Thm51 => write!(f, "thm51"),
            FamilyId::Thm52 => write!(f, "thm52"),
            FamilyId::Conj54(j) => write!(f, "conj54:{j}"),
        }
    }
}

/// `thm46`, `thm51`, `thm52`, `conj54:<j>`.
impl FromStr for FamilyId {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "thm46" => Ok(FamilyId::Thm46),
            "thm51" => Ok(FamilyId::Thm51),
            "thm52" => Ok(FamilyId::Thm52),
            _ => t
                .strip_prefix("conj54")
                .map(|r| r.trim_start_matches([':', '-', '=']))
                .and_then(|r| r.parse().ok())
                .map(FamilyId::Conj54)
                .ok_or_else(|| FamilyError::Unknown(s.to_string())),
        }
    }
}

/// Closed-form certificate of a theorem family.
pub fn family_certificate(
    id: FamilyId,
    params: GraphClassParams,
) -> Result<PolyCertificate, FamilyError> {
    match id {
        FamilyId::Thm46 => cert_thm46(params),
        FamilyId::Thm51 => cert_thm51(params),
        FamilyId::Thm52 => cert_thm52(params),
        FamilyId::Conj54(_) => Err(FamilyError::NoClosedForm(id.to_string())),
    }
}

/// `E_q(g)`; `E_0 = 1`.
pub fn row_sum(vars: &Arc<VarTable>, g: usize, q: usize) -> Polynomial {
    let n_h = vars.params().n_h;
    let terms = subsets(n_h, q).into_iter().map(|s| {
        (
            Monomial::from_vars(s.into_iter().map(|h| vars.vertex(g, h))),
            Rat::one(),
        )
    });
    Polynomial::from_terms(vars.clone(), terms).expect("rational terms")
}

fn sqrt2(a: Rat, b: Rat) -> QuadExt {
    QuadExt::new(a, b, 2).expect("2 is squarefree")
}

fn q(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// `Σ_i c_i·p_i` over `Q(√d)`.
fn combine(
    vars: &Arc<VarTable>,
    parts: &[(QuadExt, &Polynomial)],
) -> Result<Polynomial<QuadExt>, AlgebraError> {
    let mut acc = Polynomial::zero(vars.clone());
    for (c, p) in parts {
        acc = acc.checked_add(&p.to_quadext().scale(c)?)?;
    }
    Ok(acc)
}

pub fn cert_thm51(params: GraphClassParams) -> Result<PolyCertificate, FamilyError> {
    FamilyId::Thm51.check_domain(params)?;
    let vars = Arc::new(VarTable::new(params));
    let k_h = QuadExt::from(params.k_h as i64);
    let one = Polynomial::one(vars.clone());
    let summands = (0..params.n_g)
        .map(|g| {
            combine(
                &vars,
                &[
                    (QuadExt::one(), &row_sum(&vars, g, 1)),
                    (-k_h.clone(), &one),
                ],
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(PolyCertificate::new(summands, 1)?)
}

/// `(α, β, γ)` of the degree-2 family at `n_H`.
pub fn thm52_coefficients(n_h: usize) -> (QuadExt, QuadExt, QuadExt) {
    let n = n_h as i64;
    let alpha = sqrt2(Rat::from((n - 2) * n), q((n - 2) * (n - 1), 2));
    let beta = sqrt2(Rat::from(-(2 * n - 3)), Rat::from(-(n - 2)));
    let gamma = sqrt2(Rat::from(2), Rat::one());
    (alpha, beta, gamma)
}

pub fn cert_thm52(params: GraphClassParams) -> Result<PolyCertificate, FamilyError> {
    FamilyId::Thm52.check_domain(params)?;
    let vars = Arc::new(VarTable::new(params));
    let (alpha, beta, gamma) = thm52_coefficients(params.n_h);
    let one = Polynomial::one(vars.clone());
    let summands = (0..params.n_g)
        .map(|g| {
            let (e1, e2) = (row_sum(&vars, g, 1), row_sum(&vars, g, 2));
            combine(
                &vars,
                &[
                    (alpha.clone(), &one),
                    (beta.clone(), &e1),
                    (gamma.clone(), &e2),
                ],
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(PolyCertificate::new(summands, 2)?)
}

/// Residuals `lhs − rhs` of the three coefficient equations of the
/// degree-2 family, where `rhs` is the constant side:
///
/// ```text
/// α² + ¼n(n−1)(n−2)(3n−5)γ² + n(n−1)(n−2)βγ         = −(n−2)
/// β² + 2αβ − (n−1)(n−2)(2n−3)γ² − 3(n−1)(n−2)βγ     = 1
/// 2β² + 2αγ + (1+3(n−1)(n−2))γ² + 2(3n−4)βγ         = 0
/// ```
pub fn check_system_52(
    alpha: &QuadExt,
    beta: &QuadExt,
    gamma: &QuadExt,
    n_h: i64,
) -> Result<[QuadExt; 3], AlgebraError> {
    let n = n_h;
    let c = |r: Rat| QuadExt::rational(r);
    let mul = |a: &QuadExt, b: &QuadExt| a.checked_mul(b);
    let (aa, bb, gg) = (mul(alpha, alpha)?, mul(beta, beta)?, mul(gamma, gamma)?);
    let (ab, ag, bg) = (mul(alpha, beta)?, mul(alpha, gamma)?, mul(beta, gamma)?);
    let sum = |parts: &[(Rat, &QuadExt)], rhs: i64| -> Result<QuadExt, AlgebraError> {
        let mut acc = c(Rat::from(-rhs));
        for (k, v) in parts {
            acc = acc.checked_add(&c(k.clone()).checked_mul(v)?)?;
        }
        Ok(acc)
    };
    let p = (n - 1) * (n - 2);
    let e1 = sum(
        &[
            (Rat::one(), &aa),
            (q(n * p * (3 * n - 5), 4), &gg),
            (Rat::from(n * p), &bg),
        ],
        -(n - 2),
    )?;
    let e2 = sum(
        &[
            (Rat::one(), &bb),
            (Rat::from(2), &ab),
            (Rat::from(-p * (2 * n - 3)), &gg),
            (Rat::from(-3 * p), &bg),
        ],
        1,
    )?;
    let e3 = sum(
        &[
            (Rat::from(2), &bb),
            (Rat::from(2), &ag),
            (Rat::from(1 + 3 * p), &gg),
            (Rat::from(2 * (3 * n - 4)), &bg),
        ],
        0,
    )?;
    Ok([e1, e2, e3])
}

/// `(α, β, γ)` of the degree-2 family with a small vertex class.
pub fn thm46_coefficients(n_g: usize) -> (QuadExt, QuadExt, QuadExt) {
    (
        sqrt2(Rat::zero(), Rat::from(n_g as i64 - 1)),
        sqrt2(Rat::zero(), q(-2, 3)),
        sqrt2(Rat::zero(), q(1, 3)),
    )
}

/// `[1, E_1(0), …, E_1(n_G−1), E_2(0), …, E_2(n_G−1)]`.
pub fn thm46_grouped_basis(vars: &Arc<VarTable>) -> Vec<Polynomial> {
    let n_g = vars.params().n_g;
    let mut out = vec![Polynomial::one(vars.clone())];
    out.extend((0..n_g).map(|g| row_sum(vars, g, 1)));
    out.extend((0..n_g).map(|g| row_sum(vars, g, 2)));
    out
}

/// Summand coefficients over [`thm46_grouped_basis`], one row per summand
/// (`s_0` first).
pub fn thm46_coefficient_rows(n_g: usize) -> Vec<Vec<QuadExt>> {
    let (alpha, beta, gamma) = thm46_coefficients(n_g);
    let mut s0 = vec![alpha];
    s0.extend(std::iter::repeat_n(beta, n_g));
    s0.extend(std::iter::repeat_n(gamma, n_g));
    let mut rows = vec![s0];
    for g in 0..n_g {
        let mut row = vec![QuadExt::zero(); 1 + 2 * n_g];
        row[1 + g] = QuadExt::rational(q(1, 3));
        row[1 + n_g + g] = QuadExt::rational(q(-2, 3));
        rows.push(row);
    }
    rows
}

/// `SᵀS` for coefficient rows `S`, which must come out rational.
pub fn grouped_gram(rows: &[Vec<QuadExt>]) -> Result<RatMatrix, FamilyError> {
    let n = rows.first().map_or(0, Vec::len);
    let mut out = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = QuadExt::zero();
            for row in rows {
                acc = acc.checked_add(&row[i].checked_mul(&row[j])?)?;
            }
            if !acc.is_rational() {
                return Err(FamilyError::Certify(CertifyError::Format(format!(
                    "Gram entry ({i},{j}) = {acc} is irrational"
                ))));
            }
            out[i][j] = acc.a().clone();
        }
    }
    Ok(out)
}

pub fn cert_thm46(params: GraphClassParams) -> Result<PolyCertificate, FamilyError> {
    FamilyId::Thm46.check_domain(params)?;
    let vars = Arc::new(VarTable::new(params));
    let basis = thm46_grouped_basis(&vars);
    let summands = thm46_coefficient_rows(params.n_g)
        .into_iter()
        .map(|row| {
            let parts: Vec<(QuadExt, &Polynomial)> = row
                .into_iter()
                .zip(&basis)
                .filter(|(c, _)| !c.is_zero())
                .collect();
            combine(&vars, &parts)
        })
        .collect::<Result<_, _>>()?;
    Ok(PolyCertificate::new(summands, 2)?)
}

/// Vectors `a`, `b_g`, `c_g` of length `n_G+1`: the columns of the summand
/// matrix, with the `s_g` rows first and `s_0` last.
pub fn thm46_vectors(n_g: usize) -> Vec<(String, Vec<QuadExt>)> {
    let rows = thm46_coefficient_rows(n_g);
    let column = |c: usize| -> Vec<QuadExt> {
        let mut v: Vec<QuadExt> = rows[1..].iter().map(|r| r[c].clone()).collect();
        v.push(rows[0][c].clone());
        v
    };
    let mut out = vec![("a".to_string(), column(0))];
    out.extend((0..n_g).map(|g| (format!("b{g}"), column(1 + g))));
    out.extend((0..n_g).map(|g| (format!("c{g}"), column(1 + n_g + g))));
    out
}

/// Target inner products of [`thm46_vectors`].
pub fn thm46_targets(n_g: usize) -> Vec<((String, String), QuadExt)> {
    let m = n_g as i64 - 1;
    let v = |r: Rat| QuadExt::rational(r);
    let pair = |a: String, b: String, r: Rat| ((a, b), v(r));
    let mut out = vec![pair("a".into(), "a".into(), Rat::from(2 * m * m))];
    for g in 0..n_g {
        let (b, c) = (format!("b{g}"), format!("c{g}"));
        out.push(pair("a".into(), b.clone(), q(-4 * m, 3)));
        out.push(pair("a".into(), c.clone(), q(2 * m, 3)));
        out.push(pair(b.clone(), b.clone(), Rat::one()));
        out.push(pair(c.clone(), c.clone(), q(6, 9)));
        out.push(pair(b.clone(), c.clone(), q(-6, 9)));
        for h in 0..n_g {
            if h == g {
                continue;
            }
            let (b2, c2) = (format!("b{h}"), format!("c{h}"));
            out.push(pair(b.clone(), c2.clone(), q(-4, 9)));
            if g < h {
                out.push(pair(b.clone(), b2, q(8, 9)));
                out.push(pair(c.clone(), c2, q(2, 9)));
            }
        }
    }
    out
}

/// Outcome flags of one ansatz run.
#[derive(Clone, Debug, Serialize)]
pub struct AnsatzReport {
    pub j: usize,
    pub params: String,
    /// Grouped sums per row, `q = 0..j`.
    pub groups_per_row: usize,
    /// Side of the shared matrix `Y`.
    pub basis_len: usize,
    pub constraints: usize,
    /// Objective of the solve that produced this report.
    pub objective: String,
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    /// The rounded Gram matrix passed the exact PSD check.
    pub rounded: bool,
    /// The matrix was projected onto the constraints and the known kernel
    /// after rounding.
    pub projected: bool,
    pub verified: bool,
    /// Head of the nonzero residual, or why rounding failed.
    pub diagnosis: Option<String>,
    /// Rounded `Y`, row major.
    pub gram: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum AnsatzOutcome {
    Candidate {
        report: AnsatzReport,
        gram: GramCertificate,
        certificate: Option<PolyCertificate>,
    },
    NoCandidate(AnsatzReport),
}

impl AnsatzOutcome {
    pub fn report(&self) -> &AnsatzReport {
        match self {
            AnsatzOutcome::Candidate { report, .. } | AnsatzOutcome::NoCandidate(report) => report,
        }
    }
}

/// One copy `[E_0(g), …, E_j(g)]` per row `g`.
pub fn ansatz_copies(vars: &Arc<VarTable>, j: usize) -> Vec<Vec<Polynomial>> {
    (0..vars.params().n_g)
        .map(|g| (0..=j).map(|q| row_sum(vars, g, q)).collect())
        .collect()
}

/// `diag(y, …, y)` with `copies` blocks.
pub fn block_diagonal(y: &RatMatrix, copies: usize) -> RatMatrix {
    let p = y.len();
    let mut out = vec![vec![Rat::zero(); p * copies]; p * copies];
    for c in 0..copies {
        for i in 0..p {
            for k in 0..p {
                out[c * p + i][c * p + k] = y[i][k].clone();
            }
        }
    }
    out
}

/// Gram problem `Σ_c v_cᵀ Y v_c ≡ f*` for one shared matrix `Y` and copies
/// `v_c` of equal length; a single copy is the usual `vᵀYv`. Basis labels in
/// the returned problem are the leading monomials of the first copy.
pub fn grouped_sdp(
    gb: &GroebnerBasis,
    fstar: &Polynomial,
    copies: &[Vec<Polynomial>],
    ell: u32,
    objective: SymEntries,
) -> Result<SdpProblem, FamilyError> {
    let vars = gb.vars().clone();
    let p = copies.first().map_or(0, Vec::len);
    if copies.iter().any(|c| c.len() != p) {
        return Err(CertifyError::Dimension("basis copies differ in length".into()).into());
    }
    // normal forms are multilinear, so monomials are keyed by their support
    let key = |m: &Monomial| m.support_mask().filter(|_| m.is_squarefree());
    let not_multilinear = || {
        FamilyError::Certify(CertifyError::Format(
            "normal form is not multilinear".into(),
        ))
    };
    let mut rows: BTreeMap<u64, SymEntries> = BTreeMap::new();
    for i in 0..p {
        for k in i..p {
            let mut prod = Polynomial::zero(vars.clone());
            for c in copies {
                prod = prod.checked_add(&c[i].checked_mul(&c[k])?)?;
            }
            for (m, c) in gb.normal_form(&prod)?.terms() {
                rows.entry(key(m).ok_or_else(not_multilinear)?)
                    .or_default()
                    .push((i, k, c.clone()));
            }
        }
    }
    let mut rhs = BTreeMap::new();
    for (m, c) in gb.normal_form(fstar)?.terms() {
        let t = key(m).ok_or_else(not_multilinear)?;
        rows.entry(t).or_default();
        rhs.insert(t, c.clone());
    }
    let constraints = rows
        .into_iter()
        .map(|(t, entries)| {
            let rhs = rhs.remove(&t).unwrap_or_else(Rat::zero);
            Constraint {
                monomial: Monomial::from_mask(t),
                entries,
                rhs,
            }
        })
        .collect();
    let labels = copies
        .first()
        .into_iter()
        .flatten()
        .map(|b| b.leading_monomial().cloned().unwrap_or_else(Monomial::one))
        .collect();
    Ok(SdpProblem::from_parts(
        vars,
        ell,
        labels,
        constraints,
        objective,
    )?)
}

/// Searches for a degree-`j` certificate `Σ_g v_gᵀ Y v_g` over the row sums
/// `v_g = [E_0(g), …, E_j(g)]` with one matrix `Y` shared by all rows: the
/// problem is solved numerically, `Y` is rounded with denominators up to
/// `max_den` and the result is checked exactly.
pub fn ansatz_conj54(
    j: usize,
    params: GraphClassParams,
    max_den: u64,
) -> Result<AnsatzOutcome, FamilyError> {
    FamilyId::Conj54(j).check_domain(params)?;
    let gb = buchberger(&build_ideal_sos(params), MonomialOrder::Grevlex)?;
    ansatz_conj54_with(&gb, j, max_den, &SolverSettings::default())
}

/// [`ansatz_conj54`] against a precomputed basis. The pure feasibility
/// problem is tried first; its solution sits in the relative interior and
/// often rounds badly, so a trace-minimizing solve follows.
pub fn ansatz_conj54_with(
    gb: &GroebnerBasis,
    j: usize,
    max_den: u64,
    settings: &SolverSettings,
) -> Result<AnsatzOutcome, FamilyError> {
    let params = gb.params();
    FamilyId::Conj54(j).check_domain(params)?;
    let vars = gb.vars().clone();
    let fstar = build_fstar_in(&vars);
    let copies = ansatz_copies(&vars, j);
    let kernel = ansatz_kernel(gb, &copies);
    let trace = (0..=j).map(|i| (i, i, Rat::one())).collect();
    let mut fallback = None;
    for (name, objective) in [("zero", Vec::new()), ("trace-min", trace)] {
        let problem = grouped_sdp(gb, &fstar, &copies, j as u32, objective)?;
        let outcome = ansatz_attempt(
            gb, &fstar, &copies, &kernel, &problem, j, name, max_den, settings,
        )?;
        match outcome {
            AnsatzOutcome::Candidate { ref report, .. } if report.verified => return Ok(outcome),
            AnsatzOutcome::Candidate { .. } => fallback = Some(outcome),
            AnsatzOutcome::NoCandidate(_) if fallback.is_some() => {}
            AnsatzOutcome::NoCandidate(_) => fallback = Some(outcome),
        }
    }
    Ok(fallback.expect("at least one attempt"))
}

#[allow(clippy::too_many_arguments)]
fn ansatz_attempt(
    gb: &GroebnerBasis,
    fstar: &Polynomial,
    copies: &[Vec<Polynomial>],
    kernel: &[Vec<Rat>],
    problem: &SdpProblem,
    j: usize,
    objective: &str,
    max_den: u64,
    settings: &SolverSettings,
) -> Result<AnsatzOutcome, FamilyError> {
    let sol = solve(problem, settings)?;
    let mut report = AnsatzReport {
        j,
        params: gb.params().to_string(),
        groups_per_row: j + 1,
        basis_len: problem.p(),
        constraints: problem.num_constraints(),
        objective: objective.to_string(),
        status: sol.status,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        rounded: false,
        projected: false,
        verified: false,
        diagnosis: None,
        gram: Vec::new(),
    };
    if sol.status != SdpStatus::Feasible {
        report.diagnosis = Some(format!("SDP status {}", sol.status.name()));
        return Ok(AnsatzOutcome::NoCandidate(report));
    }
    let rounded = round_gram(&sol.x, max_den);
    let projected = project_gram(&rounded, problem.constraints(), kernel);
    let basis: Vec<Polynomial> = copies.iter().flatten().cloned().collect();
    let mut best = None;
    for (q, is_projected) in std::iter::once((rounded, false)).chain(projected.map(|q| (q, true))) {
        report.projected = is_projected;
        report.gram = q
            .iter()
            .map(|r| r.iter().map(Rat::to_string).collect())
            .collect();
        let gram = GramCertificate::new(basis.clone(), block_diagonal(&q, copies.len()))?;
        if let Err(f) = gram.witness() {
            report.rounded = false;
            report.diagnosis = Some(format!(
                "rounded matrix not PSD: minor on {:?} equals {}",
                f.indices, f.determinant
            ));
            continue;
        }
        report.rounded = true;
        // pivots with large prime factors have no cheap square root; the
        // Gram form is then checked directly
        let certificate = gram_to_polys(&gram, j as u32).ok();
        let (zero, head) = match &certificate {
            Some(c) => {
                let r = certificate_residual(c, gb, fstar)?;
                (r.is_zero(), r.head(6))
            }
            None => {
                let r = gram_residual(&gram, gb, fstar)?;
                (r.is_zero(), r.to_text())
            }
        };
        report.verified = zero;
        report.diagnosis = (!report.verified).then(|| format!("nonzero residual: {head}"));
        let verified = report.verified;
        best = Some(AnsatzOutcome::Candidate {
            report: report.clone(),
            gram,
            certificate,
        });
        if verified {
            break;
        }
    }
    Ok(best.unwrap_or(AnsatzOutcome::NoCandidate(report)))
}

/// `v_g(p)` for every row `g` and every variety point `p` with `f*(p) = 0`.
/// Any Gram matrix of a certificate annihilates these vectors. Empty when
/// the variety is too large to enumerate.
pub fn ansatz_kernel(gb: &GroebnerBasis, copies: &[Vec<Polynomial>]) -> Vec<Vec<Rat>> {
    let Ok(points) = fstar_zeros(gb.params()) else {
        return Vec::new();
    };
    let n = gb.vars().len();
    let mut out: Vec<Vec<Rat>> = Vec::new();
    for pt in points {
        let bools = pt.as_bools(n);
        for copy in copies {
            let v: Vec<Rat> = copy
                .iter()
                .map(|b| b.eval_bool(&bools).unwrap_or_else(|_| Rat::zero()))
                .collect();
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
