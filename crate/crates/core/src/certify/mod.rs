//! Exact certificates: Gram form `vᵀQv` with an LDLᵀ witness, explicit
//! squares over `Q(√d)`, and verification by exact reduction modulo the
//! Gröbner basis.

mod exact;
mod io;
mod project;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{AlgebraError, Polynomial, QuadExt, Rat, VarTable};
use crate::groebner::{GroebnerBasis, GroebnerError};

pub use exact::{
    is_symmetric, psd_witness, rationalize, round_gram, to_f64_matrix, LdlWitness, PsdFailure,
    RatMatrix,
};
pub use io::{
    gram_certificate_text, parse_gram_certificate, parse_poly_certificate, poly_certificate_text,
    write_gram_certificate, write_poly_certificate,
};
pub use project::{project_gram, rational_kernel};

/// Rounding bound used when no other is given.
pub const DEFAULT_MAX_DEN: u64 = 99;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("matrix is not square and symmetric of size {0}")]
    NotSymmetric(usize),
    #[error("Gram matrix is not PSD: principal minor of order {} is negative ({:.3e})", .0.indices.len(), .0.determinant.to_f64())]
    NotPsd(Box<PsdFailure>),
    #[error("summand {0} has degree {1} > {2}")]
    DegreeBound(usize, u32, u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown vector `{0}`")]
    UnknownVector(String),
    #[error("certificate file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// `vᵀQv` for a vector `v` of polynomials (usually standard monomials).
#[derive(Clone, Debug)]
pub struct GramCertificate {
    basis: Vec<Polynomial>,
    q: RatMatrix,
    witness: Result<LdlWitness, PsdFailure>,
}

impl GramCertificate {
    /// Runs [`psd_witness`]; a non-PSD `q` is kept and reported by
    /// [`GramCertificate::witness`].
    pub fn new(basis: Vec<Polynomial>, q: RatMatrix) -> Result<Self, CertifyError> {
        if q.len() != basis.len() || !is_symmetric(&q) {
            return Err(CertifyError::NotSymmetric(basis.len()));
        }
        if basis.windows(2).any(|w| w[0].vars() != w[1].vars()) {
            return Err(AlgebraError::RingMismatch.into());
        }
        let witness = psd_witness(&q);
        Ok(GramCertificate { basis, q, witness })
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn q(&self) -> &RatMatrix {
        &self.q
    }

    pub fn witness(&self) -> Result<&LdlWitness, &PsdFailure> {
        self.witness.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `vᵀQv`, expanded.
    pub fn polynomial(&self, vars: &Arc<VarTable>) -> Result<Polynomial, CertifyError> {
        let mut acc = Polynomial::zero(vars.clone());
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let c = &self.q[i][j];
                if c.is_zero() {
                    continue;
                }
                let c = if i == j { c.clone() } else { c * &Rat::from(2) };
                let prod = self.basis[i].checked_mul(&self.basis[j])?;
                acc = acc.checked_add(&prod.scale(&c)?)?;
            }
        }
        Ok(acc)
    }
}

/// `Σ s_i²` with every `s_i` over a single quadratic field `Q(√d_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCertificate {
    summands: Vec<Polynomial<QuadExt>>,
    ell: u32,
}

impl PolyCertificate {
    pub fn new(summands: Vec<Polynomial<QuadExt>>, ell: u32) -> Result<Self, CertifyError> {
        for (i, s) in summands.iter().enumerate() {
            s.discriminant()?;
            if s.degree() > ell {
                return Err(CertifyError::DegreeBound(i, s.degree(), ell));
            }
        }
        Ok(PolyCertificate { summands, ell })
    }

    pub fn summands(&self) -> &[Polynomial<QuadExt>] {
        &self.summands
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Discriminants of the irrational summands, sorted.
    pub fn discriminants(&self) -> Vec<u64> {
        let mut ds: Vec<u64> = self
            .summands
            .iter()
            .filter_map(|s| s.discriminant().ok().flatten())
            .collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// `Σ s_i²` split as `R + Σ_d √d·T_d` with rational `R`, `T_d`.
    pub fn sum_of_squares(
        &self,
        vars: &Arc<VarTable>,
    ) -> Result<(Polynomial, BTreeMap<u64, Polynomial>), CertifyError> {
        let mut rational = Polynomial::zero(vars.clone());
        let mut parts: BTreeMap<u64, Polynomial> = BTreeMap::new();
        for s in &self.summands {
            let d = s.discriminant()?.unwrap_or(1);
            let (r, t) = crate::algebra::quadext_to_rational_parts(s)?;
            // (r + t√d)² = r² + d t² + 2rt·√d
            let rt = r.checked_mul(&t)?;
            rational = rational.checked_add(&r.checked_mul(&r)?)?;
            if !t.is_zero() {
                let t2 = t.checked_mul(&t)?.scale(&Rat::from(d))?;
                rational = rational.checked_add(&t2)?;
                let slot = parts
                    .entry(d)
                    .or_insert_with(|| Polynomial::zero(vars.clone()));
                *slot = slot.checked_add(&rt.scale(&Rat::from(2))?)?;
            }
        }
        parts.retain(|_, p| !p.is_zero());
        Ok((rational, parts))
    }
}

/// Normal form of `Σ s_i² − f*`, one rational part per `√d`.
#[derive(Clone, Debug)]
pub struct Residual {
    pub rational: Polynomial,
    pub irrational: BTreeMap<u64, Polynomial>,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.values().all(Polynomial::is_zero)
    }

    /// Leading terms of the nonzero parts, for diagnostics.
    pub fn head(&self, terms: usize) -> String {
        let show = |p: &Polynomial| {
            let head: Vec<String> = p
                .terms()
                .iter()
                .take(terms)
                .map(|(m, c)| format!("{c}*{}", m.display_name(p.vars())))
                .collect();
            let more = if p.len() > terms {
                format!(" + ... ({} terms)", p.len())
            } else {
                String::new()
            };
            format!("{}{more}", head.join(" + "))
        };
        let mut out = Vec::new();
        if !self.rational.is_zero() {
            out.push(show(&self.rational));
        }
        for (d, p) in &self.irrational {
            if !p.is_zero() {
                out.push(format!("sqrt({d})*[{}]", show(p)));
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out.join("; ")
        }
    }
}

/// `Σ_k √D_k·(Lᵀ Pᵀ v)_k` for every nonzero pivot, so that `Σ s_k² = vᵀQv`.
pub fn gram_to_polys(cert: &GramCertificate, ell: u32) -> Result<PolyCertificate, CertifyError> {
    let w = cert
        .witness()
        .map_err(|f| CertifyError::NotPsd(Box::new(f.clone())))?;
    let Some(vars) = cert.basis.first().map(|b| b.vars().clone()) else {
        return PolyCertificate::new(Vec::new(), ell);
    };
    let n = cert.dim();
    let mut summands = Vec::new();
    for k in 0..n {
        if w.d[k].is_zero() {
            continue;
        }
        let (r, d) = w.d[k]
            .square_decompose()
            .ok_or_else(|| CertifyError::Format(format!("pivot {} too large to factor", w.d[k])))?;
        let mut lin = Polynomial::zero(vars.clone());
        for a in k..n {
            let c = &w.l[a][k];
            if !c.is_zero() {
                lin = lin.checked_add(&cert.basis[w.perm[a]].scale(c)?)?;
            }
        }
        // r·√d, rational when d = 1
        let factor = QuadExt::new(Rat::zero(), r, d)?;
        summands.push(
            lin.to_quadext()
                .map_coeffs(|c| c.checked_mul(&factor).expect("single discriminant")),
        );
    }
    PolyCertificate::new(summands, ell)
}

/// Exact residual `NF(Σ s_i² − f*)`.
pub fn certificate_residual(
    cert: &PolyCertificate,
    gb: &GroebnerBasis,
    fstar: &Polynomial,
) -> Result<Residual, CertifyError> {
    let (rational, parts) = cert.sum_of_squares(gb.vars())?;
    let rational = gb.normal_form(&rational.checked_sub(fstar)?)?;
    let mut irrational = BTreeMap::new();
    for (d, p) in parts {
        irrational.insert(d, gb.normal_form(&p)?);
    }
    Ok(Residual {
        rational,
        irrational,
    })
}

/// True iff every summand respects the degree bound and `Σ s_i² ≡ f*`
/// modulo the ideal, both checked exactly.
pub fn verify_certificate(cert: &PolyCertificate, gb: &GroebnerBasis, fstar: &Polynomial) -> bool {
    cert.summands.iter().all(|s| s.degree() <= cert.ell)
        && certificate_residual(cert, gb, fstar).is_ok_and(|r| r.is_zero())
}

/// `NF(vᵀQv − f*)`.
pub fn gram_residual(
    cert: &GramCertificate,
    gb: &GroebnerBasis,
    fstar: &Polynomial,
) -> Result<Polynomial, CertifyError> {
    let p = cert.polynomial(gb.vars())?;
    Ok(gb.normal_form(&p.checked_sub(fstar)?)?)
}

/// True iff the LDLᵀ witness certifies `Q ⪰ 0` and `vᵀQv ≡ f*` exactly.
pub fn verify_gram(cert: &GramCertificate, gb: &GroebnerBasis, fstar: &Polynomial) -> bool {
    cert.witness().is_ok_and(|w| w.certifies(&cert.q))
        && gram_residual(cert, gb, fstar).is_ok_and(|r| r.is_zero())
}

/// Exact sign of `a + b√d`.
fn sign(x: &QuadExt) -> Ordering {
    let (a, b) = (x.a(), x.b());
    let sa = a.cmp(&Rat::zero());
    let sb = b.cmp(&Rat::zero());
    if sb == Ordering::Equal || sa == sb {
        return if sa == Ordering::Equal { sb } else { sa };
    }
    if sa == Ordering::Equal {
        return sb;
    }
    // opposite signs: compare a² with d·b²
    let lhs = a * a;
    let rhs = &(b * b) * &Rat::from(x.d());
    match lhs.cmp(&rhs) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

fn abs(x: QuadExt) -> QuadExt {
    if sign(&x) == Ordering::Less {
        -x
    } else {
        x
    }
}

/// Residuals `⟨u, w⟩ − value` of a named inner-product system.
pub fn inner_product_residuals(
    vectors: &[(String, Vec<QuadExt>)],
    targets: &[((String, String), QuadExt)],
) -> Result<Vec<QuadExt>, CertifyError> {
    let lookup: BTreeMap<&str, &Vec<QuadExt>> =
        vectors.iter().map(|(n, v)| (n.as_str(), v)).collect();
    let get = |name: &str| {
        lookup
            .get(name)
            .copied()
            .ok_or_else(|| CertifyError::UnknownVector(name.to_string()))
    };
    let mut out = Vec::with_capacity(targets.len());
    for ((u, w), value) in targets {
        let (x, y) = (get(u)?, get(w)?);
        if x.len() != y.len() {
            return Err(CertifyError::Dimension(format!(
                "`{u}` has length {}, `{w}` has length {}",
                x.len(),
                y.len()
            )));
        }
        let mut acc = QuadExt::zero();
        for (a, b) in x.iter().zip(y) {
            acc = acc.checked_add(&a.checked_mul(b)?)?;
        }
        out.push(acc.checked_add(&-value.clone())?);
    }
    Ok(out)
}

/// `max |⟨u, w⟩ − value|` over the targets, exactly; zero for no targets.
pub fn inner_product_residual(
    vectors: &[(String, Vec<QuadExt>)],
    targets: &[((String, String), QuadExt)],
) -> Result<QuadExt, CertifyError> {
    let mut best = QuadExt::zero();
    for r in inner_product_residuals(vectors, targets)? {
        let r = abs(r);
        if sign(&r.checked_add(&-best.clone())?) == Ordering::Greater {
            best = r;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests;
