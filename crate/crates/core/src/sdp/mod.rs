//! Semidefinite feasibility problems `f* ≡ vᵀXv` modulo a boolean ideal.
//!
//! The basis `v` is a vector of standard monomials. Each distinct standard
//! monomial `t` of the reduced products `v_i v_j` and of the reduced target
//! gives one constraint `⟨A_t, X⟩ = b_t`. `A_t` is symmetric with entry
//! `(i, j)` equal to the coefficient of `t` in `NF(v_i v_j)`, so an
//! off-diagonal product enters the constraint twice.

mod io;
mod solver;
mod spectral;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{grevlex_mask, AlgebraError, Monomial, Polynomial, Rat, VarTable};
use crate::groebner::{reduced_masks, GroebnerBasis, GroebnerError};

pub use io::{
    export_heatmap, export_sdpa, import_sdpa, read_matrix_csv, write_matrix_csv, SdpaData,
};
pub use solver::{solve, InfeasibilityWitness, SdpSolution, SdpStatus, SolverSettings};
pub use spectral::{jacobi_eigen, spectral_factor, suggest_mask, SpectralFactor};

/// Default relative threshold below which eigenvalues count as zero.
pub const DEFAULT_EIG_TOL: f64 = 1e-6;
/// Default threshold below which a factor column counts as zero.
pub const DEFAULT_COL_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("basis is empty")]
    EmptyBasis,
    #[error("mask index {0} is outside the basis of length {1}")]
    MaskOutOfRange(usize, usize),
    #[error("monomial `{0}` is not in the basis")]
    NotInBasis(String),
    #[error("matrix is indefinite: eigenvalue {0:e} below tolerance")]
    Indefinite(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// Subset of basis indices kept in the Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMask {
    retained: Vec<usize>,
}

impl MonomialMask {
    pub fn new(mut retained: Vec<usize>) -> Self {
        retained.sort_unstable();
        retained.dedup();
        MonomialMask { retained }
    }

    pub fn full(p: usize) -> Self {
        MonomialMask {
            retained: (0..p).collect(),
        }
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn len(&self) -> usize {
        self.retained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.retained.binary_search(&i).is_ok()
    }

    /// Mask of the given monomials within `basis`.
    pub fn from_monomials(
        basis: &[Monomial],
        wanted: &[Monomial],
        vars: &VarTable,
    ) -> Result<Self, SdpError> {
        let index: HashMap<&Monomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let retained = wanted
            .iter()
            .map(|m| {
                index
                    .get(m)
                    .copied()
                    .ok_or_else(|| SdpError::NotInBasis(m.display_name(vars)))
            })
            .collect::<Result<_, _>>()?;
        Ok(MonomialMask::new(retained))
    }

    /// One retained monomial per line.
    pub fn to_text(&self, basis: &[Monomial], vars: &VarTable) -> String {
        let mut out = format!("# mask retained={}\n", self.retained.len());
        for &i in &self.retained {
            out.push_str(&basis[i].display_name(vars));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, basis: &[Monomial], vars: &Arc<VarTable>) -> Result<Self, SdpError> {
        let mut wanted = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            wanted.push(parse_monomial(vars, line)?);
        }
        MonomialMask::from_monomials(basis, &wanted, vars)
    }
}

fn parse_monomial(vars: &Arc<VarTable>, text: &str) -> Result<Monomial, SdpError> {
    let p: Polynomial = Polynomial::parse(vars.clone(), text)?;
    match p.terms() {
        [(m, c)] if c.is_one() => Ok(m.clone()),
        _ => Err(SdpError::Format(format!("`{text}` is not a monomial"))),
    }
}

/// Objective `min ⟨C, X⟩`.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Objective {
    /// Pure feasibility.
    #[default]
    Zero,
    TraceMin,
    TraceMax,
    /// Symmetric weights `C_{ij} = C_{ji}` keyed by basis monomials.
    Custom(Vec<(Monomial, Monomial, Rat)>),
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Zero => "zero",
            Objective::TraceMin => "trace-min",
            Objective::TraceMax => "trace-max",
            Objective::Custom(_) => "custom",
        }
    }

    /// Weight file: lines `monomial monomial weight`, `#` comments.
    pub fn parse_custom(text: &str, vars: &Arc<VarTable>) -> Result<Objective, SdpError> {
        let mut entries = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [a, b, w] = parts[..] else {
                return Err(SdpError::Format(format!(
                    "expected `mono mono weight`, got `{line}`"
                )));
            };
            let w: Rat = w.parse()?;
            entries.push((parse_monomial(vars, a)?, parse_monomial(vars, b)?, w));
        }
        Ok(Objective::Custom(entries))
    }

    pub fn custom_to_text(entries: &[(Monomial, Monomial, Rat)], vars: &VarTable) -> String {
        let mut out = String::from("# objective weights: monomial monomial weight\n");
        for (a, b, w) in entries {
            out.push_str(&format!(
                "{} {} {}\n",
                a.display_name(vars),
                b.display_name(vars),
                w
            ));
        }
        out
    }
}

/// Sparse symmetric matrix stored as its upper triangle `(i, j, value)`
/// with `i ≤ j`.
pub type SymEntries = Vec<(usize, usize, Rat)>;

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub monomial: Monomial,
    pub entries: SymEntries,
    pub rhs: Rat,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    vars: Arc<VarTable>,
    ell: u32,
    basis: Vec<Monomial>,
    constraints: Vec<Constraint>,
    objective: SymEntries,
    warnings: Vec<String>,
}

impl SdpProblem {
    /// Assembles a problem from explicit data. Entries must satisfy
    /// `i ≤ j < basis.len()`.
    pub fn from_parts(
        vars: Arc<VarTable>,
        ell: u32,
        basis: Vec<Monomial>,
        constraints: Vec<Constraint>,
        objective: SymEntries,
    ) -> Result<Self, SdpError> {
        let p = basis.len();
        if p == 0 {
            return Err(SdpError::EmptyBasis);
        }
        let ok = |e: &SymEntries| e.iter().all(|&(i, j, _)| i <= j && j < p);
        if !constraints.iter().all(|c| ok(&c.entries)) || !ok(&objective) {
            return Err(SdpError::Dimension(format!(
                "entry outside the upper triangle of a {p}×{p} matrix"
            )));
        }
        Ok(SdpProblem {
            vars,
            ell,
            basis,
            constraints,
            objective,
            warnings: Vec::new(),
        })
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Dimension of the Gram matrix.
    pub fn p(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn basis_names(&self) -> Vec<String> {
        self.basis
            .iter()
            .map(|m| m.display_name(&self.vars))
            .collect()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &SymEntries {
        &self.objective
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `⟨A_t, X⟩` for a dense symmetric `X`.
    pub fn constraint_value(&self, t: usize, x: &nalgebra::DMatrix<f64>) -> f64 {
        sym_inner(&self.constraints[t].entries, x)
    }

    /// Largest `|⟨A_t, X⟩ − b_t|`.
    pub fn max_residual(&self, x: &nalgebra::DMatrix<f64>) -> f64 {
        (0..self.constraints.len())
            .map(|t| (self.constraint_value(t, x) - self.constraints[t].rhs.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    /// `vᵀXv` for a rational Gram matrix, as a polynomial.
    pub fn gram_polynomial(&self, q: &[Vec<Rat>]) -> Result<Polynomial, SdpError> {
        let p = self.p();
        if q.len() != p || q.iter().any(|r| r.len() != p) {
            return Err(SdpError::Dimension(format!("Gram matrix must be {p}×{p}")));
        }
        let mut terms = Vec::new();
        for i in 0..p {
            for j in 0..p {
                if !q[i][j].is_zero() {
                    terms.push((self.basis[i].mul(&self.basis[j]), q[i][j].clone()));
                }
            }
        }
        Ok(Polynomial::from_terms(self.vars.clone(), terms)?)
    }
}

/// `⟨A, X⟩` with `A` given by its upper triangle.
pub(crate) fn sym_inner(entries: &SymEntries, x: &nalgebra::DMatrix<f64>) -> f64 {
    entries
        .iter()
        .map(|(i, j, a)| {
            let a = a.to_f64();
            if i == j {
                a * x[(*i, *i)]
            } else {
                a * (x[(*i, *j)] + x[(*j, *i)])
            }
        })
        .sum()
}

/// Builds the Gram feasibility problem for `fstar` at degree `ell`.
pub fn build_sdp(
    gb: &GroebnerBasis,
    fstar: &Polynomial,
    ell: u32,
    mask: Option<&MonomialMask>,
    objective: &Objective,
) -> Result<SdpProblem, SdpError> {
    let vars = gb.vars().clone();
    let full = reduced_masks(gb, ell)?;
    let masks: Vec<u64> = match mask {
        Some(m) => {
            if let Some(&bad) = m.retained().iter().find(|&&i| i >= full.len()) {
                return Err(SdpError::MaskOutOfRange(bad, full.len()));
            }
            m.retained().iter().map(|&i| full[i]).collect()
        }
        None => full,
    };
    if masks.is_empty() {
        return Err(SdpError::EmptyBasis);
    }
    let basis: Vec<Monomial> = masks.iter().map(|&m| Monomial::from_mask(m)).collect();
    let p = masks.len();

    let mut rows: HashMap<u64, SymEntries> = HashMap::new();
    let mut cache: HashMap<u64, Vec<(u64, Rat)>> = HashMap::new();
    for i in 0..p {
        for j in i..p {
            let union = masks[i] | masks[j];
            let nf = cache
                .entry(union)
                .or_insert_with(|| gb.normal_form_mask(union));
            for (t, c) in nf.iter() {
                rows.entry(*t).or_default().push((i, j, c.clone()));
            }
        }
    }

    let mut warnings = Vec::new();
    let target = gb.normal_form(fstar)?;
    let mut rhs: HashMap<u64, Rat> = HashMap::new();
    for (m, c) in target.terms() {
        let t = m
            .support_mask()
            .filter(|_| m.is_squarefree())
            .ok_or_else(|| SdpError::Format("target normal form is not multilinear".into()))?;
        rows.entry(t).or_insert_with(|| {
            warnings.push(format!(
                "monomial {} of the target cannot be produced by the basis; the problem is infeasible",
                m.display_name(&vars)
            ));
            Vec::new()
        });
        rhs.insert(t, c.clone());
    }

    let mut keys: Vec<u64> = rows.keys().copied().collect();
    keys.sort_by(|a, b| grevlex_mask(*b, *a));
    let constraints = keys
        .into_iter()
        .map(|t| Constraint {
            monomial: Monomial::from_mask(t),
            entries: rows.remove(&t).unwrap_or_default(),
            rhs: rhs.remove(&t).unwrap_or_else(Rat::zero),
        })
        .collect();

    let objective = objective_entries(objective, &basis, &vars, &mut warnings);
    Ok(SdpProblem {
        vars,
        ell,
        basis,
        constraints,
        objective,
        warnings,
    })
}

fn objective_entries(
    objective: &Objective,
    basis: &[Monomial],
    vars: &VarTable,
    warnings: &mut Vec<String>,
) -> SymEntries {
    let p = basis.len();
    match objective {
        Objective::Zero => Vec::new(),
        Objective::TraceMin => (0..p).map(|i| (i, i, Rat::one())).collect(),
        Objective::TraceMax => (0..p).map(|i| (i, i, -Rat::one())).collect(),
        Objective::Custom(entries) => {
            let index: HashMap<&Monomial, usize> =
                basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut acc: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
            for (a, b, w) in entries {
                match (index.get(a), index.get(b)) {
                    (Some(&i), Some(&j)) => {
                        *acc.entry((i.min(j), i.max(j))).or_insert_with(Rat::zero) += w;
                    }
                    _ => warnings.push(format!(
                        "objective weight on {} {} ignored: not in the basis",
                        a.display_name(vars),
                        b.display_name(vars)
                    )),
                }
            }
            acc.into_iter()
                .filter(|(_, w)| !w.is_zero())
                .map(|((i, j), w)| (i, j, w))
                .collect()
        }
    }
}

/// Rows of an exact Gaussian elimination on `[A_t | b_t]`.
#[derive(Clone, Debug)]
pub(crate) enum Independence {
    /// Indices of a maximal independent subset of the constraints.
    Rows(Vec<usize>),
    /// Exact multipliers `y` with `Σ y_t A_t = 0` and `Σ y_t b_t = 1`.
    Inconsistent(Vec<Rat>),
}

/// Finds linearly dependent constraints exactly. A dependent row whose
/// right-hand side disagrees proves infeasibility outright.
pub(crate) fn independent_rows(problem: &SdpProblem) -> Independence {
    let m = problem.constraints.len();
    // each row: sparse coefficients over (i, j), rhs, combination of originals
    type Row = (BTreeMap<(usize, usize), Rat>, Rat, BTreeMap<usize, Rat>);
    let mut pivots: Vec<((usize, usize), Row)> = Vec::new();
    let mut keep = Vec::new();
    for t in 0..m {
        let c = &problem.constraints[t];
        let mut row: Row = (
            c.entries
                .iter()
                .filter(|e| !e.2.is_zero())
                .map(|(i, j, a)| ((*i, *j), a.clone()))
                .collect(),
            c.rhs.clone(),
            BTreeMap::from([(t, Rat::one())]),
        );
        // a pivot row holds no earlier pivot key, so one forward pass
        // clears them all
        for (key, prow) in &pivots {
            let Some(f) = row.0.get(key).cloned() else {
                continue;
            };
            axpy(&mut row.0, &prow.0, &f);
            row.1 -= &(&f * &prow.1);
            axpy(&mut row.2, &prow.2, &f);
        }
        match row.0.keys().next().copied() {
            Some(key) => {
                let inv = row.0[&key].recip();
                for v in row.0.values_mut().chain(row.2.values_mut()) {
                    *v *= &inv;
                }
                row.1 *= &inv;
                pivots.push((key, row));
                keep.push(t);
            }
            None if row.1.is_zero() => {}
            None => {
                let scale = row.1.recip();
                let mut y = vec![Rat::zero(); m];
                for (k, v) in row.2 {
                    y[k] = v * &scale;
                }
                return Independence::Inconsistent(y);
            }
        }
    }
    Independence::Rows(keep)
}

/// `a -= f · b` on sparse maps.
fn axpy<K: Ord + Copy>(a: &mut BTreeMap<K, Rat>, b: &BTreeMap<K, Rat>, f: &Rat) {
    for (k, v) in b {
        let slot = a.entry(*k).or_insert_with(Rat::zero);
        *slot -= &(f * v);
        if slot.is_zero() {
            a.remove(k);
        }
    }
}

#[cfg(test)]
mod tests;
