//! Ideals `I_G`, `I_H`, `I_{G□H}`, `I_sos` and the target polynomial `f*`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{AlgebraError, Monomial, Polynomial, Rat, VarTable};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters ({0}): need 1 <= k <= n on both sides")]
    InvalidParams(String),
    #[error("ideal file: {0}")]
    Format(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The partition `(n_G, k_G, n_H, k_H)`.
///
/// Dominating sets are fixed to `D_G = {0..k_G-1}` and `D_H = {0..k_H-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 4]", into = "[usize; 4]")]
pub struct GraphClassParams {
    pub n_g: usize,
    pub k_g: usize,
    pub n_h: usize,
    pub k_h: usize,
}

impl GraphClassParams {
    pub fn new(n_g: usize, k_g: usize, n_h: usize, k_h: usize) -> Result<Self, ModelError> {
        let p = GraphClassParams { n_g, k_g, n_h, k_h };
        if k_g == 0 || k_g > n_g || k_h == 0 || k_h > n_h {
            return Err(ModelError::InvalidParams(p.to_string()));
        }
        Ok(p)
    }

    pub fn num_variables(&self) -> usize {
        self.n_g * (self.n_g - 1) / 2 + self.n_h * (self.n_h - 1) / 2 + self.n_g * self.n_h
    }

    pub fn side(&self, side: Side) -> (usize, usize) {
        match side {
            Side::G => (self.n_g, self.k_g),
            Side::H => (self.n_h, self.k_h),
        }
    }
}

impl TryFrom<[usize; 4]> for GraphClassParams {
    type Error = ModelError;
    fn try_from(v: [usize; 4]) -> Result<Self, ModelError> {
        GraphClassParams::new(v[0], v[1], v[2], v[3])
    }
}

impl From<GraphClassParams> for [usize; 4] {
    fn from(p: GraphClassParams) -> Self {
        [p.n_g, p.k_g, p.n_h, p.k_h]
    }
}

impl fmt::Display for GraphClassParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.n_g, self.k_g, self.n_h, self.k_h)
    }
}

impl FromStr for GraphClassParams {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, ModelError> {
        let parts: Vec<usize> = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| ModelError::InvalidParams(s.to_string()))?;
        match parts[..] {
            [a, b, c, d] => GraphClassParams::new(a, b, c, d),
            _ => Err(ModelError::InvalidParams(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    G,
    H,
}

/// Which family of defining equations a generator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// `e² − e` for an edge variable.
    FieldEq,
    /// `Π_{g'∈D}(1 − e_{gg'})` for a vertex outside `D`.
    Dominating,
    /// `Π_{g'∉S}(Σ_{g∈S} e_{gg'})` for `|S| = k − 1`.
    Minimality,
    /// `x² − x` for a vertex variable.
    ProductFieldEq,
    /// Every product vertex is dominated.
    ProductDominated,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::FieldEq => "field-eq",
            Provenance::Dominating => "dominating",
            Provenance::Minimality => "minimality",
            Provenance::ProductFieldEq => "product-field-eq",
            Provenance::ProductDominated => "product-dominated",
        }
    }

    pub fn from_tag(s: &str) -> Option<Provenance> {
        Some(match s {
            "field-eq" => Provenance::FieldEq,
            "dominating" => Provenance::Dominating,
            "minimality" => Provenance::Minimality,
            "product-field-eq" => Provenance::ProductFieldEq,
            "product-dominated" => Provenance::ProductDominated,
            _ => return None,
        })
    }
}

/// Generators of an ideal together with the variables they may involve.
///
/// `active` lists the variable indices of the ring the ideal lives in; for
/// `I_G` these are the `G` edge variables only.
#[derive(Clone, Debug)]
pub struct IdealBasis {
    vars: Arc<VarTable>,
    generators: Vec<Polynomial>,
    provenance: Vec<Provenance>,
    active: Vec<usize>,
}

impl IdealBasis {
    pub fn new(vars: Arc<VarTable>, active: Vec<usize>) -> Self {
        IdealBasis {
            vars,
            generators: Vec::new(),
            provenance: Vec::new(),
            active,
        }
    }

    /// Adds a generator; zero polynomials are skipped.
    pub fn push(&mut self, p: Polynomial, tag: Provenance) {
        if !p.is_zero() {
            self.generators.push(p);
            self.provenance.push(tag);
        }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn active_vars(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn count(&self, tag: Provenance) -> usize {
        self.provenance.iter().filter(|&&t| t == tag).count()
    }

    /// Concatenates two bases over the same table; active sets are merged.
    pub fn union(mut self, other: IdealBasis) -> IdealBasis {
        assert!(
            *self.vars == *other.vars,
            "ideal bases over different tables"
        );
        self.generators.extend(other.generators);
        self.provenance.extend(other.provenance);
        self.active.extend(other.active);
        self.active.sort_unstable();
        self.active.dedup();
        self
    }

    /// File form: a header line, then `[tag] polynomial` per generator.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# ideal params={} generators={}\n",
            self.vars.params(),
            self.len()
        );
        let active: Vec<String> = self.active.iter().map(|&i| self.vars.name(i)).collect();
        out.push_str(&format!("# active {}\n", active.join(" ")));
        for (g, t) in self.generators.iter().zip(&self.provenance) {
            out.push_str(&format!("[{}] {}\n", t.tag(), g));
        }
        out
    }

    pub fn parse(text: &str) -> Result<IdealBasis, ModelError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ModelError::Format("empty file".into()))?;
        let params = header
            .strip_prefix("# ideal params=")
            .and_then(|r| r.split_whitespace().next())
            .ok_or_else(|| ModelError::Format(format!("bad header `{header}`")))?;
        let params: GraphClassParams = params.parse()?;
        let vars = Arc::new(VarTable::new(params));
        let mut basis = IdealBasis::new(vars.clone(), Vec::new());
        for line in lines {
            if let Some(rest) = line.strip_prefix("# active") {
                for name in rest.split_whitespace() {
                    let v = name.parse()?;
                    let idx = vars
                        .index_of(v)
                        .ok_or_else(|| ModelError::Format(format!("unknown variable {name}")))?;
                    basis.active.push(idx);
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (tag, poly) = line
                .strip_prefix('[')
                .and_then(|r| r.split_once(']'))
                .ok_or_else(|| ModelError::Format(format!("bad line `{line}`")))?;
            let tag = Provenance::from_tag(tag)
                .ok_or_else(|| ModelError::Format(format!("unknown tag `{tag}`")))?;
            basis.push(Polynomial::parse(vars.clone(), poly.trim())?, tag);
        }
        basis.active.sort_unstable();
        basis.active.dedup();
        Ok(basis)
    }

    /// SHA-256 of the file form, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

fn one(vars: &Arc<VarTable>) -> Polynomial {
    Polynomial::one(vars.clone())
}

fn var(vars: &Arc<VarTable>, i: usize) -> Polynomial {
    Polynomial::var(vars.clone(), i)
}

/// `x² − x`, written directly in expanded form.
fn field_eq(vars: &Arc<VarTable>, i: usize) -> Polynomial {
    Polynomial::from_terms(
        vars.clone(),
        [
            (Monomial::from_exponents([(i, 2)]), Rat::from(1)),
            (Monomial::var(i), Rat::from(-1)),
        ],
    )
    .expect("rational terms")
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Generators of `I_G` (or `I_H`) over the shared table.
pub fn build_ideal_ig(params: GraphClassParams, side: Side) -> IdealBasis {
    build_ideal_side(&Arc::new(VarTable::new(params)), side)
}

fn build_ideal_side(vars: &Arc<VarTable>, side: Side) -> IdealBasis {
    let (n, k) = vars.params().side(side);
    let edge = |a: usize, b: usize| match side {
        Side::G => vars.edge_g(a, b),
        Side::H => vars.edge_h(a, b),
    };
    let active = match side {
        Side::G => vars.edge_g_indices(),
        Side::H => vars.edge_h_indices(),
    };
    let mut basis = IdealBasis::new(vars.clone(), active);
    for a in 0..n {
        for b in a + 1..n {
            basis.push(field_eq(vars, edge(a, b)), Provenance::FieldEq);
        }
    }
    for g in k..n {
        let mut p = one(vars);
        for d in 0..k {
            p = &p * &(&one(vars) - &var(vars, edge(g, d)));
        }
        basis.push(p, Provenance::Dominating);
    }
    for s in subsets(n, k - 1) {
        let mut p = one(vars);
        for outside in (0..n).filter(|v| !s.contains(v)) {
            let mut sum = Polynomial::zero(vars.clone());
            for &inside in &s {
                sum = &sum + &var(vars, edge(inside, outside));
            }
            p = &p * &sum;
        }
        basis.push(p, Provenance::Minimality);
    }
    basis
}

/// Generators of `I_{G□H}`: two per product vertex.
pub fn build_ideal_igh(params: GraphClassParams) -> IdealBasis {
    build_ideal_product(&Arc::new(VarTable::new(params)))
}

fn build_ideal_product(vars: &Arc<VarTable>) -> IdealBasis {
    let p = vars.params();
    let mut basis = IdealBasis::new(
        vars.clone(),
        vars.vars().iter().enumerate().map(|(i, _)| i).collect(),
    );
    for g in 0..p.n_g {
        for h in 0..p.n_h {
            let x = vars.vertex(g, h);
            basis.push(field_eq(vars, x), Provenance::ProductFieldEq);
            let mut q = &one(vars) - &var(vars, x);
            for g2 in (0..p.n_g).filter(|&g2| g2 != g) {
                let t = &var(vars, vars.edge_g(g, g2)) * &var(vars, vars.vertex(g2, h));
                q = &q * &(&one(vars) - &t);
            }
            for h2 in (0..p.n_h).filter(|&h2| h2 != h) {
                let t = &var(vars, vars.edge_h(h, h2)) * &var(vars, vars.vertex(g, h2));
                q = &q * &(&one(vars) - &t);
            }
            basis.push(q, Provenance::ProductDominated);
        }
    }
    basis
}

/// `I_sos = I_G + I_H + I_{G□H}`.
pub fn build_ideal_sos(params: GraphClassParams) -> IdealBasis {
    build_ideal_sos_in(&Arc::new(VarTable::new(params)))
}

pub fn build_ideal_sos_in(vars: &Arc<VarTable>) -> IdealBasis {
    build_ideal_side(vars, Side::G)
        .union(build_ideal_side(vars, Side::H))
        .union(build_ideal_product(vars))
}

/// `f* = Σ x_gh − k_G·k_H`.
pub fn build_fstar(params: GraphClassParams) -> Polynomial {
    build_fstar_in(&Arc::new(VarTable::new(params)))
}

pub fn build_fstar_in(vars: &Arc<VarTable>) -> Polynomial {
    let p = vars.params();
    let terms = vars
        .vertex_indices()
        .into_iter()
        .map(|i| (Monomial::var(i), Rat::from(1)))
        .chain([(
            Monomial::one(),
            Rat::from((p.k_g * p.k_h) as i64) * Rat::from(-1),
        )]);
    Polynomial::from_terms(vars.clone(), terms).expect("rational terms")
}
