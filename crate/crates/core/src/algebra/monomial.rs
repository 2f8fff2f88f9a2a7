use std::cmp::Ordering;

use super::VarTable;

/// Power product `Π x_i^{e_i}` stored sparsely as `(variable, exponent)`
/// pairs sorted by variable index. Zero exponents are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(u32, u32)>,
    degree: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(idx: usize) -> Self {
        Monomial {
            exps: vec![(idx as u32, 1)],
            degree: 1,
        }
    }

    /// Builds a monomial from `(variable, exponent)` pairs in any order;
    /// repeated variables are merged and zero exponents dropped.
    pub fn from_exponents(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut exps: Vec<(u32, u32)> = pairs
            .into_iter()
            .filter(|&(_, e)| e > 0)
            .map(|(v, e)| (v as u32, e))
            .collect();
        exps.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(exps.len());
        for (v, e) in exps {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => merged.push((v, e)),
            }
        }
        let degree = merged.iter().map(|&(_, e)| e).sum();
        Monomial {
            exps: merged,
            degree,
        }
    }

    /// Squarefree monomial with the given variables.
    pub fn from_vars(vars: impl IntoIterator<Item = usize>) -> Self {
        Self::from_exponents(vars.into_iter().map(|v| (v, 1)))
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().map(|&(v, e)| (v as usize, e))
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.exps
            .binary_search_by_key(&(var as u32), |&(v, _)| v)
            .map(|i| self.exps[i].1)
            .unwrap_or(0)
    }

    pub fn is_squarefree(&self) -> bool {
        self.exps.iter().all(|&(_, e)| e == 1)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.exps.last().map(|&(v, _)| v as usize)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (a, b) = (self.exps[i], other.exps[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial {
            exps: out,
            degree: self.degree + other.degree,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps
            .iter()
            .all(|&(v, e)| other.exponent(v as usize) >= e)
    }

    /// Squarefree support of the monomial (the image under `x_i² = x_i`).
    pub fn support(&self) -> Monomial {
        Monomial::from_vars(self.exps.iter().map(|&(v, _)| v as usize))
    }

    /// Bitmask of the support; `None` if a variable index is ≥ 64.
    pub fn support_mask(&self) -> Option<u64> {
        let mut m = 0u64;
        for &(v, _) in &self.exps {
            if v >= 64 {
                return None;
            }
            m |= 1u64 << v;
        }
        Some(m)
    }

    pub fn from_mask(mask: u64) -> Monomial {
        let mut exps = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros();
            exps.push((v, 1));
            m &= m - 1;
        }
        Monomial {
            degree: exps.len() as u32,
            exps,
        }
    }

    /// Canonical text, e.g. `x[0,1]*eG[0,2]^2`; the empty string for `1`.
    pub fn to_text(&self, vars: &VarTable) -> String {
        let mut out = String::new();
        for (k, &(v, e)) in self.exps.iter().enumerate() {
            if k > 0 {
                out.push('*');
            }
            out.push_str(&vars.name(v as usize));
            if e > 1 {
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
        out
    }

    /// Like [`Monomial::to_text`] but prints `1` for the constant monomial.
    pub fn display_name(&self, vars: &VarTable) -> String {
        if self.is_one() {
            "1".to_string()
        } else {
            self.to_text(vars)
        }
    }
}

/// The monomial order used throughout the crate.
///
/// Graded reverse lexicographic: higher total degree is larger; ties are
/// broken at the lowest-precedence (largest-index) variable whose exponents
/// differ, where the monomial with the smaller exponent is larger. Variable
/// precedence follows [`VarTable`] index order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    #[default]
    Grevlex,
}

impl MonomialOrder {
    pub fn name(&self) -> &'static str {
        "grevlex"
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Grevlex => grevlex(a, b),
        }
    }

    /// Same order on squarefree bitmasks.
    pub fn cmp_mask(&self, a: u64, b: u64) -> Ordering {
        match self {
            MonomialOrder::Grevlex => grevlex_mask(a, b),
        }
    }
}

fn grevlex(a: &Monomial, b: &Monomial) -> Ordering {
    match a.degree.cmp(&b.degree) {
        Ordering::Equal => {}
        o => return o,
    }
    let (mut i, mut j) = (a.exps.len(), b.exps.len());
    while i > 0 || j > 0 {
        let va = if i > 0 { Some(a.exps[i - 1]) } else { None };
        let vb = if j > 0 { Some(b.exps[j - 1]) } else { None };
        match (va, vb) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                if x.1 != y.1 {
                    return y.1.cmp(&x.1);
                }
                i -= 1;
                j -= 1;
            }
            // the side holding the larger index has a positive exponent where
            // the other has zero, so it is the smaller monomial
            (Some(x), Some(y)) => {
                return if x.0 > y.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Some(_), None) => return Ordering::Less,
            (None, Some(_)) => return Ordering::Greater,
            (None, None) => break,
        }
    }
    Ordering::Equal
}

#[inline]
pub(crate) fn grevlex_mask(a: u64, b: u64) -> Ordering {
    let (da, db) = (a.count_ones(), b.count_ones());
    if da != db {
        return da.cmp(&db);
    }
    if a == b {
        return Ordering::Equal;
    }
    let top = 63 - (a ^ b).leading_zeros();
    if (a >> top) & 1 == 1 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        grevlex(self, other)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
