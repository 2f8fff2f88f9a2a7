use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::One;

use super::{AlgebraError, CoeffText, Coefficient, Monomial, QuadExt, Rat, VarTable};

/// Sparse polynomial over `C` in the variables of a [`VarTable`].
///
/// Terms are kept in strictly decreasing grevlex order with no zero
/// coefficients, so structural equality is polynomial equality.
#[derive(Clone)]
pub struct Polynomial<C = Rat> {
    vars: Arc<VarTable>,
    terms: Vec<(Monomial, C)>,
}

impl<C: Coefficient> PartialEq for Polynomial<C> {
    fn eq(&self, other: &Self) -> bool {
        *self.vars == *other.vars && self.terms == other.terms
    }
}

impl<C: Coefficient> Eq for Polynomial<C> {}

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(vars: Arc<VarTable>) -> Self {
        Polynomial {
            vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(vars: Arc<VarTable>, c: C) -> Self {
        Self::monomial(vars, Monomial::one(), c)
    }

    pub fn one(vars: Arc<VarTable>) -> Self {
        Self::constant(vars, C::one())
    }

    pub fn var(vars: Arc<VarTable>, idx: usize) -> Self {
        assert!(idx < vars.len(), "variable index {idx} out of range");
        Self::monomial(vars, Monomial::var(idx), C::one())
    }

    pub fn monomial(vars: Arc<VarTable>, m: Monomial, c: C) -> Self {
        let terms = if c.is_zero() {
            Vec::new()
        } else {
            vec![(m, c)]
        };
        Polynomial { vars, terms }
    }

    /// Collects arbitrary terms, merging equal monomials.
    pub fn from_terms(
        vars: Arc<VarTable>,
        terms: impl IntoIterator<Item = (Monomial, C)>,
    ) -> Result<Self, AlgebraError> {
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (m, c) in terms {
            accumulate(&mut acc, m, c)?;
        }
        Ok(Self::from_map(vars, acc))
    }

    fn from_map(vars: Arc<VarTable>, acc: BTreeMap<Monomial, C>) -> Self {
        let terms = acc
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Polynomial { vars, terms }
    }

    pub(crate) fn from_sorted_terms(vars: Arc<VarTable>, terms: Vec<(Monomial, C)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        Polynomial { vars, terms }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn leading_term(&self) -> Option<&(Monomial, C)> {
        self.terms.first()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms
            .binary_search_by(|(t, _)| m.cmp(t))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| C::zero())
    }

    pub fn constant_term(&self) -> C {
        self.coefficient(&Monomial::one())
    }

    fn check_ring(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || *self.vars == *other.vars {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Greater => {
                    out.push(a.clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(b.clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a.1.try_add(&b.1)?;
                    if !c.is_zero() {
                        out.push((a.0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Ok(Polynomial {
            vars: self.vars.clone(),
            terms: out,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(&other.negated())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                accumulate(&mut acc, ma.mul(mb), ca.try_mul(cb)?)?;
            }
        }
        Ok(Self::from_map(self.vars.clone(), acc))
    }

    pub fn negated(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.negated()))
            .collect();
        Polynomial {
            vars: self.vars.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &C) -> Result<Self, AlgebraError> {
        if c.is_zero() {
            return Ok(Self::zero(self.vars.clone()));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, a) in &self.terms {
            let v = a.try_mul(c)?;
            if !v.is_zero() {
                terms.push((m.clone(), v));
            }
        }
        Ok(Polynomial {
            vars: self.vars.clone(),
            terms,
        })
    }

    pub fn pow(&self, e: u32) -> Result<Self, AlgebraError> {
        let mut acc = Self::one(self.vars.clone());
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Image under `x_i² = x_i` for every variable.
    pub fn multilinearize(&self) -> Result<Self, AlgebraError> {
        Self::from_terms(
            self.vars.clone(),
            self.terms.iter().map(|(m, c)| (m.support(), c.clone())),
        )
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_squarefree())
    }

    /// Value at a 0/1 point given as one flag per variable.
    pub fn eval_bool(&self, point: &[bool]) -> Result<C, AlgebraError> {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            if m.exponents().all(|(v, _)| point[v]) {
                acc = acc.try_add(c)?;
            }
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c.to_f64()
                    * m.exponents()
                        .map(|(v, e)| point[v].powi(e as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let d = f(c);
                (!d.is_zero()).then(|| (m.clone(), d))
            })
            .collect();
        Polynomial {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Canonical text form; see the crate README for the grammar.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mono = m.to_text(&self.vars);
            let body = match c.coeff_text() {
                CoeffText::Rational {
                    negative,
                    magnitude,
                } => {
                    out.push_str(match (k == 0, negative) {
                        (true, false) => "",
                        (true, true) => "-",
                        (false, false) => " + ",
                        (false, true) => " - ",
                    });
                    if mono.is_empty() {
                        magnitude.to_string()
                    } else if magnitude.is_one() {
                        mono
                    } else {
                        format!("{magnitude}*{mono}")
                    }
                }
                CoeffText::Grouped(g) => {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    if mono.is_empty() {
                        g
                    } else {
                        format!("{g}*{mono}")
                    }
                }
            };
            out.push_str(&body);
        }
        out
    }

    /// Parses the canonical text form (and any expression in the same grammar).
    pub fn parse(vars: Arc<VarTable>, text: &str) -> Result<Self, AlgebraError> {
        super::parse::parse_polynomial(vars, text)
    }
}

impl Polynomial<Rat> {
    pub fn to_quadext(&self) -> Polynomial<QuadExt> {
        self.map_coeffs(|c| QuadExt::rational(c.clone()))
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.terms.first() {
            None => self.clone(),
            Some((_, lc)) => {
                let inv = lc.recip();
                self.scale(&inv).expect("rational scaling")
            }
        }
    }
}

impl Polynomial<QuadExt> {
    /// The common discriminant of all irrational coefficients, `None` when
    /// every coefficient is rational.
    pub fn discriminant(&self) -> Result<Option<u64>, AlgebraError> {
        let mut d: Option<u64> = None;
        for (_, c) in &self.terms {
            if c.is_rational() {
                continue;
            }
            match d {
                None => d = Some(c.d()),
                Some(x) if x == c.d() => {}
                Some(x) => return Err(AlgebraError::MixedDiscriminants(x, c.d())),
            }
        }
        Ok(d)
    }
}

/// Splits `p = r + s·√d` into `(r, s)` over the rationals.
pub fn quadext_to_rational_parts(
    p: &Polynomial<QuadExt>,
) -> Result<(Polynomial<Rat>, Polynomial<Rat>), AlgebraError> {
    p.discriminant()?;
    Ok((
        p.map_coeffs(|c| c.a().clone()),
        p.map_coeffs(|c| c.b().clone()),
    ))
}

fn accumulate<C: Coefficient>(
    acc: &mut BTreeMap<Monomial, C>,
    m: Monomial,
    c: C,
) -> Result<(), AlgebraError> {
    if c.is_zero() {
        return Ok(());
    }
    match acc.get_mut(&m) {
        Some(slot) => {
            let v = slot.try_add(&c)?;
            if v.is_zero() {
                acc.remove(&m);
            } else {
                *slot = v;
            }
        }
        None => {
            acc.insert(m, c);
        }
    }
    Ok(())
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<C: Coefficient> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<C: Coefficient> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<C: Coefficient> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<C: Coefficient> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<C: Coefficient> Add for Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        &self + &rhs
    }
}

impl<C: Coefficient> Sub for Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        &self - &rhs
    }
}

impl<C: Coefficient> Mul for Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        &self * &rhs
    }
}

impl<C: Coefficient> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.negated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GraphClassParams;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn table() -> Arc<VarTable> {
        // (2,1,2,1): four vertex variables, one edge on each side
        Arc::new(VarTable::new(GraphClassParams::new(2, 1, 2, 1).unwrap()))
    }

    fn x(t: &Arc<VarTable>, i: usize) -> Polynomial {
        Polynomial::var(t.clone(), i)
    }

    fn c(t: &Arc<VarTable>, n: i64, d: i64) -> Polynomial {
        Polynomial::constant(t.clone(), Rat::new(n, d))
    }

    #[test]
    fn addition_examples() {
        let t = table();
        let one = c(&t, 1, 1);
        assert_eq!(&(&x(&t, 0) + &one) + &x(&t, 0).negated(), one);
        let p = &x(&t, 1) + &one;
        assert_eq!(&p + &Polynomial::zero(t.clone()), p);
        let a = &c(&t, 2, 3) * &x(&t, 0);
        let b = &c(&t, 1, 3) * &x(&t, 0);
        assert_eq!(&a + &b, x(&t, 0));
    }

    #[test]
    fn multiplication_examples() {
        let t = table();
        let p = &c(&t, 1, 1) - &x(&t, 0);
        let sq = &p * &p;
        assert_eq!(sq.to_text(), "x[0,0]^2 - 2*x[0,0] + 1");
        assert_eq!(&p * &Polynomial::one(t.clone()), p);
        let r2 = QuadExt::sqrt(2).unwrap();
        let a = Polynomial::constant(t.clone(), QuadExt::one() + r2.clone());
        let b = Polynomial::constant(t.clone(), QuadExt::one() - r2);
        assert_eq!(&a * &b, Polynomial::constant(t.clone(), QuadExt::from(-1)));
    }

    #[test]
    fn rational_parts() {
        let t = table();
        let r2 = QuadExt::sqrt(2).unwrap();
        let xq = x(&t, 0).to_quadext();
        let p = &Polynomial::constant(t.clone(), r2.clone()) * &xq;
        let (r, s) = quadext_to_rational_parts(&p).unwrap();
        assert!(r.is_zero());
        assert_eq!(s, x(&t, 0));

        let q = &(&Polynomial::constant(t.clone(), QuadExt::one() + r2.clone()) * &xq)
            + &Polynomial::constant(t.clone(), QuadExt::from(3));
        let (r, s) = quadext_to_rational_parts(&q).unwrap();
        assert_eq!(r, &x(&t, 0) + &c(&t, 3, 1));
        assert_eq!(s, x(&t, 0));

        let (r, s) = quadext_to_rational_parts(&(&p * &p)).unwrap();
        assert_eq!(r, &c(&t, 2, 1) * &(&x(&t, 0) * &x(&t, 0)));
        assert!(s.is_zero());

        let mixed = &Polynomial::constant(t.clone(), r2) * &xq
            + Polynomial::constant(t.clone(), QuadExt::sqrt(3).unwrap());
        assert!(quadext_to_rational_parts(&mixed).is_err());
    }

    #[test]
    fn ring_mismatch_is_an_error() {
        let t = table();
        let u = Arc::new(VarTable::new(GraphClassParams::new(3, 2, 3, 2).unwrap()));
        assert_eq!(
            x(&t, 0).checked_add(&x(&u, 0)),
            Err(AlgebraError::RingMismatch)
        );
    }

    #[test]
    fn canonical_text() {
        let t = table();
        let p: Polynomial = Polynomial::parse(t.clone(), "-8/3*x[0,1]*x[1,0] + 1").unwrap();
        assert_eq!(p.to_text(), "-8/3*x[0,1]*x[1,0] + 1");
        let q: Polynomial<QuadExt> = Polynomial::parse(
            t.clone(),
            "(2+sqrt(2))*x[0,0]*x[0,1] - (5+2*sqrt(2))*x[0,0] + 8 + 3*sqrt(2)",
        )
        .unwrap();
        assert_eq!(
            q.to_text(),
            "(2+sqrt(2))*x[0,0]*x[0,1] + (-5-2*sqrt(2))*x[0,0] + (8+3*sqrt(2))"
        );
        assert_eq!(
            Polynomial::<QuadExt>::parse(t.clone(), &q.to_text()).unwrap(),
            q
        );
        assert_eq!(Polynomial::<Rat>::zero(t.clone()).to_text(), "0");
        assert!(Polynomial::<Rat>::parse(t.clone(), "sqrt(2)*x[0,0]").is_err());
        assert!(Polynomial::<Rat>::parse(t.clone(), "x[5,0]").is_err());
        assert!(Polynomial::<Rat>::parse(t, "x[0,0] +").is_err());
    }

    fn arb_poly(t: Arc<VarTable>) -> impl Strategy<Value = Polynomial> {
        let term = (
            proptest::collection::vec(0usize..4, 0..=3),
            -5i64..=5,
            1i64..=4,
        );
        proptest::collection::vec(term, 0..5).prop_map(move |ts| {
            Polynomial::from_terms(
                t.clone(),
                ts.into_iter()
                    .map(|(vs, n, d)| (Monomial::from_vars(vs), Rat::new(n, d))),
            )
            .unwrap()
        })
    }

    fn arb_qpoly(t: Arc<VarTable>) -> impl Strategy<Value = Polynomial<QuadExt>> {
        let term = (
            proptest::collection::vec(0usize..4, 0..=2),
            -4i64..=4,
            -4i64..=4,
            1i64..=3,
        );
        proptest::collection::vec(term, 0..4).prop_map(move |ts| {
            Polynomial::from_terms(
                t.clone(),
                ts.into_iter().map(|(vs, a, b, d)| {
                    (
                        Monomial::from_vars(vs),
                        QuadExt::new(Rat::new(a, d), Rat::from(b), 2).unwrap(),
                    )
                }),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ring_axioms(p in arb_poly(table()), q in arb_poly(table()), r in arb_poly(table())) {
            prop_assert_eq!(&p + &q, &q + &p);
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert!((&p - &p).is_zero());
        }

        #[test]
        fn terms_strictly_decreasing(p in arb_poly(table()), q in arb_poly(table())) {
            let s = &p * &q;
            prop_assert!(s.terms().windows(2).all(|w| w[0].0 > w[1].0));
            prop_assert!(s.terms().iter().all(|(_, c)| !c.is_zero()));
        }

        #[test]
        fn parts_of_square_recombine(p in arb_qpoly(table())) {
            let sq = &p * &p;
            let (r, s) = quadext_to_rational_parts(&sq).unwrap();
            let sqrt2 = Polynomial::constant(table(), QuadExt::sqrt(2).unwrap());
            prop_assert_eq!(&r.to_quadext() + &(&s.to_quadext() * &sqrt2), sq);
        }

        #[test]
        fn text_round_trip(p in arb_poly(table()), q in arb_qpoly(table())) {
            let t = table();
            prop_assert_eq!(Polynomial::<Rat>::parse(t.clone(), &p.to_text()).unwrap(), p.clone());
            prop_assert_eq!(Polynomial::<QuadExt>::parse(t, &q.to_text()).unwrap(), q);
        }
    }
}
