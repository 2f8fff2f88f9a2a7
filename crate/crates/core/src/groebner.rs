//! Reduced Gröbner bases of boolean ideals, normal forms and standard
//! monomials.
//!
//! Every variable that appears in a generator must come with its field
//! equation `x² − x`. Computation then happens in the boolean quotient,
//! where a monomial is a bitmask and products are unions. The reduced basis
//! of the full ideal is the reduced boolean basis `G'` plus the field
//! equations of those variables that are not leading terms of `G'`.
//!
//! Buchberger over `Q` suffers from intermediate coefficient growth even
//! when the final basis has tiny coefficients. The basis is therefore first
//! computed modulo a large prime and lifted by rational reconstruction. The
//! lift is accepted only after an exact check over `Q`: every S-pair of the
//! lift reduces to zero and every generator reduces to zero. Since both
//! ideals contain all field equations they are radical, and the lift has as
//! many standard monomials as the modular basis, which bounds the number of
//! 0/1 points of the input from above. Equal point counts then force the two
//! ideals to coincide. If any step fails the computation continues over `Q`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Debug;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{
    grevlex_mask, AlgebraError, Monomial, MonomialOrder, Polynomial, QuadExt, Rat, VarTable,
};
use crate::model::{GraphClassParams, IdealBasis, ModelError};

/// Default cap on reduction steps for one basis computation.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum GroebnerError {
    #[error("ring has {0} variables; at most 64 are supported")]
    TooManyVariables(usize),
    #[error("variable {0} appears without its field equation")]
    NotBoolean(String),
    #[error("reduction budget of {0} steps exceeded")]
    BudgetExceeded(u64),
    #[error("the ideal is the whole ring")]
    WholeRing,
    #[error("groebner file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Coefficient field of the engine.
trait Field: Clone + PartialEq + Debug {
    fn f_one() -> Self;
    fn f_is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Self;
    fn f_is_one(&self) -> bool {
        *self == Self::f_one()
    }
}

impl Field for Rat {
    fn f_one() -> Self {
        One::one()
    }
    fn f_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

/// Integers modulo the prime `P < 2^63`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    fn from_rat(c: &Rat) -> Option<Self> {
        let p = BigInt::from(P);
        let reduce = |x: &BigInt| -> u64 {
            let r = x % &p;
            let r = if r.is_negative() { r + &p } else { r };
            r.to_u64().expect("residue below modulus")
        };
        let d = reduce(c.denom());
        if d == 0 {
            return None;
        }
        Some(Fp(reduce(c.numer())).mul(&Fp(d).inv()))
    }

    /// Smallest fraction `r/s` with `|r|, s ≤ sqrt(P/2)` congruent to the
    /// residue, if there is one.
    fn reconstruct(self) -> Option<Rat> {
        let bound = ((P / 2) as f64).sqrt() as i128;
        let (mut r0, mut r1) = (P as i128, self.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 > bound {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if t1 == 0 || t1.abs() > bound {
            return None;
        }
        let (num, den) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
        Some(Rat::new(BigInt::from(num), BigInt::from(den)))
    }
}

impl<const P: u64> Field for Fp<P> {
    fn f_one() -> Self {
        Fp(1)
    }
    fn f_is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add_assign(&mut self, other: &Self) {
        let s = self.0 as u128 + other.0 as u128;
        self.0 = (s % P as u128) as u64;
    }
    fn mul(&self, other: &Self) -> Self {
        Fp(((self.0 as u128 * other.0 as u128) % P as u128) as u64)
    }
    fn neg(&self) -> Self {
        Fp(if self.0 == 0 { 0 } else { P - self.0 })
    }
    fn inv(&self) -> Self {
        let (mut base, mut e, mut acc) = (*self, P - 2, Fp(1));
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

const PRIME_A: u64 = (1 << 61) - 1;
const PRIME_B: u64 = (1 << 62) - 57;

/// Multilinear polynomial as `(support mask, coefficient)` pairs in
/// strictly decreasing grevlex order.
type Poly<F> = Vec<(u64, F)>;
pub(crate) type BoolPoly = Poly<Rat>;

/// Mask ordered by grevlex so that `BTreeMap` iteration follows the
/// monomial order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Key(u64);

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        grevlex_mask(self.0, other.0)
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_term<F: Field>(acc: &mut BTreeMap<Key, F>, m: u64, c: F) {
    if c.f_is_zero() {
        return;
    }
    match acc.get_mut(&Key(m)) {
        Some(slot) => {
            slot.add_assign(&c);
            if slot.f_is_zero() {
                acc.remove(&Key(m));
            }
        }
        None => {
            acc.insert(Key(m), c);
        }
    }
}

fn make_monic<F: Field>(p: &mut Poly<F>) {
    if let Some((_, lc)) = p.first() {
        if !lc.f_is_one() {
            let inv = lc.inv();
            for (_, c) in p.iter_mut() {
                *c = c.mul(&inv);
            }
        }
    }
}

/// Full reduction against a set of monic boolean polynomials.
struct Reducer<'a, F> {
    polys: &'a [Poly<F>],
    active: &'a [usize],
    steps: u64,
    budget: u64,
}

impl<'a, F: Field> Reducer<'a, F> {
    fn find(&self, m: u64) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &i in self.active {
            let lt = self.polys[i][0].0;
            if lt & m == lt {
                match best {
                    Some(b) if self.polys[b].len() <= self.polys[i].len() => {}
                    _ => best = Some(i),
                }
            }
        }
        best
    }

    fn reduce(&mut self, mut acc: BTreeMap<Key, F>) -> Result<Poly<F>, GroebnerError> {
        let mut out = Vec::new();
        while let Some((Key(m), c)) = acc.pop_last() {
            match self.find(m) {
                Some(r) => {
                    self.steps += 1;
                    if self.steps > self.budget {
                        return Err(GroebnerError::BudgetExceeded(self.budget));
                    }
                    let g = &self.polys[r];
                    let u = m & !g[0].0;
                    let s = c.neg();
                    for (t, d) in &g[1..] {
                        add_term(&mut acc, t | u, s.mul(d));
                    }
                }
                None => out.push((m, c)),
            }
        }
        Ok(out)
    }
}

fn to_map<F: Field>(p: &[(u64, F)]) -> BTreeMap<Key, F> {
    let mut acc = BTreeMap::new();
    for (m, c) in p {
        add_term(&mut acc, *m, c.clone());
    }
    acc
}

/// `bool(x^u · p)` accumulated into `acc`, negated when `negate` is set.
fn add_shifted<F: Field>(acc: &mut BTreeMap<Key, F>, p: &[(u64, F)], u: u64, negate: bool) {
    for (t, c) in p {
        add_term(acc, t | u, if negate { c.neg() } else { c.clone() });
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum PairKind {
    /// Two elements of `G'`.
    Basis(usize, usize),
    /// An element of `G'` and the field equation of a variable in its
    /// leading term.
    Field(usize, u32),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Pair {
    degree: u32,
    lcm: u64,
    kind: PairKind,
}

impl Ord for Pair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| grevlex_mask(self.lcm, other.lcm))
            .then_with(|| self.kind.cmp(&other.kind))
    }
}

impl PartialOrd for Pair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A reduced Gröbner basis together with the boolean data used for fast
/// normal forms.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    vars: Arc<VarTable>,
    order: MonomialOrder,
    boolean: u64,
    reduced: Vec<BoolPoly>,
    elements: Vec<Polynomial>,
    source_digest: String,
}

struct Engine<F> {
    polys: Vec<Poly<F>>,
    pairs: BTreeSet<Pair>,
    pending: HashSet<(usize, usize)>,
    steps: u64,
    budget: u64,
    /// Elements added by `run`.
    added: usize,
}

enum Outcome<F> {
    WholeRing,
    Basis(Vec<Poly<F>>),
}

impl<F: Field> Engine<F> {
    fn new(budget: u64) -> Self {
        Engine {
            polys: Vec::new(),
            pairs: BTreeSet::new(),
            pending: HashSet::new(),
            steps: 0,
            budget,
            added: 0,
        }
    }

    fn reduce(&mut self, acc: BTreeMap<Key, F>) -> Result<Poly<F>, GroebnerError> {
        let active: Vec<usize> = (0..self.polys.len()).collect();
        let mut r = Reducer {
            polys: &self.polys,
            active: &active,
            steps: self.steps,
            budget: self.budget,
        };
        let out = r.reduce(acc);
        self.steps = r.steps;
        out
    }

    fn add(&mut self, mut h: Poly<F>) -> Result<(), GroebnerError> {
        make_monic(&mut h);
        let idx = self.polys.len();
        let lt = h[0].0;
        for (i, g) in self.polys.iter().enumerate() {
            let lg = g[0].0;
            // coprime leading terms: the S-polynomial reduces to zero
            if lg & lt == 0 {
                continue;
            }
            let lcm = lg | lt;
            self.pairs.insert(Pair {
                degree: lcm.count_ones(),
                lcm,
                kind: PairKind::Basis(i, idx),
            });
            self.pending.insert((i, idx));
        }
        let mut bits = lt;
        while bits != 0 {
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            self.pairs.insert(Pair {
                degree: lt.count_ones() + 1,
                lcm: lt,
                kind: PairKind::Field(idx, v),
            });
        }
        self.polys.push(h);
        self.tail_reduce(idx)
    }

    /// Re-reduces the tails of earlier elements that the new element `idx`
    /// can reduce. Leading terms are unchanged, so queued pairs stay valid.
    fn tail_reduce(&mut self, idx: usize) -> Result<(), GroebnerError> {
        let lt = self.polys[idx][0].0;
        for i in 0..idx {
            if !self.polys[i][1..].iter().any(|(t, _)| t & lt == lt) {
                continue;
            }
            let others: Vec<usize> = (0..self.polys.len()).filter(|&j| j != i).collect();
            let mut r = Reducer {
                polys: &self.polys,
                active: &others,
                steps: self.steps,
                budget: self.budget,
            };
            let tail = r.reduce(to_map(&self.polys[i][1..]))?;
            self.steps = r.steps;
            let p = &mut self.polys[i];
            p.truncate(1);
            p.extend(tail);
        }
        Ok(())
    }

    fn pending(&self, a: usize, b: usize) -> bool {
        self.pending.contains(&(a.min(b), a.max(b)))
    }

    /// Chain criterion: some `k` with `LT(k) | lcm` whose pairs with `i`
    /// and `j` are already treated.
    fn chain(&self, i: usize, j: usize, lcm: u64) -> bool {
        (0..self.polys.len()).any(|k| {
            k != i && k != j && {
                let lk = self.polys[k][0].0;
                lk & lcm == lk && !self.pending(i, k) && !self.pending(j, k)
            }
        })
    }

    /// Reduces the inputs and adds the nonzero remainders. True if some
    /// remainder is a nonzero constant.
    fn feed(&mut self, inputs: Vec<Poly<F>>) -> Result<bool, GroebnerError> {
        for p in inputs {
            let h = self.reduce(to_map(&p))?;
            if h.is_empty() {
                continue;
            }
            if h[0].0 == 0 {
                return Ok(true);
            }
            self.add(h)?;
        }
        Ok(false)
    }

    /// Processes pairs until none remain. True if the unit ideal appears.
    fn run(&mut self) -> Result<bool, GroebnerError> {
        while let Some(pair) = self.pairs.pop_first() {
            let s = match pair.kind {
                PairKind::Basis(i, j) => {
                    self.pending.remove(&(i, j));
                    if self.chain(i, j, pair.lcm) {
                        continue;
                    }
                    let (gi, gj) = (&self.polys[i], &self.polys[j]);
                    let mut acc = BTreeMap::new();
                    add_shifted(&mut acc, gi, pair.lcm & !gi[0].0, false);
                    add_shifted(&mut acc, gj, pair.lcm & !gj[0].0, true);
                    acc
                }
                PairKind::Field(i, v) => {
                    let g = &self.polys[i];
                    let mut acc = BTreeMap::new();
                    add_shifted(&mut acc, g, 1u64 << v, false);
                    add_shifted(&mut acc, g, 0, true);
                    acc
                }
            };
            let h = self.reduce(s)?;
            if h.is_empty() {
                continue;
            }
            if h[0].0 == 0 {
                return Ok(true);
            }
            self.added += 1;
            self.add(h)?;
        }
        Ok(false)
    }

    fn finish(self, whole: bool) -> Result<Outcome<F>, GroebnerError> {
        if whole {
            return Ok(Outcome::WholeRing);
        }
        Ok(Outcome::Basis(interreduce(self.polys, self.budget)?))
    }
}

/// Buchberger from scratch: small leading terms first so later inputs
/// reduce against them.
fn compute<F: Field>(mut inputs: Vec<Poly<F>>, budget: u64) -> Result<Outcome<F>, GroebnerError> {
    inputs.retain(|p| !p.is_empty());
    inputs.sort_by(|a, b| grevlex_mask(a[0].0, b[0].0).then(a.len().cmp(&b.len())));
    let mut engine = Engine::new(budget);
    let whole = engine.feed(inputs)? || engine.run()?;
    engine.finish(whole)
}

fn to_modular<const P: u64>(inputs: &[BoolPoly]) -> Option<Vec<Poly<Fp<P>>>> {
    inputs
        .iter()
        .map(|p| {
            let mut acc = BTreeMap::new();
            for (m, c) in p {
                add_term(&mut acc, *m, Fp::<P>::from_rat(c)?);
            }
            Some(acc.into_iter().rev().map(|(Key(m), c)| (m, c)).collect())
        })
        .collect()
}

/// Modular basis lifted to `Q`, or `None` if a coefficient has no small
/// preimage or a denominator vanishes modulo `P`.
fn modular_lift<const P: u64>(
    inputs: &[BoolPoly],
    budget: u64,
) -> Result<Option<Vec<BoolPoly>>, GroebnerError> {
    let Some(modular) = to_modular::<P>(inputs) else {
        return Ok(None);
    };
    match compute(modular, budget)? {
        Outcome::WholeRing => Ok(Some(vec![vec![(0, Rat::one())]])),
        Outcome::Basis(polys) => Ok(polys
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|(m, c)| c.reconstruct().map(|r| (m, r)))
                    .collect()
            })
            .collect()),
    }
}

/// Exact check over `Q` that a candidate reduced basis is a Gröbner basis
/// whose ideal contains every input: seeded with the candidate, the engine
/// must find that all pairs and all inputs reduce to zero. Equality of the
/// ideals follows from the point count of the modular basis it came from.
fn verify(
    candidate: &[BoolPoly],
    inputs: Vec<BoolPoly>,
    budget: u64,
) -> Result<bool, GroebnerError> {
    if candidate.len() == 1 && candidate[0][0].0 == 0 {
        // the modular ideal has no points, hence neither does the rational one
        return Ok(true);
    }
    let mut engine = Engine::new(budget);
    for p in candidate {
        engine.add(p.clone())?;
    }
    if engine.run()? || engine.added > 0 {
        return Ok(false);
    }
    let seeded = engine.polys.len();
    Ok(!engine.feed(inputs)? && engine.polys.len() == seeded)
}

/// Bitmask of variables with `x² − x` among the generators, after checking
/// that every variable used by a generator is among them.
fn boolean_mask(basis: &IdealBasis) -> Result<u64, GroebnerError> {
    let vars = basis.vars();
    if vars.len() > 64 {
        return Err(GroebnerError::TooManyVariables(vars.len()));
    }
    let mut boolean = 0u64;
    let mut used = 0u64;
    for g in basis.generators() {
        let t = g.terms();
        if t.len() == 2 {
            let (m0, c0) = &t[0];
            let (m1, c1) = &t[1];
            if let Some(v) = m1.max_var() {
                if m1.degree() == 1
                    && *m0 == Monomial::from_exponents([(v, 2)])
                    && c0.is_one()
                    && *c1 == Rat::from(-1)
                {
                    boolean |= 1u64 << v;
                }
            }
        }
        for (m, _) in t {
            used |= m.support_mask().expect("at most 64 variables");
        }
    }
    let missing = used & !boolean;
    if missing != 0 {
        return Err(GroebnerError::NotBoolean(
            vars.name(missing.trailing_zeros() as usize),
        ));
    }
    Ok(boolean)
}

fn to_bool(p: &Polynomial) -> BoolPoly {
    let mut acc = BTreeMap::new();
    for (m, c) in p.terms() {
        add_term(
            &mut acc,
            m.support_mask().expect("at most 64 variables"),
            c.clone(),
        );
    }
    acc.into_iter().rev().map(|(Key(m), c)| (m, c)).collect()
}

fn from_bool(vars: &Arc<VarTable>, p: &[(u64, Rat)]) -> Polynomial {
    Polynomial::from_sorted_terms(
        vars.clone(),
        p.iter()
            .map(|(m, c)| (Monomial::from_mask(*m), c.clone()))
            .collect(),
    )
}

fn field_eq(vars: &Arc<VarTable>, v: usize) -> Polynomial {
    Polynomial::from_terms(
        vars.clone(),
        [
            (Monomial::from_exponents([(v, 2)]), Rat::one()),
            (Monomial::var(v), -Rat::one()),
        ],
    )
    .expect("rational terms")
}

/// Reduced Gröbner basis with the default step budget.
pub fn buchberger(
    basis: &IdealBasis,
    order: MonomialOrder,
) -> Result<GroebnerBasis, GroebnerError> {
    buchberger_with_budget(basis, order, DEFAULT_STEP_BUDGET)
}

/// Reduced Gröbner basis; `budget` caps the reduction steps of each
/// Buchberger run.
pub fn buchberger_with_budget(
    basis: &IdealBasis,
    order: MonomialOrder,
    budget: u64,
) -> Result<GroebnerBasis, GroebnerError> {
    let vars = basis.vars().clone();
    if vars.is_empty() {
        return Err(GroebnerError::Format("empty variable table".into()));
    }
    let boolean = boolean_mask(basis)?;
    let inputs: Vec<BoolPoly> = basis
        .generators()
        .iter()
        .map(to_bool)
        .filter(|p| !p.is_empty())
        .collect();
    let mut candidate = modular_lift::<PRIME_A>(&inputs, budget)?;
    if candidate.is_none() {
        candidate = modular_lift::<PRIME_B>(&inputs, budget)?;
    }
    let confirmed = match &candidate {
        Some(c) => verify(c, inputs.clone(), budget)?,
        None => false,
    };
    let reduced = match (candidate, confirmed) {
        (Some(c), true) => c,
        _ => {
            log::debug!("groebner: no confirmed modular candidate, computing over Q");
            match compute(inputs, budget)? {
                Outcome::WholeRing => vec![vec![(0u64, Rat::one())]],
                Outcome::Basis(polys) => polys,
            }
        }
    };
    log::debug!("groebner: {} boolean elements", reduced.len());
    Ok(GroebnerBasis::assemble(
        vars,
        order,
        boolean,
        reduced,
        source_key(basis, order),
    ))
}

fn source_key(basis: &IdealBasis, order: MonomialOrder) -> String {
    let mut h = Sha256::new();
    h.update(basis.digest().as_bytes());
    h.update(order.name().as_bytes());
    hex::encode(h.finalize())
}

fn interreduce<F: Field>(polys: Vec<Poly<F>>, budget: u64) -> Result<Vec<Poly<F>>, GroebnerError> {
    let lts: Vec<u64> = polys.iter().map(|p| p[0].0).collect();
    let keep: Vec<usize> = (0..polys.len())
        .filter(|&i| {
            !(0..polys.len())
                .any(|j| j != i && lts[j] & lts[i] == lts[j] && (lts[j] != lts[i] || j < i))
        })
        .collect();
    let mut out = Vec::with_capacity(keep.len());
    for &i in &keep {
        let others: Vec<usize> = keep.iter().copied().filter(|&j| j != i).collect();
        let mut r = Reducer {
            polys: &polys,
            active: &others,
            steps: 0,
            budget,
        };
        let tail = r.reduce(to_map(&polys[i][1..]))?;
        let mut p = vec![polys[i][0].clone()];
        p.extend(tail);
        make_monic(&mut p);
        out.push(p);
    }
    out.sort_by(|a, b| grevlex_mask(b[0].0, a[0].0));
    Ok(out)
}

impl GroebnerBasis {
    fn assemble(
        vars: Arc<VarTable>,
        order: MonomialOrder,
        boolean: u64,
        reduced: Vec<BoolPoly>,
        source_digest: String,
    ) -> Self {
        let mut elements: Vec<Polynomial> = reduced.iter().map(|p| from_bool(&vars, p)).collect();
        let is_whole = reduced.len() == 1 && reduced[0][0].0 == 0;
        if !is_whole {
            let linear: u64 = reduced
                .iter()
                .filter(|p| p[0].0.count_ones() == 1)
                .fold(0, |a, p| a | p[0].0);
            let mut bits = boolean & !linear;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                elements.push(field_eq(&vars, v));
            }
        }
        elements.sort_by(|a, b| b.leading_monomial().cmp(&a.leading_monomial()));
        GroebnerBasis {
            vars,
            order,
            boolean,
            reduced,
            elements,
            source_digest,
        }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn params(&self) -> GraphClassParams {
        self.vars.params()
    }

    /// All elements of the reduced basis, field equations included, by
    /// decreasing leading monomial.
    pub fn elements(&self) -> &[Polynomial] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Number of elements that are not field equations.
    pub fn boolean_len(&self) -> usize {
        self.reduced.len()
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn is_whole_ring(&self) -> bool {
        self.reduced.len() == 1 && self.reduced[0][0].0 == 0
    }

    /// True when every variable of the table satisfies `x² = x` modulo the ideal.
    pub fn is_boolean_ring(&self) -> bool {
        let n = self.vars.len();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        self.boolean == all
    }

    pub fn boolean_vars(&self) -> u64 {
        self.boolean
    }

    pub(crate) fn leading_masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.reduced.iter().map(|p| p[0].0)
    }

    #[cfg(test)]
    pub(crate) fn boolean_elements(&self) -> &[BoolPoly] {
        &self.reduced
    }

    /// True if no leading term of the basis divides the monomial `mask`.
    pub fn is_standard_mask(&self, mask: u64) -> bool {
        mask & !self.boolean == 0 && self.leading_masks().all(|lt| lt & mask != lt)
    }

    pub(crate) fn reduce_bool(&self, acc: BTreeMap<u64, Rat>) -> BoolPoly {
        let mut map = BTreeMap::new();
        for (m, c) in acc {
            add_term(&mut map, m, c);
        }
        let active: Vec<usize> = (0..self.reduced.len()).collect();
        let mut r = Reducer {
            polys: &self.reduced,
            active: &active,
            steps: 0,
            budget: u64::MAX,
        };
        r.reduce(map).expect("unbounded budget")
    }

    /// Normal form of a squarefree monomial in the boolean variables.
    pub(crate) fn normal_form_mask(&self, mask: u64) -> BoolPoly {
        self.reduce_bool(BTreeMap::from([(mask, Rat::one())]))
    }

    /// Unique reduced representative of `p` modulo the ideal.
    pub fn normal_form(&self, p: &Polynomial) -> Result<Polynomial, GroebnerError> {
        if !Arc::ptr_eq(&self.vars, p.vars()) && **p.vars() != *self.vars {
            return Err(AlgebraError::RingMismatch.into());
        }
        // split every monomial into a boolean support and a free cofactor;
        // the basis only involves boolean variables, so each cofactor class
        // reduces independently
        let mut groups: BTreeMap<Monomial, BTreeMap<u64, Rat>> = BTreeMap::new();
        for (m, c) in p.terms() {
            let mut mask = 0u64;
            let mut free = Vec::new();
            for (v, e) in m.exponents() {
                if v < 64 && (self.boolean >> v) & 1 == 1 {
                    mask |= 1u64 << v;
                } else {
                    free.push((v, e));
                }
            }
            let slot = groups.entry(Monomial::from_exponents(free)).or_default();
            let cur = slot.entry(mask).or_insert_with(Rat::zero);
            *cur += c;
        }
        let mut terms = Vec::new();
        for (free, acc) in groups {
            for (m, c) in self.reduce_bool(acc) {
                terms.push((Monomial::from_mask(m).mul(&free), c));
            }
        }
        Ok(Polynomial::from_terms(self.vars.clone(), terms)?)
    }

    /// Normal form over `Q(√d)`, computed part by part.
    pub fn normal_form_quad(
        &self,
        p: &Polynomial<QuadExt>,
    ) -> Result<Polynomial<QuadExt>, GroebnerError> {
        let mut rational = Vec::new();
        let mut irrational: BTreeMap<u64, Vec<(Monomial, Rat)>> = BTreeMap::new();
        for (m, c) in p.terms() {
            rational.push((m.clone(), c.a().clone()));
            if !c.is_rational() {
                irrational
                    .entry(c.d())
                    .or_default()
                    .push((m.clone(), c.b().clone()));
            }
        }
        let nf = self.normal_form(&Polynomial::from_terms(self.vars.clone(), rational)?)?;
        let mut out = nf.to_quadext();
        for (d, terms) in irrational {
            let part = self.normal_form(&Polynomial::from_terms(self.vars.clone(), terms)?)?;
            let root = QuadExt::sqrt(d)?;
            let scaled = part.map_coeffs(|c| {
                QuadExt::rational(c.clone())
                    .checked_mul(&root)
                    .expect("rational times root")
            });
            out = out.checked_add(&scaled)?;
        }
        Ok(out)
    }

    /// GB file: a header line and one element per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# groebner order={} params={} source={} boolean={:#x} elements={}\n",
            self.order.name(),
            self.vars.params(),
            self.source_digest,
            self.boolean,
            self.elements.len()
        );
        for e in &self.elements {
            out.push_str(&e.to_text());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<GroebnerBasis, GroebnerError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| GroebnerError::Format("empty file".into()))?;
        let field = |key: &str| -> Result<&str, GroebnerError> {
            header
                .split_whitespace()
                .find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| GroebnerError::Format(format!("header lacks `{key}`")))
        };
        if !header.starts_with("# groebner") || field("order")? != "grevlex" {
            return Err(GroebnerError::Format(format!("bad header `{header}`")));
        }
        let params: GraphClassParams = field("params")?.parse()?;
        let source = field("source")?.to_string();
        let boolean = u64::from_str_radix(field("boolean")?.trim_start_matches("0x"), 16)
            .map_err(|_| GroebnerError::Format("bad boolean mask".into()))?;
        let vars = Arc::new(VarTable::new(params));
        let mut reduced = Vec::new();
        for line in lines {
            let p = Polynomial::parse(vars.clone(), line.trim())?;
            if p.is_multilinear() {
                reduced.push(to_bool(&p));
            }
        }
        reduced.sort_by(|a, b| grevlex_mask(b[0].0, a[0].0));
        Ok(GroebnerBasis::assemble(
            vars,
            MonomialOrder::Grevlex,
            boolean,
            reduced,
            source,
        ))
    }
}

/// Standard monomials of degree at most `ell`, in decreasing order.
pub fn reduced_monomials(gb: &GroebnerBasis, ell: u32) -> Result<Vec<Monomial>, GroebnerError> {
    Ok(reduced_masks(gb, ell)?
        .into_iter()
        .map(Monomial::from_mask)
        .collect())
}

pub(crate) fn reduced_masks(gb: &GroebnerBasis, ell: u32) -> Result<Vec<u64>, GroebnerError> {
    if gb.is_whole_ring() {
        return Err(GroebnerError::WholeRing);
    }
    if !gb.is_boolean_ring() {
        let free = (0..gb.vars.len())
            .find(|&v| (gb.boolean >> v) & 1 == 0)
            .unwrap_or(0);
        return Err(GroebnerError::NotBoolean(gb.vars.name(free)));
    }
    let lts: Vec<u64> = gb.leading_masks().collect();
    let n = gb.vars.len() as u32;
    let mut out = Vec::new();
    // supersets of a non-standard monomial are non-standard, so depth-first
    // extension by increasing variable index can prune
    fn rec(mask: u64, next: u32, n: u32, ell: u32, lts: &[u64], out: &mut Vec<u64>) {
        out.push(mask);
        if mask.count_ones() == ell {
            return;
        }
        for v in next..n {
            let m = mask | (1u64 << v);
            if lts.iter().all(|&lt| lt & m != lt) {
                rec(m, v + 1, n, ell, lts, out);
            }
        }
    }
    rec(0, 0, n, ell, &lts, &mut out);
    out.sort_by(|a, b| grevlex_mask(*b, *a));
    Ok(out)
}

/// True when raising the degree bound from `ell` to `ell + 1` adds no
/// standard monomial.
pub fn saturation_check(gb: &GroebnerBasis, ell: u32) -> Result<bool, GroebnerError> {
    Ok(reduced_masks(gb, ell + 1)?.len() == reduced_masks(gb, ell)?.len())
}

/// Content-addressed on-disk cache of bases.
pub struct GbCache {
    dir: PathBuf,
}

impl GbCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        GbCache { dir: dir.into() }
    }

    pub fn path_for(&self, basis: &IdealBasis, order: MonomialOrder) -> PathBuf {
        self.dir.join(format!("{}.gb", source_key(basis, order)))
    }

    /// Loads the cached basis or computes and stores it. The flag reports
    /// a cache hit.
    pub fn get_or_compute(
        &self,
        basis: &IdealBasis,
        order: MonomialOrder,
        budget: u64,
    ) -> Result<(GroebnerBasis, bool), GroebnerError> {
        let path = self.path_for(basis, order);
        if path.exists() {
            let gb = read_gb(&path)?;
            if gb.source_digest == source_key(basis, order) {
                return Ok((gb, true));
            }
        }
        let gb = buchberger_with_budget(basis, order, budget)?;
        fs::create_dir_all(&self.dir)?;
        write_gb(&path, &gb)?;
        Ok((gb, false))
    }
}

pub fn write_gb(path: &Path, gb: &GroebnerBasis) -> Result<(), GroebnerError> {
    fs::write(path, gb.to_text())?;
    Ok(())
}

pub fn read_gb(path: &Path) -> Result<GroebnerBasis, GroebnerError> {
    GroebnerBasis::parse(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_fstar_in, build_ideal_sos, build_ideal_sos_in, Provenance};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(a: usize, b: usize, c: usize, d: usize) -> GraphClassParams {
        GraphClassParams::new(a, b, c, d).unwrap()
    }

    fn basis_of(vars: &Arc<VarTable>, gens: &[&str]) -> IdealBasis {
        let mut b = IdealBasis::new(vars.clone(), (0..vars.len()).collect());
        for g in gens {
            b.push(
                Polynomial::parse(vars.clone(), g).unwrap(),
                Provenance::FieldEq,
            );
        }
        b
    }

    fn texts(gb: &GroebnerBasis) -> Vec<String> {
        gb.elements().iter().map(|e| e.to_text()).collect()
    }

    #[test]
    fn single_field_equation() {
        let vars = Arc::new(VarTable::new(params(1, 1, 1, 1)));
        let gb = buchberger(
            &basis_of(&vars, &["x[0,0]^2 - x[0,0]"]),
            MonomialOrder::Grevlex,
        )
        .unwrap();
        assert_eq!(texts(&gb), ["x[0,0]^2 - x[0,0]"]);
    }

    #[test]
    fn already_reduced_basis() {
        let vars = Arc::new(VarTable::new(params(1, 1, 2, 1)));
        let gens = [
            "x[0,0]^2 - x[0,0]",
            "x[0,0]*x[0,1] - x[0,1]",
            "x[0,1]^2 - x[0,1]",
        ];
        let gb = buchberger(&basis_of(&vars, &gens), MonomialOrder::Grevlex).unwrap();
        let mut got = texts(&gb);
        got.sort();
        let mut want: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn missing_field_equation_is_rejected() {
        let vars = Arc::new(VarTable::new(params(1, 1, 2, 1)));
        let b = basis_of(&vars, &["x[0,0]^2 - x[0,0]", "x[0,0]*x[0,1] - 1"]);
        assert!(matches!(
            buchberger(&b, MonomialOrder::Grevlex),
            Err(GroebnerError::NotBoolean(_))
        ));
    }

    #[test]
    fn whole_ring_detected() {
        let vars = Arc::new(VarTable::new(params(1, 1, 1, 1)));
        let gb = buchberger(
            &basis_of(&vars, &["x[0,0]^2 - x[0,0]", "x[0,0]", "x[0,0] - 1"]),
            MonomialOrder::Grevlex,
        )
        .unwrap();
        assert!(gb.is_whole_ring());
        assert!(matches!(
            reduced_monomials(&gb, 1),
            Err(GroebnerError::WholeRing)
        ));
        assert!(matches!(
            saturation_check(&gb, 1),
            Err(GroebnerError::WholeRing)
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let b = build_ideal_sos(params(3, 2, 3, 2));
        assert!(matches!(
            buchberger_with_budget(&b, MonomialOrder::Grevlex, 10),
            Err(GroebnerError::BudgetExceeded(10))
        ));
    }

    #[test]
    fn generators_reduce_to_zero() {
        for p in [
            params(1, 1, 1, 1),
            params(2, 1, 2, 1),
            params(2, 2, 3, 2),
            params(3, 2, 3, 2),
        ] {
            let b = build_ideal_sos(p);
            let gb = buchberger(&b, MonomialOrder::Grevlex).unwrap();
            for g in b.generators() {
                assert!(gb.normal_form(g).unwrap().is_zero(), "{p}: {g}");
            }
            for e in gb.elements() {
                assert!(gb.normal_form(e).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn reduced_basis_properties() {
        let gb = buchberger(&build_ideal_sos(params(3, 2, 3, 2)), MonomialOrder::Grevlex).unwrap();
        let lms: Vec<Monomial> = gb
            .elements()
            .iter()
            .map(|e| e.leading_monomial().unwrap().clone())
            .collect();
        for (i, e) in gb.elements().iter().enumerate() {
            assert!(e.leading_term().unwrap().1.is_one());
            for (m, _) in e.terms() {
                for (j, lm) in lms.iter().enumerate() {
                    if i != j {
                        assert!(!lm.divides(m), "{} divisible by {}", e, gb.elements()[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn standard_monomial_counts() {
        let gb = buchberger(&build_ideal_sos(params(3, 2, 3, 2)), MonomialOrder::Grevlex).unwrap();
        assert_eq!(reduced_monomials(&gb, 0).unwrap(), vec![Monomial::one()]);
        let v1 = reduced_monomials(&gb, 1).unwrap();
        let v2 = reduced_monomials(&gb, 2).unwrap();
        assert_eq!(v1.len(), 12);
        assert_eq!(v2.len(), 67);
        assert!(v2.iter().all(|m| m.is_squarefree()));
        assert!(v2.windows(2).all(|w| w[0] > w[1]));
        assert!(!saturation_check(&gb, 1).unwrap());
        assert!(saturation_check(&gb, 15).unwrap());
    }

    #[test]
    fn normal_form_examples() {
        let vars = Arc::new(VarTable::new(params(3, 2, 3, 2)));
        let b = build_ideal_sos_in(&vars);
        let gb = buchberger(&b, MonomialOrder::Grevlex).unwrap();
        let x = Polynomial::var(vars.clone(), 0);
        // x[0,0] may itself reduce; x² and x share a normal form
        assert_eq!(
            gb.normal_form(&(&x * &x)).unwrap(),
            gb.normal_form(&x).unwrap()
        );
        let fstar = build_fstar_in(&vars);
        let nf = gb.normal_form(&fstar).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut g = Polynomial::zero(vars.clone());
            for gen in b.generators().choose_multiple(&mut rng, 3) {
                let v = rng.gen_range(0..vars.len());
                let coeff = Polynomial::constant(vars.clone(), Rat::from(rng.gen_range(-3i64..=3)));
                g = &g + &(&(&coeff * &Polynomial::var(vars.clone(), v)) * gen);
            }
            assert_eq!(gb.normal_form(&(&fstar + &g)).unwrap(), nf);
        }
        assert_eq!(
            gb.normal_form(&gb.normal_form(&fstar).unwrap()).unwrap(),
            nf
        );
    }

    #[test]
    fn free_variables_pass_through() {
        let vars = Arc::new(VarTable::new(params(1, 1, 2, 1)));
        let gb = buchberger(
            &basis_of(&vars, &["x[0,0]^2 - x[0,0]"]),
            MonomialOrder::Grevlex,
        )
        .unwrap();
        let p = Polynomial::parse(vars.clone(), "x[0,0]^3*x[0,1]^2 + eH[0,1]").unwrap();
        assert_eq!(
            gb.normal_form(&p).unwrap().to_text(),
            "x[0,0]*x[0,1]^2 + eH[0,1]"
        );
        assert!(reduced_monomials(&gb, 1).is_err());
    }

    #[test]
    fn file_round_trip_and_cache() {
        let b = build_ideal_sos(params(2, 2, 3, 2));
        let gb = buchberger(&b, MonomialOrder::Grevlex).unwrap();
        let back = GroebnerBasis::parse(&gb.to_text()).unwrap();
        assert_eq!(back.elements(), gb.elements());
        assert_eq!(back.to_text(), gb.to_text());

        let dir = tempfile::tempdir().unwrap();
        let cache = GbCache::new(dir.path());
        let (a, hit) = cache
            .get_or_compute(&b, MonomialOrder::Grevlex, DEFAULT_STEP_BUDGET)
            .unwrap();
        assert!(!hit);
        let (c, hit) = cache
            .get_or_compute(&b, MonomialOrder::Grevlex, DEFAULT_STEP_BUDGET)
            .unwrap();
        assert!(hit);
        assert_eq!(a.to_text(), c.to_text());
    }

    /// Reduction that picks a random reducible term and a random reducer at
    /// every step; with a reduced basis the result must not depend on the
    /// choices.
    fn random_reduce(gb: &GroebnerBasis, p: BoolPoly, rng: &mut ChaCha8Rng) -> BoolPoly {
        let polys = gb.boolean_elements();
        let mut cur: BTreeMap<u64, Rat> = p.into_iter().collect();
        loop {
            let reducible: Vec<(u64, usize)> = cur
                .keys()
                .flat_map(|&m| {
                    polys
                        .iter()
                        .enumerate()
                        .filter(move |(_, g)| g[0].0 & m == g[0].0)
                        .map(move |(i, _)| (m, i))
                })
                .collect();
            let Some(&(m, i)) = reducible.choose(rng) else {
                break;
            };
            let c = cur.remove(&m).unwrap();
            let g = &polys[i];
            let u = m & !g[0].0;
            for (t, d) in &g[1..] {
                let e = cur.entry(t | u).or_insert_with(Rat::zero);
                *e -= &c * d;
                if e.is_zero() {
                    cur.remove(&(t | u));
                }
            }
        }
        let mut out: BoolPoly = cur.into_iter().collect();
        out.sort_by(|a, b| grevlex_mask(b.0, a.0));
        out
    }

    #[test]
    fn confluence_under_random_reduction_orders() {
        let gb = buchberger(&build_ideal_sos(params(3, 2, 3, 2)), MonomialOrder::Grevlex).unwrap();
        let n = gb.vars().len() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let terms = rng.gen_range(1..6);
            let mut acc = BTreeMap::new();
            for _ in 0..terms {
                let mut m = 0u64;
                for _ in 0..rng.gen_range(0..5) {
                    m |= 1u64 << rng.gen_range(0..n);
                }
                let c = Rat::from(rng.gen_range(-4i64..=4));
                let e = acc.entry(m).or_insert_with(Rat::zero);
                *e += c;
            }
            let p: BoolPoly = {
                let mut v: BoolPoly = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                v.sort_by(|a, b| grevlex_mask(b.0, a.0));
                v
            };
            let canonical = gb.reduce_bool(p.iter().cloned().collect());
            assert_eq!(random_reduce(&gb, p, &mut rng), canonical);
        }
    }

    #[test]
    fn rational_reconstruction_round_trip() {
        for num in -30i64..=30 {
            for den in 1i64..=20 {
                let r = Rat::new(BigInt::from(num), BigInt::from(den));
                let m = Fp::<PRIME_A>::from_rat(&r).unwrap();
                assert_eq!(m.reconstruct(), Some(r));
            }
        }
        let half = Fp::<PRIME_B>(2).inv();
        assert_eq!(half.mul(&Fp(2)), Fp(1));
    }

    #[test]
    fn modular_and_rational_paths_agree() {
        let basis = build_ideal_sos(params(3, 2, 3, 2));
        let inputs: Vec<BoolPoly> = basis.generators().iter().map(to_bool).collect();
        let Outcome::Basis(direct) = compute(inputs, DEFAULT_STEP_BUDGET).unwrap() else {
            panic!("not the unit ideal");
        };
        let gb = buchberger(&basis, MonomialOrder::Grevlex).unwrap();
        assert_eq!(gb.boolean_elements(), &direct[..]);
    }

    #[test]
    fn candidate_verification() {
        let vars = Arc::new(VarTable::new(params(2, 1, 2, 1)));
        let basis = basis_of(
            &vars,
            &[
                "x[0,0]^2 - x[0,0]",
                "x[0,1]^2 - x[0,1]",
                "x[0,0]*x[0,1] - x[0,0]",
            ],
        );
        let inputs: Vec<BoolPoly> = basis.generators().iter().map(to_bool).collect();
        let good = vec![inputs[2].clone()];
        assert!(verify(&good, inputs.clone(), 1000).unwrap());
        // generates a smaller ideal
        let small = vec![vec![(3, Rat::from(1))]];
        assert!(!verify(&small, inputs.clone(), 1000).unwrap());
        // not a Gröbner basis
        let not_gb = vec![
            vec![(3, Rat::from(1)), (1, Rat::from(-1))],
            vec![(6, Rat::from(1)), (2, Rat::from(-1))],
        ];
        let vars3 = basis_of(
            &vars,
            &[
                "x[0,0]^2 - x[0,0]",
                "x[0,1]^2 - x[0,1]",
                "x[1,0]^2 - x[1,0]",
            ],
        );
        let more: Vec<BoolPoly> = vars3.generators().iter().map(to_bool).collect();
        assert!(!verify(&not_gb, more, 1000).unwrap());
    }
}
