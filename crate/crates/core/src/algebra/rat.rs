use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::AlgebraError;

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let d: BigInt = denom.into();
        assert!(!d.is_zero(), "rational with zero denominator");
        Rat(BigRational::new(numer.into(), d))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        Rat(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn pow(&self, e: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc *= self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact binary value of a finite float.
    pub fn from_f64_exact(x: f64) -> Option<Rat> {
        BigRational::from_float(x).map(Rat)
    }

    /// Splits a nonnegative rational as `r² · d` with `d` a squarefree
    /// positive integer. Returns `(r, d)`; `d == 1` means `self` is a square.
    pub fn square_decompose(&self) -> Option<(Rat, u64)> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some((Rat::zero(), 1));
        }
        // a/b = (a·b)/b², so √(a/b) = √(a·b)/b.
        let ab = self.numer() * self.denom();
        let (root, free) = split_square(&ab)?;
        Some((Rat::new(root, self.denom().clone()), free))
    }
}

/// Trial division bound for [`split_square`].
const TRIAL_LIMIT: u32 = 1_000_000;

/// Writes `n = s² · f` with `f` squarefree; `f` must fit in `u64`. After
/// trial division a cofactor below `TRIAL_LIMIT³` has at most two prime
/// factors, so it is either a square or squarefree. Larger cofactors give
/// `None`.
fn split_square(n: &BigInt) -> Option<(BigInt, u64)> {
    let mut rest = n.clone();
    let mut root = BigInt::one();
    let mut free: u64 = 1;
    let mut p = 2u32;
    while p <= TRIAL_LIMIT && BigInt::from(p) * BigInt::from(p) <= rest {
        let mut count = 0u32;
        while (&rest % p).is_zero() {
            rest /= p;
            count += 1;
        }
        for _ in 0..count / 2 {
            root *= p;
        }
        if count % 2 == 1 {
            free = free.checked_mul(u64::from(p))?;
        }
        p += 1;
    }
    if rest > BigInt::one() {
        let limit = BigInt::from(TRIAL_LIMIT);
        let s = rest.sqrt();
        if &s * &s == rest {
            root *= s;
        } else if rest < &limit * &limit * &limit || p <= TRIAL_LIMIT {
            free = free.checked_mul(rest.to_u64()?)?;
        } else {
            return None;
        }
    }
    Some((root, free))
}

/// True if `d` has no repeated prime factor.
pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

impl Zero for Rat {
    fn zero() -> Self {
        Rat(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rat {
    fn one() -> Self {
        Rat(BigRational::one())
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Self {
        Rat::from_integer(n)
    }
}

impl From<u64> for Rat {
    fn from(n: u64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<usize> for Rat {
    fn from(n: usize) -> Self {
        Rat::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat($tr::$m(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat($tr::$m(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat($tr::$m(self.0, &rhs.0))
            }
        }
        impl<'a> $atr<&'a Rat> for Rat {
            fn $am(&mut self, rhs: &'a Rat) {
                $atr::$am(&mut self.0, &rhs.0)
            }
        }
        impl $atr for Rat {
            fn $am(&mut self, rhs: Rat) {
                $atr::$am(&mut self.0, rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |a, b| a * b)
    }
}

impl PartialEq<i64> for Rat {
    fn eq(&self, other: &i64) -> bool {
        self.is_integer() && self.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rat {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

/// `n` for integers, `n/d` otherwise.
impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || AlgebraError::Parse(format!("invalid rational `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rat::new(n, d))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Rat::from_integer(n))
            }
        }
    }
}

impl Rat {
    pub fn sign(&self) -> Sign {
        self.numer().sign()
    }
}
