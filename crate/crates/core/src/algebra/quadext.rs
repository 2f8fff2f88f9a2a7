use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rat::is_squarefree;
use super::{AlgebraError, Rat};

/// Element `a + b·√d` of the quadratic field `Q(√d)`.
///
/// Values with `b = 0` are stored with `d = 1`, so a rational value mixes
/// freely with any extension. Combining two irrational values with different
/// discriminants panics; use [`QuadExt::checked_add`] / [`QuadExt::checked_mul`]
/// to get an error instead.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: Rat,
    b: Rat,
    d: u64,
}

impl QuadExt {
    pub fn new(a: Rat, b: Rat, d: u64) -> Result<Self, AlgebraError> {
        if !is_squarefree(d) {
            return Err(AlgebraError::NotSquarefree(d));
        }
        Ok(Self::normalized(a, b, d))
    }

    pub fn rational(a: Rat) -> Self {
        QuadExt {
            a,
            b: Rat::zero(),
            d: 1,
        }
    }

    /// `√d` itself.
    pub fn sqrt(d: u64) -> Result<Self, AlgebraError> {
        Self::new(Rat::zero(), Rat::one(), d)
    }

    fn normalized(a: Rat, b: Rat, d: u64) -> Self {
        if d == 1 {
            QuadExt {
                a: a + b,
                b: Rat::zero(),
                d: 1,
            }
        } else if b.is_zero() {
            QuadExt { a, b, d: 1 }
        } else {
            QuadExt { a, b, d }
        }
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    /// Discriminant; `1` for rational values.
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * (self.d as f64).sqrt()
    }

    fn common_d(&self, other: &QuadExt) -> Result<u64, AlgebraError> {
        match (self.d, other.d) {
            (1, d) | (d, 1) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(AlgebraError::MixedDiscriminants(x, y)),
        }
    }

    pub fn checked_add(&self, other: &QuadExt) -> Result<QuadExt, AlgebraError> {
        let d = self.common_d(other)?;
        Ok(Self::normalized(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_mul(&self, other: &QuadExt) -> Result<QuadExt, AlgebraError> {
        let d = self.common_d(other)?;
        let a = &self.a * &other.a + &self.b * &other.b * Rat::from(d);
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::normalized(a, b, d))
    }

    /// Galois conjugate `a − b√d`.
    pub fn conjugate(&self) -> QuadExt {
        QuadExt {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// Field norm `a² − d·b²`.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * Rat::from(self.d)
    }
}

impl Zero for QuadExt {
    fn zero() -> Self {
        QuadExt::rational(Rat::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadExt {
    fn one() -> Self {
        QuadExt::rational(Rat::one())
    }
}

impl From<Rat> for QuadExt {
    fn from(r: Rat) -> Self {
        QuadExt::rational(r)
    }
}

impl From<i64> for QuadExt {
    fn from(n: i64) -> Self {
        QuadExt::rational(Rat::from(n))
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: QuadExt) -> QuadExt {
        self.checked_add(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: QuadExt) -> QuadExt {
        self + (-rhs)
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: QuadExt) -> QuadExt {
        self.checked_mul(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

/// `a`, `b*sqrt(d)` or `a+b*sqrt(d)` with `a`, `b` printed as rationals and
/// a unit `b` written as a bare `sqrt(d)`.
impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let mag = self.b.abs();
        let root = if mag.is_one() {
            format!("sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", mag, self.d)
        };
        let sign = if self.b.is_negative() { "-" } else { "+" };
        if self.a.is_zero() {
            write!(f, "{}{}", if self.b.is_negative() { "-" } else { "" }, root)
        } else {
            write!(f, "{}{}{}", self.a, sign, root)
        }
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> QuadExt {
        QuadExt::new(Rat::from(a), Rat::from(b), 2).unwrap()
    }

    #[test]
    fn norm_in_q_sqrt2() {
        // (1+√2)(1−√2) = −1
        assert_eq!(q(1, 1) * q(1, -1), QuadExt::from(-1));
        assert_eq!(q(1, 1).norm(), Rat::from(-1));
    }

    #[test]
    fn rational_values_drop_discriminant() {
        let x = q(3, 1) - QuadExt::sqrt(2).unwrap();
        assert!(x.is_rational());
        assert_eq!(x.d(), 1);
        assert_eq!(x, QuadExt::from(3));
    }

    #[test]
    fn mixed_discriminants_rejected() {
        let r2 = QuadExt::sqrt(2).unwrap();
        let r3 = QuadExt::sqrt(3).unwrap();
        assert!(r2.checked_mul(&r3).is_err());
        assert!(r2.checked_add(&QuadExt::from(5)).is_ok());
        assert!(QuadExt::sqrt(8).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(q(0, 1).to_string(), "sqrt(2)");
        assert_eq!(q(0, -3).to_string(), "-3*sqrt(2)");
        assert_eq!(q(1, -2).to_string(), "1-2*sqrt(2)");
        assert_eq!(q(-3, 0).to_string(), "-3");
    }
}
