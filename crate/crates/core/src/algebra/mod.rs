//! Exact coefficient fields and sparse multivariate polynomials.

mod monomial;
mod parse;
mod polynomial;
mod quadext;
mod rat;
mod vars;

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

pub(crate) use monomial::grevlex_mask;
pub use monomial::{Monomial, MonomialOrder};
pub use polynomial::{quadext_to_rational_parts, Polynomial};
pub use quadext::QuadExt;
pub use rat::{is_squarefree, Rat};
pub use vars::{Var, VarTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not a squarefree positive integer")]
    NotSquarefree(u64),
    #[error("mixed quadratic discriminants {0} and {1}")]
    MixedDiscriminants(u64, u64),
    #[error("polynomials belong to different variable tables")]
    RingMismatch,
}

/// How a coefficient is rendered inside a term.
pub enum CoeffText {
    /// A rational value: sign and magnitude are printed separately.
    Rational { negative: bool, magnitude: Rat },
    /// An irrational value, printed verbatim in parentheses after a `+`.
    Grouped(String),
}

/// Field operations shared by [`Rat`] and [`QuadExt`].
pub trait Coefficient:
    Clone + PartialEq + Eq + fmt::Debug + fmt::Display + Zero + One + Send + Sync + 'static
{
    fn try_add(&self, other: &Self) -> Result<Self, AlgebraError>;
    fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError>;
    fn negated(&self) -> Self;
    fn from_rat(r: Rat) -> Self;
    /// `√d` for squarefree `d`; fails when the field cannot represent it.
    fn sqrt_of(d: u64) -> Result<Self, AlgebraError>;
    fn as_rat(&self) -> Option<Rat>;
    fn to_f64(&self) -> f64;
    fn coeff_text(&self) -> CoeffText;
}

impl Coefficient for Rat {
    fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self + other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self * other)
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn sqrt_of(d: u64) -> Result<Self, AlgebraError> {
        if d == 1 {
            Ok(Rat::one())
        } else {
            Err(AlgebraError::Parse(format!("sqrt({d}) is not rational")))
        }
    }
    fn as_rat(&self) -> Option<Rat> {
        Some(self.clone())
    }
    fn to_f64(&self) -> f64 {
        Rat::to_f64(self)
    }
    fn coeff_text(&self) -> CoeffText {
        CoeffText::Rational {
            negative: self.is_negative(),
            magnitude: self.abs(),
        }
    }
}

impl Coefficient for QuadExt {
    fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_mul(other)
    }
    fn negated(&self) -> Self {
        -self.clone()
    }
    fn from_rat(r: Rat) -> Self {
        QuadExt::rational(r)
    }
    fn sqrt_of(d: u64) -> Result<Self, AlgebraError> {
        QuadExt::sqrt(d)
    }
    fn as_rat(&self) -> Option<Rat> {
        self.is_rational().then(|| self.a().clone())
    }
    fn to_f64(&self) -> f64 {
        QuadExt::to_f64(self)
    }
    fn coeff_text(&self) -> CoeffText {
        match self.as_rat() {
            Some(r) => r.coeff_text(),
            None => CoeffText::Grouped(format!("({self})")),
        }
    }
}
