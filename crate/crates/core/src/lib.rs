//! Sum-of-squares certificates for domination inequalities on Cartesian
//! product graphs.
//!
//! A graph-class partition `(n_G, k_G, n_H, k_H)` is turned into a boolean
//! ideal `I_sos` and a target polynomial `f*` whose nonnegativity on the
//! variety is exactly the domination inequality `γ(G)γ(H) ≤ γ(G□H)` for that
//! partition. The crate computes reduced Gröbner bases of `I_sos`, searches
//! for low-degree sum-of-squares certificates with a semidefinite solver,
//! rounds numeric solutions to exact certificates and verifies them by exact
//! reduction. A brute-force enumeration oracle provides ground truth.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod certify;
pub mod families;
pub mod groebner;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod sdp;

pub use algebra::{Monomial, MonomialOrder, Polynomial, QuadExt, Rat, Var, VarTable};
pub use model::{GraphClassParams, IdealBasis, Provenance};
