//! Exact computational kernels for families of isolated hypersurface
//! singularities.
//!
//! The crate is organised around five pieces:
//!
//! - [`poly`] — sparse multivariate polynomials over the rationals, with
//!   formal differentiation, substitution and weighted-degree structure;
//! - [`series`] / [`arc`] — truncated univariate power series with valuation
//!   bookkeeping, analytic arcs `γ(s) = (x(s), t(s))`, and a Newton solver
//!   for series unknowns defined implicitly by a polynomial equation;
//! - [`milnor`] — Milnor numbers, by the weighted-homogeneous closed form
//!   and by local-algebra dimension with a Nakayama saturation certificate;
//! - [`whitney`] — Whitney condition (a)/(b′) limits along arcs, kink tests,
//!   vanishing-fold verification and a heuristic numeric radius search;
//! - [`transforms`] — family changes of variables `Φ(y,τ) = (Ψ(y,τ), λ(τ))`,
//!   composition `F∘Φ`, and the constructive fold-inducing transform built
//!   from an arc witnessing a Whitney failure.
//!
//! Everything in the symbolic layer is exact: coefficients are
//! arbitrary-precision rationals and every truncated series records the
//! order up to which its coefficients are guaranteed. Floating point only
//! appears in the numeric search and in report approximations.

pub mod arc;
pub mod milnor;
mod minimize;
pub mod poly;
pub mod series;
pub mod text;
pub mod transforms;
pub mod whitney;

pub use num_rational::BigRational;

use num_bigint::BigInt;

/// Rational constant from an integer.
pub fn qi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational constant `n/d`.
pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
