//! Exact arithmetic foundation: rationals, sparse multivariate polynomials,
//! truncated power series, and division-free exact linear algebra.

pub mod matrix;
pub mod poly;
pub mod rat;
pub mod series;

pub use matrix::{div_exact, solve_linear, solve_rational, ExactMatrix, RatFunc};
pub use poly::{ExactPoly, Var, NVARS, VAR_NAMES};
pub use rat::{binomial, factorial, rat, rint, rpow, Rat};
pub use series::ExactSeries;
