//! Exact construction and spectral analysis of the quantum KdV hierarchy.
//!
//! The library builds the commuting quantum KdV Hamiltonians as exact matrices
//! on the weight-graded bosonic Fock space, solves their joint spectral
//! problem (deformed Schur polynomials, eigenvalue series, spectral curves),
//! and verifies the character identities and operator identities that the
//! construction implies. All arithmetic is exact: arbitrary-precision
//! rationals and polynomials in the parameters hbar^(1/2), epsilon^2, U0,
//! sigma, V0, z, rho.

pub mod error;
pub mod exact;
pub mod fock;
pub mod hamiltonians;
pub mod identities;
pub mod partitions;
pub mod selftest;
pub mod spectral;
pub mod yjm;

pub use error::{Error, Result};
pub use exact::{ExactMatrix, ExactPoly, ExactSeries, Rat, Var};
pub use fock::{Density, OperatorBlock, WeightBasis};
pub use hamiltonians::{DispersionlessTower, HamiltonianChain, HamiltonianRecord};
pub use partitions::Partition;
pub use spectral::{DeformedSchur, ScaledOperator, SpectralCurve};
