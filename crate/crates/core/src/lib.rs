//! Numerical engine for geometric phases of parametrized quantum systems.
//!
//! The crate is organised around the objects a holonomy calculation passes
//! through:
//!
//! * [`model`] builds parametrized Hamiltonian families, the closed-form dark
//!   states of the (5+1) coupling scheme and the standard gate matrices.
//! * [`spectral`] diagonalises Hermitian matrices, groups degenerate levels and
//!   gauge-aligns eigenframes along a path (discrete parallel transport).
//! * [`connection`] evaluates Berry and Wilczek-Zee connections, Abelian and
//!   non-Abelian curvatures and their gauge transformations.
//! * [`transport`] holds paths and surfaces in parameter space, line and surface
//!   integrals, path-ordered exponentials, Schrödinger evolution and the
//!   dynamical/geometric phase split.
//! * [`anyons`] samples Laughlin droplets with and without a quasihole and turns
//!   the one-particle density into a quasihole Berry phase and charge.
//!
//! Natural units (ħ = c = 1) are used everywhere. The electron charge only shows
//! up as an explicit argument in the Aharonov-Bohm and anyon code.

pub mod anyons;
pub mod connection;
pub mod error;
pub mod field;
pub mod linalg;
pub mod model;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
