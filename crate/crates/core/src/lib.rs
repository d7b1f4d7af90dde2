//! Maurer-Cartan coefficients in exponential coordinates of the second kind,
//! their analytic continuation `lambda(t) = omega(-i t)`, and the extension of
//! left-invariant CR structures by the frame `Y_a = lambda_a^g X_g + i d/dt^a`.
//!
//! - [`lie`]: structure constants, Jacobi validation, adjoint matrices, classification.
//! - [`maurer_cartan`]: the Ad-chain and the structure-equation residual.
//! - [`continuation`]: `lambda`, the flatness system, triangular dependence.
//! - [`cr_frame`]: CR structures, transverse selection, frame checks, certificates.
//! - [`exact`]: polynomial oracle over the Gaussian rationals for nilpotent algebras.

pub mod catalog;
pub mod continuation;
pub mod coords;
pub mod cr_frame;
pub mod exact;
pub mod expm;
pub mod fd;
pub mod grid;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod maurer_cartan;
pub mod residual;

pub use num_complex::Complex64 as C64;

pub use continuation::{bracket_form_residual, check_triangular_dependence, flatness_residual, lambda_at};
pub use coords::{CoefficientMatrix, CoordinatePoint, EvalError};
pub use fd::{DerivativeMode, FdSpec};
pub use grid::GridSpec;
pub use lie::{build_algebra, AlgebraClass, LieAlgebra, LieError, StructureConstants};
pub use maurer_cartan::{omega_at, verify_maurer_cartan, SecondKindChart};
pub use residual::{ResidualReport, ResidualTensor};
