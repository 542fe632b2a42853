//! Bures-Wasserstein Riemannian geometry on the manifold SPD(n) of symmetric
//! positive-definite matrices.
//!
//! The metric is the one whose geodesic distance equals the 2-Wasserstein
//! distance between zero-mean Gaussians with the given covariances. All
//! formulas go through the Sylvester operator `Gamma_A[X]`, the solution of
//! `A G + G A = X`.

pub mod cli;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod geodesy;
pub mod invariants;
pub mod jacobi;
pub mod matcore;
pub mod metric;
pub mod oracle;
pub mod sylvester;

pub use error::{Error, Result};
pub use geodesy::Extension;
pub use matcore::{LiftMatrix, Orthogonal, SpdMatrix, Spectrum, SymMatrix};
