//! Simulation and verification toolkit for matrix squared Bessel processes:
//! spectral linear algebra, Euler schemes for the matrix process and its
//! eigenvalue particle system, symmetric-polynomial dynamics, exact sampling
//! on the admissible parameter set, and Monte Carlo verification experiments.

pub mod error;
pub mod mcverify;
pub mod polytrack;
pub mod rng;
pub mod sde;
pub mod symcore;
pub mod wallach;

pub use error::{Error, Result};
pub use mcverify::{ExperimentConfig, ExperimentReport};
pub use polytrack::{PolyPath, RegressionSummary, TimeChange};
pub use rng::{NoiseSource, RngStream};
pub use sde::{GridSpec, MatrixPath, ScalarPath, VectorPath};
pub use symcore::{PolyVector, Spectrum, SymMatrix};
pub use wallach::{Branch, LaplaceQuery, Membership, WallachPoint};
