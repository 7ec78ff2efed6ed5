//! Support recovery for Gaussian linear models whose design covariance comes
//! from a linear structural equation model.
//!
//! The crate is organised bottom-up:
//!
//! - [`covkit`]: small dense linear algebra (conditional covariances, LDL, OLS).
//! - [`semgen`]: DAGs, SEMs, random graph generators and named constructions.
//! - [`theta`]: the beta-min coefficient space and the sign-enumerating QP.
//! - [`signals`]: population identification signals and KL divergences.
//! - [`estimators`]: BSS, the klBSS family, unknown-sparsity variants and Lasso.
//! - [`rng`]: seed derivation shared by generators and the experiment harness.

// Guards like `!(x > 0.0)` deliberately reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covkit;
pub mod error;
pub mod estimators;
pub mod rng;
pub mod semgen;
pub mod signals;
pub mod theta;

pub use covkit::{IndexSet, SymMatrix};
pub use error::{Error, Result};
pub use estimators::{Estimate, EstimatorConfig, Method, ScorePair};
pub use semgen::{Dag, Dataset, LinearModel, SemSpec};
pub use signals::{CandidateFamily, SignalReport};
pub use theta::{QpSolution, Sparsity, ThetaSpec};

pub use nalgebra::{DMatrix, DVector};
