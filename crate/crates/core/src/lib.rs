//! Sparse adaptive system identification with the minimax concave penalty.
//!
//! The crate is organised around the pieces of an MCP-regularized
//! recursive least squares filter:
//!
//! * [`penalty`]: scaled MCP, its Moreau envelope, and the firm / hard /
//!   soft / grouped proximal operators.
//! * [`estimators`]: the batch EM solver, the streaming recursion built on
//!   it, the grouped variants, and conventional RLS as a baseline.
//! * [`diagnostics`]: contraction constants, EM-error audits and the
//!   relaxation-error bound evaluated on concrete instances.
//! * [`simgen`]: seeded generators for the Jakes fading, sparse Volterra and
//!   spline-featurized multivariate time series scenarios.
//! * [`metrics`]: NMSE curves, Monte Carlo aggregation and prediction-error
//!   summaries.
//! * [`experiment`]: the trial runner that ties the above together.
//!
//! All complex data use the convention `d(i) = w^H x(i) + e(i)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod experiment;
pub(crate) mod linalg;
pub mod metrics;
pub mod penalty;
pub mod simgen;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use estimators::{select_xi2, spals_mcp, BatchProblem, EmTrace, FilterState, RlsState, Shrinkage};
pub use penalty::{GroupLayout, PenaltyConfig, TiePolicy};

/// Dense complex vector: tap weights, regressors and intermediate E-step values.
pub type CVec = nalgebra::DVector<Complex64>;

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<Complex64>;
