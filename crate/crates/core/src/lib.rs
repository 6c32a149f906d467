//! Nonlinear multivariate function-on-function regression in a functional
//! reproducing kernel Hilbert space, with lasso-penalized kernel weights for
//! covariate selection.
//!
//! Responses `y_i` and covariates `x_i^(l)` are functions sampled on
//! rectangular grids. The model is
//!
//! ```text
//! y_i = Σ_l θ_l Σ_j g_l(x_j^(l), x_i^(l)) T u_j + ε_i
//! ```
//!
//! where `g_l` are scalar kernels, `T` is a finite-rank operator on the
//! response space and `θ ≥ 0` selects covariates. Fitting alternates a
//! closed-form update of `u` with a nonnegative conjugate-gradient update of
//! `θ`; see [`solver`].

pub mod dataset;
pub mod error;
pub mod funcspace;
pub mod io;
pub mod kernels;
pub mod model;
pub mod simgen;
pub mod solver;

pub use dataset::{Dataset, Truth};
pub use error::{Error, Result};
pub use funcspace::{FunctionSample, Grid};
pub use kernels::{FiniteRankOperator, KernelFamily, KernelSpec};
pub use model::MfRkhsModel;
pub use solver::FitConfig;
