//! Estimation of `(u, θ)` by block coordinate descent.
//!
//! The objective is
//!
//! ```text
//! q(u, θ) = Σ_i ‖y_i − Σ_l Σ_j θ_l g_l(x_j, x_i) T u_j‖²
//!         + λ₁ Σ_l θ_l Σ_{i,j} g_l(x_i, x_j) ⟨T u_i, u_j⟩ + λ₂ Σ_l θ_l
//! ```
//!
//! over `u ∈ Yⁿ` and `θ ≥ 0`. Every quantity the solver needs passes through
//! `T`, so the work is done in the coordinates of `T`'s eigenfunctions:
//! `A[i][q] = ⟨u_i, w_q⟩`, `B[i][q] = ⟨y_i, w_q⟩` and the quadrature Gram
//! `M[q][r] = ⟨w_q, w_r⟩`. Using `M` rather than the identity keeps every
//! value consistent with grid quadrature.

mod bcd;
mod theta_step;
mod u_step;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::funcspace::{norm_sq, FunctionSample};
use crate::kernels::{gram_matrices, FiniteRankOperator, KernelSpec};

pub use bcd::{fit_bcd, SolverState};
pub use theta_step::{
    kkt_satisfied, solve_theta_nncg, sufficient_decrease, StepRecord, ThetaQuadratic, ThetaSolution,
    PG_TOL,
};
pub use u_step::solve_u;

/// `θ_l` above this counts as selected.
pub const SELECTION_THRESHOLD: f64 = 1e-8;

/// Relative eigenvalue floor applied to `G_θ` before inversion.
pub const EIGEN_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaInit {
    /// Named initializer; only `"ones"` is recognised.
    Named(String),
    Values(Vec<f64>),
}

impl Default for ThetaInit {
    fn default() -> Self {
        ThetaInit::Named("ones".into())
    }
}

impl ThetaInit {
    pub fn resolve(&self, p: usize) -> Result<Vec<f64>> {
        match self {
            ThetaInit::Named(name) if name == "ones" => Ok(vec![1.0; p]),
            ThetaInit::Named(name) => Err(Error::InvalidParameter(format!(
                "unknown theta initializer '{name}'"
            ))),
            ThetaInit::Values(v) => {
                if v.len() != p {
                    return Err(Error::DimensionMismatch(format!(
                        "theta_init has {} entries, expected {p}",
                        v.len()
                    )));
                }
                if v.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                    return Err(Error::InvalidParameter("theta_init must be nonnegative".into()));
                }
                Ok(v.iter().map(|t| t.abs()).collect())
            }
        }
    }
}

/// Regularization weights and iteration controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub bcd_tol: f64,
    pub bcd_max_iters: usize,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub backtrack_rho: f64,
    pub backtrack_max: usize,
    pub theta_init: ThetaInit,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 0.4,
            bcd_tol: 1e-6,
            bcd_max_iters: 5000,
            cg_tol: 1e-8,
            cg_max_iters: 500,
            backtrack_rho: 0.5,
            backtrack_max: 50,
            theta_init: ThetaInit::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.lambda1 > 0.0 && self.lambda1.is_finite()) {
            return bad("lambda1 must be positive");
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad("lambda2 must be nonnegative");
        }
        if !(self.bcd_tol > 0.0) || !(self.cg_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.bcd_max_iters == 0 || self.cg_max_iters == 0 || self.backtrack_max == 0 {
            return bad("iteration limits must be positive");
        }
        if !(self.backtrack_rho > 0.0 && self.backtrack_rho < 1.0) {
            return bad("backtrack_rho must lie in (0, 1)");
        }
        if let ThetaInit::Named(name) = &self.theta_init {
            if name != "ones" {
                return bad("theta_init must be \"ones\" or a vector");
            }
        }
        Ok(())
    }
}

/// Everything about a dataset that the solver reuses across iterations.
pub(crate) struct Problem<'a> {
    pub op: &'a FiniteRankOperator,
    pub grams: Vec<DMatrix<f64>>,
    /// `⟨y_i, w_q⟩`, `n × κ`.
    pub resp_coeffs: DMatrix<f64>,
    /// `Σ_i ‖y_i‖²`.
    pub resp_norm_sq: f64,
    /// `⟨w_q, w_r⟩`, `κ × κ`.
    pub basis_gram: DMatrix<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(data: &Dataset, specs: &[KernelSpec], op: &'a FiniteRankOperator) -> Result<Self> {
        data.validate()?;
        if specs.len() != data.p() {
            return Err(Error::DimensionMismatch(format!(
                "{} kernel specs for {} covariates",
                specs.len(),
                data.p()
            )));
        }
        let grams = gram_matrices(specs, &data.covariates)?;
        let resp_coeffs = coefficient_matrix(op, &data.response)?;
        let resp_norm_sq = data.response.iter().map(norm_sq).sum();
        Ok(Self {
            op,
            grams,
            resp_coeffs,
            resp_norm_sq,
            basis_gram: op.eigenfunction_gram(),
        })
    }

    pub fn n(&self) -> usize {
        self.resp_coeffs.nrows()
    }

    pub fn p(&self) -> usize {
        self.grams.len()
    }

    /// `T u_j` in eigen-coordinates: column `q` of `A` scaled by `δ_q`.
    fn apply_t(&self, u_coeffs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = u_coeffs.clone();
        for (q, d) in self.op.eigenvalues().iter().enumerate() {
            out.column_mut(q).scale_mut(*d);
        }
        out
    }

    /// Per-covariate fitted components `F^l = G_l (A ∘ δ)`, so that row `i`
    /// holds the coordinates of `Σ_j g_l(x_j, x_i) T u_j`.
    pub fn components(&self, u_coeffs: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let tu = self.apply_t(u_coeffs);
        self.grams.iter().map(|g| g * &tu).collect()
    }

    /// Fitted responses `Σ_l θ_l F^l` in eigen-coordinates.
    pub fn fitted(&self, components: &[DMatrix<f64>], theta: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n(), self.op.rank());
        for (f, &t) in components.iter().zip(theta) {
            if t != 0.0 {
                out += f * t;
            }
        }
        out
    }

    pub fn objective(
        &self,
        u_coeffs: &DMatrix<f64>,
        theta: &[f64],
        lambda1: f64,
        lambda2: f64,
    ) -> f64 {
        let comps = self.components(u_coeffs);
        let fitted = self.fitted(&comps, theta);
        let m = &self.basis_gram;
        let mut fit = self.resp_norm_sq;
        for i in 0..self.n() {
            let f = fitted.row(i);
            let b = self.resp_coeffs.row(i);
            fit += (f * m).dot(&f) - 2.0 * f.dot(&b);
        }
        let ridge: f64 = comps
            .iter()
            .zip(theta)
            .map(|(c, t)| t * c.dot(u_coeffs))
            .sum();
        let lasso: f64 = theta.iter().sum();
        fit + lambda1 * ridge + lambda2 * lasso
    }
}

/// `n × κ` matrix of `⟨f_i, w_q⟩`.
pub(crate) fn coefficient_matrix(
    op: &FiniteRankOperator,
    fs: &[FunctionSample],
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(fs.len(), op.rank());
    for (i, f) in fs.iter().enumerate() {
        for (q, c) in op.coefficients(f)?.into_iter().enumerate() {
            out[(i, q)] = c;
        }
    }
    Ok(out)
}

pub(crate) fn check_theta(theta: &[f64], p: usize) -> Result<()> {
    if theta.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries, expected {p}",
            theta.len()
        )));
    }
    if let Some(l) = theta.iter().position(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "theta[{l}] = {} is not a nonnegative finite number",
            theta[l]
        )));
    }
    Ok(())
}

fn check_u(u: &[FunctionSample], n: usize) -> Result<()> {
    if u.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "u has {} functions, expected {n}",
            u.len()
        )));
    }
    Ok(())
}

/// The penalized objective `q(u, θ)`.
pub fn objective_q(
    u: &[FunctionSample],
    theta: &[f64],
    data: &Dataset,
    specs: &[KernelSpec],
    op: &FiniteRankOperator,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let problem = Problem::new(data, specs, op)?;
    check_u(u, problem.n())?;
    check_theta(theta, problem.p())?;
    let a = coefficient_matrix(op, u)?;
    Ok(problem.objective(&a, theta, lambda1, lambda2))
}

/// Quadratic model `h_u(θ)` of the objective with `u` held fixed.
pub fn build_theta_quadratic(
    u: &[FunctionSample],
    data: &Dataset,
    specs: &[KernelSpec],
    op: &FiniteRankOperator,
    lambda1: f64,
    lambda2: f64,
) -> Result<ThetaQuadratic> {
    let problem = Problem::new(data, specs, op)?;
    check_u(u, problem.n())?;
    let a = coefficient_matrix(op, u)?;
    Ok(theta_step::quadratic_from_coeffs(&problem, &a, lambda1, lambda2))
}
