//! Nonnegativity-constrained conjugate gradient for the `θ` block.
//!
//! Minimizes `h(θ) = θᵀK̃θ + (D̃ + λ₂1)ᵀθ + c` over `θ ≥ 0`. Coordinates at
//! zero with a positive gradient stay put; zero coordinates with a
//! nonpositive gradient move along `−∇h`. Free coordinates follow the
//! three-term Polak-Ribière-Polyak direction
//!
//! ```text
//! d_J = −g_J + β d_prev,J − ϑ γ,   γ = g_J − g_prev,J,
//! β = g_Jᵀγ / ‖g_prev‖²,           ϑ = g_Jᵀd_prev,J / ‖g_prev‖²,
//! ```
//!
//! which restarts as projected steepest descent whenever the active set
//! changes. Steps are `α = ρ^j`, the largest for which the clipped trial
//! point satisfies `h(θ + αd) ≤ h(θ) − α²‖d‖²`; clipped coordinates land on
//! exact zeros. Iteration stops once the relative change of `h` is below
//! `cg_tol` and the projected gradient is below `PG_TOL` times the largest
//! linear coefficient.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{FitConfig, Problem};
use crate::error::{Error, Result};

/// `h(θ) = θᵀ K̃ θ + (D̃ + λ₂ 1)ᵀ θ + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaQuadratic {
    pub ktilde: DMatrix<f64>,
    pub dtilde: DVector<f64>,
    pub lambda2: f64,
    /// θ-independent part, `Σ_i ‖y_i‖²` when built from data.
    pub constant: f64,
}

impl ThetaQuadratic {
    pub fn new(ktilde: DMatrix<f64>, dtilde: DVector<f64>, lambda2: f64) -> Result<Self> {
        let quad = Self {
            ktilde,
            dtilde,
            lambda2,
            constant: 0.0,
        };
        quad.validate()?;
        Ok(quad)
    }

    pub fn dim(&self) -> usize {
        self.dtilde.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.dim();
        if self.ktilde.shape() != (p, p) {
            return Err(Error::DimensionMismatch(format!(
                "K~ has shape {:?}, expected ({p}, {p})",
                self.ktilde.shape()
            )));
        }
        if self.ktilde.iter().chain(self.dtilde.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite entries in theta quadratic".into()));
        }
        let scale = self.ktilde.amax().max(1.0);
        if (&self.ktilde - self.ktilde.transpose()).amax() > 1e-10 * scale {
            return Err(Error::InvalidParameter("K~ is not symmetric".into()));
        }
        Ok(())
    }

    /// Smallest and largest eigenvalue of `K̃`.
    pub fn eigen_range(&self) -> (f64, f64) {
        let eig = SymmetricEigen::new(self.ktilde.clone());
        (eig.eigenvalues.min(), eig.eigenvalues.max())
    }

    fn linear(&self) -> DVector<f64> {
        self.dtilde.add_scalar(self.lambda2)
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.value_shifted(theta) + self.constant
    }

    /// `h(θ)` without the constant, used inside the line search.
    fn value_shifted(&self, theta: &[f64]) -> f64 {
        let t = DVector::from_column_slice(theta);
        (&self.ktilde * &t).dot(&t) + self.linear().dot(&t)
    }

    /// `∇h(θ) = D̃ + 2K̃θ + λ₂1`.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let t = DVector::from_column_slice(theta);
        let g = &self.ktilde * t * 2.0 + self.linear();
        g.iter().copied().collect()
    }

    /// Largest violation of the first-order conditions for `θ ≥ 0`.
    pub fn kkt_residual(&self, theta: &[f64]) -> f64 {
        projected_gradient_norm(theta, &self.gradient(theta))
    }
}

fn projected_gradient_norm(theta: &[f64], grad: &[f64]) -> f64 {
    theta
        .iter()
        .zip(grad)
        .map(|(t, g)| if *t == 0.0 { (-g).max(0.0) } else { g.abs() })
        .fold(0.0, f64::max)
}

/// One accepted line-search step: `θ_next = θ + α d` and
/// `h(θ_next) − h(θ) ≤ −α²‖d‖²`. Objective values exclude the constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub alpha: f64,
    pub direction_norm_sq: f64,
    pub h_before: f64,
    pub h_after: f64,
    /// `h(θ_next) − h(θ)`, computed without cancellation.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSolution {
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The line search found no admissible step; the iterate is returned as is.
    pub stalled: bool,
    pub steps: Vec<StepRecord>,
}

pub(crate) fn quadratic_from_coeffs(
    problem: &Problem<'_>,
    u_coeffs: &DMatrix<f64>,
    lambda1: f64,
    lambda2: f64,
) -> ThetaQuadratic {
    let comps = problem.components(u_coeffs);
    let p = comps.len();
    let m = &problem.basis_gram;
    // Fm[l] = F^l M so that row_i(F^l) · row_i(F^h M) = ⟨F^l_i, F^h_i⟩.
    let fm: Vec<DMatrix<f64>> = comps.iter().map(|f| f * m).collect();
    let mut ktilde = DMatrix::zeros(p, p);
    for l in 0..p {
        for h in l..p {
            let v = comps[l].dot(&fm[h]);
            ktilde[(l, h)] = v;
            ktilde[(h, l)] = v;
        }
    }
    let dtilde = DVector::from_iterator(
        p,
        comps
            .iter()
            .map(|f| lambda1 * f.dot(u_coeffs) - 2.0 * f.dot(&problem.resp_coeffs)),
    );
    ThetaQuadratic {
        ktilde,
        dtilde,
        lambda2,
        constant: problem.resp_norm_sq,
    }
}

/// Minimizes `h` over `θ ≥ 0` starting from `theta0`.
pub fn solve_theta_nncg(
    quad: &ThetaQuadratic,
    theta0: &[f64],
    cfg: &FitConfig,
) -> Result<ThetaSolution> {
    quad.validate()?;
    let p = quad.dim();
    super::check_theta(theta0, p)?;
    // Normalizes -0.0 to +0.0.
    let mut theta: Vec<f64> = theta0.iter().map(|t| if *t == 0.0 { 0.0 } else { *t }).collect();
    let mut grad = quad.gradient(&theta);
    let mut h = quad.value_shifted(&theta);
    let mut prev: Option<(Vec<f64>, Vec<f64>, Vec<bool>)> = None;
    let mut steps = Vec::new();
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;
    let pg_tol = PG_TOL * quad.linear().amax().max(1.0);

    while iterations < cfg.cg_max_iters {
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical("non-finite gradient in theta step".into()));
        }
        let active: Vec<bool> = theta.iter().map(|t| *t == 0.0).collect();
        let direction = search_direction(&theta, &grad, &active, prev.as_ref());
        if direction.iter().all(|d| *d == 0.0) {
            converged = true;
            break;
        }
        iterations += 1;

        let Some((alpha, effective, trial, change)) =
            line_search(quad, &theta, &grad, &direction, cfg)
        else {
            stalled = true;
            converged = true;
            break;
        };
        steps.push(StepRecord {
            alpha,
            direction_norm_sq: effective.iter().map(|d| d * d).sum(),
            h_before: h,
            h_after: h + change,
            change,
        });

        let h_full_prev = h + quad.constant;
        prev = Some((grad, effective, active));
        theta = trial;
        grad = quad.gradient(&theta);
        h += change;

        let h_full = h + quad.constant;
        if projected_gradient_norm(&theta, &grad) <= pg_tol
            && (h_full - h_full_prev).abs() <= cfg.cg_tol * h_full_prev.abs()
        {
            converged = true;
            break;
        }
    }

    Ok(ThetaSolution {
        theta,
        iterations,
        converged,
        stalled,
        steps,
    })
}

/// Projected-gradient bound, relative to the largest linear coefficient, that
/// must hold before the relative-change stop fires.
pub const PG_TOL: f64 = 1e-9;

fn search_direction(
    theta: &[f64],
    grad: &[f64],
    active: &[bool],
    prev: Option<&(Vec<f64>, Vec<f64>, Vec<bool>)>,
) -> Vec<f64> {
    let p = theta.len();
    let mut d = vec![0.0; p];
    for l in 0..p {
        if active[l] {
            d[l] = if grad[l] > 0.0 { 0.0 } else { -grad[l] };
        } else {
            d[l] = -grad[l];
        }
    }
    let Some((g_prev, d_prev, active_prev)) = prev else {
        return d;
    };
    if active_prev.as_slice() != active {
        return d;
    }
    let g_prev_sq: f64 = g_prev.iter().map(|g| g * g).sum();
    if g_prev_sq == 0.0 {
        return d;
    }
    let free: Vec<usize> = (0..p).filter(|&l| !active[l]).collect();
    let (mut g_gamma, mut g_dprev) = (0.0, 0.0);
    for &l in &free {
        g_gamma += grad[l] * (grad[l] - g_prev[l]);
        g_dprev += grad[l] * d_prev[l];
    }
    let beta = g_gamma / g_prev_sq;
    let vartheta = g_dprev / g_prev_sq;
    let mut cg = d.clone();
    for &l in &free {
        let gamma = grad[l] - g_prev[l];
        cg[l] = -grad[l] + beta * d_prev[l] - vartheta * gamma;
    }
    let slope: f64 = cg.iter().zip(grad).map(|(a, b)| a * b).sum();
    if slope < 0.0 && cg.iter().all(|v| v.is_finite()) {
        cg
    } else {
        d
    }
}

/// Backtracking over `α = ρ^j`. Returns the step, the effective direction
/// `(trial − θ)/α`, the trial point and the change
/// `h(θ + s) − h(θ) = sᵀ∇h(θ) + sᵀK̃s`, evaluated directly rather than as a
/// difference of objective values.
fn line_search(
    quad: &ThetaQuadratic,
    theta: &[f64],
    grad: &[f64],
    direction: &[f64],
    cfg: &FitConfig,
) -> Option<(f64, Vec<f64>, Vec<f64>, f64)> {
    let mut alpha = 1.0;
    for _ in 0..cfg.backtrack_max {
        let trial: Vec<f64> = theta
            .iter()
            .zip(direction)
            .map(|(t, d)| {
                let v = t + alpha * d;
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        let effective: Vec<f64> = trial
            .iter()
            .zip(theta)
            .map(|(a, b)| (a - b) / alpha)
            .collect();
        let norm_sq: f64 = effective.iter().map(|d| d * d).sum();
        if norm_sq > 0.0 {
            let step = DVector::from_iterator(theta.len(), trial.iter().zip(theta).map(|(a, b)| a - b));
            let change = step.dot(&DVector::from_column_slice(grad)) + (&quad.ktilde * &step).dot(&step);
            if sufficient_decrease(change, alpha, norm_sq) {
                return Some((alpha, effective, trial, change));
            }
        }
        alpha *= cfg.backtrack_rho;
    }
    None
}

/// `Δh ≤ −α²‖d‖²`.
pub fn sufficient_decrease(change: f64, alpha: f64, direction_norm_sq: f64) -> bool {
    change <= -alpha * alpha * direction_norm_sq
}

/// First-order conditions for `θ ≥ 0`: `∇h_l ≥ −tol` on zero coordinates and
/// `|∇h_l| ≤ tol (1 + ‖∇h‖)` on positive ones.
pub fn kkt_satisfied(theta: &[f64], grad: &[f64], tol: f64) -> bool {
    let scale = 1.0 + grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    theta.iter().zip(grad).all(|(t, g)| {
        if *t == 0.0 {
            *g >= -tol
        } else {
            g.abs() <= tol * scale
        }
    })
}
