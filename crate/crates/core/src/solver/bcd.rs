use super::theta_step::{quadratic_from_coeffs, solve_theta_nncg};
use super::u_step::{coords_of_expansion, expand_rows, solve_u_coeffs};
use super::{FitConfig, Problem};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::funcspace::FunctionSample;
use crate::kernels::{FiniteRankOperator, KernelSpec};

/// Output of block coordinate descent.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: Vec<FunctionSample>,
    pub theta: Vec<f64>,
    /// `q(u_k, θ_k)` after each full iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of θ-steps whose line search stalled.
    pub theta_stalls: usize,
    /// Every accepted θ-step satisfied `h(θ+αd) ≤ h(θ) − α²‖d‖²`.
    pub steps_admissible: bool,
}

impl SolverState {
    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }
}

/// Alternates the closed-form `u` update with the constrained `θ` update
/// until `|q_k − q_{k−1}| ≤ ε |q_{k−1}|` or the iteration cap.
pub fn fit_bcd(
    data: &Dataset,
    specs: &[KernelSpec],
    op: &FiniteRankOperator,
    cfg: &FitConfig,
) -> Result<SolverState> {
    cfg.validate()?;
    let problem = Problem::new(data, specs, op)?;
    let mut theta = cfg.theta_init.resolve(problem.p())?;
    let mut trace: Vec<f64> = Vec::new();
    let mut u_expansion = None;
    let mut converged = false;
    let mut theta_stalls = 0;
    let mut steps_admissible = true;

    for _ in 0..cfg.bcd_max_iters {
        let expansion = solve_u_coeffs(&problem, &theta, cfg.lambda1)?;
        let coords = coords_of_expansion(&problem, &expansion);
        let quad = quadratic_from_coeffs(&problem, &coords, cfg.lambda1, cfg.lambda2);
        let sol = solve_theta_nncg(&quad, &theta, cfg)?;
        theta_stalls += usize::from(sol.stalled);
        steps_admissible &= sol.steps.iter().all(|s| {
            super::theta_step::sufficient_decrease(s.change, s.alpha, s.direction_norm_sq)
        });
        theta = sol.theta;
        u_expansion = Some(expansion);

        let q = problem.objective(&coords, &theta, cfg.lambda1, cfg.lambda2);
        let prev = trace.last().copied();
        trace.push(q);
        if let Some(prev) = prev {
            if (q - prev).abs() <= cfg.bcd_tol * prev.abs() {
                converged = true;
                break;
            }
        }
    }

    let u = u_expansion
        .map(|c| expand_rows(op, &c))
        .unwrap_or_default();
    Ok(SolverState {
        u,
        theta,
        iterations: trace.len(),
        objective_trace: trace,
        converged,
        theta_stalls,
        steps_admissible,
    })
}
