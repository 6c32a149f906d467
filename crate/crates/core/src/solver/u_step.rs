use nalgebra::{DMatrix, SymmetricEigen};

use super::{check_theta, Problem, EIGEN_CLAMP};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::funcspace::FunctionSample;
use crate::kernels::{combine_gram, FiniteRankOperator, KernelSpec};

/// Minimizer of `q(·, θ)` for fixed `θ`.
///
/// With `G_θ = Σ_l θ_l G_l = Σ_p β_p v_p v_pᵀ`, the coordinates of `ũ_i` along
/// `w_q` are `Σ_p v_pi (β_p δ_q + λ₁)⁻¹ Σ_j v_pj ⟨w_q, y_j⟩`. The component of
/// each `y_i` outside the span of the `w_q` never reaches a prediction and is
/// not carried into `ũ`.
pub fn solve_u(
    theta: &[f64],
    data: &Dataset,
    specs: &[KernelSpec],
    op: &FiniteRankOperator,
    lambda1: f64,
) -> Result<Vec<FunctionSample>> {
    let problem = Problem::new(data, specs, op)?;
    let coeffs = solve_u_coeffs(&problem, theta, lambda1)?;
    Ok(expand_rows(op, &coeffs))
}

pub(crate) fn expand_rows(op: &FiniteRankOperator, coeffs: &DMatrix<f64>) -> Vec<FunctionSample> {
    (0..coeffs.nrows())
        .map(|i| {
            let row: Vec<f64> = coeffs.row(i).iter().copied().collect();
            op.expand(&row)
        })
        .collect()
}

/// Coordinates of `ũ` in the eigenfunction basis, `n × κ`.
pub(crate) fn solve_u_coeffs(
    problem: &Problem<'_>,
    theta: &[f64],
    lambda1: f64,
) -> Result<DMatrix<f64>> {
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    check_theta(theta, problem.p())?;
    let g = combine_gram(&problem.grams, theta)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite Gram entries".into()));
    }
    let eig = SymmetricEigen::try_new(g, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |m, b| m.max(*b));
    let floor = EIGEN_CLAMP * lambda_max;
    let betas: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&b| if b < floor { 0.0 } else { b })
        .collect();

    let v = &eig.eigenvectors;
    // Project responses onto each eigenvector of G_θ, then scale per (p, q).
    let mut spectral = v.transpose() * &problem.resp_coeffs;
    for (pi, beta) in betas.iter().enumerate() {
        for (q, delta) in problem.op.eigenvalues().iter().enumerate() {
            spectral[(pi, q)] /= beta * delta + lambda1;
        }
    }
    Ok(v * spectral)
}

/// Coordinates `⟨ũ_i, w_q⟩` of a solution expressed in the eigenbasis.
pub(crate) fn coords_of_expansion(problem: &Problem<'_>, coeffs: &DMatrix<f64>) -> DMatrix<f64> {
    coeffs * &problem.basis_gram
}

