//! Fitted regression model: prediction, variable selection and fit quality.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::funcspace::{distance_sq, FunctionSample};
use crate::kernels::{operator_apply, FiniteRankOperator, KernelSpec};
use crate::solver::{fit_bcd, FitConfig, SELECTION_THRESHOLD};

/// Summary of the optimization run that produced a model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

/// `ŷ(x) = T Σ_j [Σ_l θ_l g_l(x_j^(l), x^(l))] u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfRkhsModel {
    pub specs: Vec<KernelSpec>,
    pub op: FiniteRankOperator,
    pub theta: Vec<f64>,
    pub u: Vec<FunctionSample>,
    /// `train_x[l][j]`, retained because predictions sum kernels against them.
    pub train_x: Vec<Vec<FunctionSample>>,
    pub config: FitConfig,
    pub report: FitReport,
}

pub fn fit(
    data: &Dataset,
    specs: &[KernelSpec],
    op: &FiniteRankOperator,
    cfg: &FitConfig,
) -> Result<MfRkhsModel> {
    if !data.response_grid().as_ref().eq(op.grid()) {
        return Err(Error::GridMismatch(
            "response grid differs from the operator grid".into(),
        ));
    }
    let state = fit_bcd(data, specs, op, cfg)?;
    Ok(MfRkhsModel {
        specs: specs.to_vec(),
        op: op.clone(),
        theta: state.theta,
        u: state.u,
        train_x: data.covariates.clone(),
        config: cfg.clone(),
        report: FitReport {
            iterations: state.iterations,
            final_objective: state.objective_trace.last().copied().unwrap_or(f64::NAN),
            converged: state.converged,
            objective_trace: state.objective_trace,
        },
    })
}

impl MfRkhsModel {
    pub fn n_train(&self) -> usize {
        self.u.len()
    }

    pub fn p(&self) -> usize {
        self.specs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if self.theta.len() != p || self.train_x.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "model has {p} kernels, {} weights and {} covariates",
                self.theta.len(),
                self.train_x.len()
            )));
        }
        let n = self.n_train();
        if let Some(l) = self.train_x.iter().position(|xs| xs.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "covariate {l} has {} training samples, expected {n}",
                self.train_x[l].len()
            )));
        }
        if self.theta.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidParameter("model weights must be nonnegative".into()));
        }
        Ok(())
    }

    /// The same model with `u` scaled by `c` and `θ` by `1/c`.
    pub fn rescaled(&self, c: f64) -> MfRkhsModel {
        let mut out = self.clone();
        out.u = self.u.iter().map(|u| u.scaled(c)).collect();
        out.theta = self.theta.iter().map(|t| t / c).collect();
        out
    }

    /// `Σ_l θ_l g_l(x_j^(l), x^(l))` for every training point `j`.
    fn kernel_weights(&self, x_new: &[FunctionSample]) -> Result<Vec<f64>> {
        if x_new.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariates supplied, model has {}",
                x_new.len(),
                self.p()
            )));
        }
        let mut weights = vec![0.0; self.n_train()];
        for (l, (spec, xs)) in self.specs.iter().zip(&self.train_x).enumerate() {
            let theta = self.theta[l];
            if theta == 0.0 {
                // Still validate grids so errors do not depend on θ.
                distance_sq(&xs[0], &x_new[l])?;
                continue;
            }
            for (w, xj) in weights.iter_mut().zip(xs) {
                *w += theta * spec.eval_dist_sq(distance_sq(xj, &x_new[l])?);
            }
        }
        Ok(weights)
    }
}

pub fn predict(model: &MfRkhsModel, x_new: &[FunctionSample]) -> Result<FunctionSample> {
    let weights = model.kernel_weights(x_new)?;
    let mut combo = FunctionSample::zeros(model.op.grid().clone());
    for (w, u) in weights.iter().zip(&model.u) {
        if *w != 0.0 {
            combo.add_scaled(*w, u);
        }
    }
    operator_apply(&model.op, &combo)
}

/// Predictions for every sample of a dataset.
pub fn predict_dataset(model: &MfRkhsModel, data: &Dataset) -> Result<Vec<FunctionSample>> {
    if data.p() != model.p() {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} covariates, model has {}",
            data.p(),
            model.p()
        )));
    }
    (0..data.n())
        .into_par_iter()
        .map(|i| predict(model, &data.covariate_tuple(i)))
        .collect()
}

/// 1-based indices of covariates with `θ_l > 1e-8`.
pub fn selected_variables(model: &MfRkhsModel) -> Vec<usize> {
    selected_indices(&model.theta)
}

pub fn selected_indices(theta: &[f64]) -> Vec<usize> {
    theta
        .iter()
        .enumerate()
        .filter(|(_, t)| **t > SELECTION_THRESHOLD)
        .map(|(l, _)| l + 1)
        .collect()
}

/// `(1/n) Σ_i ‖ŷ_i − y_i‖²`.
pub fn evaluate_mse(model: &MfRkhsModel, data: &Dataset) -> Result<f64> {
    let preds = predict_dataset(model, data)?;
    mse(&preds, &data.response)
}

pub fn mse(predictions: &[FunctionSample], responses: &[FunctionSample]) -> Result<f64> {
    if predictions.len() != responses.len() || responses.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} responses",
            predictions.len(),
            responses.len()
        )));
    }
    let mut total = 0.0;
    for (yh, y) in predictions.iter().zip(responses) {
        total += distance_sq(yh, y)?;
    }
    Ok(total / responses.len() as f64)
}
