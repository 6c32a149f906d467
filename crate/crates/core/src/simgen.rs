//! Synthetic data generation and replication studies.
//!
//! Both scenarios draw `y_i = Σ_l Σ_j θ*_l g_l(x_j^(l), x_i^(l)) T u*_j + ε_i`
//! with five covariates, `θ*_l ~ U(1, 2)` outside the zero set `M` and
//! `θ*_l = 0` inside it, and iid `N(0, σ²)` noise at every response node.
//! The fitting operator is the same sine projection used to generate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Truth};
use crate::error::{Error, Result};
use crate::funcspace::{FunctionSample, Grid};
use crate::kernels::{
    combine_gram, gram_matrices, make_sine_projection, operator_apply, FiniteRankOperator,
    KernelFamily, KernelSpec,
};
use crate::model::{evaluate_mse, fit};
use crate::solver::{FitConfig, SELECTION_THRESHOLD};

pub const P: usize = 5;
/// Sine frequencies of `T` in the one-dimensional scenario.
pub const ONE_DIM_FREQUENCIES: usize = 50;
/// Per-axis sine frequencies of `T` in the multi-dimensional scenario.
pub const MULTI_DIM_FREQUENCIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "one-dim")]
    OneDim,
    #[serde(rename = "multi-dim")]
    MultiDim,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::OneDim => "one-dim",
            Scenario::MultiDim => "multi-dim",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-dim" => Ok(Scenario::OneDim),
            "multi-dim" => Ok(Scenario::MultiDim),
            other => Err(Error::InvalidParameter(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Grid resolutions (points per axis). `None` picks the scenario default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub response_points: Option<usize>,
    pub covariate_points_1d: Option<usize>,
    pub covariate_points_2d: Option<usize>,
    pub covariate_points_3d: Option<usize>,
}

impl GridConfig {
    fn response(&self, scenario: Scenario) -> usize {
        self.response_points.unwrap_or(match scenario {
            // 2H+1 points put every node of sin(2π·50t) on a zero; 201 keeps
            // all fifty sines exactly orthogonal under the trapezoid rule.
            Scenario::OneDim => 201,
            Scenario::MultiDim => 51,
        })
    }

    fn covariate(&self, dim: usize) -> usize {
        match dim {
            1 => self.covariate_points_1d.unwrap_or(101),
            2 => self.covariate_points_2d.unwrap_or(51),
            _ => self.covariate_points_3d.unwrap_or(21),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub kernel_family: KernelFamily,
    pub bandwidth: f64,
    pub sigma_noise: f64,
    /// 1-based indices of covariates with zero weight.
    pub zero_set: Vec<usize>,
    pub seed: u64,
    pub grids: GridConfig,
    /// Use `h = ⌊(j−1)/7⌋+1, l = ((j−1) mod 7)+1` for the multi-dimensional
    /// `u_j` instead of the literal `h = ⌊j/7⌋, l = j − 7⌊j/7⌋`.
    pub reindexed_u: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::OneDim,
            n: 50,
            kernel_family: KernelFamily::Gaussian,
            bandwidth: 1.0,
            sigma_noise: 0.01,
            zero_set: vec![5],
            seed: 0,
            grids: GridConfig::default(),
            reindexed_u: false,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(self.sigma_noise > 0.0 && self.sigma_noise.is_finite()) {
            return Err(Error::InvalidParameter("sigma_noise must be positive".into()));
        }
        if let Some(l) = self.zero_set.iter().find(|l| !(1..=P).contains(*l)) {
            return Err(Error::InvalidParameter(format!(
                "zero set entry {l} is outside 1..={P}"
            )));
        }
        KernelSpec::new(self.kernel_family, self.bandwidth)?;
        Ok(())
    }

    pub fn kernel_specs(&self) -> Vec<KernelSpec> {
        vec![
            KernelSpec {
                family: self.kernel_family,
                bandwidth: self.bandwidth,
            };
            P
        ]
    }
}

/// Parses the compact zero-set notation, e.g. `"135"` for `{1, 3, 5}`.
pub fn parse_zero_set(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for c in s.chars() {
        let l = c
            .to_digit(10)
            .filter(|d| (1..=P as u32).contains(d))
            .ok_or_else(|| Error::InvalidParameter(format!("invalid zero set '{s}'")))?
            as usize;
        if out.contains(&l) {
            return Err(Error::InvalidParameter(format!("duplicate index in zero set '{s}'")));
        }
        out.push(l);
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("empty zero set".into()));
    }
    out.sort_unstable();
    Ok(out)
}

pub fn format_zero_set(set: &[usize]) -> String {
    set.iter().map(|l| l.to_string()).collect()
}

/// A generated dataset together with the operator and kernels to fit it.
#[derive(Debug, Clone)]
pub struct SimData {
    pub dataset: Dataset,
    pub op: FiniteRankOperator,
    pub specs: Vec<KernelSpec>,
}

/// SplitMix64 finalizer over `(master, index)`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_fn(grid: &Arc<Grid>, f: impl FnMut(&[f64]) -> f64) -> Result<FunctionSample> {
    FunctionSample::from_fn(grid.clone(), f)
}

fn one_dim_covariates(n: usize, grids: &GridConfig) -> Result<Vec<Vec<FunctionSample>>> {
    let g = Arc::new(Grid::unit_cube(1, grids.covariate(1))?);
    let mut cov: Vec<Vec<FunctionSample>> = (0..P).map(|_| Vec::with_capacity(n)).collect();
    for i in 1..=n {
        let fi = i as f64;
        cov[0].push(sample_fn(&g, |t| fi * t[0].exp())?);
        cov[1].push(sample_fn(&g, |t| (fi * t[0]).sin() + t[0].exp())?);
        cov[2].push(sample_fn(&g, |t| t[0].powi(i as i32) + fi * t[0].cos() / 3.0)?);
        cov[3].push(sample_fn(&g, |t| (fi + t[0] * t[0]).ln())?);
        cov[4].push(sample_fn(&g, |t| (fi * t[0]).cos().sin())?);
    }
    Ok(cov)
}

fn multi_dim_covariates(n: usize, grids: &GridConfig) -> Result<Vec<Vec<FunctionSample>>> {
    let g1 = Arc::new(Grid::unit_cube(1, grids.covariate(1))?);
    let g2 = Arc::new(Grid::unit_cube(2, grids.covariate(2))?);
    let g3 = Arc::new(Grid::unit_cube(3, grids.covariate(3))?);
    let mut cov: Vec<Vec<FunctionSample>> = (0..P).map(|_| Vec::with_capacity(n)).collect();
    for i in 1..=n {
        let fi = i as f64;
        let gap = (fi - 25.0).abs();
        cov[0].push(sample_fn(&g1, |t| fi * t[0])?);
        cov[1].push(sample_fn(&g2, |x| (fi * (fi * x[0]).sin() + fi * x[1].cos()) / 3.0)?);
        cov[2].push(sample_fn(&g3, |x| {
            x[0].powf(gap) * (fi * x[2]).sin() + x[1] * gap.powf(x[2])
        })?);
        cov[3].push(sample_fn(&g1, |t| fi * (fi * t[0]).sin() + t[0] * fi.ln())?);
        cov[4].push(sample_fn(&g2, |x| x[0] * fi.ln() + fi * (fi * x[1]).cos())?);
    }
    Ok(cov)
}

/// Frequencies `(h, l)` of the multi-dimensional `u_j`.
pub fn multi_dim_u_frequencies(j: usize, reindexed: bool) -> (usize, usize) {
    if reindexed {
        ((j - 1) / 7 + 1, (j - 1) % 7 + 1)
    } else {
        (j / 7, j - 7 * (j / 7))
    }
}

fn draw_theta(rng: &mut ChaCha20Rng, zero_set: &[usize]) -> Vec<f64> {
    (1..=P)
        .map(|l| {
            let draw: f64 = rng.random_range(1.0..2.0);
            if zero_set.contains(&l) {
                0.0
            } else {
                draw
            }
        })
        .collect()
}

fn assemble(
    cfg: &ScenarioConfig,
    covariates: Vec<Vec<FunctionSample>>,
    u_true: Vec<FunctionSample>,
    op: FiniteRankOperator,
) -> Result<SimData> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let theta = draw_theta(&mut rng, &cfg.zero_set);
    let specs = cfg.kernel_specs();
    let grams = gram_matrices(&specs, &covariates)?;
    let g = combine_gram(&grams, &theta)?;
    let tu: Vec<FunctionSample> = u_true
        .iter()
        .map(|u| operator_apply(&op, u))
        .collect::<Result<_>>()?;

    let n = cfg.n;
    let grid = op.grid().clone();
    let mut response = Vec::with_capacity(n);
    for i in 0..n {
        let mut values = vec![0.0; grid.node_count()];
        for (j, tuj) in tu.iter().enumerate() {
            let gij = g[(j, i)];
            if gij != 0.0 {
                for (v, t) in values.iter_mut().zip(tuj.values()) {
                    *v += gij * t;
                }
            }
        }
        for v in values.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += cfg.sigma_noise * z;
        }
        response.push(FunctionSample::new(grid.clone(), values)?);
    }

    let mut dataset = Dataset::new(response, covariates)?;
    dataset.truth = Some(Truth { theta, u: u_true });
    Ok(SimData {
        dataset,
        op,
        specs,
    })
}

/// One-dimensional scenario: responses and covariates on `[0, 1]`.
pub fn gen_one_dim(cfg: &ScenarioConfig) -> Result<SimData> {
    cfg.validate()?;
    if cfg.scenario != Scenario::OneDim {
        return Err(Error::InvalidParameter("gen_one_dim needs scenario one-dim".into()));
    }
    let grid = Arc::new(Grid::unit_cube(1, cfg.grids.response(cfg.scenario))?);
    let op = make_sine_projection(&[ONE_DIM_FREQUENCIES], grid.clone())?;
    let u_true = (1..=cfg.n)
        .map(|j| sample_fn(&grid, |t| (2.0 * PI * j as f64 * t[0]).sin()))
        .collect::<Result<_>>()?;
    let covariates = one_dim_covariates(cfg.n, &cfg.grids)?;
    assemble(cfg, covariates, u_true, op)
}

/// Multi-dimensional scenario: response on `[0, 1]²`, covariates of
/// dimensions 1, 2, 3, 1, 2.
pub fn gen_multi_dim(cfg: &ScenarioConfig) -> Result<SimData> {
    cfg.validate()?;
    if cfg.scenario != Scenario::MultiDim {
        return Err(Error::InvalidParameter("gen_multi_dim needs scenario multi-dim".into()));
    }
    let grid = Arc::new(Grid::unit_cube(2, cfg.grids.response(cfg.scenario))?);
    let op = make_sine_projection(&[MULTI_DIM_FREQUENCIES, MULTI_DIM_FREQUENCIES], grid.clone())?;
    let u_true = (1..=cfg.n)
        .map(|j| {
            let (h, l) = multi_dim_u_frequencies(j, cfg.reindexed_u);
            sample_fn(&grid, |x| {
                (2.0 * PI * h as f64 * x[0]).sin() * (2.0 * PI * l as f64 * x[1]).sin()
            })
        })
        .collect::<Result<_>>()?;
    let covariates = multi_dim_covariates(cfg.n, &cfg.grids)?;
    assemble(cfg, covariates, u_true, op)
}

pub fn generate(cfg: &ScenarioConfig) -> Result<SimData> {
    match cfg.scenario {
        Scenario::OneDim => gen_one_dim(cfg),
        Scenario::MultiDim => gen_multi_dim(cfg),
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub seed: u64,
    pub theta_true: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub mse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

impl ReplicationRecord {
    /// Whether the selected set equals the generating support.
    pub fn support_recovered(&self) -> bool {
        self.theta_true
            .iter()
            .zip(&self.theta_hat)
            .all(|(t, h)| (*t > 0.0) == (*h > SELECTION_THRESHOLD))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub selection_counts: Vec<usize>,
    pub mean_mse: f64,
    /// Successful replications.
    pub reps: usize,
    pub failures: Vec<(usize, String)>,
    pub records: Vec<ReplicationRecord>,
}

fn run_one(cfg: &ScenarioConfig, fit_cfg: &FitConfig, seed: u64) -> Result<ReplicationRecord> {
    let rep_cfg = ScenarioConfig {
        seed,
        ..cfg.clone()
    };
    let sim = generate(&rep_cfg)?;
    let model = fit(&sim.dataset, &sim.specs, &sim.op, fit_cfg)?;
    let mse = evaluate_mse(&model, &sim.dataset)?;
    Ok(ReplicationRecord {
        seed,
        theta_true: sim.dataset.truth.map(|t| t.theta).unwrap_or_default(),
        theta_hat: model.theta,
        mse,
        iterations: model.report.iterations,
        converged: model.report.converged,
        objective_trace: model.report.objective_trace,
    })
}

/// Runs `reps` independent generate-and-fit replications. Replication `r`
/// uses seed `child_seed(cfg.seed, r)`; the summary does not depend on
/// scheduling.
pub fn run_replications(
    cfg: &ScenarioConfig,
    reps: usize,
    fit_cfg: &FitConfig,
) -> Result<ReplicationSummary> {
    cfg.validate()?;
    fit_cfg.validate()?;
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let outcomes: Vec<Result<ReplicationRecord>> = (0..reps)
        .into_par_iter()
        .map(|r| run_one(cfg, fit_cfg, child_seed(cfg.seed, r as u64)))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    let mut selection_counts = vec![0; P];
    for rec in &records {
        for (count, h) in selection_counts.iter_mut().zip(&rec.theta_hat) {
            *count += usize::from(*h > SELECTION_THRESHOLD);
        }
    }
    let mean_mse = if records.is_empty() {
        f64::NAN
    } else {
        records.iter().map(|r| r.mse).sum::<f64>() / records.len() as f64
    };
    Ok(ReplicationSummary {
        selection_counts,
        mean_mse,
        reps: records.len(),
        failures,
        records,
    })
}
