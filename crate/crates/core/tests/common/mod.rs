#![allow(dead_code)]

use std::sync::Arc;

use mfrkhs::funcspace::{FunctionSample, Grid};
use mfrkhs::kernels::{FiniteRankOperator, KernelFamily, KernelSpec};
use mfrkhs::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn unit_grid(points: usize) -> Arc<Grid> {
    Arc::new(Grid::unit_cube(1, points).unwrap())
}

pub fn random_sample(rng: &mut ChaCha20Rng, grid: &Arc<Grid>, scale: f64) -> FunctionSample {
    let values = (0..grid.node_count()).map(|_| scale * normal(rng)).collect();
    FunctionSample::new(grid.clone(), values).unwrap()
}

/// Operator with normalized sines `√2 sin(2πqt)` and random eigenvalues.
pub fn random_operator(rng: &mut ChaCha20Rng, grid: &Arc<Grid>, rank: usize) -> FiniteRankOperator {
    let w: Vec<FunctionSample> = (1..=rank)
        .map(|q| {
            FunctionSample::from_fn(grid.clone(), |t| {
                2f64.sqrt() * (2.0 * std::f64::consts::PI * q as f64 * t[0]).sin()
            })
            .unwrap()
        })
        .collect();
    let deltas = (0..rank).map(|_| rng.random_range(0.2..2.0)).collect();
    FiniteRankOperator::new(grid.clone(), deltas, w).unwrap()
}

pub struct Instance {
    pub data: Dataset,
    pub specs: Vec<KernelSpec>,
    pub op: FiniteRankOperator,
}

/// Random data with `p` covariates on small grids of their own.
pub fn random_instance(rng: &mut ChaCha20Rng, n: usize, p: usize, nodes: usize, rank: usize) -> Instance {
    let ygrid = unit_grid(nodes);
    let op = random_operator(rng, &ygrid, rank);
    let response = (0..n).map(|_| random_sample(rng, &ygrid, 1.0)).collect();
    let covariates = (0..p)
        .map(|_| {
            let g = unit_grid(rng.random_range(3..10));
            (0..n).map(|_| random_sample(rng, &g, 0.7)).collect()
        })
        .collect();
    let specs = (0..p)
        .map(|_| KernelSpec {
            family: KernelFamily::ALL[rng.random_range(0..3)],
            bandwidth: rng.random_range(0.5..2.0),
        })
        .collect();
    Instance {
        data: Dataset::new(response, covariates).unwrap(),
        specs,
        op,
    }
}

pub fn random_theta(rng: &mut ChaCha20Rng, p: usize) -> Vec<f64> {
    (0..p)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.1..2.0) })
        .collect()
}

pub fn random_u(rng: &mut ChaCha20Rng, inst: &Instance) -> Vec<FunctionSample> {
    (0..inst.data.n())
        .map(|_| random_sample(rng, inst.op.grid(), 1.0))
        .collect()
}

// Naive reference implementations, written against raw grid values only.

pub fn naive_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..w.len() {
        s += w[k] * a[k] * b[k];
    }
    s
}

pub fn naive_kernel(spec: &KernelSpec, a: &FunctionSample, b: &FunctionSample) -> f64 {
    let w = a.grid().weights();
    let mut d2 = 0.0;
    for k in 0..w.len() {
        let diff = a.values()[k] - b.values()[k];
        d2 += w[k] * diff * diff;
    }
    let s2 = spec.bandwidth * spec.bandwidth;
    match spec.family {
        KernelFamily::Gaussian => (-d2 / s2).exp(),
        KernelFamily::Cauchy => 1.0 / (1.0 + d2 / s2),
        KernelFamily::Exponential => (-d2.sqrt() / s2).exp(),
    }
}

/// `T u` evaluated node by node from the spectral data.
pub fn naive_apply_t(op: &FiniteRankOperator, u: &[f64]) -> Vec<f64> {
    let w = op.grid().weights();
    let n = w.len();
    let mut out = vec![0.0; n];
    for (delta, wq) in op.eigenvalues().iter().zip(op.eigenfunctions()) {
        let c = naive_dot(w, wq.values(), u);
        for k in 0..n {
            out[k] += delta * c * wq.values()[k];
        }
    }
    out
}

/// Projection onto the span of the eigenfunctions.
pub fn naive_project(op: &FiniteRankOperator, y: &[f64]) -> Vec<f64> {
    let w = op.grid().weights();
    let mut out = vec![0.0; w.len()];
    for wq in op.eigenfunctions() {
        let c = naive_dot(w, wq.values(), y);
        for k in 0..w.len() {
            out[k] += c * wq.values()[k];
        }
    }
    out
}

pub fn naive_gram(inst: &Instance, l: usize) -> Vec<Vec<f64>> {
    let xs = &inst.data.covariates[l];
    let n = xs.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = naive_kernel(&inst.specs[l], &xs[i], &xs[j]);
        }
    }
    g
}

/// `Σ_l Σ_j θ_l g_l(x_j, x_i) T u_j` for sample `i`.
pub fn naive_fitted(inst: &Instance, u: &[FunctionSample], theta: &[f64], i: usize) -> Vec<f64> {
    let nodes = inst.op.grid().node_count();
    let mut out = vec![0.0; nodes];
    for (l, t) in theta.iter().enumerate() {
        let g = naive_gram(inst, l);
        for (j, uj) in u.iter().enumerate() {
            let tu = naive_apply_t(&inst.op, uj.values());
            for k in 0..nodes {
                out[k] += t * g[j][i] * tu[k];
            }
        }
    }
    out
}

pub fn naive_objective(
    inst: &Instance,
    u: &[FunctionSample],
    theta: &[f64],
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let w = inst.op.grid().weights();
    let n = inst.data.n();
    let mut fit = 0.0;
    for i in 0..n {
        let f = naive_fitted(inst, u, theta, i);
        let y = inst.data.response[i].values();
        let r: Vec<f64> = y.iter().zip(&f).map(|(a, b)| a - b).collect();
        fit += naive_dot(w, &r, &r);
    }
    let mut ridge = 0.0;
    for (l, t) in theta.iter().enumerate() {
        let g = naive_gram(inst, l);
        for i in 0..n {
            let tu = naive_apply_t(&inst.op, u[i].values());
            for j in 0..n {
                ridge += t * g[i][j] * naive_dot(w, &tu, u[j].values());
            }
        }
    }
    fit + lambda1 * ridge + lambda2 * theta.iter().sum::<f64>()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
