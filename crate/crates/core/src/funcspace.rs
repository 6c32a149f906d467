//! Discretized L² spaces over rectangular domains.
//!
//! A [`Grid`] is a tensor product of per-axis coordinate vectors carrying
//! composite trapezoid weights. A [`FunctionSample`] is a function's values on
//! every node of a grid, flattened row-major with the last axis fastest.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Tensor-product grid with trapezoid quadrature weights.
#[derive(Debug, Clone)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    measure: f64,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

/// Trapezoid weights `(x[k+1] - x[k-1]) / 2` with half-interval end corrections.
fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let m = axis.len();
    (0..m)
        .map(|k| {
            let left = if k == 0 { axis[0] } else { axis[k - 1] };
            let right = if k + 1 == m { axis[m - 1] } else { axis[k + 1] };
            0.5 * (right - left)
        })
        .collect()
}

impl Grid {
    /// Builds a grid from per-axis coordinates. Each axis must be finite,
    /// strictly increasing and hold at least two points.
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        for (a, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} points, need at least 2",
                    axis.len()
                )));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("axis {a} has non-finite coordinates")));
            }
            if let Some(k) = axis.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} is not strictly increasing at index {}",
                    k + 1
                )));
            }
        }

        let mut weights = vec![1.0];
        for axis in &axes {
            let w = trapezoid_weights(axis);
            weights = weights
                .iter()
                .flat_map(|&outer| w.iter().map(move |&inner| outer * inner))
                .collect();
        }
        let measure = weights.iter().sum();
        Ok(Self {
            axes,
            weights,
            measure,
        })
    }

    /// Uniform grid on `[0,1]^dim` with `points` nodes per axis.
    pub fn unit_cube(dim: usize, points: usize) -> Result<Self> {
        Self::new(vec![uniform_axis(0.0, 1.0, points); dim])
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Sum of all quadrature weights, the discrete volume of the domain.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Coordinates of the node at flat index `k`.
    pub fn node(&self, mut k: usize, out: &mut [f64]) {
        for a in (0..self.axes.len()).rev() {
            let len = self.axes[a].len();
            out[a] = self.axes[a][k % len];
            k /= len;
        }
    }

    /// Visits every node in storage order.
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[f64])) {
        let mut point = vec![0.0; self.dim()];
        for k in 0..self.node_count() {
            self.node(k, &mut point);
            f(k, &point);
        }
    }
}

/// `points` equally spaced coordinates from `lo` to `hi` inclusive.
pub fn uniform_axis(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|k| {
            if k + 1 == points {
                hi
            } else {
                lo + (hi - lo) * (k as f64) / last
            }
        })
        .collect()
}

/// Values of a single function on a grid.
#[derive(Debug, Clone)]
pub struct FunctionSample {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for FunctionSample {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FunctionSample {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidSample(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.node_count()];
        Self { grid, values }
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = vec![0.0; grid.node_count()];
        grid.for_each_node(|k, point| values[k] = f(point));
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn shares_grid(&self, other: &FunctionSample) -> bool {
        same_grid(&self.grid, &other.grid)
    }

    pub fn scaled(&self, c: f64) -> FunctionSample {
        FunctionSample {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self += c * other`; grids must already match.
    pub(crate) fn add_scaled(&mut self, c: f64, other: &FunctionSample) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }
}

fn check_same_grid(f: &FunctionSample, g: &FunctionSample) -> Result<()> {
    if f.shares_grid(g) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "grids with {} and {} nodes differ",
            f.grid.node_count(),
            g.grid.node_count()
        )))
    }
}

/// Quadrature inner product `Σ_k w_k f_k g_k`.
pub fn inner_product(f: &FunctionSample, g: &FunctionSample) -> Result<f64> {
    check_same_grid(f, g)?;
    Ok(weighted_dot(f.grid.weights(), &f.values, &g.values))
}

pub(crate) fn weighted_dot(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights
        .iter()
        .zip(a)
        .zip(b)
        .map(|((w, x), y)| w * x * y)
        .sum()
}

pub fn norm_sq(f: &FunctionSample) -> f64 {
    weighted_dot(f.grid.weights(), &f.values, &f.values)
}

/// Squared L² distance between two samples on the same grid.
pub fn distance_sq(f: &FunctionSample, g: &FunctionSample) -> Result<f64> {
    check_same_grid(f, g)?;
    Ok(f.grid
        .weights()
        .iter()
        .zip(&f.values)
        .zip(&g.values)
        .map(|((w, x), y)| w * (x - y) * (x - y))
        .sum())
}

/// Pointwise `Σ_j c_j f_j`.
pub fn linear_combine(coeffs: &[f64], fs: &[FunctionSample]) -> Result<FunctionSample> {
    if fs.is_empty() {
        return Err(Error::Empty("linear_combine needs at least one function".into()));
    }
    if coeffs.len() != fs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} functions",
            coeffs.len(),
            fs.len()
        )));
    }
    let mut out = FunctionSample::zeros(fs[0].grid.clone());
    for (c, f) in coeffs.iter().zip(fs) {
        check_same_grid(&out, f)?;
        out.add_scaled(*c, f);
    }
    Ok(out)
}
