//! Scalar kernels on covariate functions and the finite-rank response operator.
//!
//! The operator-valued kernel for covariate `l` is separable: `K_l(x, z) =
//! g_l(x, z) T`, with `g_l` a scalar kernel of the L² distance between two
//! covariate functions and `T` a finite-rank self-adjoint operator on the
//! response space stored through its eigenpairs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{distance_sq, inner_product, FunctionSample, Grid};

/// Tolerance for orthonormality of stored eigenfunctions.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Cauchy,
    Exponential,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Exponential,
        KernelFamily::Gaussian,
        KernelFamily::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Cauchy => "cauchy",
            KernelFamily::Exponential => "exponential",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "cauchy" => Ok(KernelFamily::Cauchy),
            "exponential" => Ok(KernelFamily::Exponential),
            other => Err(Error::InvalidParameter(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// A scalar kernel family together with its bandwidth `σ_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        let spec = Self { family, bandwidth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidth > 0.0 && self.bandwidth.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "kernel bandwidth must be positive, got {}",
                self.bandwidth
            )))
        }
    }

    /// Kernel value as a function of the squared L² distance.
    ///
    /// The exponential family divides the unsquared distance by `σ_g²`.
    pub fn eval_dist_sq(&self, dist_sq: f64) -> f64 {
        let s2 = self.bandwidth * self.bandwidth;
        match self.family {
            KernelFamily::Gaussian => (-dist_sq / s2).exp(),
            KernelFamily::Cauchy => 1.0 / (1.0 + dist_sq / s2),
            KernelFamily::Exponential => (-dist_sq.max(0.0).sqrt() / s2).exp(),
        }
    }
}

pub fn scalar_kernel(spec: &KernelSpec, x: &FunctionSample, z: &FunctionSample) -> Result<f64> {
    Ok(spec.eval_dist_sq(distance_sq(x, z)?))
}

/// One `n × n` Gram matrix per covariate, `G_l[i][j] = g_l(x_i^(l), x_j^(l))`.
///
/// `covariates[l]` holds the `n` samples of covariate `l`.
pub fn gram_matrices(
    specs: &[KernelSpec],
    covariates: &[Vec<FunctionSample>],
) -> Result<Vec<DMatrix<f64>>> {
    if covariates.is_empty() {
        return Err(Error::Empty("no covariates".into()));
    }
    if specs.len() != covariates.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} kernel specs for {} covariates",
            specs.len(),
            covariates.len()
        )));
    }
    let n = covariates[0].len();
    if n == 0 {
        return Err(Error::Empty("no samples".into()));
    }
    specs
        .iter()
        .zip(covariates)
        .enumerate()
        .map(|(l, (spec, xs))| {
            spec.validate()?;
            if xs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "covariate {l} has {} samples, expected {n}",
                    xs.len()
                )));
            }
            if let Some(i) = xs.iter().position(|x| !x.shares_grid(&xs[0])) {
                return Err(Error::GridMismatch(format!(
                    "covariate {l} sample {i} is on a different grid"
                )));
            }
            gram_single(spec, xs)
        })
        .collect()
}

fn gram_single(spec: &KernelSpec, xs: &[FunctionSample]) -> Result<DMatrix<f64>> {
    let n = xs.len();
    // Upper triangle row by row; each entry depends only on (i, j).
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| distance_sq(&xs[i], &xs[j]).map(|d| spec.eval_dist_sq(d)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut g = DMatrix::from_element(n, n, 1.0);
    for (i, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + 1 + offset;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// `Σ_l θ_l G_l`.
pub fn combine_gram(grams: &[DMatrix<f64>], theta: &[f64]) -> Result<DMatrix<f64>> {
    if grams.is_empty() {
        return Err(Error::Empty("no Gram matrices".into()));
    }
    if grams.len() != theta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} Gram matrices for {} weights",
            grams.len(),
            theta.len()
        )));
    }
    if let Some(l) = theta.iter().position(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "theta[{l}] = {} is negative",
            theta[l]
        )));
    }
    let shape = grams[0].shape();
    let mut out = DMatrix::zeros(shape.0, shape.1);
    for (l, (g, &t)) in grams.iter().zip(theta).enumerate() {
        if g.shape() != shape {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix {l} has shape {:?}, expected {shape:?}",
                g.shape()
            )));
        }
        if t != 0.0 {
            out += g * t;
        }
    }
    Ok(out)
}

/// Finite-rank self-adjoint operator `T u = Σ_q δ_q ⟨w_q, u⟩ w_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRankOperator {
    grid: Arc<Grid>,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<FunctionSample>,
}

impl FiniteRankOperator {
    /// Validates positivity of the eigenvalues and orthonormality of the
    /// eigenfunctions under the grid's quadrature.
    pub fn new(
        grid: Arc<Grid>,
        eigenvalues: Vec<f64>,
        eigenfunctions: Vec<FunctionSample>,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Empty("operator needs rank at least 1".into()));
        }
        if eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues for {} eigenfunctions",
                eigenvalues.len(),
                eigenfunctions.len()
            )));
        }
        if let Some(q) = eigenvalues.iter().position(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {q} = {} is not positive",
                eigenvalues[q]
            )));
        }
        let probe = FunctionSample::zeros(grid.clone());
        if let Some(q) = eigenfunctions.iter().position(|w| !w.shares_grid(&probe)) {
            return Err(Error::GridMismatch(format!(
                "eigenfunction {q} is not on the operator grid"
            )));
        }
        for q in 0..eigenfunctions.len() {
            for r in q..eigenfunctions.len() {
                let ip = inner_product(&eigenfunctions[q], &eigenfunctions[r])?;
                let target = if q == r { 1.0 } else { 0.0 };
                let deviation = (ip - target).abs();
                if !(deviation <= ORTHONORMAL_TOL) {
                    return Err(Error::NotOrthonormal { q, r, deviation });
                }
            }
        }
        Ok(Self {
            grid,
            eigenvalues,
            eigenfunctions,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[FunctionSample] {
        &self.eigenfunctions
    }

    fn check_grid(&self, u: &FunctionSample) -> Result<()> {
        if u.shares_grid(&self.eigenfunctions[0]) {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "function is not on the operator's response grid".into(),
            ))
        }
    }

    /// Coordinates `⟨w_q, u⟩` for every eigenfunction.
    pub fn coefficients(&self, u: &FunctionSample) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        Ok(self
            .eigenfunctions
            .iter()
            .map(|w| crate::funcspace::weighted_dot(self.grid.weights(), w.values(), u.values()))
            .collect())
    }

    /// `Σ_q c_q w_q` on the operator grid.
    pub fn expand(&self, coeffs: &[f64]) -> FunctionSample {
        let mut out = FunctionSample::zeros(self.grid.clone());
        for (c, w) in coeffs.iter().zip(&self.eigenfunctions) {
            if *c != 0.0 {
                out.add_scaled(*c, w);
            }
        }
        out
    }

    /// Gram matrix `⟨w_q, w_r⟩` of the stored eigenfunctions; the identity up
    /// to quadrature round-off.
    pub fn eigenfunction_gram(&self) -> DMatrix<f64> {
        let k = self.rank();
        let weights = self.grid.weights();
        DMatrix::from_fn(k, k, |q, r| {
            crate::funcspace::weighted_dot(
                weights,
                self.eigenfunctions[q].values(),
                self.eigenfunctions[r].values(),
            )
        })
    }
}

pub fn operator_apply(op: &FiniteRankOperator, u: &FunctionSample) -> Result<FunctionSample> {
    let coeffs: Vec<f64> = op
        .coefficients(u)?
        .iter()
        .zip(op.eigenvalues())
        .map(|(c, d)| c * d)
        .collect();
    Ok(op.expand(&coeffs))
}

/// Tensor-product sine projection on `[0,1]^d`.
///
/// Eigenfunctions are the normalized products `2^{d/2} Π_a sin(2π h_a t_a)`
/// with `1 ≤ h_a ≤ counts[a]`, enumerated with the last axis fastest. Every
/// eigenvalue is `2^{-d}`, so the operator equals the unnormalized projection
/// `u ↦ Σ_h ⟨b_h, u⟩ b_h` onto the raw sine products `b_h`.
pub fn make_sine_projection(counts: &[usize], grid: Arc<Grid>) -> Result<FiniteRankOperator> {
    let d = grid.dim();
    if counts.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} frequency counts for a {d}-dimensional grid",
            counts.len()
        )));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidParameter("frequency counts must be positive".into()));
    }
    for (a, axis) in grid.axes().iter().enumerate() {
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        if lo.abs() > 1e-12 || (hi - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "axis {a} spans [{lo}, {hi}], sine projection needs [0, 1]"
            )));
        }
        let required = 2 * counts[a] + 1;
        if axis.len() < required {
            return Err(Error::Resolution {
                axis: a,
                points: axis.len(),
                required,
            });
        }
    }

    let scale = 2f64.powf(d as f64 / 2.0);
    let delta = 2f64.powi(-(d as i32));
    let total: usize = counts.iter().product();

    // Per-axis sine tables: tables[a][h-1][k] = sin(2π h t_k).
    let tables: Vec<Vec<Vec<f64>>> = grid
        .axes()
        .iter()
        .zip(counts)
        .map(|(axis, &c)| {
            (1..=c)
                .map(|h| {
                    axis.iter()
                        .map(|t| (2.0 * std::f64::consts::PI * h as f64 * t).sin())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut eigenfunctions = Vec::with_capacity(total);
    let mut freq = vec![0usize; d];
    let mut idx = vec![0usize; d];
    for mut flat in 0..total {
        for a in (0..d).rev() {
            freq[a] = flat % counts[a];
            flat /= counts[a];
        }
        let mut values = vec![0.0; grid.node_count()];
        for (k, v) in values.iter_mut().enumerate() {
            let mut rem = k;
            for a in (0..d).rev() {
                let len = grid.axes()[a].len();
                idx[a] = rem % len;
                rem /= len;
            }
            *v = scale * (0..d).map(|a| tables[a][freq[a]][idx[a]]).product::<f64>();
        }
        eigenfunctions.push(FunctionSample::new(grid.clone(), values)?);
    }
    FiniteRankOperator::new(grid, vec![delta; total], eigenfunctions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{linear_combine, norm_sq};
    use std::f64::consts::PI;

    fn line(points: usize) -> Arc<Grid> {
        Arc::new(Grid::unit_cube(1, points).unwrap())
    }

    fn sine(grid: &Arc<Grid>, freq: f64) -> FunctionSample {
        FunctionSample::from_fn(grid.clone(), |t| (2.0 * PI * freq * t[0]).sin()).unwrap()
    }

    fn gaussian(bw: f64) -> KernelSpec {
        KernelSpec::new(KernelFamily::Gaussian, bw).unwrap()
    }

    #[test]
    fn kernel_identity_at_zero_distance() {
        let g = line(33);
        let x = sine(&g, 1.5);
        for family in KernelFamily::ALL {
            let spec = KernelSpec::new(family, 0.7).unwrap();
            assert_eq!(scalar_kernel(&spec, &x, &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_closed_forms_at_unit_distance() {
        // x - z = sqrt(2) sin(2πt) has unit L² norm.
        let g = line(129);
        let x = sine(&g, 1.0).scaled(2f64.sqrt());
        let z = FunctionSample::zeros(g);
        let d2 = distance_sq(&x, &z).unwrap();
        assert!((d2 - 1.0).abs() < 1e-12);
        let ga = scalar_kernel(&gaussian(1.0), &x, &z).unwrap();
        assert!((ga - 0.3678794).abs() < 1e-7);
        let ca = scalar_kernel(&KernelSpec::new(KernelFamily::Cauchy, 1.0).unwrap(), &x, &z).unwrap();
        assert!((ca - 0.5).abs() < 1e-12);
        let spec = KernelSpec::new(KernelFamily::Exponential, 2.0).unwrap();
        let ex = scalar_kernel(&spec, &x, &z).unwrap();
        assert!((ex - (-d2.sqrt() / 4.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_must_be_positive() {
        assert!(KernelSpec::new(KernelFamily::Gaussian, 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Cauchy, -1.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Cauchy, f64::NAN).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let g = line(9);
        let x = sine(&g, 1.0);
        let one = gram_matrices(&[gaussian(1.0)], &[vec![x.clone()]]).unwrap();
        assert_eq!(one[0], DMatrix::from_element(1, 1, 1.0));
        let two = gram_matrices(&[gaussian(1.0)], &[vec![x.clone(), x]]).unwrap();
        assert_eq!(two[0], DMatrix::from_element(2, 2, 1.0));
    }

    #[test]
    fn gram_matches_naive_loop() {
        let g = line(17);
        let xs: Vec<FunctionSample> = (1..=3)
            .map(|i| FunctionSample::from_fn(g.clone(), |t| (i as f64) * t[0].exp()).unwrap())
            .collect();
        let spec = gaussian(1.3);
        let grams = gram_matrices(&[spec], std::slice::from_ref(&xs)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut d2 = 0.0;
                for k in 0..17 {
                    let diff = xs[i].values()[k] - xs[j].values()[k];
                    d2 += g.weights()[k] * diff * diff;
                }
                let naive = (-d2 / (1.3 * 1.3)).exp();
                assert!((grams[0][(i, j)] - naive).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_errors() {
        let g = line(9);
        let x = sine(&g, 1.0);
        assert!(matches!(gram_matrices(&[], &[]), Err(Error::Empty(_))));
        assert!(matches!(
            gram_matrices(&[gaussian(1.0)], &[vec![]]),
            Err(Error::Empty(_))
        ));
        let other = sine(&line(11), 1.0);
        assert!(matches!(
            gram_matrices(&[gaussian(1.0)], &[vec![x.clone(), other]]),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            gram_matrices(
                &[gaussian(1.0), gaussian(1.0)],
                &[vec![x.clone(), x.clone()], vec![x]]
            ),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn combine_gram_cases() {
        let g1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        let g2 = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        let zero = combine_gram(&[g1.clone(), g2.clone()], &[0.0, 0.0]).unwrap();
        assert_eq!(zero, DMatrix::zeros(2, 2));
        assert_eq!(combine_gram(std::slice::from_ref(&g1), &[1.0]).unwrap(), g1);
        let mix = combine_gram(&[g1.clone(), g2.clone()], &[0.5, 2.0]).unwrap();
        assert_eq!(mix, DMatrix::from_row_slice(2, 2, &[2.5, 1.3, 1.3, 2.5]));
        assert!(matches!(
            combine_gram(&[g1.clone(), g2.clone()], &[1.0, -0.1]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            combine_gram(&[g1, DMatrix::zeros(3, 3)], &[1.0, 1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sine_projection_one_dim() {
        let g = line(101);
        let op = make_sine_projection(&[1], g.clone()).unwrap();
        let u = sine(&g, 1.0);
        let tu = operator_apply(&op, &u).unwrap();
        for (a, b) in tu.values().iter().zip(u.values()) {
            assert!((a - 0.5 * b).abs() < 1e-12);
        }

        let op3 = make_sine_projection(&[3], g.clone()).unwrap();
        let out = operator_apply(&op3, &sine(&g, 4.0)).unwrap();
        assert!(out.values().iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn sine_projection_two_dim() {
        let g = Arc::new(Grid::unit_cube(2, 21).unwrap());
        let op = make_sine_projection(&[2, 2], g).unwrap();
        assert_eq!(op.rank(), 4);
        assert!(op.eigenvalues().iter().all(|&d| d == 0.25));
    }

    #[test]
    fn sine_projection_matches_unnormalized_basis() {
        // Tu = Σ_h ⟨b_h, u⟩ b_h with b_h = sin(2πht).
        let g = line(65);
        let op = make_sine_projection(&[5], g.clone()).unwrap();
        let u = FunctionSample::from_fn(g.clone(), |t| t[0] * (1.0 - t[0]).powi(2) + t[0].cos()).unwrap();
        let tu = operator_apply(&op, &u).unwrap();
        let basis: Vec<FunctionSample> = (1..=5).map(|h| sine(&g, h as f64)).collect();
        let coeffs: Vec<f64> = basis.iter().map(|b| inner_product(b, &u).unwrap()).collect();
        let literal = linear_combine(&coeffs, &basis).unwrap();
        for (a, b) in tu.values().iter().zip(literal.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_projection_errors() {
        let g = line(6);
        assert!(matches!(
            make_sine_projection(&[3], g.clone()),
            Err(Error::Resolution { required: 7, .. })
        ));
        assert!(matches!(
            make_sine_projection(&[0], g.clone()),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_sine_projection(&[1, 1], g),
            Err(Error::DimensionMismatch(_))
        ));
        // On 2H+1 uniform points the top frequency vanishes at every node.
        assert!(matches!(
            make_sine_projection(&[50], line(101)),
            Err(Error::NotOrthonormal { .. })
        ));
        let shifted = Arc::new(Grid::new(vec![crate::funcspace::uniform_axis(0.0, 2.0, 41)]).unwrap());
        assert!(make_sine_projection(&[2], shifted).is_err());
    }

    #[test]
    fn operator_linearity_and_rank_deficiency() {
        let g = line(65);
        let w1 = sine(&g, 1.0).scaled(2f64.sqrt());
        let w2 = sine(&g, 2.0).scaled(2f64.sqrt());
        let op = FiniteRankOperator::new(g.clone(), vec![3.0, 0.5], vec![w1.clone(), w2.clone()]).unwrap();

        let t1 = operator_apply(&op, &w1).unwrap();
        for (a, b) in t1.values().iter().zip(w1.values()) {
            assert!((a - 3.0 * b).abs() < 1e-10);
        }
        let u = linear_combine(&[1.0, 2.0], &[w1.clone(), w2.clone()]).unwrap();
        let expected = linear_combine(&[3.0, 1.0], &[w1, w2]).unwrap();
        let tu = operator_apply(&op, &u).unwrap();
        for (a, b) in tu.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        let orth = sine(&g, 7.0);
        let zero = operator_apply(&op, &orth).unwrap();
        assert!(norm_sq(&zero) < 1e-16);
    }

    #[test]
    fn operator_validation() {
        let g = line(33);
        let w = sine(&g, 1.0);
        // Raw sine has norm 1/2, not 1.
        assert!(matches!(
            FiniteRankOperator::new(g.clone(), vec![1.0], vec![w.clone()]),
            Err(Error::NotOrthonormal { .. })
        ));
        let wn = w.scaled(2f64.sqrt());
        assert!(FiniteRankOperator::new(g.clone(), vec![0.0], vec![wn.clone()]).is_err());
        assert!(FiniteRankOperator::new(g.clone(), vec![], vec![]).is_err());
        assert!(FiniteRankOperator::new(g.clone(), vec![1.0, 1.0], vec![wn.clone()]).is_err());
        let op = FiniteRankOperator::new(g, vec![1.0], vec![wn]).unwrap();
        assert!(matches!(
            operator_apply(&op, &sine(&line(17), 1.0)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn family_names_roundtrip() {
        for f in KernelFamily::ALL {
            assert_eq!(f.name().parse::<KernelFamily>().unwrap(), f);
        }
        assert!("laplace".parse::<KernelFamily>().is_err());
    }
}
