//! Paired response/covariate samples.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcspace::{FunctionSample, Grid};

/// Generating parameters stored alongside simulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub theta: Vec<f64>,
    pub u: Vec<FunctionSample>,
}

/// `n` responses `y_i` and `p` covariate lists `x_i^(l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub response: Vec<FunctionSample>,
    /// `covariates[l][i]` is sample `i` of covariate `l`.
    pub covariates: Vec<Vec<FunctionSample>>,
    pub names: Vec<String>,
    pub truth: Option<Truth>,
}

impl Dataset {
    /// Builds and validates a dataset; covariate names default to `x1..xp`.
    pub fn new(response: Vec<FunctionSample>, covariates: Vec<Vec<FunctionSample>>) -> Result<Self> {
        let names = (1..=covariates.len()).map(|l| format!("x{l}")).collect();
        let data = Self {
            response,
            covariates,
            names,
            truth: None,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.len()
    }

    pub fn response_grid(&self) -> &Arc<Grid> {
        self.response[0].grid()
    }

    /// Checks shape consistency and that every variable lives on one grid.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidDataset("no response samples".into()));
        }
        if self.p() == 0 {
            return Err(Error::InvalidDataset("no covariates".into()));
        }
        if self.names.len() != self.p() {
            return Err(Error::InvalidDataset(format!(
                "{} names for {} covariates",
                self.names.len(),
                self.p()
            )));
        }
        if let Some(i) = self.response.iter().position(|y| !y.shares_grid(&self.response[0])) {
            return Err(Error::InvalidDataset(format!(
                "response sample {i} is on a different grid"
            )));
        }
        for (l, xs) in self.covariates.iter().enumerate() {
            if xs.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "covariate {l} has {} samples, expected {n}",
                    xs.len()
                )));
            }
            if let Some(i) = xs.iter().position(|x| !x.shares_grid(&xs[0])) {
                return Err(Error::InvalidDataset(format!(
                    "covariate {l} sample {i} is on a different grid"
                )));
            }
        }
        if let Some(truth) = &self.truth {
            if truth.theta.len() != self.p() || truth.u.len() != n {
                return Err(Error::InvalidDataset("truth block has wrong shape".into()));
            }
        }
        Ok(())
    }

    /// Covariate tuple of sample `i`.
    pub fn covariate_tuple(&self, i: usize) -> Vec<FunctionSample> {
        self.covariates.iter().map(|xs| xs[i].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(points: usize, n: usize) -> Vec<FunctionSample> {
        let g = Arc::new(Grid::unit_cube(1, points).unwrap());
        (0..n)
            .map(|i| FunctionSample::from_fn(g.clone(), |t| t[0] + i as f64).unwrap())
            .collect()
    }

    #[test]
    fn builds_with_default_names() {
        let d = Dataset::new(samples(5, 3), vec![samples(4, 3), samples(6, 3)]).unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.names, vec!["x1", "x2"]);
        assert_eq!(d.covariate_tuple(2)[1], d.covariates[1][2]);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        assert!(Dataset::new(vec![], vec![]).is_err());
        assert!(Dataset::new(samples(5, 3), vec![]).is_err());
        let err = Dataset::new(samples(5, 3), vec![samples(4, 3), samples(4, 2)]).unwrap_err();
        assert!(err.to_string().contains("covariate 1"));
        let mut mixed = samples(4, 3);
        mixed[2] = samples(7, 1).remove(0);
        let err = Dataset::new(samples(5, 3), vec![mixed]).unwrap_err();
        assert!(err.to_string().contains("sample 2"));
        let mut d = Dataset::new(samples(5, 3), vec![samples(4, 3)]).unwrap();
        d.truth = Some(Truth {
            theta: vec![1.0, 2.0],
            u: samples(5, 3),
        });
        assert!(d.validate().is_err());
    }
}
