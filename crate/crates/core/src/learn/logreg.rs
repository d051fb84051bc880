use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{sigmoid, Dataset, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    /// L2 penalty on the (standardized) weights; the intercept is free.
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2: 1e-3,
            max_iter: 100,
            tol: 1e-10,
        }
    }
}

/// L2-regularized logistic regression fitted by Newton's method on
/// z-scored features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogRegModel {
    pub fn fit(data: &Dataset, cfg: &LogRegConfig) -> Result<Self> {
        if cfg.l2 <= 0.0 {
            return Err(Error::InvalidParameter("logreg l2 must be positive".into()));
        }
        let std = Standardizer::fit(data);
        let n = data.len();
        let d = data.n_features();
        // column 0 is the intercept
        let mut x = DMatrix::<f64>::zeros(n, d + 1);
        for (i, r) in data.rows().iter().enumerate() {
            x[(i, 0)] = 1.0;
            for (j, v) in std.apply(r).into_iter().enumerate() {
                x[(i, j + 1)] = v;
            }
        }
        let y = DVector::from_iterator(n, data.labels().iter().map(|&v| f64::from(v)));
        let mut beta = DVector::<f64>::zeros(d + 1);
        let mut penalty = DMatrix::<f64>::identity(d + 1, d + 1) * (cfg.l2 * n as f64);
        penalty[(0, 0)] = 0.0;

        for _ in 0..cfg.max_iter {
            let eta = &x * &beta;
            let p = eta.map(sigmoid);
            let w = p.map(|v| (v * (1.0 - v)).max(1e-12));
            let grad = x.transpose() * (&p - &y) + &penalty * &beta;
            let mut xw = x.clone();
            for (i, wi) in w.iter().enumerate() {
                xw.row_mut(i).scale_mut(*wi);
            }
            let hess = x.transpose() * xw + &penalty;
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&grad),
                None => hess
                    .lu()
                    .solve(&grad)
                    .ok_or_else(|| Error::InvalidParameter("singular logreg Hessian".into()))?,
            };
            beta -= &step;
            if step.amax() < cfg.tol {
                break;
            }
        }

        Ok(LogRegModel {
            standardizer: std,
            intercept: beta[0],
            weights: beta.iter().skip(1).copied().collect(),
        })
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.apply(row);
        let eta = self.intercept + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>();
        sigmoid(eta)
    }
}
