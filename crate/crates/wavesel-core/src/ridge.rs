//! Ridge regression on z-scored features with an unpenalized intercept.
//!
//! Features are standardized column-wise (constant columns get scale 1 and
//! end up with zero weight), the intercept is fixed at mean(y), and the
//! penalized weights solve `(XᵀX + λI) w = Xᵀy` on the centered system.

use crate::dataset::{Dataset, Target};
use crate::error::{CoreError, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    /// Weights in standardized feature space.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
    pub lambda: f64,
    pub target: Target,
    pub degenerate_target: bool,
}

/// Fit a ridge regressor. `lambda == 0` falls back to ordinary least squares
/// and reports `SingularSystem` when the normal equations are rank-deficient.
pub fn train_ridge(train: &Dataset, target: Target, lambda: f64) -> Result<RidgeModel> {
    if train.is_empty() {
        return Err(CoreError::SizeMismatch("training set is empty".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(CoreError::DomainError(format!(
            "ridge penalty must be finite and non-negative, got {lambda}"
        )));
    }
    let (x, y) = train.design(target);
    let n = y.len();
    let d = x[0].len();

    let mut means = vec![0.0; d];
    for row in &x {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut scales = vec![0.0; d];
    for row in &x {
        for ((s, v), m) in scales.iter_mut().zip(row).zip(&means) {
            *s += (v - m).powi(2);
        }
    }
    for s in &mut scales {
        *s = (*s / n as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0; // constant feature: no information, weight stays zero
        }
    }

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let degenerate = y.iter().all(|&v| v == y_mean);

    // standardized design and centered target
    let z = DMatrix::from_fn(n, d, |i, j| (x[i][j] - means[j]) / scales[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);

    let mut gram = z.transpose() * &z;
    for j in 0..d {
        gram[(j, j)] += lambda;
    }
    let rhs = z.transpose() * yc;
    let weights = if lambda > 0.0 {
        gram.cholesky()
            .ok_or_else(|| {
                CoreError::SingularSystem("ridge normal equations not positive definite".into())
            })?
            .solve(&rhs)
    } else {
        let lu = gram.full_piv_lu();
        lu.solve(&rhs).ok_or_else(|| {
            CoreError::SingularSystem(
                "unpenalized normal equations are singular; use lambda > 0".into(),
            )
        })?
    };

    Ok(RidgeModel {
        weights: weights.iter().cloned().collect(),
        intercept: y_mean,
        feature_means: means,
        feature_scales: scales,
        lambda,
        target,
        degenerate_target: degenerate,
    })
}

impl RidgeModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.weights.len(),
                got: features.len(),
            });
        }
        let mut acc = self.intercept;
        for (((w, v), m), s) in self
            .weights
            .iter()
            .zip(features)
            .zip(&self.feature_means)
            .zip(&self.feature_scales)
        {
            acc += w * (v - m) / s;
        }
        Ok(acc)
    }
}
