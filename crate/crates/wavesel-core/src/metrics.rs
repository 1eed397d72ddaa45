//! Scoring of regression estimates.

use crate::error::{CoreError, Result};

/// Determination coefficient `R² = 1 - Σ(y-ŷ)² / Σ(y-ȳ)²`, with ȳ the mean
/// of the evaluated truth values. Negative when the predictor is worse than
/// the mean.
pub fn determination_coefficient(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(CoreError::SizeMismatch(format!(
            "y_true has {} values, y_pred has {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(CoreError::DegenerateTruth);
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}
