//! Log-time segmentation of a trace into the fixed-length feature vector
//! used by the regressors: 40 segments spanning the first positive sample
//! time to the end of the trace, each summarized by its mean dB value.

use crate::error::{CoreError, Result};
use crate::scattering::TransientTrace;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEGMENTS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Per-segment mean dB values.
    pub segment_means_db: Vec<f64>,
    /// n+1 log-spaced segment edges (s). Placeholder index edges when the
    /// vector was reloaded from a dataset CSV, which does not carry them.
    pub segment_edges: Vec<f64>,
    pub trace_id: String,
}

impl FeatureVector {
    /// Rebuild a vector from stored means only (dataset CSV round trip).
    pub fn from_means(trace_id: String, means: Vec<f64>) -> Self {
        let edges = (0..=means.len()).map(|k| k as f64).collect();
        Self {
            segment_means_db: means,
            segment_edges: edges,
            trace_id,
        }
    }

    pub fn len(&self) -> usize {
        self.segment_means_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segment_means_db.is_empty()
    }
}

/// Divide the trace into `n_segments` log-spaced time segments and average
/// the dB values inside each. A segment owning no samples inherits the
/// previous segment's mean; an empty first segment falls back to the first
/// sample's value.
pub fn extract_features(trace: &TransientTrace, n_segments: usize) -> Result<FeatureVector> {
    let samples: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.values_db)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    if samples.len() < 2 {
        return Err(CoreError::EmptyTrace(format!(
            "trace '{}' has {} samples with t > 0, need at least 2",
            trace.id,
            samples.len()
        )));
    }
    let t0 = samples.first().unwrap().0;
    let t1 = samples.last().unwrap().0;
    if t1 <= t0 {
        return Err(CoreError::EmptyTrace("trace times not increasing".into()));
    }
    let ratio = t1 / t0;
    let edges: Vec<f64> = (0..=n_segments)
        .map(|k| t0 * ratio.powf(k as f64 / n_segments as f64))
        .collect();

    let mut means = Vec::with_capacity(n_segments);
    let mut cursor = 0usize;
    for k in 0..n_segments {
        let hi = edges[k + 1];
        let mut sum = 0.0;
        let mut count = 0usize;
        // [edge_k, edge_{k+1}) except the last segment, which includes t1
        while cursor < samples.len()
            && (samples[cursor].0 < hi || (k == n_segments - 1 && samples[cursor].0 <= hi * (1.0 + 1e-12)))
        {
            sum += samples[cursor].1;
            count += 1;
            cursor += 1;
        }
        let mean = if count > 0 {
            sum / count as f64
        } else if k == 0 {
            samples[0].1
        } else {
            means[k - 1]
        };
        means.push(mean);
    }
    Ok(FeatureVector {
        segment_means_db: means,
        segment_edges: edges,
        trace_id: trace.id.clone(),
    })
}
