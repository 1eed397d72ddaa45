//! Labeled feature-vector datasets, seeded train/test splitting, and the
//! dataset CSV schema.

use crate::error::{CoreError, Result};
use crate::features::FeatureVector;
use crate::sensors::SensorEnvironment;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::io::{BufRead, Write};

/// Rows of (features, ground truth).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<(FeatureVector, SensorEnvironment)>,
}

/// Which physical quantity a model estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Target {
    Temperature,
    Light,
}

impl Target {
    pub fn of(&self, env: &SensorEnvironment) -> f64 {
        match self {
            Target::Temperature => env.temperature,
            Target::Light => env.light_intensity,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Target::Temperature => "temperature",
            Target::Light => "light",
        }
    }
}

impl Dataset {
    /// Validates uniform dimensionality and unique trace ids.
    pub fn new(rows: Vec<(FeatureVector, SensorEnvironment)>) -> Result<Self> {
        if let Some(first) = rows.first() {
            let dim = first.0.len();
            let mut ids = HashSet::with_capacity(rows.len());
            for (fv, _) in &rows {
                if fv.len() != dim {
                    return Err(CoreError::DimensionMismatch {
                        expected: dim,
                        got: fv.len(),
                    });
                }
                if !ids.insert(fv.trace_id.as_str()) {
                    return Err(CoreError::SizeMismatch(format!(
                        "duplicate trace id '{}'",
                        fv.trace_id
                    )));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[(FeatureVector, SensorEnvironment)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.rows.first().map(|r| r.0.len()).unwrap_or(0)
    }

    /// Feature matrix and target column for training.
    pub fn design(&self, target: Target) -> (Vec<Vec<f64>>, Vec<f64>) {
        let x = self
            .rows
            .iter()
            .map(|(fv, _)| fv.segment_means_db.clone())
            .collect();
        let y = self.rows.iter().map(|(_, env)| target.of(env)).collect();
        (x, y)
    }
}

/// Split sizes plus the seed that fixes the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

/// Uniform sampling without replacement of `n_train` rows. The partition is
/// a deterministic function of the seed; train and test are disjoint and
/// cover the dataset.
pub fn random_split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if spec.n_train + spec.n_test != dataset.len() {
        return Err(CoreError::SizeMismatch(format!(
            "n_train {} + n_test {} != dataset size {}",
            spec.n_train,
            spec.n_test,
            dataset.len()
        )));
    }
    if spec.n_train == 0 || spec.n_test == 0 {
        return Err(CoreError::SizeMismatch(
            "both train and test must be non-empty".into(),
        ));
    }
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);
    let (mut train_idx, mut test_idx): (Vec<usize>, Vec<usize>) = (
        indices[..spec.n_train].to_vec(),
        indices[spec.n_train..].to_vec(),
    );
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| {
        Dataset {
            rows: idx.iter().map(|&i| dataset.rows[i].clone()).collect(),
        }
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// Dataset CSV: `trace_id,f00,...,f39,temperature_c,light_lux`.
pub fn write_dataset_csv<W: Write>(mut w: W, dataset: &Dataset) -> Result<()> {
    let dim = dataset.feature_dim();
    let mut header = String::from("trace_id");
    for k in 0..dim {
        header.push_str(&format!(",f{k:02}"));
    }
    header.push_str(",temperature_c,light_lux");
    writeln!(w, "{header}")?;
    for (fv, env) in dataset.rows() {
        let mut line = fv.trace_id.clone();
        for v in &fv.segment_means_db {
            line.push_str(&format!(",{v:.13e}"));
        }
        line.push_str(&format!(
            ",{:.13e},{:.13e}",
            env.temperature, env.light_intensity
        ));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Parse a dataset CSV written by [`write_dataset_csv`].
pub fn read_dataset_csv<R: BufRead>(r: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::EmptyTrace("dataset CSV has no header".into()))??;
    let n_cols = header.split(',').count();
    if n_cols < 4 {
        return Err(CoreError::SizeMismatch(format!(
            "dataset CSV header has {n_cols} columns"
        )));
    }
    let dim = n_cols - 3;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_cols {
            return Err(CoreError::SizeMismatch(format!(
                "row {} has {} fields, expected {n_cols}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| {
                CoreError::DomainError(format!("bad number '{s}' on row {}: {e}", lineno + 2))
            })
        };
        let means = fields[1..=dim]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>>>()?;
        let env = SensorEnvironment {
            temperature: parse(fields[dim + 1])?,
            light_intensity: parse(fields[dim + 2])?,
        };
        rows.push((FeatureVector::from_means(fields[0].to_string(), means), env));
    }
    Dataset::new(rows)
}
