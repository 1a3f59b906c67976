//! Observation vectors and the summary statistics everything else is built on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered collection of real observations from one population.
///
/// Invariants enforced at construction: at least two values, all finite,
/// and a strictly positive sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    label: String,
}

impl Sample {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if values.len() < 2 {
            return Err(Error::DegenerateSample {
                label,
                reason: format!("need at least 2 observations, got {}", values.len()),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::DegenerateSample {
                label,
                reason: format!("non-finite observation {v}"),
            });
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if values.iter().all(|v| *v == mean) {
            return Err(Error::DegenerateSample {
                label,
                reason: "zero sample variance".to_string(),
            });
        }
        Ok(Self { values, label })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Unbiased sample variance (divisor n-1).
    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }

    pub fn median(&self) -> f64 {
        median(&self.values)
    }

    /// Returns a copy with `f` applied to every observation.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Sample::new(self.values.iter().map(|v| f(*v)).collect(), self.label.clone())
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    if n.is_multiple_of(2) {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    }
}

/// Median of |deviations from the respective medians| over both samples pooled,
/// scaled by 1.4826 for consistency at the normal model.
pub(crate) fn pooled_mad_scale(x: &[f64], y: &[f64]) -> f64 {
    let mx = median(x);
    let my = median(y);
    let dev: Vec<f64> = x
        .iter()
        .map(|v| (v - mx).abs())
        .chain(y.iter().map(|v| (v - my).abs()))
        .collect();
    1.4826 * median(&dev)
}
