//! Response-time summary statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
    /// Set for a single sample, where the deviation is 0 by convention.
    pub degenerate: bool,
}

/// Mean and sample standard deviation.
///
/// Values are shifted by the first sample before accumulating, which keeps
/// the variance accurate for large, tightly clustered timings and makes it
/// exactly 0 for a constant sequence.
pub fn stats(samples: &[f64]) -> Result<Summary> {
    let (&shift, _) = samples
        .split_first()
        .ok_or_else(|| Error::invalid("statistics of an empty sample"))?;
    let n = samples.len() as f64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for &x in samples {
        let d = x - shift;
        sum += d;
        sum_sq += d * d;
    }
    let mean = shift + sum / n;
    if samples.len() == 1 {
        return Ok(Summary { mean, stddev: 0.0, degenerate: true });
    }
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    Ok(Summary { mean, stddev: var.sqrt(), degenerate: false })
}
