use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::error::{Error, Result};

/// Values are floored here before taking log₁₀.
pub const LOG_FLOOR: f64 = 1e-12;

/// Pearson coefficient, or `None` when either variable has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    /// r of log₁₀ max(·, 10⁻¹²) values; `None` if undefined.
    pub log_r: Option<f64>,
    /// r of the raw values; `None` if undefined.
    pub raw_r: Option<f64>,
    pub samples: usize,
}

/// Matched-point correlation of two series.
pub fn correlate_values(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::Config(format!("correlation needs at least 3 samples (got {})", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in correlation input".into()));
    }
    let lg = |v: &[f64]| v.iter().map(|a| a.max(LOG_FLOOR).log10()).collect::<Vec<_>>();
    Ok(Correlation {
        log_r: pearson(&lg(x), &lg(y)),
        raw_r: pearson(x, y),
        samples: x.len(),
    })
}

/// Correlation between D_F (x) and best cost (y) over records.
pub fn correlate(records: &[SweepRecord]) -> Result<Correlation> {
    let x: Vec<f64> = records.iter().map(|r| r.df).collect();
    let y: Vec<f64> = records.iter().map(|r| r.best_cost).collect();
    correlate_values(&x, &y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleHistogram {
    pub generator: usize,
    /// `bins + 1` edges over [0, π).
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub delta: f64,
    /// Share of angles within `delta` of 0, π/2 or π (mod π).
    pub near_fraction: f64,
    pub total: usize,
}

/// Distance from `a` to the nearest multiple of π/2.
fn off_multiple(a: f64) -> f64 {
    let r = a.rem_euclid(FRAC_PI_2);
    r.min(FRAC_PI_2 - r)
}

/// Histogram of every optimal angle of generator `generator` across records,
/// folded into [0, π).
pub fn angle_histogram(records: &[SweepRecord], generator: usize, bins: usize, delta: f64) -> Result<AngleHistogram> {
    if bins == 0 {
        return Err(Error::Config("histogram bins must be at least 1".into()));
    }
    if let Some(first) = records.first() {
        if let Some(r) = records.iter().find(|r| r.protocol != first.protocol) {
            return Err(Error::Config(format!(
                "records mix protocols {} and {}",
                first.protocol, r.protocol
            )));
        }
        let m = first.schedule.first().map_or(0, |row| row.len());
        if generator >= m {
            return Err(Error::Config(format!("generator index {generator} out of range for M={m}")));
        }
    }
    let angles: Vec<f64> = records.iter().flat_map(|r| r.column(generator)).map(|a| a.rem_euclid(PI)).collect();
    let edges: Vec<f64> = (0..=bins).map(|k| PI * k as f64 / bins as f64).collect();
    let mut counts = vec![0usize; bins];
    for &a in &angles {
        let k = ((a / PI * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let near = angles.iter().filter(|&&a| off_multiple(a) <= delta).count();
    Ok(AngleHistogram {
        generator,
        edges,
        counts,
        delta,
        near_fraction: if angles.is_empty() { 0.0 } else { near as f64 / angles.len() as f64 },
        total: angles.len(),
    })
}
