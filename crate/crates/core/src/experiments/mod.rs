//! Phase-diagram sweeps, correlation analysis and landscape probes, with
//! their persisted artifacts.

mod analysis;
mod landscape;
mod persist;
mod svg;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Family;
use crate::qaoa::{CostKind, ProtocolName};

pub use analysis::{angle_histogram, correlate, correlate_values, pearson, AngleHistogram, Correlation, LOG_FLOOR};
pub use landscape::{
    epsilon_distribution, export_samples_for_embedding, landscape_scan, ConstraintMode, DistributionResult, DistributionSample,
    DistributionSpec, LandscapeRow, LandscapeSpec, PointSpec, SampleExportSpec, DEFAULT_LANDSCAPE_POINTS,
};
pub use persist::{read_records, write_histogram_csv, write_summary_csv, LedgerEntry, PointFailure};
pub use svg::{heatmap_svg, HeatmapQuantity};
pub use sweep::{sweep, SweepOutcome, SweepSpec};

/// One optimized grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub hx: f64,
    pub hz: f64,
    pub protocol: ProtocolName,
    pub cost_kind: CostKind,
    pub best_cost: f64,
    /// `p` rows of `M` reduced angles.
    pub schedule: Vec<Vec<f64>>,
    pub df: f64,
    pub vne: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub degeneracy: usize,
    /// Cost after snapping the Z-field angles to the nearest multiple of π/2.
    /// Absent for protocols without a Z generator.
    pub snapped_cost: Option<f64>,
    pub seed: u64,
    pub wall_time: f64,
    /// 0 for the first pass, then one per refinement round.
    pub round: usize,
    /// Row-major grid index (`hz` rows, `hx` columns).
    pub index: usize,
}

impl SweepRecord {
    /// Angles of generator `j`, one per layer.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.schedule.iter().filter_map(|row| row.get(j).copied()).collect()
    }

    /// The record with run-dependent timing removed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

/// Which end of a uniform axis is excluded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpenEnd {
    /// (lo, hi]
    #[default]
    Low,
    /// [lo, hi)
    High,
    /// [lo, hi]
    None,
}

/// Values along one field axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum AxisSpec {
    Uniform {
        lo: f64,
        hi: f64,
        count: usize,
        #[serde(default)]
        open: OpenEnd,
    },
    Values(Vec<f64>),
}

impl AxisSpec {
    pub fn uniform(lo: f64, hi: f64, count: usize, open: OpenEnd) -> Self {
        AxisSpec::Uniform { lo, hi, count, open }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::Values(v) => v.clone(),
            &AxisSpec::Uniform { lo, hi, count, open } => {
                let span = hi - lo;
                match open {
                    OpenEnd::Low => (1..=count).map(|k| lo + span * k as f64 / count as f64).collect(),
                    OpenEnd::High => (0..count).map(|k| lo + span * k as f64 / count as f64).collect(),
                    OpenEnd::None => (0..count)
                        .map(|k| lo + span * k as f64 / (count - 1).max(1) as f64)
                        .collect(),
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AxisSpec::Values(v) => v.len(),
            AxisSpec::Uniform { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, field: &str) -> Result<()> {
        match self {
            AxisSpec::Values(v) => {
                if v.is_empty() {
                    return Err(Error::Config(format!("{field}: needs at least one value")));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config(format!("{field}: values must be finite")));
                }
            }
            AxisSpec::Uniform { lo, hi, count, .. } => {
                if *count < 2 {
                    return Err(Error::Config(format!("{field}.count: must be at least 2 (got {count})")));
                }
                if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                    return Err(Error::Config(format!("{field}: need finite lo < hi (got {lo}, {hi})")));
                }
            }
        }
        Ok(())
    }
}

/// Rectangular (h_x, h_z) grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub hx: AxisSpec,
    pub hz: AxisSpec,
}

impl GridSpec {
    /// (0,2]² for the Ising families, (0,2]×[−3,0) for the three-spin chain.
    pub fn default_for(family: Family, count: usize) -> Self {
        let hx = AxisSpec::uniform(0.0, 2.0, count, OpenEnd::Low);
        let hz = match family {
            Family::Threespin => AxisSpec::uniform(-3.0, 0.0, count, OpenEnd::High),
            _ => AxisSpec::uniform(0.0, 2.0, count, OpenEnd::Low),
        };
        Self { hx, hz }
    }

    pub fn single(hx: f64, hz: f64) -> Self {
        Self {
            hx: AxisSpec::Values(vec![hx]),
            hz: AxisSpec::Values(vec![hz]),
        }
    }

    pub fn rows(&self) -> usize {
        self.hz.len()
    }

    pub fn cols(&self) -> usize {
        self.hx.len()
    }

    /// Row-major list of (h_x, h_z).
    pub fn points(&self) -> Vec<(f64, f64)> {
        let xs = self.hx.values();
        self.hz
            .values()
            .into_iter()
            .flat_map(|z| xs.iter().map(move |&x| (x, z)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.hx.validate("model.grid.hx")?;
        self.hz.validate("model.grid.hz")
    }
}
