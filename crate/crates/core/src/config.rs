//! Run configuration files.
//!
//! A run is described by one JSON document. Every block except `seed` has
//! defaults, unknown keys are rejected, and [`RunConfig::validate`] checks
//! ranges before any computation, naming the offending field.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "output_dir": "runs/fm6",
//!   "model": { "family": "fm", "n": 6, "grid": { "hx": { "uniform": { "lo": 0, "hi": 2, "count": 8 } },
//!                                             "hz": { "uniform": { "lo": 0, "hi": 2, "count": 8 } } } },
//!   "protocol": { "p": 3 },
//!   "experiment": { "kind": "sweep" }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    ConstraintMode, DistributionSpec, GridSpec, LandscapeSpec, PointSpec, SampleExportSpec, SweepSpec,
    DEFAULT_LANDSCAPE_POINTS,
};
use crate::models::{Family, Representative, DEFAULT_DEGENERACY_TOL, DENSE_CAP};
use crate::optimize::{BasinHopConfig, TimeConstraint};
use crate::qaoa::{CostKind, InitialState, ProtocolName};
use crate::spectra::DfConfig;

/// Default grid resolution per axis.
pub const DEFAULT_GRID_COUNT: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub family: Family,
    pub n: usize,
    pub hx: f64,
    pub hz: f64,
    /// Sweep grid; the family's default region when absent.
    pub grid: Option<GridSpec>,
    pub degeneracy_tol: f64,
    /// Bipartition for spectra; ⌊N/2⌋ when absent.
    pub cut: Option<usize>,
    pub representative: Representative,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            family: Family::Fm,
            n: 6,
            hx: 1.0,
            hz: 0.0,
            grid: None,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            cut: None,
            representative: Representative::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolBlock {
    /// The family's natural protocol when absent.
    pub name: Option<ProtocolName>,
    pub p: usize,
    /// The protocol's usual initial state when absent.
    pub initial: Option<InitialState>,
}

impl Default for ProtocolBlock {
    fn default() -> Self {
        Self {
            name: None,
            p: 3,
            initial: None,
        }
    }
}

/// What to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Sweep {
        #[serde(default = "two")]
        refine_rounds: usize,
        /// Snap Z-field seed angles to {0, π/2} before each depth.
        #[serde(default)]
        snap_z_seeds: bool,
    },
    Qaoa {},
    Df {
        /// Spectrum file; the model's ground state when absent.
        #[serde(default)]
        spectrum: Option<PathBuf>,
        /// Free modes; the cut size (or ⌈log₂ len⌉ for files) when absent.
        #[serde(default)]
        modes: Option<usize>,
    },
    Landscape {
        #[serde(default = "default_points")]
        points: Vec<(f64, f64)>,
        #[serde(default = "default_t_values")]
        t_values: Vec<f64>,
        #[serde(default)]
        mode: ConstraintMode,
    },
    Distribution {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    Correlate {
        /// A `records.jsonl` ledger.
        records: PathBuf,
    },
    Histogram {
        records: PathBuf,
        /// Zero-based generator index within a layer.
        #[serde(default = "two")]
        generator: usize,
        #[serde(default = "default_angle_bins")]
        bins: usize,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    ExportSamples {
        #[serde(default = "default_export_count")]
        count: usize,
        /// Total-time budget; unconstrained when absent.
        #[serde(default)]
        t: Option<f64>,
        #[serde(default = "exactly")]
        mode: ConstraintMode,
    },
}

fn two() -> usize {
    2
}
fn default_points() -> Vec<(f64, f64)> {
    DEFAULT_LANDSCAPE_POINTS.to_vec()
}
fn default_t_values() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0, 8.0]
}
fn default_samples() -> usize {
    10_000
}
fn default_bins() -> usize {
    40
}
fn default_angle_bins() -> usize {
    36
}
fn default_delta() -> f64 {
    0.2
}
fn default_export_count() -> usize {
    500
}
fn exactly() -> ConstraintMode {
    ConstraintMode::Exactly
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sweep { .. } => "sweep",
            Experiment::Qaoa {} => "qaoa",
            Experiment::Df { .. } => "df",
            Experiment::Landscape { .. } => "landscape",
            Experiment::Distribution { .. } => "distribution",
            Experiment::Correlate { .. } => "correlate",
            Experiment::Histogram { .. } => "histogram",
            Experiment::ExportSamples { .. } => "export-samples",
        }
    }

    /// The experiment of `kind` with every field at its default. Kinds that
    /// need a records file get an empty path, which validation rejects.
    pub fn default_for(kind: &str) -> Result<Self> {
        let json = match kind {
            "correlate" => serde_json::json!({ "kind": kind, "records": "" }),
            "histogram" => serde_json::json!({ "kind": kind, "records": "" }),
            _ => serde_json::json!({ "kind": kind }),
        };
        serde_json::from_value(json).map_err(|e| Error::Config(format!("experiment.kind: {e}")))
    }
}

/// A complete run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub protocol: ProtocolBlock,
    #[serde(default = "infidelity")]
    pub cost: CostKind,
    #[serde(default)]
    pub optimizer: BasinHopConfig,
    #[serde(default)]
    pub df: DfConfig,
    pub experiment: Experiment,
}

fn infidelity() -> CostKind {
    CostKind::Infidelity
}

impl RunConfig {
    /// Defaults for `experiment`, with `seed`.
    pub fn new(seed: u64, experiment: Experiment) -> Self {
        Self {
            seed,
            output_dir: None,
            model: ModelBlock::default(),
            protocol: ProtocolBlock::default(),
            cost: CostKind::Infidelity,
            optimizer: BasinHopConfig::default(),
            df: DfConfig::default(),
            experiment,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. A missing or unreadable file is a configuration
    /// error, not an I/O failure of the run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fills every optional field with the value that will be used, so the
    /// result reproduces the run on its own.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        let name = c.protocol_name();
        c.protocol.name = Some(name);
        c.protocol.initial = Some(c.protocol.initial.unwrap_or_else(|| name.default_initial(c.model.n)));
        c.model.cut = Some(c.model.cut.unwrap_or(c.model.n / 2));
        if c.model.grid.is_none() {
            c.model.grid = Some(GridSpec::default_for(c.model.family, DEFAULT_GRID_COUNT));
        }
        c
    }

    fn protocol_name(&self) -> ProtocolName {
        self.protocol.name.unwrap_or(match self.model.family {
            Family::Threespin => ProtocolName::Threespin3,
            _ => ProtocolName::Ising3,
        })
    }

    /// Range checks; each error names the field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        let m = &self.model;
        if m.family == Family::Custom {
            return bad("model.family", "custom models cannot be described in a config file".into());
        }
        if m.n < m.family.min_size() {
            return bad("model.n", format!("must be at least {} for {} (got {})", m.family.min_size(), m.family.name(), m.n));
        }
        if m.n > DENSE_CAP {
            return bad("model.n", format!("must be at most {DENSE_CAP} (got {})", m.n));
        }
        if !m.hx.is_finite() {
            return bad("model.hx", "must be finite".into());
        }
        if !m.hz.is_finite() {
            return bad("model.hz", "must be finite".into());
        }
        if !(m.degeneracy_tol > 0.0) {
            return bad("model.degeneracy_tol", "must be positive".into());
        }
        if let Some(cut) = m.cut {
            if cut == 0 || cut >= m.n {
                return bad("model.cut", format!("must be in 1..{} (got {cut})", m.n));
            }
        }
        if let Some(grid) = &m.grid {
            grid.validate()?;
        }
        if self.protocol.p == 0 {
            return bad("protocol.p", "must be at least 1 (got 0)".into());
        }
        if let Some(InitialState::XxyySector(s)) = self.protocol.initial {
            if s.unsigned_abs() as usize > m.n || (m.n as i32 - s) % 2 != 0 {
                return bad("protocol.initial", format!("sector {s} is empty for {} spins", m.n));
            }
        }
        self.optimizer.validate()?;
        self.df.basin.validate().map_err(|e| Error::Config(e.to_string().replace("optimizer.", "df.basin.")))?;
        if !(self.df.random_range > 0.0) {
            return bad("df.random_range", "must be positive".into());
        }
        match &self.experiment {
            Experiment::Sweep { .. } | Experiment::Qaoa {} => {}
            Experiment::Df { modes, .. } => {
                if let Some(k) = modes {
                    if *k == 0 || *k > 20 {
                        return bad("experiment.modes", format!("must be in 1..=20 (got {k})"));
                    }
                }
            }
            Experiment::Landscape { points, t_values, .. } => {
                if points.is_empty() {
                    return bad("experiment.points", "needs at least one point".into());
                }
                if t_values.is_empty() || t_values.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
                    return bad("experiment.t_values", "needs positive finite values".into());
                }
                if t_values.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("experiment.t_values", "must be strictly ascending".into());
                }
            }
            Experiment::Distribution { samples, bins } => {
                if *samples < 100 {
                    return bad("experiment.samples", format!("must be at least 100 (got {samples})"));
                }
                if *bins == 0 {
                    return bad("experiment.bins", "must be at least 1".into());
                }
            }
            Experiment::Correlate { records } => {
                if records.as_os_str().is_empty() {
                    return bad("experiment.records", "path required".into());
                }
            }
            Experiment::Histogram { records, bins, delta, .. } => {
                if records.as_os_str().is_empty() {
                    return bad("experiment.records", "path required".into());
                }
                if *bins == 0 {
                    return bad("experiment.bins", "must be at least 1".into());
                }
                if !(*delta >= 0.0) {
                    return bad("experiment.delta", "must be non-negative".into());
                }
            }
            Experiment::ExportSamples { t, .. } => {
                if let Some(t) = t {
                    if !(*t > 0.0) || !t.is_finite() {
                        return bad("experiment.t", format!("must be positive (got {t})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn point(&self) -> PointSpec {
        let r = self.resolved();
        PointSpec {
            family: r.model.family,
            n: r.model.n,
            hx: r.model.hx,
            hz: r.model.hz,
            p: r.protocol.p,
            protocol: r.protocol.name.expect("resolved"),
            initial: r.protocol.initial.expect("resolved"),
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let r = self.resolved();
        SweepSpec {
            family: r.model.family,
            n: r.model.n,
            p: r.protocol.p,
            grid: r.model.grid.clone().expect("resolved"),
            protocol: r.protocol.name.expect("resolved"),
            initial: r.protocol.initial.expect("resolved"),
            cost: r.cost,
            optimizer: r.optimizer.clone(),
            df: r.df.clone(),
            degeneracy_tol: r.model.degeneracy_tol,
            representative: r.model.representative,
            cut: r.model.cut.expect("resolved"),
            refine_rounds: match r.experiment {
                Experiment::Sweep { refine_rounds, .. } => refine_rounds,
                _ => 2,
            },
            snap_z_seeds: matches!(r.experiment, Experiment::Sweep { snap_z_seeds: true, .. }),
            seed: r.seed,
        }
    }

    pub fn landscape_spec(&self) -> Option<LandscapeSpec> {
        match &self.experiment {
            Experiment::Landscape { points, t_values, mode } => Some(LandscapeSpec {
                point: self.point(),
                points: points.clone(),
                t_values: t_values.clone(),
                mode: *mode,
                optimizer: self.optimizer.clone(),
                seed: self.seed,
            }),
            _ => None,
        }
    }

    pub fn distribution_spec(&self) -> Option<DistributionSpec> {
        match &self.experiment {
            Experiment::Distribution { samples, bins } => Some(DistributionSpec {
                point: self.point(),
                samples: *samples,
                bins: *bins,
                optimizer: self.optimizer.clone(),
                seed: self.seed,
            }),
            _ => None,
        }
    }

    pub fn export_spec(&self) -> Option<SampleExportSpec> {
        match &self.experiment {
            Experiment::ExportSamples { count, t, mode } => Some(SampleExportSpec {
                point: self.point(),
                constraint: t.map(|t| match mode {
                    ConstraintMode::AtMost => TimeConstraint::AtMost(t),
                    ConstraintMode::Exactly => TimeConstraint::Exactly(t),
                }),
                count: *count,
                optimizer: self.optimizer.clone(),
                seed: self.seed,
            }),
            _ => None,
        }
    }

    /// Pretty JSON of the resolved configuration.
    pub fn to_pretty_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.resolved())?)
    }

    /// Writes `effective_config.json` into `dir`.
    pub fn write_effective(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("effective_config.json");
        std::fs::write(&path, self.to_pretty_json()? + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
