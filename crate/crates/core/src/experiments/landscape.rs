use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::persist;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::models::{build_model, diagonalize, Family, Representative, DEFAULT_DEGENERACY_TOL};
use crate::optimize::{basinhop, constrained_basinhop, BasinHopConfig, TimeConstraint};
use crate::qaoa::{CostEvaluator, CostKind, CostTarget, InitialState, Protocol, ProtocolName};

/// The five phase-diagram points probed by default.
pub const DEFAULT_LANDSCAPE_POINTS: [(f64, f64); 5] = [(0.1, 0.1), (0.1, 2.0), (1.0, 1.0), (2.0, 0.1), (2.0, 2.0)];

/// ε below this is treated as this for logarithms.
const EPS_FLOOR: f64 = 1e-16;

/// A model point together with the protocol used on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub family: Family,
    pub n: usize,
    pub hx: f64,
    pub hz: f64,
    pub p: usize,
    pub protocol: ProtocolName,
    pub initial: InitialState,
}

impl PointSpec {
    pub fn new(family: Family, n: usize, hx: f64, hz: f64, p: usize) -> Self {
        let protocol = match family {
            Family::Threespin => ProtocolName::Threespin3,
            _ => ProtocolName::Ising3,
        };
        Self {
            family,
            n,
            hx,
            hz,
            p,
            protocol,
            initial: protocol.default_initial(n),
        }
    }

    pub fn at(&self, hx: f64, hz: f64) -> Self {
        Self { hx, hz, ..self.clone() }
    }

    /// Relative-energy evaluator at this point.
    pub fn evaluator(&self) -> Result<CostEvaluator> {
        if self.p == 0 {
            return Err(Error::Config("protocol.p: must be at least 1 (got 0)".into()));
        }
        let model = build_model(self.family, self.n, self.hx, self.hz)?;
        let diag = diagonalize(&model, DEFAULT_DEGENERACY_TOL)?;
        let target = CostTarget::from_diagonalization(&diag, Representative::default(), self.n / 2)?;
        let protocol = Protocol::new(&self.protocol.generators(), self.p, self.initial, self.n)?;
        CostEvaluator::new(protocol, model, CostKind::Energy, target)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub point: PointSpec,
    pub samples: usize,
    pub bins: usize,
    /// Local-minimizer settings; hopping parameters are ignored.
    pub optimizer: BasinHopConfig,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSample {
    pub start: Vec<f64>,
    pub angles: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionResult {
    pub samples: Vec<DistributionSample>,
    /// ε of the unoptimized all-zero schedule, i.e. of the initial state.
    pub zero_start: f64,
    /// Bin edges in log₁₀ ε.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub median_log10: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One local minimization of the relative energy per uniformly random start
/// in [0, π)^{pM}, without hopping.
///
/// With `out_dir`, writes `distribution_samples.csv` and `histogram.csv`.
pub fn epsilon_distribution(spec: &DistributionSpec, out_dir: Option<&Path>) -> Result<DistributionResult> {
    if spec.samples < 100 {
        return Err(Error::Config(format!(
            "experiment.samples: at least 100 required (got {})",
            spec.samples
        )));
    }
    if spec.bins == 0 {
        return Err(Error::Config("experiment.bins: must be at least 1".into()));
    }
    let eval = spec.point.evaluator()?;
    let len = eval.protocol().len();
    let local = BasinHopConfig {
        hops: 0,
        ..spec.optimizer.clone()
    };
    let samples: Vec<DistributionSample> = (0..spec.samples)
        .into_par_iter()
        .map(|k| -> Result<DistributionSample> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[k as u64]));
            let start: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..PI)).collect();
            let run = basinhop(&eval, &start, &local)?;
            Ok(DistributionSample {
                start,
                angles: run.best_point,
                epsilon: run.best_cost,
            })
        })
        .collect::<Result<_>>()?;

    let logs: Vec<f64> = samples.iter().map(|s| s.epsilon.max(EPS_FLOOR).log10()).collect();
    let (lo, hi) = (EPS_FLOOR.log10(), 0.0);
    let edges: Vec<f64> = (0..=spec.bins).map(|k| lo + (hi - lo) * k as f64 / spec.bins as f64).collect();
    let mut counts = vec![0usize; spec.bins];
    for &l in &logs {
        let k = (((l - lo) / (hi - lo)) * spec.bins as f64).floor().clamp(0.0, (spec.bins - 1) as f64) as usize;
        counts[k] += 1;
    }
    let result = DistributionResult {
        zero_start: eval.cost_of(&vec![0.0; len])?,
        median_log10: median(logs),
        samples,
        edges,
        counts,
    };

    if let Some(dir) = out_dir {
        persist::ensure_dir(dir)?;
        let mut text = String::from("sample,epsilon,start,angles\n");
        let join = |v: &[f64]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(text, "zero,{},{},{}", result.zero_start, join(&vec![0.0; len]), join(&vec![0.0; len]));
        for (k, s) in result.samples.iter().enumerate() {
            let _ = writeln!(text, "{k},{},{},{}", s.epsilon, join(&s.start), join(&s.angles));
        }
        persist::write_text(&dir.join("distribution_samples.csv"), &text)?;
        persist::write_histogram_csv(&dir.join("histogram.csv"), &result.edges, &result.counts)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    /// Σθ ≤ T
    #[default]
    #[serde(alias = "le")]
    AtMost,
    /// Σθ = T
    #[serde(alias = "eq")]
    Exactly,
}

impl ConstraintMode {
    pub fn with(self, t: f64) -> TimeConstraint {
        match self {
            ConstraintMode::AtMost => TimeConstraint::AtMost(t),
            ConstraintMode::Exactly => TimeConstraint::Exactly(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSpec {
    /// Template; `hx`, `hz` are replaced by each entry of `points`.
    pub point: PointSpec,
    pub points: Vec<(f64, f64)>,
    pub t_values: Vec<f64>,
    pub mode: ConstraintMode,
    pub optimizer: BasinHopConfig,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub hx: f64,
    pub hz: f64,
    pub t: f64,
    pub mode: ConstraintMode,
    pub epsilon: f64,
    pub angles: Vec<f64>,
}

/// Best relative energy as a function of the total-time budget.
///
/// Every budget is optimized from the evenly spread schedule. In `AtMost`
/// mode it is also optimized from the previous budget's optimum, which is
/// still feasible, and the previous optimum itself is kept if nothing beats
/// it; that curve is therefore non-increasing by construction.
///
/// With `out_dir`, writes `landscape.csv`.
pub fn landscape_scan(spec: &LandscapeSpec, out_dir: Option<&Path>) -> Result<Vec<LandscapeRow>> {
    if spec.t_values.is_empty() {
        return Err(Error::Config("experiment.t_values: needs at least one value".into()));
    }
    if spec.t_values.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::Config("experiment.t_values: must be positive and finite".into()));
    }
    if spec.t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("experiment.t_values: must be strictly ascending".into()));
    }
    let per_point: Vec<Vec<LandscapeRow>> = spec
        .points
        .par_iter()
        .enumerate()
        .map(|(pi, &(hx, hz))| -> Result<Vec<LandscapeRow>> {
            let eval = spec.point.at(hx, hz).evaluator()?;
            let len = eval.protocol().len();
            let mut rows: Vec<LandscapeRow> = Vec::with_capacity(spec.t_values.len());
            for (ti, &t) in spec.t_values.iter().enumerate() {
                let constraint = spec.mode.with(t);
                let cfg = spec.optimizer.derived(&[spec.seed, pi as u64, ti as u64]);
                let fresh = vec![t / len as f64; len];
                let mut starts = vec![fresh];
                if let (ConstraintMode::AtMost, Some(prev)) = (spec.mode, rows.last()) {
                    starts.push(prev.angles.clone());
                }
                let mut best: Option<(f64, Vec<f64>)> = None;
                for (k, start) in starts.iter().enumerate() {
                    let run = constrained_basinhop(&eval, start, constraint, &cfg.derived(&[k as u64]))?;
                    if best.as_ref().is_none_or(|b| run.best_cost < b.0) {
                        best = Some((run.best_cost, run.best_point));
                    }
                }
                let (mut epsilon, mut angles) = best.expect("at least one start");
                if let (ConstraintMode::AtMost, Some(prev)) = (spec.mode, rows.last()) {
                    if prev.epsilon < epsilon {
                        epsilon = prev.epsilon;
                        angles = prev.angles.clone();
                    }
                }
                let row = LandscapeRow {
                    hx,
                    hz,
                    t,
                    mode: spec.mode,
                    epsilon,
                    angles,
                };
                rows.push(row);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<LandscapeRow> = per_point.into_iter().flatten().collect();

    if let Some(dir) = out_dir {
        persist::ensure_dir(dir)?;
        let mut text = String::from("hx,hz,mode,t,epsilon,total,angles\n");
        for r in &rows {
            let angles = r.angles.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
            let mode = match r.mode {
                ConstraintMode::AtMost => "at-most",
                ConstraintMode::Exactly => "exactly",
            };
            let total: f64 = r.angles.iter().sum();
            let _ = writeln!(text, "{},{},{mode},{},{},{total},{angles}", r.hx, r.hz, r.t, r.epsilon);
        }
        persist::write_text(&dir.join("landscape.csv"), &text)?;
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleExportSpec {
    pub point: PointSpec,
    /// `None` samples the unconstrained landscape.
    pub constraint: Option<TimeConstraint>,
    pub count: usize,
    pub optimizer: BasinHopConfig,
    pub seed: u64,
}

/// Writes `count` local minima (flattened angles and ε) as a tab-separated
/// table with a `#` metadata header, for embedding with external tools.
/// Unconstrained samples are reduced into the protocol's angle domains.
/// Returns the rows written.
pub fn export_samples_for_embedding(spec: &SampleExportSpec, path: &Path) -> Result<Vec<(Vec<f64>, f64)>> {
    let eval = spec.point.evaluator()?;
    let len = eval.protocol().len();
    let m = eval.protocol().m();
    let local = BasinHopConfig {
        hops: 0,
        ..spec.optimizer.clone()
    };
    let rows: Vec<(Vec<f64>, f64)> = (0..spec.count)
        .into_par_iter()
        .map(|k| -> Result<(Vec<f64>, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[k as u64]));
            match spec.constraint {
                Some(c) => {
                    let raw: Vec<f64> = (0..c.raw_len(len)).map(|_| rng.gen_range(0.0..1.0)).collect();
                    let start = c.map(&raw);
                    let run = constrained_basinhop(&eval, &start, c, &local)?;
                    Ok((run.best_point, run.best_cost))
                }
                None => {
                    let start: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..PI)).collect();
                    let run = basinhop(&eval, &start, &local)?;
                    Ok((run.best_point, run.best_cost))
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut text = String::new();
    let pt = &spec.point;
    let _ = writeln!(text, "# family: {}", pt.family.name());
    let _ = writeln!(text, "# n: {}", pt.n);
    let _ = writeln!(text, "# hx: {}", pt.hx);
    let _ = writeln!(text, "# hz: {}", pt.hz);
    let _ = writeln!(text, "# p: {}", pt.p);
    let _ = writeln!(text, "# protocol: {}", pt.protocol);
    let constraint = match spec.constraint {
        None => "none".to_string(),
        Some(TimeConstraint::AtMost(t)) => format!("at-most {t}"),
        Some(TimeConstraint::Exactly(t)) => format!("exactly {t}"),
    };
    let _ = writeln!(text, "# constraint: {constraint}");
    let _ = writeln!(text, "# count: {}", spec.count);
    let _ = writeln!(text, "# seed: {}", spec.seed);
    let mut header: Vec<String> = (0..len).map(|i| format!("theta_{}_{}", i / m + 1, i % m + 1)).collect();
    header.push("epsilon".into());
    let _ = writeln!(text, "{}", header.join("\t"));
    for (angles, eps) in &rows {
        let mut cols: Vec<String> = angles.iter().map(|a| a.to_string()).collect();
        cols.push(eps.to_string());
        let _ = writeln!(text, "{}", cols.join("\t"));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        persist::ensure_dir(dir)?;
    }
    persist::write_text(path, &text)?;
    Ok(rows)
}
