use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::persist::{self, LedgerEntry, LedgerWriter, PointFailure};
use super::svg::{heatmap_svg, HeatmapQuantity};
use super::{GridSpec, SweepRecord};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::models::{build_model, diagonalize, Family, Representative, DEFAULT_DEGENERACY_TOL};
use crate::optimize::{basinhop, refine_point, seed_from_previous_p, BasinHopConfig, OptResult, ResultGrid};
use crate::qaoa::{CostEvaluator, CostKind, CostTarget, InitialState, Protocol, ProtocolName};
use crate::simulator::{GeneratorKind, StateVector};
use crate::spectra::{entanglement_spectrum, interaction_distance, vne, DfConfig};

/// Every angle of the depth-1 starting point.
const START_ANGLE: f64 = 0.1;

/// Everything that determines a sweep's records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub grid: GridSpec,
    pub protocol: ProtocolName,
    pub initial: InitialState,
    pub cost: CostKind,
    pub optimizer: BasinHopConfig,
    pub df: DfConfig,
    pub degeneracy_tol: f64,
    pub representative: Representative,
    pub cut: usize,
    pub refine_rounds: usize,
    /// Snap Z-field seed angles to the nearest of {0, π/2} before each depth.
    #[serde(default)]
    pub snap_z_seeds: bool,
    pub seed: u64,
}

impl SweepSpec {
    /// Defaults: the family's natural protocol, infidelity cost, half-chain
    /// cut and two refinement rounds.
    pub fn new(family: Family, n: usize, p: usize, grid: GridSpec) -> Self {
        let protocol = match family {
            Family::Threespin => ProtocolName::Threespin3,
            _ => ProtocolName::Ising3,
        };
        Self {
            family,
            n,
            p,
            grid,
            protocol,
            initial: protocol.default_initial(n),
            cost: CostKind::Infidelity,
            optimizer: BasinHopConfig::default(),
            df: DfConfig::default(),
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            representative: Representative::default(),
            cut: n / 2,
            refine_rounds: 2,
            snap_z_seeds: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("protocol.p: must be at least 1 (got 0)".into()));
        }
        if self.family == Family::Custom {
            return Err(Error::Config("model.family: sweeps need a named family".into()));
        }
        if self.cut == 0 || self.cut >= self.n {
            return Err(Error::InvalidCut { cut: self.cut, n: self.n });
        }
        self.grid.validate()?;
        self.optimizer.validate()?;
        self.df.basin.validate()
    }

    fn point_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, &[index as u64])
    }
}

/// Result of a sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    /// Final record per grid point, ordered by index.
    pub records: Vec<SweepRecord>,
    /// Every record of every round, ordered by (round, index).
    pub history: Vec<SweepRecord>,
    pub failures: Vec<PointFailure>,
}

struct PointContext {
    evaluator: CostEvaluator,
    e_min: f64,
    e_max: f64,
    degeneracy: usize,
    ground: StateVector,
}

fn prepare(spec: &SweepSpec, hx: f64, hz: f64) -> Result<PointContext> {
    let model = build_model(spec.family, spec.n, hx, hz)?;
    let diag = diagonalize(&model, spec.degeneracy_tol)?;
    let target = CostTarget::from_diagonalization(&diag, spec.representative, spec.cut)?;
    let protocol = Protocol::new(&spec.protocol.generators(), 1, spec.initial, spec.n)?;
    Ok(PointContext {
        evaluator: CostEvaluator::new(protocol, model, spec.cost, target)?,
        e_min: diag.ground.energy(),
        e_max: diag.e_max,
        degeneracy: diag.ground.degeneracy(),
        ground: diag.ground.representative(spec.representative),
    })
}

/// Z-field angles moved to their nearest multiple of π/2.
fn snap_z(kinds: &[GeneratorKind], angles: &[f64]) -> Option<Vec<f64>> {
    let j = kinds.iter().position(|&k| k == GeneratorKind::Z)?;
    let m = kinds.len();
    Some(
        angles
            .iter()
            .enumerate()
            .map(|(i, &a)| if i % m == j { (a / FRAC_PI_2).round() * FRAC_PI_2 } else { a })
            .collect(),
    )
}

fn snapped_cost(evaluator: &CostEvaluator, angles: &[f64]) -> Option<f64> {
    let snapped = snap_z(&evaluator.protocol().kinds(), angles)?;
    evaluator.cost_of(&snapped).ok()
}

fn rows(angles: &[f64], m: usize) -> Vec<Vec<f64>> {
    angles.chunks(m).map(|c| c.to_vec()).collect()
}

fn first_pass(spec: &SweepSpec, index: usize, hx: f64, hz: f64, ctx: &PointContext) -> Result<SweepRecord> {
    let start = Instant::now();
    let seed = spec.point_seed(index);
    let spectrum = entanglement_spectrum(&ctx.ground, spec.cut)?;
    let mut df_cfg = spec.df.clone();
    df_cfg.basin.seed = derive_seed(seed, &[u64::MAX]);
    let df = interaction_distance(&spectrum, spec.cut.min(spec.n - spec.cut), &df_cfg)?;

    let m = ctx.evaluator.protocol().m();
    let mut x = vec![START_ANGLE; m];
    let mut best = None;
    for depth in 1..=spec.p {
        let eval = ctx.evaluator.with_depth(depth)?;
        if spec.snap_z_seeds {
            if let Some(s) = snap_z(&eval.protocol().kinds(), &x) {
                x = s;
            }
        }
        let cfg = BasinHopConfig {
            seed: derive_seed(seed, &[depth as u64]),
            ..spec.optimizer.clone()
        };
        let run = basinhop(&eval, &x, &cfg)?;
        if depth < spec.p {
            x = seed_from_previous_p(&eval.schedule(&run.best_point)?, Some(eval.protocol())).into_vec();
        }
        best = Some((eval, run));
    }
    let (eval, run) = best.expect("p >= 1");
    Ok(SweepRecord {
        family: spec.family,
        n: spec.n,
        p: spec.p,
        hx,
        hz,
        protocol: spec.protocol,
        cost_kind: spec.cost,
        best_cost: run.best_cost,
        schedule: rows(&run.best_point, m),
        df: df.distance,
        vne: vne(&spectrum),
        e_min: ctx.e_min,
        e_max: ctx.e_max,
        degeneracy: ctx.degeneracy,
        snapped_cost: snapped_cost(&eval, &run.best_point),
        seed,
        wall_time: start.elapsed().as_secs_f64(),
        round: 0,
        index,
    })
}

fn as_opt(r: &SweepRecord) -> OptResult {
    OptResult {
        best_point: r.schedule.concat(),
        best_cost: r.best_cost,
        trace: Vec::new(),
        evaluations: 0,
        wall_time: r.wall_time,
    }
}

/// Phase-diagram sweep.
///
/// Per grid point: exact ground space, entanglement spectrum, D_F and VNE,
/// then depth-sequential basinhopping up to `spec.p`. Afterwards
/// `spec.refine_rounds` rounds re-optimize every point from its own and its
/// neighbors' optima. Rounds are separated by a full-grid barrier.
///
/// With `out_dir`, every record is appended to `records.jsonl` as soon as it
/// exists; rerunning against the same directory resumes, skipping finished
/// (round, point) pairs. At the end `summary.csv` and one heatmap per
/// quantity are written.
///
/// `progress` is called once per new record (from worker threads).
pub fn sweep(
    spec: &SweepSpec,
    out_dir: Option<&Path>,
    progress: Option<&(dyn Fn(&SweepRecord) + Sync)>,
) -> Result<SweepOutcome> {
    spec.validate()?;
    let points = spec.grid.points();

    let mut previous: Vec<SweepRecord> = Vec::new();
    let mut failed: Vec<PointFailure> = Vec::new();
    let writer = match out_dir {
        Some(dir) => {
            persist::ensure_dir(dir)?;
            let path = dir.join("records.jsonl");
            let keep = if path.exists() {
                let (entries, keep) = persist::read_ledger(&path)?;
                let mut entries = entries.into_iter();
                match entries.next() {
                    Some(LedgerEntry::Header(h)) if *h == *spec => {}
                    Some(LedgerEntry::Header(_)) => {
                        return Err(Error::Config(format!(
                            "{} was written by a different sweep configuration",
                            path.display()
                        )))
                    }
                    None => {}
                    Some(_) => return Err(Error::Parse(format!("{}: missing header line", path.display()))),
                }
                for e in entries {
                    match e {
                        LedgerEntry::Record(r) => previous.push(*r),
                        LedgerEntry::Failure(f) => failed.push(f),
                        LedgerEntry::Header(_) => {}
                    }
                }
                keep
            } else {
                0
            };
            let w = LedgerWriter::open(&path, keep)?;
            if keep == 0 {
                w.sender()
                    .send(LedgerEntry::Header(Box::new(spec.clone())))
                    .map_err(|_| Error::Numeric("ledger writer stopped".into()))?;
            }
            Some(w)
        }
        None => None,
    };
    let sender = writer.as_ref().map(|w| w.sender());
    let emit = |entry: LedgerEntry| {
        if let Some(tx) = &sender {
            // a closed channel surfaces as an error from `finish`
            let _ = tx.send(entry);
        }
    };

    let contexts: Vec<Result<PointContext>> =
        points.par_iter().map(|&(hx, hz)| prepare(spec, hx, hz)).collect();

    let done: HashSet<(usize, usize)> = previous.iter().map(|r| (r.round, r.index)).collect();
    let failed_at: HashSet<usize> = failed.iter().map(|f| f.index).collect();
    let mut history = previous;
    let mut failures = failed;

    // first pass
    let fresh: Vec<std::result::Result<SweepRecord, PointFailure>> = points
        .par_iter()
        .enumerate()
        .filter(|(index, _)| !done.contains(&(0, *index)) && !failed_at.contains(index))
        .map(|(index, &(hx, hz))| {
            let outcome = contexts[index]
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|ctx| first_pass(spec, index, hx, hz, ctx).map_err(|e| e.to_string()));
            match outcome {
                Ok(record) => {
                    if let Some(cb) = progress {
                        cb(&record);
                    }
                    emit(LedgerEntry::Record(Box::new(record.clone())));
                    Ok(record)
                }
                Err(error) => {
                    let f = PointFailure { index, round: 0, hx, hz, error };
                    emit(LedgerEntry::Failure(f.clone()));
                    Err(f)
                }
            }
        })
        .collect();
    for r in fresh {
        match r {
            Ok(record) => history.push(record),
            Err(f) => failures.push(f),
        }
    }

    for round in 1..=spec.refine_rounds {
        let last = persist::latest_records(history.iter().filter(|r| r.round < round));
        let mut cells: Vec<Option<OptResult>> = vec![None; points.len()];
        let mut by_index: Vec<Option<&SweepRecord>> = vec![None; points.len()];
        for r in &last {
            cells[r.index] = Some(as_opt(r));
            by_index[r.index] = Some(r);
        }
        let grid = ResultGrid::new(spec.grid.rows(), spec.grid.cols(), cells)?;
        let factory = |index: usize| -> Option<CostEvaluator> {
            contexts[index].as_ref().ok().and_then(|ctx| ctx.evaluator.with_depth(spec.p).ok())
        };
        let cfg = BasinHopConfig {
            seed: spec.seed,
            ..spec.optimizer.clone()
        };
        let refined: Vec<SweepRecord> = (0..points.len())
            .into_par_iter()
            .filter(|index| !done.contains(&(round, *index)))
            .filter_map(|index| {
                let prev = by_index[index]?;
                let start = Instant::now();
                let best = refine_point(&grid, index, &factory, &cfg, round as u64)?;
                let eval = factory(index)?;
                let record = SweepRecord {
                    best_cost: best.best_cost,
                    schedule: rows(&best.best_point, prev.schedule.first().map_or(1, |r| r.len())),
                    snapped_cost: snapped_cost(&eval, &best.best_point),
                    wall_time: prev.wall_time + start.elapsed().as_secs_f64(),
                    round,
                    ..prev.clone()
                };
                if let Some(cb) = progress {
                    cb(&record);
                }
                emit(LedgerEntry::Record(Box::new(record.clone())));
                Some(record)
            })
            .collect();
        history.extend(refined);
    }

    drop(sender);
    if let Some(w) = writer {
        w.finish()?;
    }
    history.sort_by_key(|r| (r.round, r.index));
    failures.sort_by_key(|f| (f.round, f.index));
    let records = persist::latest_records(history.iter());

    if let Some(dir) = out_dir {
        persist::write_summary_csv(&dir.join("summary.csv"), &records)?;
        for q in [HeatmapQuantity::Cost, HeatmapQuantity::Df, HeatmapQuantity::Vne] {
            let svg = heatmap_svg(&records, &spec.grid, spec.family, q);
            persist::write_text(&dir.join(format!("heatmap_{}.svg", q.name())), &svg)?;
        }
    }
    Ok(SweepOutcome {
        records,
        history,
        failures,
    })
}
