//! The `qaoalab` command-line frontend.
//!
//! Every subcommand takes an optional `--config` file plus flag overrides;
//! flags win. The resolved configuration is echoed to
//! `effective_config.json` whenever an output directory is in play.
//! Failures print a one-line JSON report on stderr and exit with 2
//! (configuration), 3 (numerics) or 4 (I/O).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{self, ConstraintMode};
use crate::models::{build_model, diagonalize, Family};
use crate::optimize::{basinhop, seed_from_previous_p, BasinHopConfig};
use crate::qaoa::{CostEvaluator, CostKind, CostTarget, Protocol, ProtocolName};
use crate::spectra::{entanglement_spectrum, interaction_distance, vne, ProbabilitySpectrum};

// stdout may be a closed pipe (`| head`); results are also on disk
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "QAOALAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qaoalab", version, about = "QAOA state preparation and interaction distance on Ising chains")]
pub struct Cli {
    /// Worker threads (default: QAOALAB_THREADS, else all cores; 0 means all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase-diagram sweep with refinement rounds (resumable).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        refine_rounds: Option<usize>,
        /// Snap Z-field seed angles to {0, π/2}.
        #[arg(long)]
        snap_z_seeds: bool,
    },
    /// Optimize one point, depth by depth up to p.
    Qaoa {
        #[command(flatten)]
        common: Common,
    },
    /// Interaction distance of a spectrum file or of the model's ground state.
    Df {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Best relative energy versus total-time budget.
    Landscape {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending budgets.
        #[arg(long, value_delimiter = ',')]
        t_values: Option<Vec<f64>>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<ConstraintMode>,
    },
    /// Relative energies of local minima from random starts.
    Distribution {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Pearson correlation of D_F and best cost in a records file.
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Histogram of optimal angles of one generator in a records file.
    Histogram {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        records: Option<PathBuf>,
        /// Zero-based generator index within a layer.
        #[arg(long)]
        generator: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Local minima as a table for external dimensionality reduction.
    ExportSamples {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<ConstraintMode>,
    },
    /// Check a config file and print it with every default filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Overrides shared by the experiment subcommands.
#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long = "N", alias = "n")]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub hx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hz: Option<f64>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_parser = parse_protocol)]
    pub protocol: Option<ProtocolName>,
    #[arg(long, value_parser = parse_cost)]
    pub cost: Option<CostKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hops: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    Family::parse(s).map_err(|e| e.to_string())
}
fn parse_protocol(s: &str) -> std::result::Result<ProtocolName, String> {
    ProtocolName::parse(s).map_err(|e| e.to_string())
}
fn parse_cost(s: &str) -> std::result::Result<CostKind, String> {
    CostKind::parse(s).map_err(|e| e.to_string())
}
fn parse_mode(s: &str) -> std::result::Result<ConstraintMode, String> {
    match s {
        "le" | "at-most" | "<=" => Ok(ConstraintMode::AtMost),
        "eq" | "exactly" | "=" => Ok(ConstraintMode::Exactly),
        other => Err(format!("unknown constraint mode {other:?} (use le or eq)")),
    }
}

/// Thread count from the flag, then the environment.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV}: expected a thread count, got {v:?}"))),
        _ => Ok(None),
    }
}

fn base_config(common: &Common, kind: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            if cfg.experiment.name() != kind {
                return Err(Error::Config(format!(
                    "experiment.kind: {} describes a {} run, not {kind}",
                    path.display(),
                    cfg.experiment.name()
                )));
            }
            cfg
        }
        None => RunConfig::new(0, Experiment::default_for(kind)?),
    };
    if let Some(v) = common.family {
        cfg.model.family = v;
    }
    if let Some(v) = common.n {
        cfg.model.n = v;
    }
    if let Some(v) = common.hx {
        cfg.model.hx = v;
    }
    if let Some(v) = common.hz {
        cfg.model.hz = v;
    }
    if let Some(v) = common.p {
        cfg.protocol.p = v;
    }
    if let Some(v) = common.protocol {
        cfg.protocol.name = Some(v);
    }
    if let Some(v) = common.cost {
        cfg.cost = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.hops {
        cfg.optimizer.hops = v;
    }
    if let Some(v) = &common.output {
        cfg.output_dir = Some(v.clone());
    }
    Ok(cfg)
}

/// Applies subcommand-specific flags to the experiment block.
fn build_config(command: &Command) -> Result<RunConfig> {
    let (common, kind) = match command {
        Command::Sweep { common, .. } => (common, "sweep"),
        Command::Qaoa { common } => (common, "qaoa"),
        Command::Df { common, .. } => (common, "df"),
        Command::Landscape { common, .. } => (common, "landscape"),
        Command::Distribution { common, .. } => (common, "distribution"),
        Command::Correlate { common, .. } => (common, "correlate"),
        Command::Histogram { common, .. } => (common, "histogram"),
        Command::ExportSamples { common, .. } => (common, "export-samples"),
        Command::Validate { config } => {
            let cfg = RunConfig::load(config)?;
            cfg.validate()?;
            return Ok(cfg);
        }
    };
    let mut cfg = base_config(common, kind)?;
    match (command, &mut cfg.experiment) {
        (Command::Sweep { refine_rounds: r, snap_z_seeds: s, .. }, Experiment::Sweep { refine_rounds, snap_z_seeds }) => {
            if let Some(v) = r {
                *refine_rounds = *v;
            }
            if *s {
                *snap_z_seeds = true;
            }
        }
        (Command::Df { spectrum: s, modes: m, .. }, Experiment::Df { spectrum, modes }) => {
            if s.is_some() {
                *spectrum = s.clone();
            }
            if m.is_some() {
                *modes = *m;
            }
        }
        (Command::Landscape { common, t_values: tv, mode: md }, Experiment::Landscape { points, t_values, mode }) => {
            // an explicit field pins the scan to one point
            if common.hx.is_some() || common.hz.is_some() {
                *points = vec![(cfg.model.hx, cfg.model.hz)];
            }
            if let Some(v) = tv {
                *t_values = v.clone();
            }
            if let Some(v) = md {
                *mode = *v;
            }
        }
        (Command::Distribution { samples: s, bins: b, .. }, Experiment::Distribution { samples, bins }) => {
            if let Some(v) = s {
                *samples = *v;
            }
            if let Some(v) = b {
                *bins = *v;
            }
        }
        (Command::Correlate { records: Some(r), .. }, Experiment::Correlate { records }) => *records = r.clone(),
        (
            Command::Histogram { records: r, generator: g, bins: b, delta: d, .. },
            Experiment::Histogram { records, generator, bins, delta },
        ) => {
            if let Some(v) = r {
                *records = v.clone();
            }
            if let Some(v) = g {
                *generator = *v;
            }
            if let Some(v) = b {
                *bins = *v;
            }
            if let Some(v) = d {
                *delta = *v;
            }
        }
        (Command::ExportSamples { count: c, t: tt, mode: md, .. }, Experiment::ExportSamples { count, t, mode }) => {
            if let Some(v) = c {
                *count = *v;
            }
            if tt.is_some() {
                *t = *tt;
            }
            if let Some(v) = md {
                *mode = *v;
            }
        }
        _ => {}
    }
    if matches!(
        cfg.experiment,
        Experiment::Sweep { .. } | Experiment::Landscape { .. } | Experiment::Distribution { .. } | Experiment::ExportSamples { .. }
    ) && cfg.output_dir.is_none()
    {
        cfg.output_dir = Some(PathBuf::from("qaoalab-out").join(cfg.experiment.name()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("undefined".to_string(), |x| format!("{x:.6}"))
}

/// Depth-sequential optimization at the configured point.
fn run_qaoa(cfg: &RunConfig) -> Result<()> {
    let r = cfg.resolved();
    let point = cfg.point();
    let model = build_model(point.family, point.n, point.hx, point.hz)?;
    let diag = diagonalize(&model, r.model.degeneracy_tol)?;
    let target = CostTarget::from_diagonalization(&diag, r.model.representative, r.model.cut.expect("resolved"))?;
    let protocol = Protocol::new(&point.protocol.generators(), 1, point.initial, point.n)?;
    let eval = CostEvaluator::new(protocol, model, r.cost, target)?;
    let mut x = vec![0.1; eval.protocol().m()];
    let mut result = None;
    for depth in 1..=point.p {
        let e = eval.with_depth(depth)?;
        let run = basinhop(&e, &x, &BasinHopConfig {
            seed: crate::derive_seed(r.seed, &[depth as u64]),
            ..r.optimizer.clone()
        })?;
        say!("p={depth} {}={:.6e}", r.cost.name(), run.best_cost);
        let schedule = e.schedule(&run.best_point)?;
        if depth < point.p {
            x = seed_from_previous_p(&schedule, Some(e.protocol())).into_vec();
        }
        result = Some((run, schedule));
    }
    let (run, schedule) = result.expect("p >= 1");
    say!(
        "family={} N={} hx={} hz={} p={} {}={:.6e}",
        point.family.name(),
        point.n,
        point.hx,
        point.hz,
        point.p,
        r.cost.name(),
        run.best_cost
    );
    if let Some(dir) = &r.output_dir {
        let out = serde_json::json!({
            "cost_kind": r.cost,
            "best_cost": run.best_cost,
            "schedule": schedule,
            "evaluations": run.evaluations,
        });
        let path = dir.join("qaoa_result.json");
        std::fs::write(&path, serde_json::to_string_pretty(&out)? + "\n").map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn run_df(cfg: &RunConfig, spectrum: Option<&Path>, modes: Option<usize>) -> Result<()> {
    let r = cfg.resolved();
    let (spec, modes) = match spectrum {
        Some(path) => {
            let spec = ProbabilitySpectrum::read(path)?;
            let default = (spec.len().max(2) as f64).log2().ceil() as usize;
            (spec, modes.unwrap_or(default))
        }
        None => {
            let model = build_model(r.model.family, r.model.n, r.model.hx, r.model.hz)?;
            let diag = diagonalize(&model, r.model.degeneracy_tol)?;
            let cut = r.model.cut.expect("resolved");
            let state = diag.ground.representative(r.model.representative);
            (entanglement_spectrum(&state, cut)?, modes.unwrap_or(cut.min(r.model.n - cut)))
        }
    };
    let mut df_cfg = r.df.clone();
    df_cfg.basin.seed = crate::derive_seed(r.seed, &[u64::MAX]);
    let res = interaction_distance(&spec, modes, &df_cfg)?;
    say!("D_F = {:.9}", res.distance);
    say!("VNE = {:.9}", vne(&spec));
    say!("modes = {modes}");
    if res.exceeds_conjectured_bound() {
        say!("warning: D_F exceeds the conjectured bound 3-2*sqrt(2)");
    }
    if let Some(dir) = &r.output_dir {
        let path = dir.join("df_result.json");
        std::fs::write(&path, serde_json::to_string_pretty(&res)? + "\n").map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn execute(cfg: &RunConfig) -> Result<()> {
    if let Some(dir) = &cfg.output_dir {
        cfg.write_effective(dir)?;
    }
    let out = cfg.output_dir.as_deref();
    match &cfg.experiment {
        Experiment::Sweep { .. } => {
            let spec = cfg.sweep_spec();
            let line = |r: &experiments::SweepRecord| {
                say!(
                    "round={} index={} hx={:.6} hz={:.6} {}={:.6e} df={:.6e} vne={:.6}",
                    r.round,
                    r.index,
                    r.hx,
                    r.hz,
                    r.cost_kind.name(),
                    r.best_cost,
                    r.df,
                    r.vne
                )
            };
            let outcome = experiments::sweep(&spec, out, Some(&line))?;
            for f in &outcome.failures {
                eprintln!("point {} (hx={}, hz={}) failed: {}", f.index, f.hx, f.hz, f.error);
            }
            if outcome.records.len() >= 3 {
                let c = experiments::correlate(&outcome.records)?;
                say!("points={} log_r={} raw_r={}", c.samples, fmt_opt(c.log_r), fmt_opt(c.raw_r));
            }
        }
        Experiment::Qaoa {} => run_qaoa(cfg)?,
        Experiment::Df { spectrum, modes } => run_df(cfg, spectrum.as_deref(), *modes)?,
        Experiment::Landscape { .. } => {
            let spec = cfg.landscape_spec().expect("landscape");
            for r in experiments::landscape_scan(&spec, out)? {
                say!("hx={} hz={} T={} epsilon={:.6e}", r.hx, r.hz, r.t, r.epsilon);
            }
        }
        Experiment::Distribution { .. } => {
            let spec = cfg.distribution_spec().expect("distribution");
            let d = experiments::epsilon_distribution(&spec, out)?;
            say!(
                "samples={} median_log10_epsilon={:.4} zero_start_epsilon={:.6e}",
                d.samples.len(),
                d.median_log10,
                d.zero_start
            );
        }
        Experiment::Correlate { records } => {
            let recs = experiments::read_records(records)?;
            let c = experiments::correlate(&recs)?;
            say!("points={} log_r={} raw_r={}", c.samples, fmt_opt(c.log_r), fmt_opt(c.raw_r));
        }
        Experiment::Histogram { records, generator, bins, delta } => {
            let recs = experiments::read_records(records)?;
            let h = experiments::angle_histogram(&recs, *generator, *bins, *delta)?;
            if let Some(dir) = out {
                experiments::write_histogram_csv(&dir.join("histogram.csv"), &h.edges, &h.counts)?;
            }
            say!(
                "generator={} angles={} near_multiple_fraction={:.6} delta={}",
                h.generator, h.total, h.near_fraction, h.delta
            );
        }
        Experiment::ExportSamples { .. } => {
            let spec = cfg.export_spec().expect("export");
            let path = out.expect("output dir set").join("samples.tsv");
            let rows = experiments::export_samples_for_embedding(&spec, &path)?;
            say!("wrote {} samples to {}", rows.len(), path.display());
        }
    }
    Ok(())
}

fn report(e: &Error) {
    let json = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{json}");
}

/// Runs the frontend on parsed arguments and returns the exit status.
pub fn run(cli: Cli) -> i32 {
    let outcome = (|| -> Result<()> {
        let threads = thread_count(cli.threads)?;
        let cfg = build_config(&cli.command)?;
        if let Command::Validate { .. } = cli.command {
            say!("{}", cfg.to_pretty_json()?);
            say!("config is valid");
            return Ok(());
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| execute(&cfg))
    })();
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
