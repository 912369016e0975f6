//! Global minimization: basinhopping with Metropolis acceptance around a
//! local minimizer, sequential-depth seeding and neighbor-seeded grid
//! refinement.

pub mod local;

use std::cell::Cell;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qaoa::{AngleSchedule, Protocol};

pub use local::{bfgs_fd, nelder_mead, LocalResult};

/// Something to minimize over real vectors.
pub trait Objective: Sync {
    fn evaluate(&self, x: &[f64]) -> f64;

    /// Maps a raw point to its canonical representative (e.g. reduced angles).
    fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalMinimizer {
    #[default]
    NelderMead,
    BfgsFd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasinHopConfig {
    pub hops: usize,
    /// Half-width of the uniform perturbation, radians.
    pub step_size: f64,
    pub temperature: f64,
    pub local: LocalMinimizer,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Edge length of the initial Nelder–Mead simplex.
    pub initial_step: f64,
    /// Stop hopping once the best cost is at or below this value.
    pub stop_below: Option<f64>,
    pub seed: u64,
}

impl Default for BasinHopConfig {
    fn default() -> Self {
        Self {
            hops: 50,
            step_size: 0.3,
            temperature: 1.0,
            local: LocalMinimizer::NelderMead,
            tolerance: 1e-10,
            max_iterations: 2000,
            initial_step: 0.1,
            stop_below: None,
            seed: 0,
        }
    }
}

impl BasinHopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::Config("optimizer.step_size must be > 0".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Config("optimizer.temperature must be > 0".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("optimizer.tolerance must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("optimizer.max_iterations must be >= 1".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::Config("optimizer.initial_step must be > 0".into()));
        }
        Ok(())
    }

    /// Copy with the RNG seed replaced by one derived from `path`.
    pub fn derived(&self, path: &[u64]) -> Self {
        Self {
            seed: crate::derive_seed(self.seed, path),
            ..self.clone()
        }
    }

    fn minimize_locally<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> LocalResult {
        match self.local {
            LocalMinimizer::NelderMead => {
                nelder_mead(f, x0, self.initial_step, self.tolerance, self.max_iterations)
            }
            LocalMinimizer::BfgsFd => bfgs_fd(f, x0, 1e-6, self.tolerance, self.max_iterations),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    /// Canonicalized minimizer.
    pub best_point: Vec<f64>,
    pub best_cost: f64,
    /// Initial local minimum followed by one entry per hop.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub wall_time: f64,
}

/// Basinhopping from `x0`.
///
/// Each hop perturbs the current point by independent uniform noise in
/// `[−step, step]`, minimizes locally, and accepts the new minimum when it is
/// lower or otherwise with probability `exp(−Δ/T)`. Non-finite local minima
/// count as rejections.
pub fn basinhop<O: Objective + ?Sized>(
    objective: &O,
    x0: &[f64],
    config: &BasinHopConfig,
) -> Result<OptResult> {
    config.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite initial point".into()));
    }
    let start = Instant::now();
    let evaluations = Cell::new(0usize);
    let f = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        let v = objective.evaluate(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let first = config.minimize_locally(f, x0);
    if !first.value.is_finite() {
        return Err(Error::Numeric("objective is non-finite at the initial point".into()));
    }
    let mut current = (first.point.clone(), first.value);
    let mut best = current.clone();
    let mut trace = vec![first.value];
    let stop = config.stop_below.unwrap_or(f64::NEG_INFINITY);

    for _ in 0..config.hops {
        if best.1 <= stop {
            break;
        }
        let trial: Vec<f64> = current
            .0
            .iter()
            .map(|x| x + rng.gen_range(-config.step_size..=config.step_size))
            .collect();
        let found = config.minimize_locally(f, &trial);
        let u: f64 = rng.gen();
        if !found.value.is_finite() {
            trace.push(current.1);
            continue;
        }
        let delta = found.value - current.1;
        if delta < 0.0 || u < (-delta / config.temperature).exp() {
            current = (found.point.clone(), found.value);
        }
        if found.value < best.1 {
            best = (found.point, found.value);
        }
        trace.push(found.value);
    }

    Ok(OptResult {
        best_point: objective.canonicalize(&best.0),
        best_cost: best.1,
        trace,
        evaluations: evaluations.get(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Interpolation seed for depth p+1 from an optimum at depth p, applied to
/// every generator column:
/// θ'_i = ((i−1)/p)·θ_{i−1} + ((p−i+1)/p)·θ_i for i = 1…p+1, with θ_0 = θ_{p+1} = 0.
/// The result is reduced into the angle domains of `protocol` when given.
pub fn seed_from_previous_p(schedule: &AngleSchedule, protocol: Option<&Protocol>) -> AngleSchedule {
    let p = schedule.p();
    let m = schedule.m();
    let mut out = AngleSchedule::zeros(p + 1, m);
    for j in 0..m {
        let col = schedule.column(j);
        let at = |i: usize| if i == 0 || i > p { 0.0 } else { col[i - 1] };
        for i in 1..=p + 1 {
            let v = ((i - 1) as f64 / p as f64) * at(i - 1) + ((p + 1 - i) as f64 / p as f64) * at(i);
            out.set(i - 1, j, v);
        }
    }
    match protocol {
        Some(proto) => match proto.with_depth(p + 1) {
            Ok(deeper) => crate::qaoa::reduce_angles(&out, &deeper),
            Err(_) => out,
        },
        None => out,
    }
}

/// Results laid out on a rectangular grid, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Option<OptResult>>,
}

impl ResultGrid {
    pub fn new(rows: usize, cols: usize, cells: Vec<Option<OptResult>>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: cells.len(),
            });
        }
        Ok(Self { rows, cols, cells })
    }

    /// Indices of the up-to-four lattice neighbors of `index`.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let (r, c) = (index / self.cols, index % self.cols);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(index - self.cols);
        }
        if r + 1 < self.rows {
            out.push(index + self.cols);
        }
        if c > 0 {
            out.push(index - 1);
        }
        if c + 1 < self.cols {
            out.push(index + 1);
        }
        out
    }
}

/// One refinement round: every point is re-optimized from its incumbent and
/// from each neighbor's optimum, keeping the lowest cost. Seeds come from the
/// previous round only, so points are independent and run in parallel.
/// `round` enters the RNG derivation.
pub fn refine_grid<F, O>(grid: &ResultGrid, factory: F, config: &BasinHopConfig, round: u64) -> ResultGrid
where
    F: Fn(usize) -> Option<O> + Sync,
    O: Objective,
{
    let cells = (0..grid.cells.len())
        .into_par_iter()
        .map(|index| refine_point(grid, index, &factory, config, round))
        .collect();
    ResultGrid {
        rows: grid.rows,
        cols: grid.cols,
        cells,
    }
}

/// Refines a single grid point (see [`refine_grid`]).
pub fn refine_point<F, O>(
    grid: &ResultGrid,
    index: usize,
    factory: &F,
    config: &BasinHopConfig,
    round: u64,
) -> Option<OptResult>
where
    F: Fn(usize) -> Option<O> + Sync,
    O: Objective,
{
    let incumbent = grid.cells[index].clone()?;
    let Some(objective) = factory(index) else {
        return Some(incumbent);
    };
    let start = Instant::now();
    let mut best = incumbent.clone();
    let mut evaluations = incumbent.evaluations;
    let mut seeds = vec![index];
    seeds.extend(grid.neighbors(index));
    for (k, &source) in seeds.iter().enumerate() {
        let Some(seed) = grid.cells[source].as_ref() else {
            continue;
        };
        let cfg = config.derived(&[round, index as u64, k as u64]);
        if let Ok(run) = basinhop(&objective, &seed.best_point, &cfg) {
            evaluations += run.evaluations;
            if run.best_cost < best.best_cost {
                best = run;
            }
        }
    }
    best.evaluations = evaluations;
    best.wall_time = incumbent.wall_time + start.elapsed().as_secs_f64();
    Some(best)
}

/// Total-time restriction on an angle vector.
///
/// Both modes optimize over raw coordinates `x` with non-negative weights
/// `w = x²`. For `AtMost` the raw vector carries one extra slack weight, so
/// the image is the whole simplex `{θ ≥ 0, Σθ ≤ T}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "t")]
pub enum TimeConstraint {
    /// Σθ ≤ T, θ ≥ 0.
    AtMost(f64),
    /// Σθ = T, θ ≥ 0.
    Exactly(f64),
}

impl TimeConstraint {
    pub fn budget(self) -> f64 {
        match self {
            TimeConstraint::AtMost(t) | TimeConstraint::Exactly(t) => t,
        }
    }

    /// Number of raw coordinates for `len` angles.
    pub fn raw_len(self, len: usize) -> usize {
        match self {
            TimeConstraint::AtMost(_) => len + 1,
            TimeConstraint::Exactly(_) => len,
        }
    }

    /// Raw optimizer coordinates to constrained angles.
    pub fn map(self, raw: &[f64]) -> Vec<f64> {
        let t = self.budget();
        let len = match self {
            TimeConstraint::AtMost(_) => raw.len().saturating_sub(1),
            TimeConstraint::Exactly(_) => raw.len(),
        };
        let w: Vec<f64> = raw.iter().map(|x| x * x).collect();
        let total: f64 = w.iter().sum();
        if !(total > 1e-300) || !total.is_finite() {
            return match self {
                TimeConstraint::AtMost(_) => vec![0.0; len],
                TimeConstraint::Exactly(_) => vec![t / len.max(1) as f64; len],
            };
        }
        w[..len].iter().map(|wi| t * wi / total).collect()
    }

    /// Raw coordinates that map to (the feasible projection of) `angles`.
    pub fn preimage(self, angles: &[f64]) -> Vec<f64> {
        let t = self.budget();
        let clipped: Vec<f64> = angles.iter().map(|a| a.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        match self {
            TimeConstraint::AtMost(_) => {
                let scale = if sum > t { t / sum } else { 1.0 };
                let mut raw: Vec<f64> = clipped.iter().map(|a| (a * scale).sqrt()).collect();
                raw.push((t - sum * scale).max(0.0).sqrt());
                raw
            }
            TimeConstraint::Exactly(_) => {
                if sum == 0.0 {
                    vec![1.0; angles.len()]
                } else {
                    clipped.iter().map(|a| a.sqrt()).collect()
                }
            }
        }
    }

    pub fn is_satisfied(self, angles: &[f64], tol: f64) -> bool {
        let total: f64 = angles.iter().sum();
        let nonneg = angles.iter().all(|&a| a >= -tol);
        match self {
            TimeConstraint::AtMost(t) => nonneg && total <= t + tol,
            TimeConstraint::Exactly(t) => nonneg && (total - t).abs() <= tol,
        }
    }
}

struct Constrained<'a, O: ?Sized> {
    inner: &'a O,
    constraint: TimeConstraint,
}

impl<O: Objective + ?Sized> Objective for Constrained<'_, O> {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.inner.evaluate(&self.constraint.map(x))
    }

    fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        self.constraint.map(x)
    }
}

/// Basinhopping under a total-time constraint. `initial` is in angle space;
/// the returned point is in angle space and satisfies the constraint.
pub fn constrained_basinhop<O: Objective + ?Sized>(
    objective: &O,
    initial: &[f64],
    constraint: TimeConstraint,
    config: &BasinHopConfig,
) -> Result<OptResult> {
    let t = constraint.budget();
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InfeasibleBudget(t));
    }
    let wrapped = Constrained {
        inner: objective,
        constraint,
    };
    basinhop(&wrapped, &constraint.preimage(initial), config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_bowl() {
        let x0 = [0.3, -1.2, 2.0];
        let f = move |x: &[f64]| x.iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let cfg = BasinHopConfig {
            hops: 5,
            tolerance: 1e-12,
            ..Default::default()
        };
        let r = basinhop(&f, &[0.0; 3], &cfg).unwrap();
        assert!(r.best_cost <= 1e-12, "{}", r.best_cost);
        assert_eq!(r.trace.len(), 6);
    }

    #[test]
    fn best_is_min_of_trace() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() + 0.1 * x[0] * x[0];
        let r = basinhop(&f, &[2.0], &BasinHopConfig::default()).unwrap();
        let m = r.trace.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_cost, m);
        assert!(r.best_cost <= r.trace[0]);
    }

    #[test]
    fn rejects_bad_config() {
        let f = |x: &[f64]| x[0];
        for cfg in [
            BasinHopConfig { step_size: 0.0, ..Default::default() },
            BasinHopConfig { temperature: -1.0, ..Default::default() },
            BasinHopConfig { tolerance: 0.0, ..Default::default() },
        ] {
            assert!(basinhop(&f, &[0.0], &cfg).is_err());
        }
    }

    #[test]
    fn interpolation_seed_examples() {
        let s = AngleSchedule::new(1, 1, vec![0.7]).unwrap();
        assert_eq!(seed_from_previous_p(&s, None).as_slice(), &[0.7, 0.7]);
        let z = AngleSchedule::zeros(3, 2);
        assert_eq!(seed_from_previous_p(&z, None), AngleSchedule::zeros(4, 2));
        let s = AngleSchedule::new(2, 1, vec![1.0, 2.0]).unwrap();
        // θ' = (θ1, θ1/2 + θ2/2, θ2)
        assert_eq!(seed_from_previous_p(&s, None).as_slice(), &[1.0, 1.5, 2.0]);
    }

    #[test]
    fn neighbors_on_grid() {
        let g = ResultGrid::new(3, 3, vec![None; 9]).unwrap();
        let mut n = g.neighbors(4);
        n.sort();
        assert_eq!(n, vec![1, 3, 5, 7]);
        let mut n = g.neighbors(0);
        n.sort();
        assert_eq!(n, vec![1, 3]);
    }

    #[test]
    fn constraint_maps_are_feasible() {
        let raw = [3.0, -7.5, 0.2, 11.0];
        let le = TimeConstraint::AtMost(2.0);
        assert_eq!(le.map(&raw).len(), 3);
        assert!(le.is_satisfied(&le.map(&raw), 1e-12));
        let inside = [0.1, 0.5, 0.2];
        let back = le.map(&le.preimage(&inside));
        assert!(back.iter().zip(&inside).all(|(a, b)| (a - b).abs() < 1e-14));
        let eq = TimeConstraint::Exactly(2.0);
        assert!(eq.is_satisfied(&eq.map(&raw), 1e-12));
        assert!(eq.is_satisfied(&eq.map(&[0.0; 4]), 1e-12));
        let f = |x: &[f64]| x[0];
        assert!(matches!(
            constrained_basinhop(&f, &[0.0], TimeConstraint::AtMost(0.0), &BasinHopConfig::default()),
            Err(Error::InfeasibleBudget(_))
        ));
    }
}
