//! Entanglement spectra, von Neumann entropy and the interaction distance
//! (distance of a spectrum from the closest free-fermion spectrum).

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{basinhop, BasinHopConfig};
use crate::simulator::StateVector;

/// Conjectured upper bound on the interaction distance, 3 − 2√2.
pub const CONJECTURED_BOUND: f64 = 3.0 - 2.0 * std::f64::consts::SQRT_2;

/// Single-particle energies are clamped to ±this before exponentiation.
pub const ENERGY_CAP: f64 = 700.0;

/// Descending-sorted, normalized probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySpectrum(Vec<f64>);

impl ProbabilitySpectrum {
    /// Normalizes and sorts. Round-off negatives are clamped to zero.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite probability".into()));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        let total: f64 = values.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptySpectrum);
        }
        for v in values.iter_mut() {
            *v /= total;
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy padded with zeros (or truncated) to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut v = self.0.clone();
        v.resize(len, 0.0);
        v
    }

    /// Parses one probability per line; blank lines and `#` comments skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: not a number: {line:?}", lineno + 1)))?;
            values.push(v);
        }
        Self::new(values)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.0 {
            out.push_str(&format!("{v:e}\n"));
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_text().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Squared Schmidt coefficients across the cut between sites
/// `{0, …, cut−1}` and the rest.
pub fn entanglement_spectrum(state: &StateVector, cut: usize) -> Result<ProbabilitySpectrum> {
    let n = state.n();
    if cut == 0 || cut >= n {
        return Err(Error::InvalidCut { cut, n });
    }
    let dim_a = 1usize << cut;
    let dim_b = 1usize << (n - cut);
    let amps = state.amplitudes();
    // Sites 0..cut are the low bits: index = a + dim_a * b.
    let m = DMatrix::<Complex64>::from_fn(dim_a, dim_b, |a, b| amps[a + dim_a * b]);
    let rho = if dim_a <= dim_b {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let values: Vec<f64> = rho.symmetric_eigenvalues().iter().copied().collect();
    ProbabilitySpectrum::new(values)
}

/// −Σ ρ_k ln ρ_k with 0 ln 0 = 0.
pub fn vne(spectrum: &ProbabilitySpectrum) -> f64 {
    -spectrum
        .values()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Spectrum of a free-fermion thermal state with single-particle energies
/// `energies`, over all 2^m occupation patterns.
pub fn gaussian_spectrum(energies: &[f64]) -> ProbabilitySpectrum {
    ProbabilitySpectrum(gaussian_values(energies))
}

fn gaussian_values(energies: &[f64]) -> Vec<f64> {
    let m = energies.len();
    let mut logw = vec![0.0f64; 1 << m];
    for (j, &e) in energies.iter().enumerate() {
        let e = if e.is_nan() { ENERGY_CAP } else { e.clamp(-ENERGY_CAP, ENERGY_CAP) };
        let bit = 1usize << j;
        for k in 0..bit {
            logw[k | bit] = logw[k] - e;
        }
    }
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= z;
    }
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

/// ½ Σ |p_k − q_k| over descending-sorted, zero-padded spectra.
pub fn trace_distance(p: &ProbabilitySpectrum, q: &ProbabilitySpectrum) -> f64 {
    sorted_l1(p.values(), q.values()) / 2.0
}

fn sorted_l1(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    (0..len)
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Σ p_k ln(p_k / q_k) with both spectra floored at `floor` and renormalized.
pub fn relative_entropy(p: &ProbabilitySpectrum, q: &ProbabilitySpectrum, floor: f64) -> f64 {
    let len = p.len().max(q.len());
    let prep = |s: &ProbabilitySpectrum| {
        let mut v = s.padded(len);
        for x in v.iter_mut() {
            *x = x.max(floor);
        }
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect::<Vec<_>>()
    };
    let (p, q) = (prep(p), prep(q));
    p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum::<f64>().max(0.0)
}

/// Optimizer settings for the interaction-distance minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DfConfig {
    pub basin: BasinHopConfig,
    /// Number of uniformly random starts in addition to the entanglement-energy seed.
    pub random_starts: usize,
    /// Random starts are drawn from [−range, range]^m.
    pub random_range: f64,
}

impl Default for DfConfig {
    fn default() -> Self {
        Self {
            basin: BasinHopConfig {
                hops: 10,
                step_size: 1.0,
                temperature: 1.0,
                stop_below: Some(1e-14),
                max_iterations: 4000,
                initial_step: 0.5,
                ..BasinHopConfig::default()
            },
            random_starts: 16,
            random_range: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfResult {
    pub distance: f64,
    /// Minimizing single-particle energies, clamped to the energy cap.
    pub energies: Vec<f64>,
    /// Distance achieved by the entanglement-energy seed before optimization.
    pub seed_distance: f64,
}

impl DfResult {
    /// Whether the value exceeds 3 − 2√2 (beyond the conjectured bound).
    pub fn exceeds_conjectured_bound(&self) -> bool {
        self.distance > CONJECTURED_BOUND + 1e-9
    }
}

/// Entanglement-energy seed: ε_j = ξ_{j+1} − ξ_0 with ξ_k = −ln ρ_k.
pub fn entanglement_energy_seed(spectrum: &ProbabilitySpectrum, modes: usize) -> Vec<f64> {
    let xi = |k: usize| -> f64 {
        let p = spectrum.values().get(k).copied().unwrap_or(0.0);
        if p > 0.0 { (-p.ln()).min(ENERGY_CAP) } else { ENERGY_CAP }
    };
    (0..modes)
        .map(|j| (xi(j + 1) - xi(0)).clamp(-ENERGY_CAP, ENERGY_CAP))
        .collect()
}

/// Interaction distance D_F of a spectrum with `modes` free modes.
pub fn interaction_distance(
    spectrum: &ProbabilitySpectrum,
    modes: usize,
    config: &DfConfig,
) -> Result<DfResult> {
    if modes == 0 || modes > 20 {
        return Err(Error::Config(format!("mode count {modes} out of range 1..=20")));
    }
    if spectrum.values().iter().all(|&p| p == 0.0) {
        return Err(Error::EmptySpectrum);
    }
    let len = spectrum.len().max(1 << modes);
    let rho = spectrum.padded(len);
    let objective = |eps: &[f64]| sorted_l1(&rho, &gaussian_values(eps)) / 2.0;

    let seed = entanglement_energy_seed(spectrum, modes);
    let seed_distance = objective(&seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.basin.seed);
    let mut starts = vec![seed.clone()];
    for _ in 0..config.random_starts {
        starts.push(
            (0..modes)
                .map(|_| rng.gen_range(-config.random_range..=config.random_range))
                .collect(),
        );
    }

    let mut best = (seed_distance, seed);
    for (k, start) in starts.iter().enumerate() {
        if best.0 <= config.basin.stop_below.unwrap_or(-1.0) {
            break;
        }
        let cfg = BasinHopConfig {
            seed: crate::derive_seed(config.basin.seed, &[k as u64]),
            ..config.basin.clone()
        };
        let run = basinhop(&objective, start, &cfg)?;
        if run.best_cost < best.0 {
            best = (run.best_cost, run.best_point);
        }
    }
    let energies = best.1.iter().map(|e| e.clamp(-ENERGY_CAP, ENERGY_CAP)).collect();
    Ok(DfResult {
        distance: best.0.clamp(0.0, 1.0),
        energies,
        seed_distance,
    })
}
