//! Exact state-vector simulation of the alternating-operator layers.
//!
//! Basis convention: bit `i` of a basis index is spin `i`, bit value 0 is
//! the Z = +1 ("up") state, and bit 0 is the least significant.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, GroundSpace, PauliTerm, SpinChainModel};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Normalized complex amplitudes over the 2^N computational basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amplitudes` and normalizes them.
    pub fn from_amplitudes(n: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numeric("state has zero or non-finite norm".into()));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(Self { n, amplitudes })
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n, amplitudes }
    }

    /// Haar-like random state from independent Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amplitudes = (0..1usize << n)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        Self::from_amplitudes(n, amplitudes).expect("gaussian state has positive norm")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_dim(other.n)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Cyclic shift of every spin by one site, `i -> i+1 mod N`.
    pub fn translate(&self) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            out[rotate_left(b, self.n)] = *a;
        }
        Self {
            n: self.n,
            amplitudes: out,
        }
    }

    /// Applies ∏ Z_i (the parity flip mapping |→…→⟩ to |←…←⟩).
    pub fn apply_z_parity(&self) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| if b.count_ones() % 2 == 1 { -*a } else { *a })
            .collect();
        Self {
            n: self.n,
            amplitudes,
        }
    }

    /// P|self⟩ for a Pauli string.
    pub fn apply_pauli(&self, term: &PauliTerm) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let (target, phase) = term.act_on_basis(b);
            out[target] += phase * a;
        }
        Self {
            n: self.n,
            amplitudes: out,
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: 1 << n,
            });
        }
        Ok(())
    }

    /// JSON dump: `{"n", "bit_order", "amplitudes": [[re, im], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "bit_order": "bit i = site i (LSB = site 0); bit value 0 = Z eigenvalue +1",
            "amplitudes": self.amplitudes.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Dump {
            n: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        let dump: Dump = serde_json::from_value(value.clone())?;
        let amps = dump
            .amplitudes
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Self::from_amplitudes(dump.n, amps)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn rotate_left(b: usize, n: usize) -> usize {
    let mask = (1usize << n) - 1;
    ((b << 1) | (b >> (n - 1))) & mask
}

fn spin(b: usize, site: usize) -> i32 {
    1 - 2 * ((b >> site) & 1) as i32
}

/// Generator families of the layer unitaries exp(−iθH).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// −Σ Z_i Z_{i+1}
    #[serde(rename = "ZZ")]
    Zz,
    /// −Σ X_i
    #[serde(rename = "X")]
    X,
    /// −Σ Z_i
    #[serde(rename = "Z")]
    Z,
    /// −Σ Z_i Z_{i+1} Z_{i+2}
    #[serde(rename = "ZZZ")]
    Zzz,
    /// −Σ (X_i X_{i+1} + Y_i Y_{i+1})
    #[serde(rename = "XXYY")]
    Xxyy,
}

impl GeneratorKind {
    pub fn label(self) -> &'static str {
        match self {
            GeneratorKind::Zz => "ZZ",
            GeneratorKind::X => "X",
            GeneratorKind::Z => "Z",
            GeneratorKind::Zzz => "ZZZ",
            GeneratorKind::Xxyy => "XXYY",
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        match label.to_ascii_uppercase().as_str() {
            "ZZ" => Ok(GeneratorKind::Zz),
            "X" => Ok(GeneratorKind::X),
            "Z" => Ok(GeneratorKind::Z),
            "ZZZ" => Ok(GeneratorKind::Zzz),
            "XXYY" => Ok(GeneratorKind::Xxyy),
            other => Err(Error::Config(format!("unknown generator label {other:?}"))),
        }
    }

    /// Operator as a list of Pauli terms on an `n`-site ring.
    pub fn terms(self, n: usize) -> Vec<PauliTerm> {
        match self {
            GeneratorKind::Zz => models::zz_bonds(n, -1.0),
            GeneratorKind::X => models::field_terms(n, models::Axis::X, -1.0),
            GeneratorKind::Z => models::field_terms(n, models::Axis::Z, -1.0),
            GeneratorKind::Zzz => models::zzz_triples(n, -1.0),
            GeneratorKind::Xxyy => models::hopping_bonds(n, -1.0),
        }
    }
}

#[derive(Debug)]
enum Action {
    /// Integer eigenvalue per basis state, offset by `n` so it indexes a phase table.
    Diagonal(Vec<u32>),
    Mixer,
    Hopping(Arc<HoppingSectors>),
}

/// A generator prepared for a fixed system size.
#[derive(Debug, Clone)]
pub struct Generator {
    kind: GeneratorKind,
    n: usize,
    action: Arc<Action>,
}

impl Generator {
    pub fn new(kind: GeneratorKind, n: usize) -> Result<Self> {
        let min = match kind {
            GeneratorKind::Zz | GeneratorKind::Xxyy => 2,
            GeneratorKind::Zzz => 3,
            GeneratorKind::X | GeneratorKind::Z => 1,
        };
        if n < min {
            return Err(Error::SystemTooSmall { n, min });
        }
        if n > models::DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                n,
                cap: models::DENSE_CAP,
            });
        }
        let action = match kind {
            GeneratorKind::Zz | GeneratorKind::Z | GeneratorKind::Zzz => {
                let table = (0..1usize << n)
                    .map(|b| {
                        let e: i32 = match kind {
                            GeneratorKind::Zz => {
                                -(0..n).map(|i| spin(b, i) * spin(b, (i + 1) % n)).sum::<i32>()
                            }
                            GeneratorKind::Z => -(0..n).map(|i| spin(b, i)).sum::<i32>(),
                            _ => -(0..n)
                                .map(|i| spin(b, i) * spin(b, (i + 1) % n) * spin(b, (i + 2) % n))
                                .sum::<i32>(),
                        };
                        (e + n as i32) as u32
                    })
                    .collect();
                Action::Diagonal(table)
            }
            GeneratorKind::X => Action::Mixer,
            GeneratorKind::Xxyy => Action::Hopping(hopping_sectors(n)),
        };
        Ok(Self {
            kind,
            n,
            action: Arc::new(action),
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place exp(−iθH)|state⟩.
    pub fn apply_in_place(&self, state: &mut StateVector, theta: f64) -> Result<()> {
        state.check_dim(self.n)?;
        let amps = state.amplitudes_mut();
        match self.action.as_ref() {
            Action::Diagonal(table) => {
                let n = self.n as i32;
                let phases: Vec<Complex64> = (-n..=n)
                    .map(|e| Complex64::from_polar(1.0, -theta * e as f64))
                    .collect();
                for (a, &k) in amps.iter_mut().zip(table) {
                    *a *= phases[k as usize];
                }
            }
            Action::Mixer => {
                // exp(iθ ΣX) = ∏ (cos θ + i sin θ X_i)
                let c = Complex64::new(theta.cos(), 0.0);
                let s = I * theta.sin();
                for site in 0..self.n {
                    let bit = 1usize << site;
                    for b in 0..amps.len() {
                        if b & bit == 0 {
                            let a0 = amps[b];
                            let a1 = amps[b | bit];
                            amps[b] = c * a0 + s * a1;
                            amps[b | bit] = s * a0 + c * a1;
                        }
                    }
                }
            }
            Action::Hopping(sectors) => sectors.evolve(amps, theta),
        }
        Ok(())
    }
}

/// exp(−iθH_gen)|state⟩.
pub fn apply_layer(state: &StateVector, generator: &Generator, theta: f64) -> Result<StateVector> {
    if !theta.is_finite() {
        return Err(Error::Numeric(format!("non-finite layer angle {theta}")));
    }
    let mut out = state.clone();
    generator.apply_in_place(&mut out, theta)?;
    Ok(out)
}

/// Eigendecomposition of the hopping operator in every magnetization sector.
#[derive(Debug)]
struct HoppingSectors {
    sectors: Vec<Sector>,
}

#[derive(Debug)]
struct Sector {
    indices: Vec<usize>,
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl HoppingSectors {
    fn build(n: usize) -> Self {
        let terms = GeneratorKind::Xxyy.terms(n);
        let sectors = (0..=n)
            .map(|down| {
                let block = sector_matrix(n, down, &terms);
                let eig = SymmetricEigen::new(block.matrix);
                Sector {
                    indices: block.indices,
                    values: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        Self { sectors }
    }

    fn evolve(&self, amps: &mut [Complex64], theta: f64) {
        for sector in &self.sectors {
            let d = sector.indices.len();
            let mut coeffs = vec![Complex64::new(0.0, 0.0); d];
            for (k, c) in coeffs.iter_mut().enumerate() {
                let col = sector.vectors.column(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, &b) in sector.indices.iter().enumerate() {
                    acc += amps[b] * col[r];
                }
                *c = acc * Complex64::from_polar(1.0, -theta * sector.values[k]);
            }
            for (r, &b) in sector.indices.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in coeffs.iter().enumerate() {
                    acc += c * sector.vectors[(r, k)];
                }
                amps[b] = acc;
            }
        }
    }
}

fn hopping_sectors(n: usize) -> Arc<HoppingSectors> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HoppingSectors>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Arc::clone(hit);
    }
    let built = Arc::new(HoppingSectors::build(n));
    cache
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&built))
        .clone()
}

struct SectorBlock {
    indices: Vec<usize>,
    matrix: DMatrix<f64>,
}

/// Real block of a magnetization-conserving operator on basis states with
/// `down` flipped spins.
fn sector_matrix(n: usize, down: usize, terms: &[PauliTerm]) -> SectorBlock {
    let indices: Vec<usize> = (0..1usize << n)
        .filter(|b| b.count_ones() as usize == down)
        .collect();
    let position: HashMap<usize, usize> = indices.iter().enumerate().map(|(k, &b)| (b, k)).collect();
    let d = indices.len();
    let mut matrix = DMatrix::<f64>::zeros(d, d);
    for (col, &b) in indices.iter().enumerate() {
        for term in terms {
            let (target, phase) = term.act_on_basis(b);
            if let Some(&row) = position.get(&target) {
                matrix[(row, col)] += term.coefficient() * phase.re;
            }
        }
    }
    SectorBlock { indices, matrix }
}

/// Spin direction of an x-polarized product state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XDirection {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// |→…→⟩ or |←…←⟩.
pub fn product_state_x(n: usize, direction: XDirection) -> StateVector {
    let amp = ((1usize << n) as f64).sqrt().recip();
    let amplitudes = (0..1usize << n)
        .map(|b| match direction {
            XDirection::Minus if b.count_ones() % 2 == 1 => Complex64::new(-amp, 0.0),
            _ => Complex64::new(amp, 0.0),
        })
        .collect();
    StateVector { n, amplitudes }
}

/// Ground state of −Σ(X_iX_{i+1}+Y_iY_{i+1}) restricted to ΣZ = `m`.
///
/// Ties are broken by taking the lowest-index eigenvector of the sector
/// matrix; the overall sign is fixed so the largest amplitude is positive.
pub fn xxyy_sector_ground(n: usize, m: i32) -> Result<StateVector> {
    if n < 2 || m.unsigned_abs() as usize > n || (n as i32 + m) % 2 != 0 {
        return Err(Error::EmptySector { n, m });
    }
    let down = ((n as i32 - m) / 2) as usize;
    let block = sector_matrix(n, down, &GeneratorKind::Xxyy.terms(n));
    let eig = SymmetricEigen::new(block.matrix);
    let min = eig.eigenvalues.min();
    let k = (0..eig.eigenvalues.len())
        .find(|&k| eig.eigenvalues[k] <= min + 1e-10)
        .expect("non-empty sector");
    let col = eig.eigenvectors.column(k);
    let pivot = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (r, &b) in block.indices.iter().enumerate() {
        amplitudes[b] = Complex64::new(sign * col[r], 0.0);
    }
    StateVector::from_amplitudes(n, amplitudes)
}

/// Anything a state can be compared against by fidelity.
pub trait FidelityTarget {
    fn fidelity_of(&self, state: &StateVector) -> Result<f64>;
}

impl FidelityTarget for StateVector {
    fn fidelity_of(&self, state: &StateVector) -> Result<f64> {
        Ok(self.inner(state)?.norm_sqr())
    }
}

impl FidelityTarget for GroundSpace {
    /// ⟨ψ|P|ψ⟩ with P the projector onto the whole ground space.
    fn fidelity_of(&self, state: &StateVector) -> Result<f64> {
        let mut total = 0.0;
        for v in self.basis() {
            total += v.inner(state)?.norm_sqr();
        }
        Ok(total.min(1.0))
    }
}

pub fn fidelity(state: &StateVector, target: &impl FidelityTarget) -> Result<f64> {
    target.fidelity_of(state)
}

/// ⟨ψ|H|ψ⟩ evaluated term by term.
pub fn energy(state: &StateVector, model: &SpinChainModel) -> Result<f64> {
    state.check_dim(model.n())?;
    let amps = state.amplitudes();
    let mut total = Complex64::new(0.0, 0.0);
    for term in model.terms() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            let (target, phase) = term.act_on_basis(b);
            acc += amps[target].conj() * phase * a;
        }
        total += acc * term.coefficient();
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_states_have_expected_amplitudes() {
        let plus = product_state_x(2, XDirection::Plus);
        assert_eq!(plus.amplitudes(), &[c(0.5); 4]);
        let minus = product_state_x(2, XDirection::Minus);
        let want = [c(0.5), c(-0.5), c(-0.5), c(0.5)];
        for (a, b) in minus.amplitudes().iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn z_parity_maps_plus_to_minus() {
        for n in 1..=6 {
            let flipped = product_state_x(n, XDirection::Plus).apply_z_parity();
            assert_eq!(flipped, product_state_x(n, XDirection::Minus));
        }
    }

    #[test]
    fn x_layer_on_polarized_state_is_phase() {
        let g = Generator::new(GeneratorKind::X, 2).unwrap();
        let psi = product_state_x(2, XDirection::Plus);
        let theta = 0.41;
        let out = apply_layer(&psi, &g, theta).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * theta);
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - phase * b).norm() < 1e-14);
        }
    }

    #[test]
    fn zz_layer_on_up_up_is_phase() {
        let g = Generator::new(GeneratorKind::Zz, 2).unwrap();
        let theta = 0.77;
        let out = apply_layer(&StateVector::basis(2, 0), &g, theta).unwrap();
        assert!((out.amplitudes()[0] - Complex64::from_polar(1.0, 2.0 * theta)).norm() < 1e-14);
    }

    #[test]
    fn sector_ground_is_supported_on_sector() {
        let psi = xxyy_sector_ground(6, -2).unwrap();
        for (b, a) in psi.amplitudes().iter().enumerate() {
            if b.count_ones() != 4 {
                assert_eq!(a.norm(), 0.0);
            }
        }
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sector_rejected() {
        assert!(matches!(xxyy_sector_ground(6, -3), Err(Error::EmptySector { .. })));
        assert!(matches!(xxyy_sector_ground(4, 6), Err(Error::EmptySector { .. })));
    }

    #[test]
    fn fidelity_edge_cases() {
        let a = StateVector::basis(2, 1);
        let b = StateVector::basis(2, 2);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert!(fidelity(&a, &StateVector::basis(3, 0)).is_err());
    }

    #[test]
    fn json_dump_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::random(3, &mut rng);
        let back = StateVector::from_json(&psi.to_json()).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let g = Generator::new(GeneratorKind::Z, 3).unwrap();
        assert!(apply_layer(&StateVector::basis(2, 0), &g, 0.1).is_err());
    }
}
