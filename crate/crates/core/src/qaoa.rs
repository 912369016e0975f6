//! Alternating-operator protocols, angle schedules and cost functions.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Diagonalization, GroundSpace, Representative, SpinChainModel};
use crate::optimize::Objective;
use crate::simulator::{
    self, product_state_x, xxyy_sector_ground, Generator, GeneratorKind, StateVector, XDirection,
};
use crate::spectra::{self, ProbabilitySpectrum};

/// Probability floor applied to both spectra in the relative-entropy cost.
pub const RELENT_FLOOR: f64 = 1e-15;

/// Length of the angle domain `[0, L)` of a generator, or `None` when the
/// layer unitary is not periodic in its angle.
///
/// ZZ shifted by π/2 is a global phase on a ring; X and Z are periodic in π.
/// ZZZ shifted by π/2 applies ∏Z_i (not a phase), so it keeps the full π.
pub fn angle_domain(kind: GeneratorKind) -> Option<f64> {
    match kind {
        GeneratorKind::Zz => Some(FRAC_PI_2),
        GeneratorKind::X | GeneratorKind::Z | GeneratorKind::Zzz => Some(PI),
        GeneratorKind::Xxyy => None,
    }
}

/// Named protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolName {
    /// (ZZ, X, Z)
    Ising3,
    /// (ZZZ, X, Z)
    Threespin3,
    /// (ZZZ, XXYY)
    Appendix2,
    /// (ZZZ, XXYY, X)
    Appendix3,
}

impl ProtocolName {
    pub fn generators(self) -> Vec<GeneratorKind> {
        use GeneratorKind::*;
        match self {
            ProtocolName::Ising3 => vec![Zz, X, Z],
            ProtocolName::Threespin3 => vec![Zzz, X, Z],
            ProtocolName::Appendix2 => vec![Zzz, Xxyy],
            ProtocolName::Appendix3 => vec![Zzz, Xxyy, X],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ising3" => Ok(ProtocolName::Ising3),
            "threespin3" => Ok(ProtocolName::Threespin3),
            "appendix2" => Ok(ProtocolName::Appendix2),
            "appendix3" => Ok(ProtocolName::Appendix3),
            other => Err(Error::Config(format!("unknown protocol {other:?}"))),
        }
    }

    /// Initial state the protocol uses unless told otherwise.
    pub fn default_initial(self, n: usize) -> InitialState {
        match self {
            ProtocolName::Ising3 | ProtocolName::Threespin3 => InitialState::XPlus,
            ProtocolName::Appendix2 | ProtocolName::Appendix3 => {
                InitialState::XxyySector(-((n / 3) as i32))
            }
        }
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProtocolName::Ising3 => "ising3",
            ProtocolName::Threespin3 => "threespin3",
            ProtocolName::Appendix2 => "appendix2",
            ProtocolName::Appendix3 => "appendix3",
        };
        f.write_str(s)
    }
}

/// Recipe for the state the circuit starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// |→…→⟩
    #[serde(rename = "x+")]
    XPlus,
    /// |←…←⟩
    #[serde(rename = "x-")]
    XMinus,
    /// Ground state of the hopping operator at fixed magnetization ΣZ = m.
    XxyySector(i32),
}

impl InitialState {
    pub fn prepare(self, n: usize) -> Result<StateVector> {
        match self {
            InitialState::XPlus => Ok(product_state_x(n, XDirection::Plus)),
            InitialState::XMinus => Ok(product_state_x(n, XDirection::Minus)),
            InitialState::XxyySector(m) => xxyy_sector_ground(n, m),
        }
    }
}

/// Generators `H_1 … H_M` repeated over `p` layers.
#[derive(Clone, Debug)]
pub struct Protocol {
    generators: Vec<Generator>,
    p: usize,
    initial: InitialState,
    initial_state: StateVector,
}

impl Protocol {
    pub fn new(kinds: &[GeneratorKind], p: usize, initial: InitialState, n: usize) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::Config("protocol needs at least one generator".into()));
        }
        if p == 0 {
            return Err(Error::Config("protocol.p must be at least 1".into()));
        }
        let generators = kinds
            .iter()
            .map(|&k| Generator::new(k, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            generators,
            p,
            initial,
            initial_state: initial.prepare(n)?,
        })
    }

    pub fn named(name: ProtocolName, p: usize, n: usize) -> Result<Self> {
        Self::new(&name.generators(), p, name.default_initial(n), n)
    }

    /// Same generators and initial state with a different depth.
    pub fn with_depth(&self, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("protocol.p must be at least 1".into()));
        }
        Ok(Self { p, ..self.clone() })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn n(&self) -> usize {
        self.initial_state.n()
    }

    pub fn kinds(&self) -> Vec<GeneratorKind> {
        self.generators.iter().map(Generator::kind).collect()
    }

    pub fn initial(&self) -> InitialState {
        self.initial
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn domain(&self, j: usize) -> Option<f64> {
        angle_domain(self.generators[j].kind())
    }

    pub fn len(&self) -> usize {
        self.p * self.m()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The p×M angle matrix, row-major by layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSchedule {
    p: usize,
    m: usize,
    values: Vec<f64>,
}

impl AngleSchedule {
    pub fn new(p: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != p * m {
            return Err(Error::ShapeMismatch {
                expected_p: p,
                expected_m: m,
                found_p: values.len() / m.max(1),
                found_m: m,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite angle".into()));
        }
        Ok(Self { p, m, values })
    }

    pub fn zeros(p: usize, m: usize) -> Self {
        Self {
            p,
            m,
            values: vec![0.0; p * m],
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// θ for layer `i` and generator `j` (both 0-based).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.m + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.p).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Total time T(θ): the plain sum of all entries. Pass a reduced schedule to
/// get the protocol's canonical total time.
pub fn total_time(schedule: &AngleSchedule) -> f64 {
    schedule.values.iter().sum()
}

/// Maps every entry into its generator's angle domain.
pub fn reduce_angles(schedule: &AngleSchedule, protocol: &Protocol) -> AngleSchedule {
    let mut out = schedule.clone();
    reduce_in_place(&mut out.values, protocol);
    out
}

fn reduce_in_place(values: &mut [f64], protocol: &Protocol) {
    let m = protocol.m();
    for (k, v) in values.iter_mut().enumerate() {
        if let Some(len) = protocol.domain(k % m) {
            let r = v.rem_euclid(len);
            // rem_euclid can round up to exactly `len`
            *v = if r >= len { 0.0 } else { r };
        }
    }
}

fn check_shape(protocol: &Protocol, p: usize, m: usize) -> Result<()> {
    if p != protocol.p() || m != protocol.m() {
        return Err(Error::ShapeMismatch {
            expected_p: protocol.p(),
            expected_m: protocol.m(),
            found_p: p,
            found_m: m,
        });
    }
    Ok(())
}

/// U(θ)|ψ_init⟩: within each layer H_1 acts first and H_M last.
pub fn evolve(protocol: &Protocol, schedule: &AngleSchedule) -> Result<StateVector> {
    check_shape(protocol, schedule.p, schedule.m)?;
    evolve_slice(protocol, &schedule.values)
}

fn evolve_slice(protocol: &Protocol, angles: &[f64]) -> Result<StateVector> {
    let mut state = protocol.initial_state.clone();
    for layer in angles.chunks(protocol.m()) {
        for (generator, &theta) in protocol.generators.iter().zip(layer) {
            generator.apply_in_place(&mut state, theta)?;
        }
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// 1 − ⟨ψ|P_gs|ψ⟩
    Infidelity,
    /// (⟨H⟩ − E_min) / (E_max − E_min)
    #[serde(alias = "relative-energy")]
    Energy,
    /// Relative entropy between half-chain entanglement spectra.
    #[serde(alias = "spectral-relative-entropy")]
    Relent,
}

impl CostKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "infidelity" => Ok(CostKind::Infidelity),
            "energy" | "relative-energy" => Ok(CostKind::Energy),
            "relent" | "spectral-relative-entropy" => Ok(CostKind::Relent),
            other => Err(Error::Config(format!("unknown cost kind {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CostKind::Infidelity => "infidelity",
            CostKind::Energy => "energy",
            CostKind::Relent => "relent",
        }
    }
}

/// Reference data a cost is measured against.
#[derive(Clone, Debug, Default)]
pub struct CostTarget {
    pub ground: Option<GroundSpace>,
    pub energies: Option<(f64, f64)>,
    pub spectrum: Option<ProbabilitySpectrum>,
    /// Bipartition used for spectra; defaults to ⌊N/2⌋.
    pub cut: Option<usize>,
}

impl CostTarget {
    pub fn from_diagonalization(
        diag: &Diagonalization,
        representative: Representative,
        cut: usize,
    ) -> Result<Self> {
        let rep = diag.ground.representative(representative);
        Ok(Self {
            ground: Some(diag.ground.clone()),
            energies: Some((diag.ground.energy(), diag.e_max)),
            spectrum: Some(spectra::entanglement_spectrum(&rep, cut)?),
            cut: Some(cut),
        })
    }
}

/// Cost of `schedule` under `kind`.
pub fn cost(
    protocol: &Protocol,
    schedule: &AngleSchedule,
    model: &SpinChainModel,
    kind: CostKind,
    target: &CostTarget,
) -> Result<f64> {
    let eval = CostEvaluator::new(protocol.clone(), model.clone(), kind, target.clone())?;
    check_shape(protocol, schedule.p, schedule.m)?;
    eval.cost_of(&schedule.values)
}

/// Precomputed cost function over flattened angle vectors.
#[derive(Clone, Debug)]
pub struct CostEvaluator {
    protocol: Protocol,
    model: SpinChainModel,
    kind: CostKind,
    target: CostTarget,
    cut: usize,
    diagonal: Vec<f64>,
}

impl CostEvaluator {
    pub fn new(
        protocol: Protocol,
        model: SpinChainModel,
        kind: CostKind,
        target: CostTarget,
    ) -> Result<Self> {
        if protocol.n() != model.n() {
            return Err(Error::DimensionMismatch {
                expected: 1 << model.n(),
                found: 1 << protocol.n(),
            });
        }
        let cut = target.cut.unwrap_or(model.n() / 2);
        match kind {
            CostKind::Infidelity if target.ground.is_none() => {
                return Err(Error::MissingTarget("infidelity"))
            }
            CostKind::Energy => match target.energies {
                None => return Err(Error::MissingTarget("energy")),
                Some((lo, hi)) if !(hi - lo > 0.0) => return Err(Error::DegenerateWidth),
                _ => {}
            },
            CostKind::Relent if target.spectrum.is_none() => {
                return Err(Error::MissingTarget("relent"))
            }
            _ => {}
        }
        if let Some(g) = &target.ground {
            if g.n() != model.n() {
                return Err(Error::DimensionMismatch {
                    expected: 1 << model.n(),
                    found: 1 << g.n(),
                });
            }
        }
        let dim = 1usize << model.n();
        let mut diagonal = vec![0.0; dim];
        for term in model.terms().iter().filter(|t| t.act_on_basis(0).0 == 0) {
            for (b, d) in diagonal.iter_mut().enumerate() {
                *d += term.coefficient() * term.act_on_basis(b).1.re;
            }
        }
        Ok(Self {
            protocol,
            model,
            kind,
            target,
            cut,
            diagonal,
        })
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn model(&self) -> &SpinChainModel {
        &self.model
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn target(&self) -> &CostTarget {
        &self.target
    }

    /// Same model and target, different protocol depth.
    pub fn with_depth(&self, p: usize) -> Result<Self> {
        Ok(Self {
            protocol: self.protocol.with_depth(p)?,
            ..self.clone()
        })
    }

    /// Same protocol and model, different cost kind.
    pub fn with_kind(&self, kind: CostKind) -> Result<Self> {
        Self::new(self.protocol.clone(), self.model.clone(), kind, self.target.clone())
    }

    pub fn state(&self, angles: &[f64]) -> Result<StateVector> {
        if angles.len() != self.protocol.len() {
            return Err(Error::ShapeMismatch {
                expected_p: self.protocol.p(),
                expected_m: self.protocol.m(),
                found_p: angles.len() / self.protocol.m(),
                found_m: self.protocol.m(),
            });
        }
        evolve_slice(&self.protocol, angles)
    }

    pub fn cost_of(&self, angles: &[f64]) -> Result<f64> {
        let psi = self.state(angles)?;
        self.cost_of_state(&psi)
    }

    pub fn cost_of_state(&self, psi: &StateVector) -> Result<f64> {
        match self.kind {
            CostKind::Infidelity => {
                let f = simulator::fidelity(psi, self.target.ground.as_ref().expect("checked"))?;
                Ok((1.0 - f).clamp(0.0, 1.0))
            }
            CostKind::Energy => {
                let (lo, hi) = self.target.energies.expect("checked");
                Ok(((self.expectation(psi) - lo) / (hi - lo)).clamp(0.0, 1.0))
            }
            CostKind::Relent => {
                let trial = spectra::entanglement_spectrum(psi, self.cut)?;
                let target = self.target.spectrum.as_ref().expect("checked");
                Ok(spectra::relative_entropy(&trial, target, RELENT_FLOOR))
            }
        }
    }

    /// Infidelity of a state against the target ground space, if one is set.
    pub fn infidelity_of(&self, angles: &[f64]) -> Result<f64> {
        let ground = self.target.ground.as_ref().ok_or(Error::MissingTarget("infidelity"))?;
        let psi = self.state(angles)?;
        Ok((1.0 - simulator::fidelity(&psi, ground)?).clamp(0.0, 1.0))
    }

    /// Relative energy of the state, if extremal energies are set.
    pub fn relative_energy_of(&self, angles: &[f64]) -> Result<f64> {
        let (lo, hi) = self.target.energies.ok_or(Error::MissingTarget("energy"))?;
        if !(hi - lo > 0.0) {
            return Err(Error::DegenerateWidth);
        }
        let psi = self.state(angles)?;
        Ok(((self.expectation(&psi) - lo) / (hi - lo)).clamp(0.0, 1.0))
    }

    fn expectation(&self, psi: &StateVector) -> f64 {
        let amps = psi.amplitudes();
        let mut total: f64 = amps.iter().zip(&self.diagonal).map(|(a, d)| a.norm_sqr() * d).sum();
        for term in self.model.terms().iter().filter(|t| t.act_on_basis(0).0 != 0) {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for (b, a) in amps.iter().enumerate() {
                let (t, phase) = term.act_on_basis(b);
                acc += amps[t].conj() * phase * a;
            }
            total += term.coefficient() * acc.re;
        }
        total
    }

    pub fn reduce(&self, angles: &[f64]) -> Vec<f64> {
        let mut v = angles.to_vec();
        reduce_in_place(&mut v, &self.protocol);
        v
    }

    pub fn schedule(&self, angles: &[f64]) -> Result<AngleSchedule> {
        AngleSchedule::new(self.protocol.p(), self.protocol.m(), angles.to_vec())
    }
}

impl Objective for CostEvaluator {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.cost_of(x).unwrap_or(f64::INFINITY)
    }

    fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        self.reduce(x)
    }
}
