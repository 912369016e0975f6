//! Periodic spin-chain Hamiltonians as Pauli-string sums, with dense exact
//! diagonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::StateVector;

/// Largest system size accepted by the dense backend.
pub const DENSE_CAP: usize = 14;

/// Default absolute energy window for ground-space degeneracy.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `coefficient · ∏ σ^{axis}_{site}` with distinct sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawTerm", into = "RawTerm")]
pub struct PauliTerm {
    coefficient: f64,
    factors: Vec<(usize, Axis)>,
    flip_mask: usize,
    sign_mask: usize,
    y_count: u32,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    coefficient: f64,
    factors: Vec<(usize, Axis)>,
}

impl From<RawTerm> for PauliTerm {
    fn from(raw: RawTerm) -> Self {
        PauliTerm::unchecked(raw.coefficient, raw.factors)
    }
}

impl From<PauliTerm> for RawTerm {
    fn from(term: PauliTerm) -> Self {
        RawTerm {
            coefficient: term.coefficient,
            factors: term.factors,
        }
    }
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: Vec<(usize, Axis)>, n: usize) -> Result<Self> {
        let mut seen = 0usize;
        for &(site, _) in &factors {
            if site >= n {
                return Err(Error::InvalidTerm(format!("site {site} out of range for N={n}")));
            }
            if seen & (1 << site) != 0 {
                return Err(Error::InvalidTerm(format!("site {site} repeated")));
            }
            seen |= 1 << site;
        }
        if !coefficient.is_finite() {
            return Err(Error::InvalidTerm("non-finite coefficient".into()));
        }
        Ok(Self::unchecked(coefficient, factors))
    }

    /// Multiple of the identity.
    pub fn identity(coefficient: f64) -> Self {
        Self::unchecked(coefficient, Vec::new())
    }

    fn unchecked(coefficient: f64, factors: Vec<(usize, Axis)>) -> Self {
        let mut flip_mask = 0;
        let mut sign_mask = 0;
        let mut y_count = 0;
        for &(site, axis) in &factors {
            match axis {
                Axis::X => flip_mask |= 1 << site,
                Axis::Y => {
                    flip_mask |= 1 << site;
                    sign_mask |= 1 << site;
                    y_count += 1;
                }
                Axis::Z => sign_mask |= 1 << site,
            }
        }
        Self {
            coefficient,
            factors,
            flip_mask,
            sign_mask,
            y_count,
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    /// Whether the string has a real matrix in the computational basis.
    pub fn is_real(&self) -> bool {
        self.y_count.is_multiple_of(2)
    }

    /// The Pauli string (without coefficient) acting on basis state `b`:
    /// returns the image basis index and its phase.
    #[inline]
    pub fn act_on_basis(&self, b: usize) -> (usize, Complex64) {
        // Y = iXZ, so each Y contributes a factor i on top of the Z sign.
        let negative = (b & self.sign_mask).count_ones() % 2 == 1;
        let mut phase = match self.y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if negative {
            phase = -phase;
        }
        (b ^ self.flip_mask, phase)
    }
}

pub(crate) fn zz_bonds(n: usize, coefficient: f64) -> Vec<PauliTerm> {
    (0..n)
        .map(|i| PauliTerm::unchecked(coefficient, vec![(i, Axis::Z), ((i + 1) % n, Axis::Z)]))
        .collect()
}

pub(crate) fn zzz_triples(n: usize, coefficient: f64) -> Vec<PauliTerm> {
    (0..n)
        .map(|i| {
            PauliTerm::unchecked(
                coefficient,
                vec![(i, Axis::Z), ((i + 1) % n, Axis::Z), ((i + 2) % n, Axis::Z)],
            )
        })
        .collect()
}

pub(crate) fn field_terms(n: usize, axis: Axis, coefficient: f64) -> Vec<PauliTerm> {
    (0..n)
        .map(|i| PauliTerm::unchecked(coefficient, vec![(i, axis)]))
        .collect()
}

pub(crate) fn hopping_bonds(n: usize, coefficient: f64) -> Vec<PauliTerm> {
    (0..n)
        .flat_map(|i| {
            let j = (i + 1) % n;
            [
                PauliTerm::unchecked(coefficient, vec![(i, Axis::X), (j, Axis::X)]),
                PauliTerm::unchecked(coefficient, vec![(i, Axis::Y), (j, Axis::Y)]),
            ]
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    #[serde(alias = "fm-ising", alias = "FM")]
    Fm,
    #[serde(alias = "afm-ising", alias = "AFM")]
    Afm,
    #[serde(alias = "three-spin")]
    Threespin,
    Custom,
}

impl Family {
    pub fn min_size(self) -> usize {
        match self {
            Family::Threespin => 3,
            _ => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fm" | "fm-ising" => Ok(Family::Fm),
            "afm" | "afm-ising" => Ok(Family::Afm),
            "threespin" | "three-spin" => Ok(Family::Threespin),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Config(format!("unknown model family {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Fm => "fm",
            Family::Afm => "afm",
            Family::Threespin => "threespin",
            Family::Custom => "custom",
        }
    }
}

/// A periodic spin chain Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinChainModel {
    n: usize,
    family: Family,
    hx: f64,
    hz: f64,
    terms: Vec<PauliTerm>,
}

/// FM/AFM Ising: `H = −Σ(±1)Z_iZ_{i+1} − h_x ΣX_i − h_z ΣZ_i`;
/// three-spin: `H = −ΣZ_iZ_{i+1}Z_{i+2} − h_x ΣX_i − h_z ΣZ_i`.
pub fn build_model(family: Family, n: usize, hx: f64, hz: f64) -> Result<SpinChainModel> {
    if family == Family::Custom {
        return Err(Error::Config("custom models are built with SpinChainModel::custom".into()));
    }
    if n < family.min_size() {
        return Err(Error::SystemTooSmall {
            n,
            min: family.min_size(),
        });
    }
    if !hx.is_finite() || !hz.is_finite() {
        return Err(Error::Config("fields must be finite".into()));
    }
    let mut terms = match family {
        Family::Fm => zz_bonds(n, -1.0),
        Family::Afm => zz_bonds(n, 1.0),
        _ => zzz_triples(n, -1.0),
    };
    terms.extend(field_terms(n, Axis::X, -hx));
    terms.extend(field_terms(n, Axis::Z, -hz));
    Ok(SpinChainModel {
        n,
        family,
        hx,
        hz,
        terms,
    })
}

impl SpinChainModel {
    pub fn custom(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::SystemTooSmall { n, min: 1 });
        }
        for t in &terms {
            PauliTerm::new(t.coefficient, t.factors.clone(), n)?;
        }
        Ok(Self {
            n,
            family: Family::Custom,
            hx: 0.0,
            hz: 0.0,
            terms: terms
                .into_iter()
                .map(|t| PauliTerm::unchecked(t.coefficient, t.factors))
                .collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hz(&self) -> f64 {
        self.hz
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(PauliTerm::is_real)
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    Ok(())
}

/// Dense Hamiltonian matrix in the computational basis.
pub fn to_dense(model: &SpinChainModel) -> Result<DMatrix<Complex64>> {
    to_dense_with_cap(model, DENSE_CAP)
}

pub fn to_dense_with_cap(model: &SpinChainModel, cap: usize) -> Result<DMatrix<Complex64>> {
    check_cap(model.n, cap)?;
    let dim = 1usize << model.n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim {
        for term in &model.terms {
            let (row, phase) = term.act_on_basis(b);
            h[(row, b)] += phase * term.coefficient;
        }
    }
    Ok(h)
}

fn to_dense_real(model: &SpinChainModel) -> Result<DMatrix<f64>> {
    check_cap(model.n, DENSE_CAP)?;
    let dim = 1usize << model.n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        for term in &model.terms {
            let (row, phase) = term.act_on_basis(b);
            h[(row, b)] += phase.re * term.coefficient;
        }
    }
    Ok(h)
}

/// Lowest-energy eigenspace of a model.
#[derive(Clone, Debug)]
pub struct GroundSpace {
    energy: f64,
    basis: Vec<StateVector>,
    tolerance: f64,
}

impl GroundSpace {
    /// Wraps an explicit orthonormal set.
    pub fn from_states(energy: f64, basis: Vec<StateVector>, tolerance: f64) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Numeric("empty ground space".into()));
        }
        Ok(Self {
            energy,
            basis,
            tolerance,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn degeneracy(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn n(&self) -> usize {
        self.basis[0].n()
    }

    /// A single state standing in for the ground space, used wherever one
    /// vector is required (entanglement spectra, relative entropy).
    pub fn representative(&self, choice: Representative) -> StateVector {
        if self.basis.len() == 1 || choice == Representative::First {
            return self.basis[0].clone();
        }
        // Translation maps the ground space to itself, so averaging any
        // member over the cyclic group lands in its zero-momentum part.
        for v in &self.basis {
            let n = v.n();
            let mut acc = v.clone();
            let mut shifted = v.clone();
            for _ in 1..n {
                shifted = shifted.translate();
                for (a, s) in acc.amplitudes_mut().iter_mut().zip(shifted.amplitudes()) {
                    *a += s;
                }
            }
            if acc.norm() > 1e-6 {
                let amps = acc.amplitudes().to_vec();
                let mut state = StateVector::from_amplitudes(n, amps).expect("nonzero norm");
                fix_global_phase(&mut state);
                return state;
            }
        }
        self.basis[0].clone()
    }
}

/// Which member of a degenerate ground space represents it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representative {
    /// First eigenvector returned by the eigensolver.
    First,
    /// The translation-invariant (zero-momentum) member.
    #[default]
    ZeroMomentum,
}

fn fix_global_phase(state: &mut StateVector) {
    let pivot = state
        .amplitudes()
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |acc, a| if a.norm() > acc.norm() + 1e-12 { a } else { acc });
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        for a in state.amplitudes_mut() {
            *a *= rot;
        }
    }
}

/// Ground space together with the top of the spectrum.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub ground: GroundSpace,
    pub e_max: f64,
}

/// One dense eigensolve yielding both the ground space and `E_max`.
pub fn diagonalize(model: &SpinChainModel, tol: f64) -> Result<Diagonalization> {
    let n = model.n;
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = if model.is_real() {
        let eig = SymmetricEigen::new(to_dense_real(model)?);
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vecs = (0..vals.len())
            .map(|k| eig.eigenvectors.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        (vals, vecs)
    } else {
        let eig = SymmetricEigen::new(to_dense(model)?);
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vecs = (0..vals.len())
            .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        (vals, vecs)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigensolver returned non-finite values".into()));
    }
    let e_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let e_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..values.len()).filter(|&k| values[k] <= e_min + tol).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    // Re-orthonormalize; the solver output already is, up to rounding.
    let mut basis: Vec<StateVector> = Vec::with_capacity(order.len());
    for k in order {
        let mut v = StateVector::from_amplitudes(n, vectors[k].clone())?;
        for u in &basis {
            let overlap = u.inner(&v)?;
            for (a, b) in v.amplitudes_mut().iter_mut().zip(u.amplitudes()) {
                *a -= overlap * b;
            }
        }
        let amps = v.amplitudes().to_vec();
        let mut v = StateVector::from_amplitudes(n, amps)?;
        fix_global_phase(&mut v);
        basis.push(v);
    }
    Ok(Diagonalization {
        ground: GroundSpace {
            energy: e_min,
            basis,
            tolerance: tol,
        },
        e_max,
    })
}

/// All eigenvectors within `tol` of the minimum eigenvalue.
pub fn ground_space(model: &SpinChainModel, tol: f64) -> Result<GroundSpace> {
    Ok(diagonalize(model, tol)?.ground)
}

/// `(E_min, E_max)` of the dense spectrum.
pub fn extremal_energies(model: &SpinChainModel) -> Result<(f64, f64)> {
    let values = if model.is_real() {
        to_dense_real(model)?.symmetric_eigenvalues().iter().copied().collect::<Vec<_>>()
    } else {
        to_dense(model)?.symmetric_eigenvalues().iter().copied().collect::<Vec<_>>()
    };
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Full sorted spectrum, ascending.
pub fn spectrum(model: &SpinChainModel) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = if model.is_real() {
        to_dense_real(model)?.symmetric_eigenvalues().iter().copied().collect()
    } else {
        to_dense(model)?.symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}
