//! The three costs evaluated on the same schedules: ground-space infidelity,
//! relative energy ε and the relative entropy of entanglement spectra.
//!
//! ```bash
//! cargo run --release --example cost_functions
//! ```

use qaoalab::models::{build_model, diagonalize, Family, Representative, DEFAULT_DEGENERACY_TOL};
use qaoalab::qaoa::{CostEvaluator, CostKind, CostTarget, Protocol, ProtocolName};

fn main() -> qaoalab::Result<()> {
    let n = 6;
    let model = build_model(Family::Afm, n, 1.0, 0.5)?;
    let diag = diagonalize(&model, DEFAULT_DEGENERACY_TOL)?;
    let target = CostTarget::from_diagonalization(&diag, Representative::ZeroMomentum, n / 2)?;
    let proto = Protocol::named(ProtocolName::Ising3, 2, n)?;
    let inf = CostEvaluator::new(proto, model, CostKind::Infidelity, target)?;
    let eps = inf.with_kind(CostKind::Energy)?;
    let rel = inf.with_kind(CostKind::Relent)?;

    for angles in [[0.0; 6], [0.2, 0.4, 0.0, 0.5, 0.3, 0.1], [0.7, 1.2, 0.3, 0.4, 0.9, 1.5]] {
        println!(
            "{angles:?}: 1−f={:.4} ε={:.4} relent={:.4}",
            inf.cost_of(&angles)?,
            eps.cost_of(&angles)?,
            rel.cost_of(&angles)?
        );
    }
    Ok(())
}
