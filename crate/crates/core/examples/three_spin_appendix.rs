//! The three-spin chain at (h_x, h_z) = (0, −1): its period-three ground
//! state is prepared exactly by alternating ZZZ and XXYY layers started from
//! the hopping ground state at magnetization −N/3.
//!
//! ```bash
//! cargo run --release --example three_spin_appendix
//! ```

use qaoalab::models::{build_model, diagonalize, Family, Representative, DEFAULT_DEGENERACY_TOL};
use qaoalab::optimize::{basinhop, seed_from_previous_p, BasinHopConfig};
use qaoalab::qaoa::{CostEvaluator, CostKind, CostTarget, Protocol, ProtocolName};
use qaoalab::spectra::{entanglement_spectrum, interaction_distance, DfConfig};

fn main() -> qaoalab::Result<()> {
    let n = 6;
    let model = build_model(Family::Threespin, n, 0.0, -1.0)?;
    let diag = diagonalize(&model, DEFAULT_DEGENERACY_TOL)?;
    let rep = diag.ground.representative(Representative::ZeroMomentum);
    let spectrum = entanglement_spectrum(&rep, n / 2)?;
    let df = interaction_distance(&spectrum, n / 2, &DfConfig::default())?;
    println!("degeneracy {} spectrum {:.4?} D_F {:.6}", diag.ground.degeneracy(), &spectrum.values()[..4], df.distance);

    let target = CostTarget::from_diagonalization(&diag, Representative::ZeroMomentum, n / 2)?;
    let eval = CostEvaluator::new(Protocol::named(ProtocolName::Appendix2, 1, n)?, model, CostKind::Infidelity, target)?;
    let mut x = vec![0.1; 2];
    for p in 1..=n / 2 {
        let e = eval.with_depth(p)?;
        let run = basinhop(&e, &x, &BasinHopConfig::default().derived(&[p as u64]))?;
        println!("p={p} 1−f={:.3e}", run.best_cost);
        x = seed_from_previous_p(&e.schedule(&run.best_point)?, Some(e.protocol())).into_vec();
    }
    Ok(())
}
