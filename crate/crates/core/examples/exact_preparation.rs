//! Prepare the transverse-field Ising ground state with p = N/2 layers,
//! increasing the depth one layer at a time.
//!
//! ```bash
//! cargo run --release --example exact_preparation -- 1.0
//! ```

use qaoalab::models::{build_model, diagonalize, Family, Representative, DEFAULT_DEGENERACY_TOL};
use qaoalab::optimize::{basinhop, seed_from_previous_p, BasinHopConfig};
use qaoalab::qaoa::{reduce_angles, total_time, CostEvaluator, CostKind, CostTarget, Protocol, ProtocolName};

fn main() -> qaoalab::Result<()> {
    let hx: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let n = 6;
    let model = build_model(Family::Fm, n, hx, 0.0)?;
    let diag = diagonalize(&model, DEFAULT_DEGENERACY_TOL)?;
    let target = CostTarget::from_diagonalization(&diag, Representative::ZeroMomentum, n / 2)?;
    let eval = CostEvaluator::new(Protocol::named(ProtocolName::Ising3, 1, n)?, model, CostKind::Infidelity, target)?;

    let cfg = BasinHopConfig::default();
    let mut x = vec![0.1; 3];
    for p in 1..=n / 2 {
        let e = eval.with_depth(p)?;
        let run = basinhop(&e, &x, &cfg.derived(&[p as u64]))?;
        let schedule = reduce_angles(&e.schedule(&run.best_point)?, e.protocol());
        println!("p={p} 1−f={:.3e} T={:.4} evaluations={}", run.best_cost, total_time(&schedule), run.evaluations);
        for i in 0..p {
            println!("    layer {i}: θ_ZZ={:.4} θ_X={:.4} θ_Z={:.4}", schedule.get(i, 0), schedule.get(i, 1), schedule.get(i, 2));
        }
        x = seed_from_previous_p(&schedule, Some(e.protocol())).into_vec();
    }
    Ok(())
}
