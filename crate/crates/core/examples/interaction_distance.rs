//! Interaction distance D_F of entanglement spectra.
//!
//! ```bash
//! cargo run --release --example interaction_distance
//! ```

use qaoalab::models::{build_model, ground_space, Family, Representative, DEFAULT_DEGENERACY_TOL};
use qaoalab::spectra::{entanglement_spectrum, gaussian_spectrum, interaction_distance, vne, DfConfig, ProbabilitySpectrum, CONJECTURED_BOUND};

fn main() -> qaoalab::Result<()> {
    let cfg = DfConfig::default();

    // three equal weights: no free-fermion spectrum gets closer than 1/6
    let triplet = ProbabilitySpectrum::new(vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    let r = interaction_distance(&triplet, 3, &cfg)?;
    println!("triplet: D_F={:.9} (bound {CONJECTURED_BOUND:.6}) energies={:.3?}", r.distance, r.energies);

    // any Gaussian spectrum is free
    let free = gaussian_spectrum(&[0.4, 1.3, 2.2]);
    println!("gaussian: D_F={:.2e}", interaction_distance(&free, 3, &cfg)?.distance);

    // half-chain ground states across the longitudinal field
    for hz in [0.0, 0.1, 0.5, 1.0] {
        let model = build_model(Family::Fm, 8, 1.0, hz)?;
        let psi = ground_space(&model, DEFAULT_DEGENERACY_TOL)?.representative(Representative::ZeroMomentum);
        let s = entanglement_spectrum(&psi, 4)?;
        let r = interaction_distance(&s, 4, &cfg)?;
        println!("FM N=8 hx=1 hz={hz}: D_F={:.3e} VNE={:.4}", r.distance, vne(&s));
    }
    Ok(())
}
