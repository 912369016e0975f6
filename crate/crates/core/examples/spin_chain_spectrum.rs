//! Build the three chain families and look at their low-energy structure.
//!
//! ```bash
//! cargo run --release --example spin_chain_spectrum
//! ```

use qaoalab::models::{build_model, diagonalize, spectrum, Family, DEFAULT_DEGENERACY_TOL};

fn main() -> qaoalab::Result<()> {
    for (family, hx, hz) in [
        (Family::Fm, 1.0, 0.0),
        (Family::Fm, 0.5, 0.5),
        (Family::Afm, 1.0, 1.0),
        (Family::Threespin, 0.0, -1.0),
    ] {
        let model = build_model(family, 6, hx, hz)?;
        let diag = diagonalize(&model, DEFAULT_DEGENERACY_TOL)?;
        let levels = spectrum(&model)?;
        println!(
            "{:<9} hx={hx:<4} hz={hz:<4} E0={:>10.6} degeneracy={} gap={:.4} width={:.4}",
            family.name(),
            diag.ground.energy(),
            diag.ground.degeneracy(),
            levels[diag.ground.degeneracy()] - levels[0],
            diag.e_max - diag.ground.energy(),
        );
    }

    // terms are plain Pauli strings; site 0 is the least significant bit
    let model = build_model(Family::Fm, 3, 0.7, 0.2)?;
    for term in model.terms() {
        println!("{:+.2} {:?}", term.coefficient(), term.factors());
    }
    Ok(())
}
