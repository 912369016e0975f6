//! Best relative energy under a total-time budget, with Σθ ≤ T and Σθ = T.
//!
//! ```bash
//! cargo run --release --example time_landscape
//! ```

use qaoalab::experiments::{landscape_scan, ConstraintMode, LandscapeSpec, PointSpec};
use qaoalab::models::Family;
use qaoalab::optimize::BasinHopConfig;

fn main() -> qaoalab::Result<()> {
    for mode in [ConstraintMode::AtMost, ConstraintMode::Exactly] {
        let spec = LandscapeSpec {
            point: PointSpec::new(Family::Afm, 4, 1.0, 1.0, 2),
            points: vec![(1.0, 1.0)],
            t_values: vec![0.5, 1.0, 1.5, 2.0, 3.0, 4.0],
            mode,
            optimizer: BasinHopConfig { hops: 10, ..Default::default() },
            seed: 2,
        };
        println!("{mode:?}");
        for row in landscape_scan(&spec, None)? {
            println!("  T={:<4} ε={:.4e} Σθ={:.4}", row.t, row.epsilon, row.angles.iter().sum::<f64>());
        }
    }
    Ok(())
}
