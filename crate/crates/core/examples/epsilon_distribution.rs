//! Distribution of local-minimum relative energies from random starts.
//!
//! ```bash
//! cargo run --release --example epsilon_distribution
//! ```

use qaoalab::experiments::{epsilon_distribution, DistributionSpec, PointSpec};
use qaoalab::models::Family;
use qaoalab::optimize::BasinHopConfig;

fn main() -> qaoalab::Result<()> {
    for (hx, hz) in [(0.1, 0.1), (1.0, 1.0)] {
        let spec = DistributionSpec {
            point: PointSpec::new(Family::Afm, 6, hx, hz, 3),
            samples: 200,
            bins: 12,
            optimizer: BasinHopConfig::default(),
            seed: 3,
        };
        let d = epsilon_distribution(&spec, None)?;
        println!("({hx}, {hz}): median log10 ε = {:.3}, initial-state ε = {:.4}", d.median_log10, d.zero_start);
        let peak = d.counts.iter().copied().max().unwrap_or(1).max(1);
        for (k, &count) in d.counts.iter().enumerate() {
            println!("  [{:>6.2}, {:>6.2}) {}", d.edges[k], d.edges[k + 1], "#".repeat(40 * count / peak));
        }
    }
    Ok(())
}
