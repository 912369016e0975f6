//! Write local minima under a fixed time budget as a TSV table for t-SNE or
//! any other embedding tool.
//!
//! ```bash
//! cargo run --release --example export_samples
//! ```

use std::path::Path;

use qaoalab::experiments::{export_samples_for_embedding, PointSpec, SampleExportSpec};
use qaoalab::models::Family;
use qaoalab::optimize::{BasinHopConfig, TimeConstraint};

fn main() -> qaoalab::Result<()> {
    let spec = SampleExportSpec {
        point: PointSpec::new(Family::Afm, 4, 1.0, 1.0, 2),
        constraint: Some(TimeConstraint::Exactly(2.0)),
        count: 50,
        optimizer: BasinHopConfig::default(),
        seed: 11,
    };
    let path = Path::new("samples-demo.tsv");
    let rows = export_samples_for_embedding(&spec, path)?;
    let best = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    println!("wrote {} rows to {}, best ε {best:.4e}", rows.len(), path.display());
    Ok(())
}
