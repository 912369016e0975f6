//! Sweep a small (h_x, h_z) grid, then correlate D_F with the infidelity and
//! histogram the optimal angles. Records land in `sweep-demo/` and a rerun
//! resumes from them.
//!
//! ```bash
//! cargo run --release --example phase_sweep
//! ```

use std::path::Path;

use qaoalab::experiments::{angle_histogram, correlate, sweep, AxisSpec, GridSpec, OpenEnd, SweepSpec};
use qaoalab::models::Family;

fn main() -> qaoalab::Result<()> {
    let grid = GridSpec {
        hx: AxisSpec::uniform(0.0, 2.0, 4, OpenEnd::Low),
        hz: AxisSpec::uniform(0.0, 2.0, 4, OpenEnd::Low),
    };
    let mut spec = SweepSpec::new(Family::Fm, 4, 2, grid);
    spec.optimizer.hops = 10;
    spec.refine_rounds = 1;
    spec.seed = 7;

    let progress = |r: &qaoalab::experiments::SweepRecord| {
        println!("round={} hx={:.2} hz={:.2} 1−f={:.3e} D_F={:.3e}", r.round, r.hx, r.hz, r.best_cost, r.df);
    };
    let out = sweep(&spec, Some(Path::new("sweep-demo")), Some(&progress))?;

    let c = correlate(&out.records)?;
    let show = |r: Option<f64>| r.map_or("undefined".to_string(), |v| format!("{v:.3}"));
    println!("log-log r = {}, raw r = {}", show(c.log_r), show(c.raw_r));
    for (j, name) in ["ZZ", "X", "Z"].iter().enumerate() {
        let h = angle_histogram(&out.records, j, 18, 0.2)?;
        println!("θ_{name}: {:.2} of {} angles within 0.2 of a multiple of π/2", h.near_fraction, h.total);
    }
    Ok(())
}
