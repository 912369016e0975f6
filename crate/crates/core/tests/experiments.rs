use std::f64::consts::{FRAC_PI_4, PI};
use std::fs;

use approx::assert_abs_diff_eq;
use qaoalab::experiments::*;
use qaoalab::models::Family;
use qaoalab::optimize::{BasinHopConfig, TimeConstraint};
use qaoalab::qaoa::{angle_domain, CostKind, ProtocolName};
use qaoalab::simulator::GeneratorKind;

fn quick() -> BasinHopConfig {
    BasinHopConfig {
        hops: 4,
        ..Default::default()
    }
}

fn small_spec(grid: GridSpec) -> SweepSpec {
    let mut spec = SweepSpec::new(Family::Fm, 4, 2, grid);
    spec.optimizer = quick();
    spec.refine_rounds = 1;
    spec.seed = 21;
    spec
}

fn grid(hx: &[f64], hz: &[f64]) -> GridSpec {
    GridSpec {
        hx: AxisSpec::Values(hx.to_vec()),
        hz: AxisSpec::Values(hz.to_vec()),
    }
}

fn record(schedule: Vec<Vec<f64>>, df: f64, cost: f64) -> SweepRecord {
    SweepRecord {
        family: Family::Fm,
        n: 4,
        p: schedule.len(),
        hx: 1.0,
        hz: 1.0,
        protocol: ProtocolName::Ising3,
        cost_kind: CostKind::Infidelity,
        best_cost: cost,
        schedule,
        df,
        vne: 0.0,
        e_min: -1.0,
        e_max: 1.0,
        degeneracy: 1,
        snapped_cost: None,
        seed: 0,
        wall_time: 0.0,
        round: 0,
        index: 0,
    }
}

#[test]
fn sweep_writes_valid_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(grid(&[0.5, 1.5], &[0.0, 0.25, 1.0]));
    let out = sweep(&spec, Some(dir.path()), None).unwrap();
    assert!(out.failures.is_empty());
    assert_eq!(out.records.len(), 6);
    assert_eq!(out.history.len(), 12);
    for r in &out.records {
        assert!((0.0..=1.0).contains(&r.best_cost));
        assert!((0.0..=1.0).contains(&r.df));
        assert_eq!(r.schedule.len(), 2);
        assert!(r.snapped_cost.is_some());
    }
    // control row at h_z = 0 is free, the next row is not
    for c in 0..2 {
        assert!(out.records[c].df <= 1e-6);
        assert!(out.records[2 + c].df > out.records[c].df);
    }
    for name in ["records.jsonl", "summary.csv", "heatmap_cost.svg", "heatmap_df.svg", "heatmap_vne.svg"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let reread = read_records(&dir.path().join("records.jsonl")).unwrap();
    assert_eq!(reread, out.records);
    let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("index,round,family"));
}

#[test]
fn refinement_is_monotone() {
    let mut spec = small_spec(grid(&[0.4, 1.0, 1.6], &[0.3, 0.9]));
    spec.refine_rounds = 2;
    let out = sweep(&spec, None, None).unwrap();
    for r in out.history.iter().filter(|r| r.round > 0) {
        let prev = out
            .history
            .iter()
            .find(|q| q.index == r.index && q.round + 1 == r.round)
            .unwrap();
        assert!(r.best_cost <= prev.best_cost);
    }
}

#[test]
fn reruns_and_resumes_reproduce_records() {
    let spec = small_spec(grid(&[0.5, 1.0, 1.5], &[0.5, 1.0]));
    let full = tempfile::tempdir().unwrap();
    let reference = sweep(&spec, Some(full.path()), None).unwrap();
    let again = sweep(&spec, None, None).unwrap();
    let strip = |v: &[SweepRecord]| v.iter().map(SweepRecord::without_timing).collect::<Vec<_>>();
    assert_eq!(strip(&reference.history), strip(&again.history));

    // interrupted run: header plus a few records, then a torn line
    let partial = tempfile::tempdir().unwrap();
    let ledger = fs::read_to_string(full.path().join("records.jsonl")).unwrap();
    let lines: Vec<&str> = ledger.lines().collect();
    let mut cut = lines[..4].join("\n");
    cut.push('\n');
    cut.push_str(&lines[4][..lines[4].len() / 2]);
    fs::write(partial.path().join("records.jsonl"), cut).unwrap();
    let resumed = sweep(&spec, Some(partial.path()), None).unwrap();
    assert_eq!(strip(&resumed.records), strip(&reference.records));
    assert_eq!(
        strip(&read_records(&partial.path().join("records.jsonl")).unwrap()),
        strip(&reference.records)
    );

    // a different spec cannot resume into the same directory
    let mut other = spec.clone();
    other.seed += 1;
    assert!(sweep(&other, Some(full.path()), None).is_err());
}

#[test]
fn invalid_sweeps_are_rejected() {
    let mut spec = small_spec(grid(&[1.0], &[1.0]));
    spec.p = 0;
    assert!(sweep(&spec, None, None).is_err());
    let bad = small_spec(GridSpec {
        hx: AxisSpec::uniform(0.0, 2.0, 1, OpenEnd::Low),
        hz: AxisSpec::Values(vec![1.0]),
    });
    assert!(sweep(&bad, None, None).is_err());
}

#[test]
fn correlation_examples() {
    let x = [0.1, 0.01, 0.3, 1e-5, 0.07];
    let c = correlate_values(&x, &x).unwrap();
    assert_abs_diff_eq!(c.log_r.unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(c.raw_r.unwrap(), 1.0, epsilon = 1e-12);
    let inv: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
    assert_abs_diff_eq!(correlate_values(&x, &inv).unwrap().log_r.unwrap(), -1.0, epsilon = 1e-12);
    let flat = correlate_values(&x, &[0.5; 5]).unwrap();
    assert_eq!(flat.log_r, None);
    assert!(correlate_values(&x[..2], &x[..2]).is_err());
    assert!(correlate_values(&x, &x[..4]).is_err());
    // exactly prepared points sit at the floor instead of −∞
    let c = correlate_values(&[0.0, 1e-3, 1e-2], &[0.0, 1e-3, 1e-2]).unwrap();
    assert_abs_diff_eq!(c.log_r.unwrap(), 1.0, epsilon = 1e-9);
    assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(1.0));
}

#[test]
fn correlate_reads_df_against_cost() {
    let records: Vec<SweepRecord> = [1e-4, 1e-3, 1e-2, 1e-1]
        .iter()
        .map(|&d| record(vec![vec![0.0; 3]], d, d * 10.0))
        .collect();
    let c = correlate(&records).unwrap();
    assert_abs_diff_eq!(c.log_r.unwrap(), 1.0, epsilon = 1e-12);
    assert_eq!(c.samples, 4);
}

#[test]
fn histogram_of_quarter_pi_has_no_near_multiples() {
    let records: Vec<SweepRecord> = (0..5)
        .map(|_| record(vec![vec![0.3, 1.0, FRAC_PI_4], vec![0.2, 2.0, FRAC_PI_4 + PI]], 0.0, 0.0))
        .collect();
    let h = angle_histogram(&records, 2, 8, 0.2).unwrap();
    assert_eq!(h.near_fraction, 0.0);
    assert_eq!(h.total, 10);
    assert_eq!(h.counts[2], 10);
    assert_eq!(h.edges.len(), 9);
    let wrapped = vec![record(vec![vec![0.0, 0.0, PI - 0.05], vec![0.0, 0.0, 1.6]], 0.0, 0.0)];
    assert_eq!(angle_histogram(&wrapped, 2, 4, 0.2).unwrap().near_fraction, 1.0);
    assert!(angle_histogram(&records, 3, 8, 0.2).is_err());
    let mut mixed = records.clone();
    mixed[1].protocol = ProtocolName::Threespin3;
    assert!(angle_histogram(&mixed, 2, 8, 0.2).is_err());
}

#[test]
fn free_line_z_angles_cluster_at_zero() {
    let spec = small_spec(grid(&[0.5, 1.0, 1.5], &[0.0]));
    let out = sweep(&spec, None, None).unwrap();
    let h = angle_histogram(&out.records, 2, 36, 0.2).unwrap();
    assert!(h.near_fraction >= 0.99, "{}", h.near_fraction);
}

fn distribution(samples: usize) -> DistributionSpec {
    DistributionSpec {
        point: PointSpec::new(Family::Afm, 4, 1.0, 1.0, 2),
        samples,
        bins: 16,
        optimizer: BasinHopConfig::default(),
        seed: 5,
    }
}

#[test]
fn epsilon_distribution_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = epsilon_distribution(&distribution(100), Some(dir.path())).unwrap();
    let b = epsilon_distribution(&distribution(100), None).unwrap();
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.counts.iter().sum::<usize>(), 100);
    let eval = distribution(100).point.evaluator().unwrap();
    assert_eq!(a.zero_start, eval.relative_energy_of(&[0.0; 6]).unwrap());
    for s in &a.samples {
        assert!(s.start.iter().all(|v| (0.0..PI).contains(v)));
        assert!((0.0..=1.0).contains(&s.epsilon));
    }
    let csv = fs::read_to_string(dir.path().join("distribution_samples.csv")).unwrap();
    // header, the zero-angle sanity row, then one row per sample
    assert_eq!(csv.lines().count(), 102);
    assert!(csv.lines().nth(1).unwrap().starts_with("zero,"));
    assert!(dir.path().join("histogram.csv").exists());
    assert!(epsilon_distribution(&distribution(99), None).is_err());
}

fn landscape(mode: ConstraintMode, t_values: Vec<f64>) -> LandscapeSpec {
    LandscapeSpec {
        point: PointSpec::new(Family::Afm, 4, 1.0, 1.0, 2),
        points: vec![(1.0, 1.0), (0.1, 2.0)],
        t_values,
        mode,
        optimizer: quick(),
        seed: 3,
    }
}

#[test]
fn at_most_landscape_is_monotone_and_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let rows = landscape_scan(&landscape(ConstraintMode::AtMost, vec![0.25, 0.5, 1.0, 2.0, 4.0]), Some(dir.path())).unwrap();
    assert_eq!(rows.len(), 10);
    for pair in rows.windows(2).filter(|w| w[0].hx == w[1].hx && w[0].hz == w[1].hz) {
        assert!(pair[1].epsilon <= pair[0].epsilon + 1e-6);
    }
    for r in &rows {
        assert!(TimeConstraint::AtMost(r.t).is_satisfied(&r.angles, 1e-9));
    }
    let csv = fs::read_to_string(dir.path().join("landscape.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn exact_landscape_meets_budgets() {
    let rows = landscape_scan(&landscape(ConstraintMode::Exactly, vec![0.5, 1.5]), None).unwrap();
    for r in &rows {
        assert!(TimeConstraint::Exactly(r.t).is_satisfied(&r.angles, 1e-9));
    }
    assert!(landscape_scan(&landscape(ConstraintMode::Exactly, vec![1.0, 0.5]), None).is_err());
    assert!(landscape_scan(&landscape(ConstraintMode::Exactly, vec![-1.0]), None).is_err());
}

#[test]
fn generous_budget_matches_unconstrained_optimum() {
    // FM on the free line at p = N/2 reaches zero either way
    let mut point = PointSpec::new(Family::Fm, 4, 1.0, 0.0, 2);
    point.protocol = ProtocolName::Ising3;
    let spec = LandscapeSpec {
        point: point.clone(),
        points: vec![(1.0, 0.0)],
        t_values: vec![2.0 * 3.0 * PI],
        mode: ConstraintMode::AtMost,
        optimizer: BasinHopConfig { hops: 20, ..Default::default() },
        seed: 1,
    };
    let rows = landscape_scan(&spec, None).unwrap();
    let eval = point.evaluator().unwrap();
    let free = qaoalab::optimize::basinhop(&eval, &[0.1; 6], &BasinHopConfig { hops: 20, ..Default::default() }).unwrap();
    assert!((rows[0].epsilon - free.best_cost).abs() <= 1e-6, "{} vs {}", rows[0].epsilon, free.best_cost);
}

fn export(count: usize, constraint: Option<TimeConstraint>) -> SampleExportSpec {
    SampleExportSpec {
        point: PointSpec::new(Family::Afm, 4, 1.0, 1.0, 2),
        constraint,
        count,
        optimizer: BasinHopConfig::default(),
        seed: 2,
    }
}

#[test]
fn export_with_zero_count_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.tsv");
    let rows = export_samples_for_embedding(&export(0, Some(TimeConstraint::Exactly(1.0))), &path).unwrap();
    assert!(rows.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 1);
    assert_eq!(body[0].split('\t').count(), 7);
    assert!(text.contains("# count: 0"));
}

#[test]
fn exported_rows_have_angles_and_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.tsv");
    export_samples_for_embedding(&export(12, Some(TimeConstraint::Exactly(1.0))), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        assert_eq!(row.len(), 7);
        assert_abs_diff_eq!(row[..6].iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(row[..6].iter().all(|a| (0.0..PI).contains(a)));
    }

    let free = dir.path().join("free.tsv");
    let rows = export_samples_for_embedding(&export(6, None), &free).unwrap();
    let kinds = [GeneratorKind::Zz, GeneratorKind::X, GeneratorKind::Z];
    for (angles, eps) in rows {
        assert!((0.0..=1.0).contains(&eps));
        for (k, a) in angles.iter().enumerate() {
            let len = angle_domain(kinds[k % 3]).unwrap();
            assert!((0.0..len).contains(a));
        }
    }
}

#[test]
fn heatmaps_draw_one_cell_per_record() {
    let spec = small_spec(grid(&[0.5, 1.5], &[0.5, 1.5]));
    let out = sweep(&spec, None, None).unwrap();
    for q in [HeatmapQuantity::Cost, HeatmapQuantity::Df, HeatmapQuantity::Vne] {
        let svg = heatmap_svg(&out.records, &spec.grid, Family::Afm, q);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<title>").count(), 4);
        assert!(svg.contains("<line"));
    }
    let fm = heatmap_svg(&out.records, &spec.grid, Family::Fm, HeatmapQuantity::Cost);
    assert!(!fm.contains("<line"));
}

#[test]
fn default_grids() {
    let g = GridSpec::default_for(Family::Threespin, 32);
    assert_eq!(g.points().len(), 1024);
    let hz = g.hz.values();
    assert_eq!(hz[0], -3.0);
    assert!(hz.iter().all(|&v| v < 0.0));
}
