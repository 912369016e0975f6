use approx::assert_abs_diff_eq;
use qaoalab::models::*;
use qaoalab::optimize::*;
use qaoalab::qaoa::*;

fn two_well(x: &[f64]) -> f64 {
    ((x[0] - 1.0).powi(2)).min((x[0] + 1.0).powi(2) + 0.5)
}

fn evaluator(family: Family, n: usize, hx: f64, hz: f64, p: usize, kind: CostKind) -> CostEvaluator {
    let model = build_model(family, n, hx, hz).unwrap();
    let diag = diagonalize(&model, DEFAULT_DEGENERACY_TOL).unwrap();
    let target = CostTarget::from_diagonalization(&diag, Representative::ZeroMomentum, n / 2).unwrap();
    CostEvaluator::new(Protocol::named(ProtocolName::Ising3, p, n).unwrap(), model, kind, target).unwrap()
}

#[test]
fn two_well_global_minimum() {
    // grid oracle for the global minimizer
    let (mut xbest, mut fbest) = (0.0, f64::INFINITY);
    for k in 0..=60_000 {
        let x = -3.0 + 6.0 * k as f64 / 60_000.0;
        if two_well(&[x]) < fbest {
            (xbest, fbest) = (x, two_well(&[x]));
        }
    }
    assert_abs_diff_eq!(xbest, 1.0, epsilon = 1e-4);

    let trials = 40;
    let hits = (0..trials)
        .filter(|&seed| {
            let cfg = BasinHopConfig {
                hops: 50,
                step_size: 1.5,
                temperature: 1.0,
                seed,
                ..Default::default()
            };
            let r = basinhop(&two_well, &[-1.0], &cfg).unwrap();
            (r.best_point[0] - xbest).abs() < 1e-3 && r.best_cost <= fbest + 1e-9
        })
        .count();
    assert!(hits as f64 >= 0.9 * trials as f64, "{hits}/{trials}");
}

#[test]
fn same_seed_same_result() {
    let f = |x: &[f64]| (2.0 * x[0]).sin() * (3.0 * x[1]).cos() + 0.05 * (x[0] * x[0] + x[1] * x[1]);
    let cfg = BasinHopConfig {
        hops: 30,
        seed: 77,
        ..Default::default()
    };
    let a = basinhop(&f, &[1.0, -1.0], &cfg).unwrap();
    let b = basinhop(&f, &[1.0, -1.0], &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.best_point, b.best_point);
    assert_eq!(a.evaluations, b.evaluations);
}

#[test]
fn never_worse_than_first_local_minimum() {
    let f = |x: &[f64]| (5.0 * x[0]).cos() + x[0] * x[0] * 0.1;
    for seed in 0..10 {
        let r = basinhop(&f, &[2.5], &BasinHopConfig { hops: 10, seed, ..Default::default() }).unwrap();
        assert!(r.best_cost <= r.trace[0]);
    }
}

#[test]
fn bfgs_variant_solves_a_bowl() {
    let f = |x: &[f64]| (x[0] - 0.4).powi(2) + 2.0 * (x[1] + 0.7).powi(2);
    let cfg = BasinHopConfig {
        hops: 3,
        local: LocalMinimizer::BfgsFd,
        ..Default::default()
    };
    let r = basinhop(&f, &[0.0, 0.0], &cfg).unwrap();
    assert!(r.best_cost < 1e-10);
}

#[test]
fn non_finite_values() {
    let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { (x[0] + 1.0).powi(2) };
    let r = basinhop(&f, &[0.0], &BasinHopConfig { hops: 20, ..Default::default() }).unwrap();
    assert!(r.best_cost.is_finite());
    assert!(basinhop(&f, &[f64::INFINITY], &BasinHopConfig::default()).is_err());
    let bad = BasinHopConfig {
        step_size: 0.0,
        ..Default::default()
    };
    assert!(basinhop(&f, &[0.0], &bad).is_err());
}

#[test]
fn interpolation_seed_examples() {
    let a = 0.7;
    let s = seed_from_previous_p(&AngleSchedule::new(1, 1, vec![a]).unwrap(), None);
    assert_eq!(s.as_slice(), &[a, a]);
    let z = seed_from_previous_p(&AngleSchedule::zeros(3, 3), None);
    assert!(z.as_slice().iter().all(|&v| v == 0.0));
    assert_eq!((z.p(), z.m()), (4, 3));
    // θ'_i = ((i−1)/p)θ_{i−1} + ((p−i+1)/p)θ_i
    let s = seed_from_previous_p(&AngleSchedule::new(2, 1, vec![1.0, 3.0]).unwrap(), None);
    assert_eq!(s.as_slice(), &[1.0, 2.0, 3.0]);
}

#[test]
fn ramps_stay_monotone() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let p = rng.gen_range(1..8);
        let mut col: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..1.0)).collect();
        col.sort_by(f64::total_cmp);
        let out = seed_from_previous_p(&AngleSchedule::new(p, 1, col).unwrap(), None);
        assert!(out.as_slice().windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }
}

fn result(point: Vec<f64>, cost: f64) -> Option<OptResult> {
    Some(OptResult {
        best_point: point,
        best_cost: cost,
        trace: vec![cost],
        evaluations: 0,
        wall_time: 0.0,
    })
}

#[test]
fn refinement_rescues_a_stuck_point() {
    let cells = vec![result(vec![1.0], 0.0), result(vec![-1.0], 0.5), result(vec![1.0], 0.0)];
    let grid = ResultGrid::new(1, 3, cells).unwrap();
    let cfg = BasinHopConfig { hops: 0, ..Default::default() };
    let refined = refine_grid(&grid, |_| Some(two_well), &cfg, 0);
    let mid = refined.cells[1].as_ref().unwrap();
    assert!(mid.best_cost <= 1e-12);
    assert_abs_diff_eq!(mid.best_point[0], 1.0, epsilon = 1e-5);
}

#[test]
fn refinement_keeps_converged_grid() {
    let cells = (0..4).map(|_| result(vec![1.0], 0.0)).collect();
    let grid = ResultGrid::new(2, 2, cells).unwrap();
    let refined = refine_grid(&grid, |_| Some(two_well), &BasinHopConfig { hops: 5, ..Default::default() }, 1);
    for cell in refined.cells {
        assert!(cell.unwrap().best_cost <= 1e-10);
    }
    assert!(ResultGrid::new(2, 2, vec![None; 3]).is_err());
}

#[test]
fn refinement_never_increases_cost_on_a_field_grid() {
    let (rows, cols, p) = (4, 4, 3);
    let fields: Vec<(f64, f64)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (0.5 * (c + 1) as f64, 0.5 * (r + 1) as f64)))
        .collect();
    let evals: Vec<CostEvaluator> = fields
        .iter()
        .map(|&(hx, hz)| evaluator(Family::Fm, 6, hx, hz, p, CostKind::Infidelity))
        .collect();
    let cfg = BasinHopConfig { hops: 3, ..Default::default() };
    let cells = evals
        .iter()
        .enumerate()
        .map(|(k, e)| basinhop(e, &[0.1; 9], &cfg.derived(&[k as u64])).ok())
        .collect();
    let mut grid = ResultGrid::new(rows, cols, cells).unwrap();
    for round in 1..=2 {
        let next = refine_grid(&grid, |i| Some(evals[i].clone()), &cfg, round);
        for (a, b) in grid.cells.iter().zip(&next.cells) {
            assert!(b.as_ref().unwrap().best_cost <= a.as_ref().unwrap().best_cost);
        }
        grid = next;
    }
}

#[test]
fn constraint_maps() {
    let at_most = TimeConstraint::AtMost(2.0);
    let a = at_most.map(&[1.0, 2.0, 0.5, 3.0]);
    assert_eq!(a.len(), 3);
    assert!(at_most.is_satisfied(&a, 1e-12));
    let exact = TimeConstraint::Exactly(2.0);
    let e = exact.map(&[1.0, -2.0, 0.5]);
    assert_abs_diff_eq!(e.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    assert_eq!(exact.map(&[0.0, 0.0]), vec![1.0, 1.0]);
    let angles = [0.3, 0.0, 1.1];
    let back = at_most.map(&at_most.preimage(&angles));
    for (x, y) in back.iter().zip(&angles) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-14);
    }
}

#[test]
fn constrained_runs_satisfy_budgets() {
    let ev = evaluator(Family::Afm, 4, 1.0, 1.0, 2, CostKind::Energy);
    let cfg = BasinHopConfig { hops: 5, ..Default::default() };
    for t in [0.3, 1.0, 4.0] {
        let le = constrained_basinhop(&ev, &[t / 6.0; 6], TimeConstraint::AtMost(t), &cfg).unwrap();
        assert!(le.best_point.iter().sum::<f64>() <= t + 1e-9);
        let eq = constrained_basinhop(&ev, &[t / 6.0; 6], TimeConstraint::Exactly(t), &cfg).unwrap();
        assert!((eq.best_point.iter().sum::<f64>() - t).abs() <= 1e-9);
    }
    assert!(matches!(
        constrained_basinhop(&ev, &[0.0; 6], TimeConstraint::AtMost(0.0), &cfg),
        Err(qaoalab::Error::InfeasibleBudget(_))
    ));
}

#[test]
fn nested_budgets_do_not_get_worse() {
    let ev = evaluator(Family::Afm, 6, 1.0, 1.0, 3, CostKind::Energy);
    let cfg = BasinHopConfig { hops: 5, ..Default::default() };
    let mut start = vec![0.5 / 9.0; 9];
    let mut last = f64::INFINITY;
    for t in [0.5, 1.0, 2.0, 4.0] {
        let r = constrained_basinhop(&ev, &start, TimeConstraint::AtMost(t), &cfg).unwrap();
        assert!(r.best_cost <= last + 1e-6, "T={t}: {} after {last}", r.best_cost);
        last = r.best_cost;
        start = r.best_point;
    }
}
