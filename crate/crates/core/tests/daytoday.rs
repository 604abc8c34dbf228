mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmsdta::daytoday::{br_cost, run_day_to_day, solve_eta, update_departures, SolverConfig};
use vmsdta::network::{GridSpec, OdPair, TimeGrid};
use vmsdta::scenario::{corridor, fig1, CorridorSpec};
use vmsdta::{DepartureProfile, EngineError};

fn od(paths: Vec<usize>, demand: f64) -> OdPair {
    let n = paths.len();
    OdPair { id: "od".into(), origin: 0, destination: 1, demand, desired_arrival: 0.0, paths, tolerances: vec![0.0; n] }
}

/// One projected step for a single O-D spread over `n_paths` rows.
fn step(h: &DepartureProfile, phi: &[Vec<f64>], lambda: f64, od: &OdPair) -> DepartureProfile {
    let rows: Vec<&[f64]> = od.paths.iter().map(|&p| h.path(p)).collect();
    let prow: Vec<&[f64]> = od.paths.iter().map(|&p| phi[p].as_slice()).collect();
    let eta = solve_eta(&rows, &prow, lambda, od.demand, h.dt(), &SolverConfig::default()).eta;
    update_departures(h, phi, lambda, &[eta], std::slice::from_ref(od))
}

#[test]
fn update_matches_exhaustive_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n_paths = rng.gen_range(1..=3);
        let n_bins = rng.gen_range(1..=12 / n_paths);
        let dt = [1.0, 5.0, 10.0][rng.gen_range(0..3)];
        let grid = TimeGrid::new(0.0, n_bins as f64 * dt, dt).unwrap();
        let rates: Vec<Vec<f64>> = (0..n_paths)
            .map(|_| (0..n_bins).map(|_| rng.gen_range(0.0..2.0) * rng.gen_range(0..2) as f64).collect())
            .collect();
        let phi: Vec<Vec<f64>> =
            (0..n_paths).map(|_| (0..n_bins).map(|_| rng.gen_range(0.0..3000.0)).collect()).collect();
        let lambda = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let q = rng.gen_range(0.5..50.0);
        let h = DepartureProfile::from_rates(rates.clone(), &grid);
        let o = od((0..n_paths).collect(), q);
        let next = step(&h, &phi, lambda, &o);

        let c: Vec<f64> = rates.iter().flatten().zip(phi.iter().flatten()).map(|(a, b)| a - lambda * b).collect();
        let expected = projection_oracle(&c, q, dt);
        for (got, want) in next.rates().iter().flatten().zip(&expected) {
            assert!(*got >= 0.0);
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(demand_error(&next, &o) <= 1e-8 * q);
    }
}

#[test]
fn update_is_feasible_on_large_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = TimeGrid::new(0.0, 3600.0, 10.0).unwrap();
    for _ in 0..20 {
        let rates: Vec<Vec<f64>> = (0..3).map(|_| random_rates(&mut rng, grid.n_bins())).collect();
        let phi: Vec<Vec<f64>> =
            (0..3).map(|_| (0..grid.n_bins()).map(|_| rng.gen_range(100.0..2000.0)).collect()).collect();
        let h = DepartureProfile::from_rates(rates, &grid);
        let o = od(vec![0, 1, 2], rng.gen_range(10.0..1000.0));
        let next = step(&h, &phi, 1e-3, &o);
        assert!(next.rates().iter().flatten().all(|&r| r >= 0.0));
        assert!(demand_error(&next, &o) <= 1e-8 * o.demand);
    }
}

#[test]
fn br_equilibrium_is_a_fixed_point() {
    let grid = TimeGrid::new(0.0, 60.0, 10.0).unwrap();
    let h = DepartureProfile::from_rates(
        vec![vec![0.0, 1.0, 2.0, 0.5, 0.0, 0.0], vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.2]],
        &grid,
    );
    let o = od(vec![0, 1], h.total_volume());
    // used bins are within ε = 20 of the minimum 100; unused ones are not
    let psi = [vec![150.0, 100.0, 110.0, 119.0, 130.0, 160.0], vec![115.0, 200.0, 170.0, 125.0, 190.0, 120.0]];
    let v = 100.0;
    let phi: Vec<Vec<f64>> = psi.iter().map(|row| row.iter().map(|&c| br_cost(c, v, 20.0, 20.0)).collect()).collect();
    let next = step(&h, &phi, 0.01, &o);
    for (a, b) in next.rates().iter().flatten().zip(h.rates().iter().flatten()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn zero_demand_converges_on_day_two() {
    let s = corridor(&CorridorSpec { demand: 0.0, ..CorridorSpec::default() }).validate().unwrap();
    let out = run_day_to_day(&s, None).unwrap();
    assert!(out.converged);
    assert_eq!(out.days.len(), 2);
    assert_eq!(out.last().relative_gap, Some(0.0));
}

#[test]
fn hitting_max_days_is_not_an_error() {
    let mut inputs = fig1();
    inputs.config.solver.max_days = 5;
    let s = inputs.validate().unwrap();
    let out = run_day_to_day(&s, None).unwrap();
    assert!(!out.converged);
    assert_eq!(out.days.len(), 5);
    assert_eq!(out.days[0].relative_gap, None);
    assert!(out.days[1..].iter().all(|d| d.relative_gap.is_some() && d.cr_drift.is_some()));
    assert!(out.last().etas.is_empty());
}

#[test]
fn every_day_keeps_demand_and_valid_rates() {
    let mut inputs = fig1();
    inputs.config.solver.max_days = 30;
    let s = inputs.validate().unwrap();
    let out = run_day_to_day(&s, None).unwrap();
    for d in &out.days {
        assert!(d.profile.rates().iter().flatten().all(|&r| r >= 0.0));
        for od in &s.ods {
            assert!(demand_error(&d.profile, od) <= 1e-6 * od.demand);
        }
        for c in &d.compliance {
            assert!(c.cr > 0.0 && c.cr < 1.0);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let mut inputs = fig1();
    inputs.config.solver.max_days = 15;
    inputs.config.initial_profile.mode = vmsdta::daytoday::InitialMode::Random;
    inputs.config.seed = 42;
    let s = inputs.validate().unwrap();
    let a = run_day_to_day(&s, None).unwrap();
    let b = run_day_to_day(&s, None).unwrap();
    assert_eq!(a.days, b.days);
}

#[test]
fn loading_failure_reports_the_day() {
    let s = fig1().validate().unwrap();
    let bad = DepartureProfile::zeros(2, &s.grid);
    match run_day_to_day(&s, Some(bad)) {
        Err(EngineError::Dnl { day, .. }) => assert_eq!(day, 1),
        other => panic!("expected a loading error, got {other:?}"),
    }
}

#[test]
fn initial_profile_meets_demand_inside_window() {
    let mut inputs =
        corridor(&CorridorSpec { grid: GridSpec { t0: 0.0, tf: 600.0, dt: 7.5 }, ..CorridorSpec::default() });
    inputs.config.initial_profile.window = Some([100.0, 250.0]);
    for mode in [vmsdta::daytoday::InitialMode::Uniform, vmsdta::daytoday::InitialMode::Random] {
        inputs.config.initial_profile.mode = mode;
        inputs.demand[0].desired_arrival = 500.0;
        let s = inputs.clone().validate().unwrap();
        let h = vmsdta::daytoday::initial_profile(&s);
        assert!(demand_error(&h, &s.ods[0]) < 1e-9 * s.ods[0].demand);
        for k in 0..s.grid.n_bins() {
            if s.grid.time(k + 1) <= 100.0 || s.grid.time(k) >= 250.0 {
                assert_eq!(h.path(0)[k], 0.0);
            }
        }
    }
}
