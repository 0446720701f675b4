use super::*;
use crate::error::Error;
use crate::floquet::{discriminant_drift, PeriodicPotential};
use crate::grid::{trig_interpolate, PeriodicGrid};
use crate::scalar::re;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn cos_potential(n: usize, amp: f64) -> PeriodicPotential<f64> {
    PeriodicPotential::from_fn(PeriodicGrid::new(n, TAU).unwrap(), |x| amp * x.cos())
}

fn probes() -> Vec<crate::Complex> {
    [-0.5, 0.05, 0.6, 0.8, 1.5, 2.5, 3.5, 5.0].iter().map(|&e| re(e)).collect()
}

fn soliton_config(n: usize, length: f64, dt: f64, t_end: f64) -> SolverConfig<f64> {
    let grid = PeriodicGrid::with_origin(n, length, -length / 2.0).unwrap();
    let mut cfg = SolverConfig::new(grid, dt, t_end);
    cfg.coefficients = KdvCoefficients::soliton_c_clock();
    cfg
}

#[test]
fn vacuum_products_are_constant() {
    let zero = PeriodicPotential::zero(PeriodicGrid::new(64, TAU).unwrap());
    for energy in [-1.0, 0.3, 2.0] {
        // In a gap ψ ~ e^{−x} is recovered from columns growing like e^{x},
        // which costs a few digits over one period.
        let s = source_term(&zero, &SourceSpec::single(energy, 1.0)).unwrap();
        assert!(s.max_abs() < 1e-9, "E = {energy}: {:e}", s.max_abs());
    }
}

#[test]
fn gap_source_is_real_with_zero_mean() {
    let u = cos_potential(64, 0.2);
    let s = source_term(&u, &SourceSpec::single(0.2, 1.0)).unwrap();
    assert!(s.is_real());
    assert!(crate::grid::mean(&s).norm() < 1e-14);
    assert!(s.max_abs() > 1e-3);
    let pair = crate::floquet::bloch_pair(&u, re(0.2)).unwrap();
    assert!(pair.product_imag() < 1e-12);
}

#[test]
fn right_hand_side_matches_hand_computation() {
    let zero = PeriodicPotential::zero(PeriodicGrid::new(32, TAU).unwrap());
    assert!(rhs(&zero, &SourceSpec::single(-1.0, 1.0)).unwrap().max_abs() < 1e-9);
    let u = PeriodicPotential::from_fn(PeriodicGrid::new(32, TAU).unwrap(), f64::sin);
    let r = rhs(&u, &SourceSpec::none()).unwrap();
    for (x, v) in u.grid().nodes().into_iter().zip(r.values()) {
        let expected = -0.25 * x.cos() - 1.5 * x.sin() * x.cos();
        assert!((v.re - expected).abs() < 1e-10, "x = {x}");
    }
    let sourced = rhs(&cos_potential(64, 0.2), &SourceSpec::single(0.2, 0.05)).unwrap();
    assert!(crate::grid::mean(&sourced).norm() < 1e-13);
}

#[test]
fn pure_kdv_conserves_invariants() {
    let u0 = cos_potential(64, 0.1);
    let cfg = SolverConfig::new(u0.grid().clone(), 1e-3, 1.0);
    let report = evolve(&u0, &SourceSpec::none(), &cfg).unwrap();
    assert!(report.mean_drift() < 1e-12);
    assert!(report.l2_drift() < 1e-8);
    assert!(report.max_imag < 1e-10);
    let iso = isospectrality_report(&report, &probes()).unwrap();
    assert!(iso.worst_drift() < 1e-6, "{:?}", iso.max_drift);
}

#[test]
fn vacuum_stays_vacuum_with_sources() {
    let u0 = PeriodicPotential::zero(PeriodicGrid::new(32, TAU).unwrap());
    let cfg = SolverConfig::new(u0.grid().clone(), 1e-2, 0.2);
    let report = evolve(&u0, &SourceSpec::single(-1.0, 1.0), &cfg).unwrap();
    assert!(report.last().max_abs() < 1e-9, "{:e}", report.last().max_abs());
}

#[test]
fn gap_source_moves_potential_but_not_discriminant() {
    let u0 = cos_potential(64, 0.2);
    let cfg = SolverConfig::new(u0.grid().clone(), 1e-3, 0.5);
    let report = evolve(&u0, &SourceSpec::single(0.2, 0.05), &cfg).unwrap();
    let iso = isospectrality_report(&report, &probes()).unwrap();
    assert!(iso.worst_drift() < 1e-5, "{:?}", iso.max_drift);
    assert!(report.displacement() > 1e-2);
    assert!(report.mean_drift() < 1e-12);
    let shifted = u0.shifted_by(0.01);
    assert!(discriminant_drift(&u0, &shifted, &[re(1.0)]).unwrap() > 1e-3);
}

#[test]
fn midpoint_refresh_beats_step_start_refresh() {
    let u0 = cos_potential(64, 0.2);
    let cfg = SolverConfig::new(u0.grid().clone(), 2e-3, 0.2);
    let drift = |at: RefreshPoint| {
        let spec = SourceSpec { refresh_at: at, ..SourceSpec::single(0.2, 0.05) };
        let report = evolve(&u0, &spec, &cfg).unwrap();
        isospectrality_report(&report, &probes()).unwrap().worst_drift()
    };
    let lagged = drift(RefreshPoint::StepStart);
    let centred = drift(RefreshPoint::Midpoint);
    assert!(centred < 1e-3 * lagged, "{centred:e} vs {lagged:e}");
}

#[test]
fn grid_doubling_leaves_sourced_run_unchanged() {
    let run = |n: usize| {
        let u0 = cos_potential(n, 0.2);
        let cfg = SolverConfig::new(u0.grid().clone(), 1e-3, 0.2);
        evolve(&u0, &SourceSpec::single(0.2, 0.05), &cfg).unwrap().last().clone()
    };
    let (coarse, fine) = (run(64), run(128));
    for (x, v) in coarse.grid().nodes().into_iter().zip(coarse.values()) {
        assert!((trig_interpolate(&fine, x) - *v).norm() < 1e-6, "x = {x}");
    }
}

#[test]
fn source_at_band_edge_is_rejected() {
    let u0 = cos_potential(64, 0.2);
    let edge = crate::floquet::find_band_edges(&u0, 0.0, 0.5).unwrap().edges[0].energy;
    let cfg = SolverConfig::new(u0.grid().clone(), 1e-3, 0.01);
    let err = evolve(&u0, &SourceSpec::single(edge + 2e-4, 0.05), &cfg).unwrap_err();
    assert!(matches!(err, Error::SourceNearBandEdge { .. } | Error::DegenerateEnergy { .. }), "{err}");
}

#[test]
fn integrators_agree() {
    let u0 = cos_potential(64, 0.3);
    let mut cfg = SolverConfig::new(u0.grid().clone(), 2e-3, 0.5);
    let a = evolve(&u0, &SourceSpec::none(), &cfg).unwrap();
    cfg.integrator = Integrator::Etdrk4;
    let b = evolve(&u0, &SourceSpec::none(), &cfg).unwrap();
    assert!(a.last().distance(b.last()).unwrap() < 1e-9);
}

#[test]
fn invalid_configurations_are_rejected() {
    let u0 = PeriodicPotential::zero(PeriodicGrid::new(48, TAU).unwrap());
    let cfg = SolverConfig::new(u0.grid().clone(), 1e-3, 0.1);
    assert!(matches!(evolve(&u0, &SourceSpec::none(), &cfg), Err(Error::InvalidGrid(_))));
    let big = PeriodicPotential::from_fn(PeriodicGrid::new(64, TAU).unwrap(), |x| 50.0 * x.cos());
    let cfg = SolverConfig::new(big.grid().clone(), 0.1, 1.0);
    assert!(matches!(evolve(&big, &SourceSpec::none(), &cfg), Err(Error::UnstableTimeStep { .. })));
    let cfg = soliton_config(256, 20.0, 1e-3, 0.1);
    assert!(matches!(evolve_prescribed_source(1.0, 0.5, &cfg), Err(Error::BoxTooSmall { .. })));
}

#[test]
fn prescribed_source_tracks_closed_form() {
    let mut cfg = soliton_config(2048, 80.0, 1e-4, 0.5 * 2f64.ln());
    cfg.snapshot_every = 100;
    let report = evolve_prescribed_source(1.0, 0.5, &cfg).unwrap();
    assert!(report.exact_error.unwrap() < 1e-4);
    assert!(report.mean_drift() < 1e-12);
}

#[test]
fn captured_soliton_is_stationary() {
    let mut cfg = soliton_config(512, 60.0, 1e-3, 1.0);
    cfg.snapshot_every = 100;
    let report = evolve_prescribed_source(1.0, 1.0, &cfg).unwrap();
    assert!(report.displacement() < 1e-6, "{:e}", report.displacement());
}

#[test]
fn time_error_is_fourth_order() {
    let errors: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| evolve_prescribed_source(1.0, 0.5, &soliton_config(1024, 80.0, dt, 0.5 * 2f64.ln())).unwrap())
        .map(|r| r.exact_error.unwrap())
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 3.7, "{errors:?}");
    }
}

#[test]
fn csv_outputs_have_expected_columns() {
    let u0 = cos_potential(16, 0.1);
    let cfg = SolverConfig::new(u0.grid().clone(), 1e-2, 0.02);
    let report = evolve(&u0, &SourceSpec::none(), &cfg).unwrap();
    let iso = isospectrality_report(&report, &[re(1.0), re(2.0)]).unwrap();
    let mut buf = Vec::new();
    write_invariants_csv(&report, Some(&iso), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,mean_u,l2,delta_probe_1,delta_probe_2\n"));
    assert_eq!(text.lines().count(), 1 + report.invariants.len());
    let mut buf = Vec::new();
    write_snapshots_csv(&report, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 16 * report.snapshots.len());
}
