//! Cross-module checks through the public API only.

use std::f64::consts::{LN_2, PI};

use melnikov_core::ba::{BaSolution, SpectralDataG0, TimePoint};
use melnikov_core::floquet::{discriminant, find_band_edges, PeriodicPotential};
use melnikov_core::grid::{spectral_derivative, Field, PeriodicGrid};
use melnikov_core::kdv::{evolve, SolverConfig, SourceSpec};
use melnikov_core::soliton::{annihilation_time, SolitonState};
use melnikov_core::Cx;
use melnikov_core::{Error, Grid, Potential};

#[test]
fn spectral_derivative_of_trig_polynomial_is_exact() {
    let grid = Grid::new(32, 2.0 * PI).unwrap();
    let f = Field::from_fn_real(grid.clone(), |x| (3.0 * x).sin() + 0.5 * x.cos());
    let df = spectral_derivative(&f, 1);
    let expected = Field::from_fn_real(grid, |x| 3.0 * (3.0 * x).cos() - 0.5 * x.sin());
    assert!(df.distance(&expected).unwrap() < 1e-12);
}

#[test]
fn free_discriminant_is_a_cosine() {
    let u = Potential::zero(Grid::new(16, 2.0 * PI).unwrap());
    for e in [0.3, 1.7, 5.2] {
        let delta = discriminant(&u, Cx::new(e, 0.0)).unwrap().delta;
        assert!((delta.re - 2.0 * (2.0 * PI * f64::sqrt(e)).cos()).abs() < 1e-10, "E = {e}");
    }
}

#[test]
fn single_precision_instantiation_works() {
    let u = PeriodicPotential::<f32>::zero(PeriodicGrid::new(16, 2.0 * std::f32::consts::PI).unwrap());
    let delta = discriminant(&u, Cx::new(0.25f32, 0.0)).unwrap().delta;
    assert!((delta.re + 2.0).abs() < 1e-3);
}

#[test]
fn cosine_potential_opens_first_gap() {
    let u = Potential::from_fn(Grid::new(64, 2.0 * PI).unwrap(), |x| 0.2 * x.cos());
    let report = find_band_edges(&u, -0.5, 1.2).unwrap();
    assert!(!report.band_edges().is_empty());
    assert!(report.distance_to_edges(0.25) < 0.1);
}

#[test]
fn genus_zero_potential_matches_one_soliton() {
    let (kappa, c) = (1.0f64, 2.0f64);
    let state = SolitonState::new(kappa, c).unwrap();
    let data = SpectralDataG0::kdv(&[kappa]).unwrap();
    for x in [-1.5, 0.0, 0.7] {
        let tp = TimePoint::real(vec![x], &[-c]);
        let u = BaSolution::new(&data, &tp).unwrap().potential();
        assert!((u.re - state.potential(x).unwrap()).abs() < 1e-10, "x = {x}");
        assert!(u.im.abs() < 1e-12);
    }
}

#[test]
fn unit_soliton_annihilates_at_ln2() {
    assert!((annihilation_time(1.0, 0.5).unwrap() - LN_2).abs() < 1e-12);
}

#[test]
fn source_free_evolution_conserves_mean() {
    let grid = Grid::new(64, 2.0 * PI).unwrap();
    let u0 = Potential::from_fn(grid.clone(), |x| 0.3 * x.cos());
    let report = evolve(&u0, &SourceSpec::none(), &SolverConfig::new(grid, 1e-3, 0.1)).unwrap();
    assert!(report.mean_drift() < 1e-12);
    assert!(report.displacement() > 1e-4);
}

#[test]
fn malformed_grid_is_rejected() {
    assert!(matches!(Grid::new(0, 1.0), Err(Error::InvalidGrid(_))));
    assert!(Grid::new(8, -1.0).is_err());
}
