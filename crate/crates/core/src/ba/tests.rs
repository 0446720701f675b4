use super::*;
use crate::scalar::cx;
use crate::soliton::SolitonState;

fn one_soliton(kappa: f64) -> SpectralDataG0<f64> {
    SpectralDataG0::kdv(&[kappa]).unwrap()
}

fn at(x: f64, taus: &[f64]) -> TimePoint<f64> {
    TimePoint::real(vec![x], taus)
}

fn two_pair() -> (SpectralDataG0<f64>, TimePoint<f64>) {
    (SpectralDataG0::kdv(&[1.0, 1.5]).unwrap(), at(0.1, &[-2.0, -3.0]))
}

fn generic_pair() -> SpectralDataG0<f64> {
    SpectralDataG0::new(vec![
        DoublePoint { plus: cx(-1.0, 0.3), minus: cx(1.2, -0.1) },
        DoublePoint { plus: cx(-1.7, -0.2), minus: cx(0.6, 0.5) },
    ])
    .unwrap()
}

/// `(1/2πi)∮ f dλ` on a small circle: exact up to aliasing for a simple pole.
fn contour_residue(f: impl Fn(Complex) -> Complex, centre: Complex) -> Complex {
    let (r, m) = (1e-3, 32);
    (0..m)
        .map(|j| {
            let w = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            f(centre + w * r) * w * r
        })
        .sum::<Complex>()
        / m as f64
}

type Complex = Cx<f64>;

#[test]
fn one_pair_coefficient_is_chi() {
    let a = solve_ba(&one_soliton(1.0), &at(0.0, &[-2.0])).unwrap().a[0];
    assert!((a - cx(-1.0, 0.0)).norm() < 1e-13);
    let state = SolitonState::new(1.3, 0.7).unwrap();
    let data = one_soliton(1.3);
    for x in [-4.0, -1.0, 0.0, 0.4, 2.5, 9.0] {
        let sol = BaSolution::new(&data, &at(x, &[-0.7])).unwrap();
        let chi = state.chi(x).unwrap();
        assert!((sol.evaluation().chi1 - cx(chi, 0.0)).norm() < 1e-13, "x = {x}");
        let u = state.potential(x).unwrap();
        assert!((sol.potential() - cx(u, 0.0)).norm() < 1e-12, "x = {x}");
        // Compared with the common exponential factor e^{λx} removed.
        for lambda in [cx(1.3, 0.0), cx(2.0, 0.5), cx(-0.4, 1.0)] {
            let ba = sol.reduced(Side::Function, lambda, &[]).unwrap();
            let closed = state.ba_psi(lambda, x).unwrap() * (-lambda * x).exp();
            assert!((ba - closed).norm() < 1e-12, "x = {x}, λ = {lambda}");
        }
    }
}

#[test]
fn analytic_x_derivative_matches_differences() {
    let data = one_soliton(1.0);
    for x in [-0.8, 0.3, 1.7] {
        let sol = BaSolution::new(&data, &at(x, &[-2.0])).unwrap();
        let analytic = sol.potential_derivative(&[Direction::Time(1)]);
        let fd = crate::grid::central_difference(|s| potential_u(&data, &at(x + s, &[-2.0])).unwrap(), 0.0, 1e-3);
        assert!((analytic - fd).norm() < 1e-8, "x = {x}");
    }
}

#[test]
fn vacuum_when_all_pairs_unglued() {
    let (data, _) = two_pair();
    let tp = TimePoint::real(vec![0.4, 0.0, 0.2], &[0.0, 0.0]);
    let eval = solve_ba(&data, &tp).unwrap();
    assert!(eval.a.iter().all(|a| a.norm() == 0.0));
    assert_eq!(potential_u(&data, &tp).unwrap(), cx(0.0, 0.0));
    let lambda = cx(0.7, 0.3);
    let free = theta(&tp, lambda).exp();
    assert!((eval_psi(&data, &tp, lambda).unwrap() - free).norm() < 1e-15);
    assert!((eval_psi_star(&data, &tp, lambda).unwrap() - free.inv()).norm() < 1e-15);
}

#[test]
fn normalization_at_large_lambda() {
    let (data, tp) = two_pair();
    let sol = BaSolution::new(&data, &tp).unwrap();
    let chi1 = sol.evaluation().chi1;
    let b_sum = sol.conjugate_evaluation().b.iter().sum::<Complex>();
    // φ − 1 = χ₁/λ + O(λ⁻²): the deviation is 1e−6 only once |χ₁| ≲ 1e−2.
    for lambda in [cx(1e4, 0.0), cx(-1e4, 0.0), cx(0.0, 1e4)] {
        let phi = sol.reduced(Side::Function, lambda, &[]).unwrap();
        let phi_star = sol.reduced(Side::Conjugate, lambda, &[]).unwrap();
        assert!(((phi - 1.0) * lambda - chi1).norm() < 1e-3);
        assert!(((phi_star - 1.0) * lambda - b_sum).norm() < 1e-3);
    }
    let far = at(-12.0, &[-2.0, -3.0]);
    let sol = BaSolution::new(&data, &far).unwrap();
    for lambda in [cx(1e4, 0.0), cx(-1e4, 0.0)] {
        assert!((sol.reduced(Side::Function, lambda, &[]).unwrap() - 1.0).norm() < 1e-6);
        assert!((sol.reduced(Side::Conjugate, lambda, &[]).unwrap() - 1.0).norm() < 1e-6);
    }
}

#[test]
fn residue_conditions_hold_numerically() {
    for (data, tp) in [two_pair(), (generic_pair(), TimePoint::new(vec![0.2, 0.1], vec![cx(0.5, 0.2), cx(-1.1, 0.0)]))]
    {
        let sol = BaSolution::new(&data, &tp).unwrap();
        assert!(sol.solve_residual() < 1e-10);
        for (k, pair) in data.pairs().iter().enumerate() {
            let tau = tp.taus()[k];
            let res = contour_residue(|l| sol.psi(l).unwrap(), pair.plus);
            let target = tau * sol.psi(pair.minus).unwrap();
            assert!((res - target).norm() < 1e-9 * target.norm().max(1.0), "ψ pair {k}");
            let res = contour_residue(|l| sol.psi_star(l).unwrap(), pair.minus);
            let target = -tau * sol.psi_star(pair.plus).unwrap();
            assert!((res - target).norm() < 1e-9 * target.norm().max(1.0), "ψ* pair {k}");
        }
    }
}

#[test]
fn evaluation_at_a_pole_is_an_error() {
    let data = one_soliton(1.0);
    let tp = at(0.0, &[-2.0]);
    assert!(matches!(eval_psi(&data, &tp, cx(-1.0, 0.0)), Err(Error::PoleAtDivisor { .. })));
    assert!(matches!(eval_psi_star(&data, &tp, cx(1.0, 0.0)), Err(Error::PoleAtDivisor { .. })));
}

#[test]
fn conjugate_is_reflected_function_on_kdv_data() {
    let (data, tp) = two_pair();
    let sol = BaSolution::new(&data, &tp).unwrap();
    for j in 0..20 {
        let t = j as f64;
        let lambda = cx(2.5 * (0.7 * t).cos() + 0.05, 1.5 * (1.3 * t).sin());
        let lhs = sol.psi_star(lambda).unwrap();
        let rhs = sol.psi(-lambda).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0), "λ = {lambda}");
    }
}

#[test]
fn unglued_pair_drops_out() {
    let (data, _) = two_pair();
    let tp = TimePoint::real(vec![0.3, 0.0, 0.05], &[-2.0, 0.0]);
    let full = solve_ba(&data, &tp).unwrap();
    assert_eq!(full.a[1], cx(0.0, 0.0));
    let reduced = solve_ba(&data.without_pair(1), &tp.without_tau(1)).unwrap();
    assert!((full.a[0] - reduced.a[0]).norm() < 1e-12);
    let u_full = potential_u(&data, &tp).unwrap();
    let u_reduced = potential_u(&data.without_pair(1), &tp.without_tau(1)).unwrap();
    assert!((u_full - u_reduced).norm() < 1e-12);
}

#[test]
fn relabeling_pairs_leaves_potential_unchanged() {
    let data = generic_pair();
    let tp = TimePoint::new(vec![0.2, 0.1], vec![cx(0.5, 0.2), cx(-1.1, 0.0)]);
    let perm = [1, 0];
    let a = solve_ba(&data, &tp).unwrap().a;
    let b = solve_ba(&data.permuted(&perm).unwrap(), &tp.permuted(&perm)).unwrap().a;
    assert!((a[0] - b[1]).norm() < 1e-12 && (a[1] - b[0]).norm() < 1e-12);
    let u = potential_u(&data, &tp).unwrap();
    let v = potential_u(&data.permuted(&perm).unwrap(), &tp.permuted(&perm)).unwrap();
    assert!((u - v).norm() < 1e-12);
}

#[test]
fn separation_is_enforced() {
    let close = vec![DoublePoint { plus: cx(-1.0, 0.0), minus: cx(-1.0 + 1e-9, 0.0) }];
    assert!(SpectralDataG0::new(close).is_err());
    assert!(SpectralDataG0::<f64>::kdv(&[1.0, -0.5]).is_err());
}

#[test]
fn kernel_on_vacuum_is_elementary() {
    let data = one_soliton(1.0);
    let tp = at(0.0, &[0.0]);
    for (lambda, mu) in [(cx(0.3, 0.2), cx(1.1, -0.4)), (cx(2.0, 0.0), cx(0.5, 1.0))] {
        let sample = cba_kernel(&data, &tp, lambda, mu).unwrap();
        let exact = (mu - lambda).inv();
        assert!((sample.omega_over_dmu - exact).norm() < 1e-12, "{lambda} {mu}");
        let direction =
            if (lambda - mu).re < 0.0 { KernelDirection::PlusInfinity } else { KernelDirection::MinusInfinity };
        assert_eq!(sample.convergence_direction, direction);
    }
    let tp = at(0.7, &[0.0]);
    let (lambda, mu) = (cx(0.3, 0.0), cx(0.9, 0.0));
    let sample = cba_kernel(&data, &tp, lambda, mu).unwrap();
    let exact = ((lambda - mu) * 0.7).exp() / (mu - lambda);
    assert!((sample.omega_over_dmu - exact).norm() < 1e-12);
}

#[test]
fn kernel_rejects_purely_oscillatory_integrand() {
    let data = one_soliton(1.0);
    let err = cba_kernel(&data, &at(0.0, &[-2.0]), cx(0.5, 1.0), cx(0.5, -1.0)).unwrap_err();
    assert!(matches!(err, Error::NonConvergentDirection { .. }));
}

#[test]
fn kernel_has_unit_diagonal_pole() {
    let data = one_soliton(1.0);
    let tp = at(0.2, &[-2.0]);
    let lambda = cx(2.0, 0.0);
    for eps in [1e-3, -1e-3] {
        let mu = lambda + eps;
        let sample = cba_kernel(&data, &tp, lambda, mu).unwrap();
        let regular = sample.omega_over_dmu - (mu - lambda).inv();
        assert!(regular.norm() < 10.0, "ε = {eps}: {regular}");
    }
}

#[test]
fn kernel_x_derivative_is_minus_product() {
    let data = one_soliton(1.0);
    for (x, lambda, mu) in
        [(0.2, cx(2.0, 0.0), cx(-1.0, 0.0)), (-0.5, cx(0.4, 0.3), cx(1.5, -0.2)), (1.0, cx(3.0, 0.0), cx(0.5, 0.0))]
    {
        let r = deromega_residual(&data, &at(x, &[-2.0]), lambda, mu).unwrap();
        assert!(r < 1e-7, "x = {x}: {r:e}");
    }
    let (data, tp) = two_pair();
    assert!(deromega_residual(&data, &tp, cx(2.2, 0.1), cx(-0.7, 0.0)).unwrap() < 1e-7);
}

#[test]
fn tau_derivative_of_psi_is_kernel_times_partner_value() {
    let data = one_soliton(1.0);
    let check = verify_dpsi(&data, &at(0.2, &[-2.0]), 0, cx(2.0, 0.0)).unwrap();
    assert!(check.passes(1e-6), "{check:?}");
    let check = verify_dpsi(&data, &at(0.2, &[0.0]), 0, cx(2.0, 0.0)).unwrap();
    assert!(check.passes(1e-6), "{check:?}");
    let (data, tp) = two_pair();
    for k in 0..2 {
        let check = verify_dpsi(&data, &tp, k, cx(0.3, 0.4)).unwrap();
        assert!(check.passes(1e-6), "pair {k}: {check:?}");
    }
}

#[test]
fn tau_derivative_of_potential_is_source_term() {
    let xs = [-1.5, -0.3, 0.0, 0.4, 1.2, 2.0];
    assert!(verify_tauder1(&one_soliton(1.0), &at(0.0, &[-2.0]), 0, &xs).unwrap() < 1e-6);
    let (data, tp) = two_pair();
    for k in 0..2 {
        assert!(verify_tauder1(&data, &tp, k, &xs).unwrap() < 1e-6);
    }
    let generic = generic_pair();
    let tp = TimePoint::new(vec![0.0, 0.1], vec![cx(0.5, 0.2), cx(-1.1, 0.0)]);
    for k in 0..2 {
        assert!(verify_tauder1(&generic, &tp, k, &xs).unwrap() < 1e-6);
    }
    assert!(verify_tauder1(&data, &at(0.0, &[-2.0, 0.0]), 1, &xs).unwrap() < 1e-6);
}

#[test]
fn gluing_derivative_reproduces_soliton_speed_derivative() {
    // τ = −c, so ∂_τ u = −∂_c u.
    let data = one_soliton(1.0);
    for x in [-0.7, 0.2, 1.1] {
        let rhs = tauder1_rhs(&data, &at(x, &[-2.0]), 0).unwrap();
        let du_dc =
            crate::grid::central_difference(|c| SolitonState::new(1.0, c).unwrap().potential(x).unwrap(), 2.0, 1e-3);
        assert!((rhs + cx(du_dc, 0.0)).norm() < 1e-8, "x = {x}");
    }
}

#[test]
fn deltau1_quotient_is_spectral_parameter_free() {
    let generic = generic_pair();
    let tp = TimePoint::new(vec![0.1, 0.2], vec![cx(0.5, 0.2), cx(-1.1, 0.0)]);
    for k in 0..2 {
        let q = deltau1_quotients(&generic, &tp, k, &[cx(2.0, 0.0), cx(-0.5, 1.5), cx(3.0, -1.0)]).unwrap();
        let target = tauder1_rhs(&generic, &tp, k).unwrap();
        for v in q {
            assert!((v - target).norm() < 1e-6, "pair {k}: {v} vs {target}");
        }
    }
}

#[test]
fn auxiliary_problems_hold() {
    let data = SpectralDataG0::new(vec![DoublePoint { plus: cx(-1.0, 0.0), minus: cx(1.3, 0.0) }]).unwrap();
    let grid: Vec<_> = (0..25)
        .map(|i| TimePoint::real(vec![-1.0 + 0.5 * (i % 5) as f64, -0.4 + 0.2 * (i / 5) as f64], &[1.0]))
        .collect();
    assert!(kp_residual(&data, &grid, &[cx(2.0, 0.0), cx(3.0, 1.0)]).unwrap() < 1e-6);
    let generic = generic_pair();
    let tps = [TimePoint::new(vec![0.1, 0.2, 0.05], vec![cx(0.5, 0.2), cx(-1.1, 0.0)])];
    assert!(kp_residual(&generic, &tps, &[cx(2.0, 0.0), cx(0.2, -1.0)]).unwrap() < 1e-6);
    assert!(matches!(kdv_residual(&generic, &tps, &[cx(2.0, 0.0)]), Err(Error::NotKdVSymmetric)));

    let lambdas = [cx(2.0, 0.0), cx(0.5, 0.8)];
    let xs: Vec<_> = [-2.0, -0.5, 0.0, 0.7, 1.9].iter().map(|&x| at(x, &[-2.0])).collect();
    assert!(kdv_residual(&one_soliton(1.0), &xs, &lambdas).unwrap() < 1e-10);
    let (data, tp) = two_pair();
    let tps = [tp.clone(), tp.with_x(-1.0), tp.with_time(3, 0.3)];
    assert!(kdv_residual(&data, &tps, &lambdas).unwrap() < 1e-6);
    assert!(matches!(kdv_residual(&data, &[tp.with_time(2, 0.1)], &lambdas), Err(Error::NotKdVSymmetric)));
}

#[test]
fn combined_flow_splits_by_chain_rule() {
    let xs = [-0.5, 0.3, 1.0];
    let (data, base) = two_pair();
    let hierarchy = CombinedPath { time_coeffs: vec![(3, 1.0)], alphas: vec![-2.0, -3.0], betas: vec![0.0, 0.0] };
    let report = verify_combined_flow(&data, &hierarchy, &base, 0.1, &xs).unwrap();
    assert!(report.residual < 1e-6 && report.ungluing.is_empty());

    let source = CombinedPath { time_coeffs: vec![], alphas: vec![-2.0], betas: vec![1.0] };
    let data = one_soliton(1.0);
    let base = at(0.0, &[0.0]);
    let report = verify_combined_flow(&data, &source, &base, 0.5, &xs).unwrap();
    assert!(report.residual < 1e-6);
    assert_eq!(report.ungluing.len(), 1);
    assert_eq!(report.ungluing[0].tau, 2.0);
    assert!(report.ungluing[0].a_k_abs < 1e-15);
    let unglued = source.time_point(&base, 2.0).unwrap();
    assert_eq!(potential_u(&data, &unglued.with_x(0.4)).unwrap(), cx(0.0, 0.0));

    let mixed = CombinedPath { time_coeffs: vec![(3, 0.5)], alphas: vec![-2.0], betas: vec![1.0] };
    assert!(verify_combined_flow(&data, &mixed, &base, 0.7, &xs).unwrap().residual < 1e-6);
    let found = find_ungluing(&data, &mixed, &base.with_x(0.3), 0, 0.5, 2.05).unwrap();
    assert!((found.tau - 2.0).abs() < 1e-12 && found.a_k_abs < 1e-10, "{found:?}");
}

#[test]
fn json_round_trip_uses_pairs_for_complex_numbers() {
    let data = generic_pair();
    let text = serde_json::to_string(&data).unwrap();
    assert!(text.contains("\"R_plus\":[-1.0,0.3]"), "{text}");
    let back: SpectralDataG0<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, data);
    let tp = TimePoint::new(vec![0.1, 0.2], vec![cx(0.5, 0.2)]);
    let back: TimePoint<f64> = serde_json::from_str(&serde_json::to_string(&tp).unwrap()).unwrap();
    assert_eq!(back, tp);
    let bad = r#"{"pairs":[{"R_plus":[0,0],"R_minus":[0,0]}]}"#;
    assert!(serde_json::from_str::<SpectralDataG0<f64>>(bad).is_err());
    let kdv: SpectralDataG0<f64> = serde_json::from_str(r#"{"pairs":[{"R_plus":[-1,0],"R_minus":[1,0]}]}"#).unwrap();
    assert!(kdv.is_kdv_symmetric());
}
