//! Execution of each scenario kind into checks, results and output files.

use std::path::{Path, PathBuf};

use melnikov_core::ba::{
    deltau1_quotients, kdv_residual, kp_residual, potential_u, tauder1_rhs, verify_combined_flow, verify_dpsi,
    verify_tauder1, write_potential_grid_csv,
};
use melnikov_core::floquet::{find_band_edges, monodromy, scan_discriminant};
use melnikov_core::kdv::{evolve, isospectrality_report, KdvCoefficients, SolverConfig, SourceSpec};
use melnikov_core::soliton::{
    annihilation_time, calibrate_residue_flow, flow_pde_residual, trajectory, verify_1sol2, ContourRule, FlowKind,
    FlowSetting,
};
use melnikov_core::Complex;
use melnikov_verify::{oracle, Check};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{emit_plot_data, write_atomic, Series};
use crate::scenario::{complex, BaVerify, Evolve, FloquetScan, Scenario, SolitonDemo, VerifyAll};

/// Everything a scenario produces apart from timing.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    pub calibration: Option<Value>,
    pub outputs: Vec<PathBuf>,
    /// Wall-clock seconds per named section, for the timing sidecar.
    pub sections: Vec<(String, f64)>,
}

impl Outcome {
    fn new(results: Value) -> Self {
        Self { checks: Vec::new(), results, calibration: None, outputs: Vec::new(), sections: Vec::new() }
    }
}

pub struct Options<'a> {
    pub out: &'a Path,
    pub svg: bool,
    pub seed: u64,
}

pub fn run(scenario: &Scenario, opts: &Options) -> Result<Outcome, CliError> {
    match scenario {
        Scenario::FloquetScan(s) => floquet_scan(s, opts),
        Scenario::SolitonDemo(s) => soliton_demo(s, opts),
        Scenario::BaVerify(s) => ba_verify(s, opts),
        Scenario::Evolve(s) => evolve_run(s, opts),
        Scenario::VerifyAll(s) => verify_all(s, opts),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn real(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

fn floquet_scan(s: &FloquetScan, opts: &Options) -> Result<Outcome, CliError> {
    let u = s.potential()?;
    let energies: Vec<Complex> = linspace(s.range[0], s.range[1], s.samples).into_iter().map(real).collect();
    let samples = scan_discriminant(&u, &energies)?;
    let gaps = find_band_edges(&u, s.range[0], s.range[1])?;

    let mut out = Outcome::new(json!({
        "band_edges": gaps.edges,
        "closed_gaps": gaps.closed_gaps,
        "open_gaps": gaps.open_gaps,
        "warnings": gaps.warnings,
    }));
    let det =
        energies.iter().try_fold(0.0_f64, |m, &e| Ok::<_, CliError>(m.max((monodromy(&u, e)?.det() - 1.0).norm())))?;
    out.checks.push(Check::below("max |det M − 1| over the scan", det, 1e-8));
    let imag = samples.iter().map(|s| s.delta.im.abs()).fold(0.0, f64::max);
    out.checks.push(Check::below("max |Im Δ| at real energies", imag, 1e-10));

    let mut series = Series::new(&["E", "delta"]);
    for smp in &samples {
        series.push(vec![smp.energy.re, smp.delta.re]);
    }
    out.outputs.extend(emit_plot_data(&series, &opts.out.join("discriminant.csv"), opts.svg)?);
    Ok(out)
}

fn soliton_demo(s: &SolitonDemo, opts: &Options) -> Result<Outcome, CliError> {
    let setting = FlowSetting::new(s.flow, s.kappa, s.c0)?;
    let t_star = match s.flow {
        FlowKind::Melnikov => annihilation_time(s.kappa, s.c0).ok(),
        _ => None,
    };
    let t_end = s.t_end.or(t_star).unwrap_or(5.0 / s.kappa.powi(3));
    let times = linspace(0.0, t_end, s.samples);
    let rows = trajectory(&setting, &times);

    let mut out = Outcome::new(json!({
        "t_star": t_star,
        "t_end": t_end,
        "c_end": setting.c_at(t_end),
        "fixed_point": 1.0 / s.kappa.powi(3),
    }));

    let xs = linspace(s.x_range[0], s.x_range[1], 41);
    // The closed forms are singular once c < 0; stay strictly before that.
    let regular_until = t_star.map_or(t_end, |t| t.min(t_end));
    if s.c0 > 0.0 {
        let h = verify_1sol2(&setting.state_at(0.0), &xs)?;
        out.checks.push(Check::below("∂_c u + 2∂ₓψ² residual at t = 0", h.at_half, 1e-7));
        let ts = linspace(0.0, 0.9 * regular_until, 5);
        let pde = flow_pde_residual(&setting, &KdvCoefficients::soliton_c_clock(), &ts, &xs, 2.5e-4)?;
        out.checks.push(Check::below("flow PDE residual", pde, 1e-6));
    }
    if let Some(t) = t_star {
        let k3 = s.kappa.powi(3);
        let root = oracle::rk4_zero_crossing(|c| k3 * c - 1.0, s.c0, 1e-3 * t, 2.0 * t).unwrap_or(f64::NAN);
        out.checks.push(Check::below("|t* − RK4 root|", (t - root).abs(), 1e-8));
    }

    let rule = ContourRule::new(4.0_f64.max(2.5 * s.kappa));
    out.calibration = Some(serde_json::to_value(calibrate_residue_flow(&rule)?).expect("serializable"));

    let mut series = Series::new(&["t", "c"]);
    for r in &rows {
        series.push(vec![r.t, r.c]);
    }
    out.outputs.extend(emit_plot_data(&series, &opts.out.join("trajectory.csv"), opts.svg)?);

    // Waterfall: profiles at evenly spaced regular times, offset upwards.
    let profile_times = linspace(0.0, 0.95 * regular_until, s.profiles.max(2));
    let offset = 2.0 * s.kappa * s.kappa + 0.5;
    let mut columns = vec!["x".to_string()];
    columns.extend(profile_times.iter().map(|t| format!("u_t{t:.4}")));
    let mut waterfall = Series::with_columns(columns);
    for x in linspace(s.x_range[0], s.x_range[1], 401) {
        let mut row = vec![x];
        for (j, &t) in profile_times.iter().enumerate() {
            let u = setting.state_at(t).potential(x).unwrap_or(f64::NAN);
            row.push(u + offset * j as f64);
        }
        waterfall.push(row);
    }
    out.outputs.extend(emit_plot_data(&waterfall, &opts.out.join("profiles.csv"), opts.svg)?);
    Ok(out)
}

fn ba_verify(s: &BaVerify, opts: &Options) -> Result<Outcome, CliError> {
    let data = &s.data;
    let tp = &s.time_point;
    let lambdas: Vec<Complex> = s.lambdas.iter().map(|&l| complex(l)).collect();
    let at_xs: Vec<_> = s.xs.iter().map(|&x| tp.with_x(x)).collect();
    let mut out = Outcome::new(Value::Null);

    for k in 0..data.n() {
        out.checks.push(Check::below(
            format!("τ-derivative of u, pair {k}"),
            verify_tauder1(data, tp, k, &s.xs)?,
            1e-6,
        ));
        let h = verify_dpsi(data, tp, k, lambdas[0])?;
        out.checks.push(Check::below(format!("τ-derivative of ψ, pair {k}"), h.at_half, 1e-6));
        let target = tauder1_rhs(data, tp, k)?;
        let spread = deltau1_quotients(data, tp, k, &lambdas)?.iter().map(|q| (q - target).norm()).fold(0.0, f64::max);
        out.checks.push(Check::below(format!("source quotient spread, pair {k}"), spread, 1e-6));
    }
    out.checks.push(Check::below("KP auxiliary residual", kp_residual(data, &at_xs, &lambdas)?, 1e-6));
    if data.is_kdv_symmetric() && tp.is_kdv_reduced() {
        out.checks.push(Check::below("KdV auxiliary residual", kdv_residual(data, &at_xs, &lambdas)?, 1e-6));
    }

    let mut ungluing = Vec::new();
    if let Some(path) = &s.path {
        let report = verify_combined_flow(data, path, tp, s.path_tau, &s.xs)?;
        out.checks.push(Check::below("combined-flow chain-rule residual", report.residual, 1e-6));
        for u in &report.ungluing {
            out.checks.push(Check::below(format!("|a_{}| at τ = −α/β", u.pair), u.a_k_abs, 1e-10));
        }
        ungluing = report.ungluing;
        if !s.path_samples.is_empty() {
            let mut buf = Vec::new();
            write_potential_grid_csv(data, path, tp, &s.xs, &s.path_samples, &mut buf)?;
            let file = opts.out.join("potential_path.csv");
            write_atomic(&file, &buf)?;
            out.outputs.push(file);
        }
    }

    let mut series = Series::new(&["x", "u_re", "u_im"]);
    for x in &at_xs {
        let u = potential_u(data, x)?;
        series.push(vec![x.x(), u.re, u.im]);
    }
    out.outputs.extend(emit_plot_data(&series, &opts.out.join("potential.csv"), opts.svg)?);
    out.results = json!({ "pairs": data.n(), "kdv_symmetric": data.is_kdv_symmetric(), "ungluing": ungluing });
    Ok(out)
}

fn evolve_run(s: &Evolve, opts: &Options) -> Result<Outcome, CliError> {
    let u0 = s.potential()?;
    let mut cfg = SolverConfig::new(u0.grid().clone(), s.dt, s.t_end);
    cfg.integrator = s.integrator;
    cfg.dealias = s.dealias;
    cfg.snapshot_every = s.snapshot_every;
    cfg.coefficients = s.normalization.coefficients();
    let spec = SourceSpec { entries: s.sources.clone(), refresh_every: s.refresh_every, refresh_at: s.refresh_at };
    let report = evolve(&u0, &spec, &cfg)?;
    let probes: Vec<Complex> = s.probes.iter().map(|&e| real(e)).collect();
    let iso = if probes.is_empty() { None } else { Some(isospectrality_report(&report, &probes)?) };

    let mut out = Outcome::new(json!({
        "steps": report.steps,
        "dt": report.dt,
        "displacement": report.displacement(),
        "l2_drift": report.l2_drift(),
        "max_imag": report.max_imag,
        "max_probe_drift": iso.as_ref().map(|i| i.max_drift.clone()),
    }));
    if let Some(i) = &iso {
        out.checks.push(Check::below("Δ-probe drift", i.worst_drift(), s.tolerances.drift));
    }
    out.checks.push(Check::below("mean(u) drift", report.mean_drift(), s.tolerances.mean));
    out.checks.push(Check::below("max |Im u|", report.max_imag, melnikov_core::kdv::MAX_IMAG));

    let mut buf = Vec::new();
    melnikov_core::kdv::write_snapshots_csv(&report, &mut buf)?;
    let file = opts.out.join("snapshots.csv");
    write_atomic(&file, &buf)?;
    out.outputs.push(file);
    let mut buf = Vec::new();
    melnikov_core::kdv::write_invariants_csv(&report, iso.as_ref(), &mut buf)?;
    let file = opts.out.join("invariants.csv");
    write_atomic(&file, &buf)?;
    out.outputs.push(file);

    if let Some(i) = &iso {
        let mut columns = vec!["t".to_string()];
        columns.extend((1..=probes.len()).map(|k| format!("delta_probe_{k}")));
        let mut drift = Series::with_columns(columns);
        for (t, row) in i.times.iter().zip(&i.deltas) {
            let mut r = vec![*t];
            r.extend(row.iter().zip(&i.deltas[0]).map(|(d, d0)| (d - d0).norm()));
            drift.push(r);
        }
        out.outputs.extend(emit_plot_data(&drift, &opts.out.join("delta_drift.csv"), opts.svg)?);
    }
    if opts.svg {
        out.outputs.extend(waterfall(&report, &opts.out.join("waterfall.csv"))?);
    }
    Ok(out)
}

/// Up to eight evenly spaced snapshots as stacked traces.
fn waterfall(report: &melnikov_core::kdv::RunReport<f64>, path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let count = report.snapshots.len();
    let picks: Vec<usize> =
        if count <= 8 { (0..count).collect() } else { (0..8).map(|j| j * (count - 1) / 7).collect() };
    let spread = report.snapshots.iter().map(|s| s.u.max_abs()).fold(0.0, f64::max).max(1e-12) * 1.5;
    let mut columns = vec!["x".to_string()];
    columns.extend(picks.iter().map(|&j| format!("u_t{:.4}", report.snapshots[j].t)));
    let mut series = Series::with_columns(columns);
    let nodes = report.snapshots[0].u.grid().nodes();
    for (i, x) in nodes.into_iter().enumerate() {
        let mut row = vec![x];
        row.extend(picks.iter().enumerate().map(|(k, &j)| report.snapshots[j].u.values()[i].re + spread * k as f64));
        series.push(row);
    }
    emit_plot_data(&series, path, true)
}

#[derive(Serialize)]
struct CriterionSummary<'a> {
    id: u32,
    title: &'a str,
    passed: bool,
    runtime_limit_s: f64,
}

fn verify_all(s: &VerifyAll, opts: &Options) -> Result<Outcome, CliError> {
    let mut outcomes = melnikov_verify::all();
    outcomes.push(melnikov_verify::property_sweep(opts.seed, s.property_cases));
    let mut out = Outcome::new(Value::Null);
    for o in &outcomes {
        for c in &o.checks {
            out.checks.push(Check { name: format!("criterion {}: {}", o.id, c.name), ..c.clone() });
        }
        out.checks.push(Check::below(
            format!("criterion {}: runtime within budget", o.id),
            if o.elapsed_s < o.runtime_limit_s { 0.0 } else { 1.0 },
            0.5,
        ));
        out.sections.push((format!("criterion {}", o.id), o.elapsed_s));
    }
    let summary: Vec<CriterionSummary> = outcomes
        .iter()
        .map(|o| CriterionSummary { id: o.id, title: o.title, passed: o.passed(), runtime_limit_s: o.runtime_limit_s })
        .collect();
    out.results = json!({ "criteria": summary });
    out.calibration =
        Some(serde_json::to_value(calibrate_residue_flow(&ContourRule::new(4.0_f64))?).expect("serializable"));
    Ok(out)
}
