//! Spectral observables along a run and CSV output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{discriminant, PeriodicPotential};
use crate::scalar::{Cx, Real};

use super::RunReport;

/// Discriminant series at fixed probe energies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsospectralityReport<T> {
    pub probes: Vec<Cx<T>>,
    pub times: Vec<T>,
    /// `Δ(E_i; u(t_j))`, indexed `[j][i]`.
    pub deltas: Vec<Vec<Cx<T>>>,
    /// `max_j |Δ(E_i; t_j) − Δ(E_i; 0)|` per probe.
    pub max_drift: Vec<T>,
    pub mean_drift: T,
    pub l2_drift: T,
}

impl<T: Real> IsospectralityReport<T> {
    pub fn worst_drift(&self) -> T {
        self.max_drift.iter().copied().fold(T::zero(), T::max)
    }
}

pub fn isospectrality_report<T: Real>(report: &RunReport<T>, probes: &[Cx<T>]) -> Result<IsospectralityReport<T>> {
    if report.snapshots.is_empty() {
        return Err(Error::InvalidArgument("run has no snapshots".into()));
    }
    let deltas: Vec<Vec<Cx<T>>> = report
        .snapshots
        .par_iter()
        .map(|s| {
            let u = PeriodicPotential::new(s.u.clone())?;
            probes.iter().map(|&e| Ok(discriminant(&u, e)?.delta)).collect()
        })
        .collect::<Result<_>>()?;
    let max_drift = (0..probes.len())
        .map(|i| deltas.iter().fold(T::zero(), |m, row| m.max((row[i] - deltas[0][i]).norm())))
        .collect();
    Ok(IsospectralityReport {
        probes: probes.to_vec(),
        times: report.snapshots.iter().map(|s| s.t).collect(),
        deltas,
        max_drift,
        mean_drift: report.mean_drift(),
        l2_drift: report.l2_drift(),
    })
}

/// Columns `t,x,u`, one row per grid node and snapshot.
pub fn write_snapshots_csv<T: Real, W: Write>(report: &RunReport<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u"])?;
    for s in &report.snapshots {
        for (x, v) in s.u.grid().nodes().into_iter().zip(s.u.values()) {
            w.write_record([s.t.to_string(), x.to_string(), v.re.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `t,mean_u,l2` followed by `delta_probe_i` (real parts) when a
/// discriminant series is given.
pub fn write_invariants_csv<T: Real, W: Write>(
    report: &RunReport<T>,
    spectral: Option<&IsospectralityReport<T>>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let probes = spectral.map_or(0, |s| s.probes.len());
    let mut header = vec!["t".to_string(), "mean_u".into(), "l2".into()];
    header.extend((1..=probes).map(|i| format!("delta_probe_{i}")));
    w.write_record(&header)?;
    for (j, s) in report.invariants.iter().enumerate() {
        let mut row = vec![s.t.to_string(), s.mean.to_string(), s.l2.to_string()];
        if let Some(sp) = spectral {
            row.extend(sp.deltas[j].iter().map(|d| d.re.to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
