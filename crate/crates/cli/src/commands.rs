//! One function per subcommand. Each builds its report from a [`RunConfig`]
//! and hands the serialized text to [`emit`].

use std::path::{Path, PathBuf};

use dimer::bifurcation::{
    critical_xi_with, find_fixed_points_with, Branch, Census, FixedPoint, StationarityForm,
};
use dimer::dynamics::{
    detect_trapping, integrate_with, measure_period, IntegratorConfig, PeriodEstimate, StepStats, Termination,
    Trajectory, TrappingReport,
};
use dimer::fit::{fit_power_law, PowerLawFit};
use dimer::fluctuation::{predict, FluctuationReport, Variant};
use dimer::quantum::{build, ground_state, localized_doublet, tilt_localized_ground, DoubletReport, QuantumGroundReport};
use dimer::{ModelParams, PhasePoint, ReducedParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{FitAxis, Observable, Point, RunConfig};
use crate::contour::ContourGrid;
use crate::error::{CliError, CliResult};
use crate::format::{csv_number, csv_row, emit, to_json};

/// `grid.csv` becomes `grid.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

pub fn contour(cfg: &RunConfig) -> CliResult<ContourGrid> {
    let p = cfg.params.single()?;
    ContourGrid::build(p.reduced, cfg.grid.0, cfg.grid.1, cfg.form)
}

pub fn cmd_contour(cfg: &RunConfig) -> CliResult<()> {
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("contour writes two files and needs --out".into()))?;
    let grid = contour(cfg)?;
    emit(Some(out), &grid.to_csv())?;
    emit(Some(&sibling(out, "overlay.json")), &to_json(&grid.overlay_report())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub xi: f64,
    pub delta: f64,
    pub start: PhasePoint,
    pub tau_end: f64,
    pub step_stats: StepStats,
    pub termination: Termination,
    pub trapping: TrappingReport,
    /// Absent when the orbit completes fewer than two oscillations.
    pub period: Option<PeriodEstimate>,
}

pub fn evolve(cfg: &RunConfig) -> CliResult<Trajectory> {
    let p = cfg.params.single()?;
    let (x0, phi0) = cfg
        .start
        .ok_or_else(|| CliError::Config("evolve needs a start point (--x0, --phi0)".into()))?;
    let icfg = IntegratorConfig { dtau_max: cfg.dtau, energy_drift_tolerance: cfg.energy_drift };
    Ok(integrate_with(PhasePoint::new(x0, phi0)?, p.reduced, cfg.tau_end, &icfg)?)
}

pub fn summarize(traj: &Trajectory, tau_end: f64) -> EvolveSummary {
    EvolveSummary {
        xi: traj.params.xi,
        delta: traj.params.delta,
        start: traj.samples[0].point,
        tau_end,
        step_stats: traj.step_stats,
        termination: traj.termination,
        trapping: detect_trapping(traj),
        period: measure_period(traj).ok(),
    }
}

pub fn cmd_evolve(cfg: &RunConfig) -> CliResult<()> {
    let traj = evolve(cfg)?;
    emit(cfg.out.as_deref(), &traj.to_csv())?;
    if let Some(out) = &cfg.out {
        emit(Some(&sibling(out, "summary.json")), &to_json(&summarize(&traj, cfg.tau_end))?)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointsReport {
    pub xi: f64,
    pub delta: f64,
    pub form: StationarityForm,
    pub census: Census,
    pub fixed_points: Vec<FixedPoint>,
}

pub fn fixed_points(cfg: &RunConfig) -> CliResult<FixedPointsReport> {
    let r = cfg.params.single()?.reduced;
    let fps = find_fixed_points_with(r.xi, r.delta, cfg.form)?;
    Ok(FixedPointsReport {
        xi: r.xi,
        delta: r.delta,
        form: cfg.form,
        census: Census::of(&fps),
        fixed_points: fps,
    })
}

pub fn cmd_fixed_points(cfg: &RunConfig) -> CliResult<()> {
    emit(cfg.out.as_deref(), &to_json(&fixed_points(cfg)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub delta: f64,
    pub xi_c: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub below: Census,
    pub above: Census,
}

pub const CRITICAL_HEADER: &str =
    "delta,xi_c,bracket_lo,bracket_hi,stable_below,unstable_below,stable_above,unstable_above\n";

pub fn critical(cfg: &RunConfig) -> CliResult<Vec<CriticalRow>> {
    let mut deltas: Vec<f64> = cfg.params.points()?.iter().map(|p| p.reduced.delta).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    deltas
        .par_iter()
        .map(|&d| {
            let c = critical_xi_with(d, cfg.form)?;
            Ok(CriticalRow {
                delta: d,
                xi_c: c.xi_c,
                bracket_lo: c.bracket_lo,
                bracket_hi: c.bracket_hi,
                below: c.counts_below,
                above: c.counts_above,
            })
        })
        .collect()
}

pub fn critical_csv(rows: &[CriticalRow]) -> String {
    let mut out = String::from(CRITICAL_HEADER);
    for r in rows {
        out.push_str(csv_row(&[r.delta, r.xi_c, r.bracket_lo, r.bracket_hi]).trim_end());
        out.push_str(&format!(
            ",{},{},{},{}\n",
            r.below.stable, r.below.unstable, r.above.stable, r.above.unstable
        ));
    }
    out
}

pub fn cmd_critical(cfg: &RunConfig) -> CliResult<()> {
    emit(cfg.out.as_deref(), &critical_csv(&critical(cfg)?))
}

fn select_branch(r: ReducedParams, branch: Branch, form: StationarityForm) -> CliResult<FixedPoint> {
    find_fixed_points_with(r.xi, r.delta, form)?
        .into_iter()
        .find(|f| f.branch == branch)
        .ok_or_else(|| {
            CliError::Model(dimer::Error::Domain(format!(
                "no {branch:?} fixed point at xi = {}, delta = {}",
                r.xi, r.delta
            )))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctReport {
    pub params: ModelParams,
    pub xi: f64,
    pub delta: f64,
    pub variant: Variant,
    pub report: FluctuationReport,
}

pub fn fluct(cfg: &RunConfig) -> CliResult<FluctReport> {
    let p = cfg.params.single()?;
    let model = p.model()?;
    let fp = select_branch(p.reduced, cfg.branch, cfg.form)?;
    Ok(FluctReport {
        params: model,
        xi: p.reduced.xi,
        delta: p.reduced.delta,
        variant: cfg.variant,
        report: predict(&fp, &model, cfg.variant)?,
    })
}

pub fn cmd_fluct(cfg: &RunConfig) -> CliResult<()> {
    emit(cfg.out.as_deref(), &to_json(&fluct(cfg)?)?)
}

/// Exact against semiclassical Δn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub variant: Variant,
    pub branch: Branch,
    /// Ground-state Δn, or the localised-doublet Δn on the attractive side.
    pub exact_delta_n: f64,
    pub predicted_delta_n: f64,
    /// predicted / exact.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub params: ModelParams,
    pub xi: f64,
    pub delta: f64,
    /// Extra reduced tilt applied to pick one well, if any.
    pub localizing_tilt: Option<f64>,
    pub ground: QuantumGroundReport,
    /// Present for δ = 0 and ξ < −1.
    pub doublet: Option<DoubletReport>,
    pub comparison: Option<Comparison>,
}

pub fn quantum(cfg: &RunConfig) -> CliResult<QuantumReport> {
    let p = cfg.params.single()?;
    let model = p.model()?;
    let ground = match cfg.tilt_localize {
        Some(t) => tilt_localized_ground(&model, t)?,
        None => ground_state(&build(&model)?)?,
    };
    let doublet = if p.reduced.delta == 0.0 && p.reduced.xi < -1.0 && model.mean_field < 0.0 {
        Some(localized_doublet(&model)?)
    } else {
        None
    };
    let comparison = match cfg.compare {
        None => None,
        Some(variant) => {
            let (branch, exact) = match (&doublet, cfg.tilt_localize) {
                (Some(d), None) => (Branch::SPlus, d.localized_delta_n()),
                (Some(_), Some(_)) => (Branch::SPlus, ground.delta_n),
                (None, _) => (cfg.branch, ground.delta_n),
            };
            let fp = select_branch(p.reduced, branch, cfg.form)?;
            let predicted = predict(&fp, &model, variant)?.delta_n;
            Some(Comparison {
                variant,
                branch,
                exact_delta_n: exact,
                predicted_delta_n: predicted,
                ratio: predicted / exact,
            })
        }
    };
    Ok(QuantumReport {
        params: model,
        xi: p.reduced.xi,
        delta: p.reduced.delta,
        localizing_tilt: cfg.tilt_localize,
        ground,
        doublet,
        comparison,
    })
}

pub fn cmd_quantum(cfg: &RunConfig) -> CliResult<()> {
    emit(cfg.out.as_deref(), &to_json(&quantum(cfg)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_atoms: Option<usize>,
    pub xi: f64,
    pub delta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub axis: String,
    pub observable: String,
    pub fit: PowerLawFit,
}

fn observe(cfg: &RunConfig, p: &Point) -> CliResult<f64> {
    let r = p.reduced;
    Ok(match cfg.observable {
        Observable::DeltaN => {
            let fp = select_branch(r, cfg.branch, cfg.form)?;
            predict(&fp, &p.model()?, cfg.variant)?.delta_n
        }
        Observable::QuantumDeltaN => ground_state(&build(&p.model()?)?)?.delta_n,
        Observable::DoubletDeltaN => localized_doublet(&p.model()?)?.localized_delta_n(),
        Observable::XiC => critical_xi_with(r.delta, cfg.form)?.xi_c,
        Observable::StableCount => Census::of(&find_fixed_points_with(r.xi, r.delta, cfg.form)?).stable as f64,
    })
}

/// Rows sorted by (N, ξ, δ), independent of how the work was scheduled.
pub fn sweep(cfg: &RunConfig) -> CliResult<Vec<SweepRow>> {
    let points = cfg.params.points()?;
    let mut rows: Vec<SweepRow> = points
        .par_iter()
        .map(|p| {
            Ok(SweepRow {
                n_atoms: p.n_atoms(),
                xi: p.reduced.xi,
                delta: p.reduced.delta,
                value: observe(cfg, p)?,
            })
        })
        .collect::<CliResult<_>>()?;
    rows.sort_by(|a, b| {
        a.n_atoms
            .cmp(&b.n_atoms)
            .then(a.xi.total_cmp(&b.xi))
            .then(a.delta.total_cmp(&b.delta))
    });
    Ok(rows)
}

pub fn sweep_csv(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let mut out = format!("n_atoms,xi,delta,{}\n", cfg.observable.name());
    for r in rows {
        let n = r.n_atoms.map(|n| n.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{n},{},{},{}\n",
            csv_number(r.xi),
            csv_number(r.delta),
            csv_number(r.value)
        ));
    }
    out
}

pub fn sweep_fit(cfg: &RunConfig, rows: &[SweepRow], axis: FitAxis) -> CliResult<SweepFit> {
    let controls = rows
        .iter()
        .map(|r| match axis {
            FitAxis::N => r
                .n_atoms
                .map(|n| n as f64)
                .ok_or_else(|| CliError::Config("fitting against N needs --n-atoms".into())),
            FitAxis::Xi => Ok(r.xi.abs()),
            FitAxis::XiMinusOne => Ok(r.xi.abs() - 1.0),
            FitAxis::Delta => Ok(r.delta.abs()),
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    Ok(SweepFit {
        axis: axis.name().into(),
        observable: cfg.observable.name().into(),
        fit: fit_power_law(&controls, &values)?,
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<()> {
    let rows = sweep(cfg)?;
    emit(cfg.out.as_deref(), &sweep_csv(cfg, &rows))?;
    if let Some(axis) = cfg.fit {
        let fit = to_json(&sweep_fit(cfg, &rows, axis)?)?;
        match &cfg.out {
            Some(out) => emit(Some(&sibling(out, "fit.json")), &fit)?,
            None => eprint!("{fit}"),
        }
    }
    Ok(())
}
