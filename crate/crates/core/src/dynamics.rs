//! Time integration of the reduced Josephson equations.
//!
//! Steps use the three-stage Gauss-Legendre collocation scheme (order 6,
//! symplectic and symmetric), so energy errors stay bounded instead of
//! drifting. A step is rejected and halved when its stage iteration fails to
//! converge, when it leaves the interior, or when it changes the energy by more
//! than the per-step budget. Successful steps grow back towards `dtau_max`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{canonical_phase, check_interior, PhasePoint, ReducedParams, BOUNDARY_MARGIN};

/// Default bound on `|h(τ) − h(0)| / max(|h(0)|, ENERGY_SCALE_FLOOR)`.
pub const ENERGY_DRIFT_TOLERANCE: f64 = 1e-8;
/// Energy scale below which drift is measured absolutely.
pub const ENERGY_SCALE_FLOOR: f64 = 1e-3;
/// Smallest step before integration gives up.
pub const MIN_STEP: f64 = 1e-12;
/// An accepted state this close to x = 0 or x = 1 ends the run with a boundary event.
pub const BOUNDARY_EVENT_ZONE: f64 = 1e-7;
/// Hard cap on attempted steps per unit of `tau_end / dtau_max`.
const STEP_ALLOWANCE: f64 = 50.0;

const SQRT15: f64 = 3.872_983_346_207_417;
const GL_A: [[f64; 3]; 3] = [
    [5.0 / 36.0, 2.0 / 9.0 - SQRT15 / 15.0, 5.0 / 36.0 - SQRT15 / 30.0],
    [5.0 / 36.0 + SQRT15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQRT15 / 24.0],
    [5.0 / 36.0 + SQRT15 / 30.0, 2.0 / 9.0 + SQRT15 / 15.0, 5.0 / 36.0],
];
const GL_B: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Largest reduced-time step.
    pub dtau_max: f64,
    pub energy_drift_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dtau_max: 0.02,
            energy_drift_tolerance: ENERGY_DRIFT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub point: PhasePoint,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest relative energy deviation from the initial sample.
    pub max_energy_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The orbit reached the boundary margin at this reduced time.
    Boundary { tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub params: ReducedParams,
    pub step_stats: StepStats,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the start sample")
    }

    /// CSV with header `tau,x,phi,h` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,x,phi,h\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.tau, s.point.x, s.point.phi, s.h
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Population stays on the left-rich side (x > 1/2).
    Left,
    Right,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrappingReport {
    pub trapped: bool,
    pub side: Side,
    pub min_x: f64,
    pub max_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    /// Mean period in reduced time.
    pub period: f64,
    /// Standard error of the mean period divided by the period.
    pub rel_std_error: f64,
    /// Number of full periods averaged.
    pub cycles: usize,
}

/// Relative drift measure shared by the integrator and its tests.
pub fn relative_drift(h: f64, h0: f64) -> f64 {
    (h - h0).abs() / h0.abs().max(ENERGY_SCALE_FLOOR)
}

/// Integrates from `start` to `tau_end` with the default drift tolerance.
pub fn integrate(start: PhasePoint, xi: f64, delta: f64, tau_end: f64, dtau_max: f64) -> Result<Trajectory> {
    integrate_with(
        start,
        ReducedParams::new(xi, delta),
        tau_end,
        &IntegratorConfig {
            dtau_max,
            ..IntegratorConfig::default()
        },
    )
}

pub fn integrate_with(
    start: PhasePoint,
    params: ReducedParams,
    tau_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_interior(start.x)?;
    if !(tau_end > 0.0 && tau_end.is_finite()) {
        return Err(Error::Domain(format!("tau_end must be positive, got {tau_end}")));
    }
    if !(cfg.dtau_max > 0.0) || !(cfg.energy_drift_tolerance > 0.0) {
        return Err(Error::Configuration("step size and drift tolerance must be positive".into()));
    }

    let h0 = params.energy_at(&start);
    let step_budget = 1e-3 * cfg.energy_drift_tolerance * h0.abs().max(ENERGY_SCALE_FLOOR);

    let mut samples = vec![Sample { tau: 0.0, point: start, h: h0 }];
    let mut stats = StepStats::default();
    let (mut x, mut phi, mut h) = (start.x, start.phi, h0);
    let mut tau = 0.0;
    let mut step = cfg.dtau_max;
    let mut termination = Termination::Completed;
    let max_attempts = (STEP_ALLOWANCE * (tau_end / cfg.dtau_max).ceil()) as usize + 10_000;

    while tau < tau_end {
        if stats.accepted + stats.rejected > max_attempts {
            return Err(Error::Stiffness { tau, step });
        }
        let dt = step.min(tau_end - tau);
        let trial = gauss_legendre_step(&params, x, phi, dt);
        let accepted = match trial {
            Some((xn, pn)) if (BOUNDARY_MARGIN..=1.0 - BOUNDARY_MARGIN).contains(&xn) => {
                let hn = params.energy_at(&PhasePoint { x: xn, phi: pn });
                if (hn - h).abs() <= step_budget {
                    Some((xn, pn, hn))
                } else {
                    None
                }
            }
            _ => None,
        };
        match accepted {
            Some((xn, pn, hn)) => {
                x = xn;
                phi = pn;
                h = hn;
                tau = if dt == tau_end - tau { tau_end } else { tau + dt };
                stats.accepted += 1;
                stats.max_energy_drift = stats.max_energy_drift.max(relative_drift(h, h0));
                samples.push(Sample {
                    tau,
                    point: PhasePoint { x, phi: canonical_phase(phi) },
                    h,
                });
                step = (2.0 * step).min(cfg.dtau_max);
                if x.min(1.0 - x) < BOUNDARY_EVENT_ZONE {
                    termination = Termination::Boundary { tau };
                    break;
                }
            }
            None => {
                stats.rejected += 1;
                step = 0.5 * dt;
                if step < MIN_STEP {
                    if x.min(1.0 - x) < BOUNDARY_EVENT_ZONE {
                        termination = Termination::Boundary { tau };
                        break;
                    }
                    return Err(Error::Stiffness { tau, step });
                }
            }
        }
    }

    if stats.max_energy_drift > cfg.energy_drift_tolerance {
        return Err(Error::Estimation(format!(
            "energy drift {:e} exceeds tolerance {:e}",
            stats.max_energy_drift, cfg.energy_drift_tolerance
        )));
    }

    Ok(Trajectory {
        samples,
        params,
        step_stats: stats,
        termination,
    })
}

/// One Gauss-Legendre step; `None` when the stage iteration does not settle
/// or a stage leaves the interior.
fn gauss_legendre_step(p: &ReducedParams, x: f64, phi: f64, dt: f64) -> Option<(f64, f64)> {
    let f0 = p.flow_unchecked(x, phi);
    let mut k = [f0; 3];
    for _ in 0..60 {
        let mut next = [(0.0, 0.0); 3];
        for (i, row) in GL_A.iter().enumerate() {
            let mut sx = x;
            let mut sp = phi;
            for (a, kj) in row.iter().zip(&k) {
                sx += dt * a * kj.0;
                sp += dt * a * kj.1;
            }
            if !(sx > 0.0 && sx < 1.0) {
                return None;
            }
            next[i] = p.flow_unchecked(sx, sp);
        }
        let change = next
            .iter()
            .zip(&k)
            .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
            .fold(0.0, f64::max);
        let scale = next
            .iter()
            .map(|v| v.0.abs().max(v.1.abs()))
            .fold(1.0, f64::max);
        k = next;
        if change <= 1e-15 * scale {
            let xn = x + dt * GL_B.iter().zip(&k).map(|(b, kj)| b * kj.0).sum::<f64>();
            let pn = phi + dt * GL_B.iter().zip(&k).map(|(b, kj)| b * kj.1).sum::<f64>();
            return (xn.is_finite() && pn.is_finite()).then_some((xn, pn));
        }
    }
    None
}

/// Population self-trapping: the orbit never reaches x = 1/2.
pub fn detect_trapping(traj: &Trajectory) -> TrappingReport {
    let (min_x, max_x) = traj
        .samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.point.x), hi.max(s.point.x))
        });
    let side = if min_x > 0.5 {
        Side::Left
    } else if max_x < 0.5 {
        Side::Right
    } else {
        Side::None
    };
    TrappingReport {
        trapped: side != Side::None,
        side,
        min_x,
        max_x,
    }
}

/// Period from successive upward crossings of the mean of x, with linear
/// interpolation between samples.
pub fn measure_period(traj: &Trajectory) -> Result<PeriodEstimate> {
    let s = &traj.samples;
    if s.len() < 3 {
        return Err(Error::Estimation("too few samples".into()));
    }
    let (min_x, max_x) = s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.point.x), hi.max(v.point.x))
        });
    if max_x - min_x < 1e-12 {
        return Err(Error::Estimation("x does not oscillate".into()));
    }
    // Time-weighted mean of x.
    let mut area = 0.0;
    for w in s.windows(2) {
        area += 0.5 * (w[0].point.x + w[1].point.x) * (w[1].tau - w[0].tau);
    }
    let mean = area / (s.last().unwrap().tau - s[0].tau);

    let crossings: Vec<f64> = s
        .windows(2)
        .filter(|w| w[0].point.x < mean && w[1].point.x >= mean)
        .map(|w| {
            let (a, b) = (w[0].point.x - mean, w[1].point.x - mean);
            w[0].tau + (w[1].tau - w[0].tau) * (-a) / (b - a)
        })
        .collect();
    if crossings.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least two full oscillations, found {} crossings",
            crossings.len()
        )));
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let n = periods.len() as f64;
    let period = periods.iter().sum::<f64>() / n;
    let var = periods.iter().map(|p| (p - period).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(PeriodEstimate {
        period,
        rel_std_error: (var / n).sqrt() / period,
        cycles: periods.len(),
    })
}

/// Angular frequency corresponding to a reduced period.
pub fn angular_frequency(period: f64) -> f64 {
    2.0 * PI / period
}
