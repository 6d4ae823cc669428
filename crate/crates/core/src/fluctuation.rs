//! Harmonic fluctuations around stable fixed points.
//!
//! Expanding the number-phase Hamiltonian to second order around a fixed point
//! `(n0, φ0)` gives an oscillator
//!
//! ```text
//! H ≈ H0 + E1 ∂/∂η + E2 η ∂/∂η − (E_J/2) ∂²/∂η² + (E_C/2) η²
//! ```
//!
//! with angular frequency `√(E_J·E_C)`. Four coefficient sets are kept side by
//! side and every report carries the label of the set that produced it:
//!
//! * `PaperS`: closed forms at S for equal wells, with `Δn = 1/Δφ = √N/(√2(1+|ξ|)^{1/4})`.
//! * `PaperSpm`: closed forms at S±, with `Δn = 1/Δφ = √N/(√(2|ξ|)(ξ²−1)^{1/4})`.
//! * `JavanainenS`: the alternative S coefficients `E_C = 2gβ(1 + 0.5/|ξ|)`,
//!   `E2 = 0.5gβ/|ξ|`, using `Δn = 1/Δφ = (E_J/E_C)^{1/4}`.
//! * `Generic`: exact second derivatives of the mean-field energy at any
//!   stable fixed point, with the oscillator ground-state width
//!   `Δn = (E_J/E_C)^{1/4}/√2` and `Δφ = 1/(2Δn)`.

use serde::{Deserialize, Serialize};

use crate::bifurcation::{classify, Branch, FixedPoint, Stability};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, log_space, PowerLawFit};
use crate::model::{ModelParams, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PaperS,
    PaperSpm,
    JavanainenS,
    Generic,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::PaperS,
        Variant::PaperSpm,
        Variant::JavanainenS,
        Variant::Generic,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub variant: Variant,
    pub e1: f64,
    pub e2: f64,
    pub e_j: f64,
    pub e_c: f64,
    /// Constant term: mean-field energy above H0 at the fixed point.
    pub h0_at_fp: f64,
}

impl CoefficientSet {
    /// Small-oscillation angular frequency `√(E_J·E_C)` in physical units.
    pub fn frequency(&self) -> Result<f64> {
        let prod = self.e_j * self.e_c;
        if prod > 0.0 {
            Ok(prod.sqrt())
        } else {
            Err(Error::NotACenter(format!("E_J·E_C = {prod} is not positive")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub delta_n: f64,
    pub delta_phi: f64,
    pub coefficients: CoefficientSet,
    pub fixed_point: FixedPoint,
}

/// `gβ/|ξ|`, which equals `2|γ|/N` with the sign of gβ and stays finite at ξ = 0.
fn coupling_over_xi(p: &ModelParams) -> f64 {
    let two_gamma_over_n = 2.0 * p.tunneling.abs() / p.n();
    if p.mean_field < 0.0 {
        -two_gamma_over_n
    } else {
        two_gamma_over_n
    }
}

fn check_closed_form_preconditions(fp: &FixedPoint, p: &ModelParams, variant: Variant) -> Result<()> {
    let r = p.reduced_params()?;
    if r.delta != 0.0 {
        return Err(Error::Configuration(format!(
            "variant {variant:?} is defined only for equal wells (delta = 0), got delta = {}",
            r.delta
        )));
    }
    match variant {
        Variant::PaperS | Variant::JavanainenS if fp.branch != Branch::S => Err(Error::Configuration(
            format!("variant {variant:?} applies to the S fixed point, got {:?}", fp.branch),
        )),
        Variant::PaperSpm => {
            if !matches!(fp.branch, Branch::SPlus | Branch::SMinus) {
                return Err(Error::Configuration(format!(
                    "variant paper_spm applies to S+ or S-, got {:?}",
                    fp.branch
                )));
            }
            if r.xi.abs() <= 1.0 {
                return Err(Error::Domain(format!("paper_spm requires |xi| > 1, got {}", r.xi)));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Oscillator coefficients at a stable fixed point.
pub fn coefficients(fp: &FixedPoint, p: &ModelParams, variant: Variant) -> Result<CoefficientSet> {
    let r = p.reduced_params()?;
    if classify(fp, r.xi, r.delta) != Stability::StableCenter {
        return Err(Error::NotACenter(format!(
            "fixed point {:?} at x0 = {} is not a stable center",
            fp.branch, fp.x0
        )));
    }
    let pt = PhasePoint::new(fp.x0, fp.phi0.angle())?;
    let h0_at_fp = 2.0 * p.tunneling * p.n() * r.energy_at(&pt);
    let n = p.n();
    let gb = p.mean_field;
    let xi = r.xi;

    if variant != Variant::Generic {
        check_closed_form_preconditions(fp, p, variant)?;
    }
    let set = match variant {
        Variant::PaperS => {
            let k = coupling_over_xi(p);
            CoefficientSet {
                variant,
                e1: 0.0,
                e2: k,
                e_j: 0.5 * k * n * n,
                e_c: 2.0 * gb / (1.0 + xi.abs()),
                h0_at_fp,
            }
        }
        Variant::JavanainenS => {
            let k = coupling_over_xi(p);
            CoefficientSet {
                variant,
                e1: 0.0,
                e2: 0.5 * k,
                e_j: 0.5 * k * n * n,
                e_c: 2.0 * gb + k,
                h0_at_fp,
            }
        }
        Variant::PaperSpm => {
            let sign = if fp.branch == Branch::SPlus { 1.0 } else { -1.0 };
            CoefficientSet {
                variant,
                e1: sign * 0.5 * gb * n * (1.0 - xi.powi(-2)).sqrt(),
                e2: -gb * xi * xi,
                e_j: -gb * n * n / (2.0 * xi * xi),
                e_c: -2.0 * gb * (xi * xi - 1.0),
                h0_at_fp,
            }
        }
        Variant::Generic => {
            // H = H0 + 2γN·h(n/N, φ): ∂²H/∂n² = 2γ h_xx / N, ∂²H/∂φ² = 2γN h_φφ.
            let hess = r.energy_hessian(&pt)?;
            let (dh_dx, _) = r.energy_gradient(&pt)?;
            let two_gamma = 2.0 * p.tunneling;
            CoefficientSet {
                variant,
                e1: two_gamma * dh_dx,
                e2: two_gamma * hess.h_xphi,
                e_j: two_gamma * n * hess.h_phiphi,
                e_c: two_gamma * hess.h_xx / n,
                h0_at_fp,
            }
        }
    };
    Ok(set)
}

/// Predicted number and phase fluctuations at a stable fixed point.
pub fn predict(fp: &FixedPoint, p: &ModelParams, variant: Variant) -> Result<FluctuationReport> {
    let c = coefficients(fp, p, variant)?;
    let ratio = || {
        let r = c.e_j / c.e_c;
        if r > 0.0 && r.is_finite() {
            Ok(r)
        } else {
            Err(Error::NotACenter(format!("E_J/E_C = {r} is not positive")))
        }
    };
    let xi = p.reduced_params()?.xi;
    let (delta_n, delta_phi) = match variant {
        Variant::PaperS => {
            let dn = eq_s_number_fluctuation(p.n_total, xi);
            (dn, 1.0 / dn)
        }
        Variant::PaperSpm => {
            let dn = eq_spm_number_fluctuation(p.n_total, xi)?;
            (dn, 1.0 / dn)
        }
        Variant::JavanainenS => {
            let dn = ratio()?.powf(0.25);
            (dn, 1.0 / dn)
        }
        Variant::Generic => {
            let dn = ratio()?.powf(0.25) / 2f64.sqrt();
            (dn, 0.5 / dn)
        }
    };
    Ok(FluctuationReport {
        delta_n,
        delta_phi,
        coefficients: c,
        fixed_point: *fp,
    })
}

/// Number fluctuation at S for equal wells: `√N/(√2(1+|ξ|)^{1/4})`.
pub fn eq_s_number_fluctuation(n_total: usize, xi: f64) -> f64 {
    (n_total as f64).sqrt() / (2f64.sqrt() * (1.0 + xi.abs()).powf(0.25))
}

/// Number fluctuation at S± for equal wells: `√N/(√(2|ξ|)(ξ²−1)^{1/4})`.
pub fn eq_spm_number_fluctuation(n_total: usize, xi: f64) -> Result<f64> {
    if xi.abs() <= 1.0 {
        return Err(Error::Domain(format!("requires |xi| > 1, got {xi}")));
    }
    Ok((n_total as f64).sqrt() / ((2.0 * xi.abs()).sqrt() * (xi * xi - 1.0).powf(0.25)))
}

/// Near-threshold form `√(N/2)·[2(|ξ|−1)]^{−1/4}`.
pub fn critical_asymptote(n_total: usize, xi: f64) -> Result<f64> {
    if xi.abs() <= 1.0 {
        return Err(Error::Domain(format!("requires |xi| > 1, got {xi}")));
    }
    Ok((0.5 * n_total as f64).sqrt() * (2.0 * (xi.abs() - 1.0)).powf(-0.25))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// |ξ| ≫ 1: N sweep at fixed gβ/(2γ), S closed form.
    Weak,
    /// |ξ| ≪ 1: N sweep at fixed ξ, S closed form.
    Strong,
    /// ξ → 1+: sweep of |ξ| − 1 at fixed N, S± closed form.
    Critical,
}

/// Number of points in each scaling sweep.
pub const SCALING_POINTS: usize = 16;

/// Log-log slope of Δn against the regime's control variable.
///
/// `base` fixes what the regime holds constant: the ratio gβ/(2γ) for the weak
/// regime, ξ for the strong regime and N for the critical regime.
pub fn scaling_exponents(base: &ModelParams, regime: Regime) -> Result<PowerLawFit> {
    scaling_sweep(base, regime, SCALING_POINTS)
}

pub fn scaling_sweep(base: &ModelParams, regime: Regime, points: usize) -> Result<PowerLawFit> {
    let r = base.reduced_params()?;
    let (controls, values): (Vec<f64>, Vec<f64>) = match regime {
        Regime::Weak => {
            let ratio = base.mean_field / (2.0 * base.tunneling);
            let ns = log_space(1e3, 1e6, points);
            if ratio.abs() * ns[0] < 100.0 {
                return Err(Error::Domain(format!(
                    "weak regime needs |xi| >> 1; gbeta/(2 gamma) = {ratio} gives xi = {} at N = 1e3",
                    ratio * ns[0]
                )));
            }
            ns.iter()
                .map(|&n| (n, eq_s_number_fluctuation(n.round() as usize, ratio * n.round())))
                .unzip()
        }
        Regime::Strong => {
            if r.xi.abs() > 0.1 {
                return Err(Error::Domain(format!("strong regime needs |xi| << 1, got {}", r.xi)));
            }
            log_space(1e2, 1e6, points)
                .iter()
                .map(|&n| (n, eq_s_number_fluctuation(n.round() as usize, r.xi)))
                .unzip()
        }
        Regime::Critical => {
            let mut pairs = Vec::with_capacity(points);
            for eps in log_space(1e-4, 1e-2, points) {
                pairs.push((eps, eq_spm_number_fluctuation(base.n_total, 1.0 + eps)?));
            }
            pairs.into_iter().unzip()
        }
    };
    // Rounding N to integers must not shift the control variable.
    let controls = match regime {
        Regime::Critical => controls,
        _ => controls.iter().map(|n| n.round()).collect(),
    };
    fit_power_law(&controls, &values)
}
