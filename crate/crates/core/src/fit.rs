//! Least-squares power-law fits on log-log axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of points for a meaningful slope and error estimate.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Slope of ln y against ln x.
    pub exponent: f64,
    /// `exp` of the intercept, so that `y ≈ prefactor · x^exponent`.
    pub prefactor: f64,
    /// Standard error of the slope.
    pub fit_error: f64,
    pub points: usize,
}

/// Fits `y = a·x^b` by ordinary least squares on `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Fit("power-law fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("control variable is constant".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let fit_error = (sse / (n - 2.0) / sxx).sqrt();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        fit_error,
        points: xs.len(),
    })
}

/// `count` points spaced evenly in log between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_law() {
        let xs = log_space(1.0, 1e4, 9);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.25)).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert_abs_diff_eq!(f.exponent, -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(f.prefactor, 3.0, epsilon = 1e-10);
        assert!(f.fit_error < 1e-12);
    }

    #[test]
    fn noisy_fit_reports_error() {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
        let ys = [1.0, 1.5, 1.9, 3.1, 3.9];
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!(f.fit_error > 0.0);
        assert!(f.exponent > 0.3 && f.exponent < 0.7);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), Err(Error::Fit(_))));
        assert!(fit_power_law(&[1.0, 2.0, 3.0, -1.0], &[1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-4, 1e-2, 3);
        assert_abs_diff_eq!(v[0], 1e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(v[1], 1e-3, epsilon = 1e-16);
        assert_abs_diff_eq!(v[2], 1e-2, epsilon = 1e-15);
    }
}
