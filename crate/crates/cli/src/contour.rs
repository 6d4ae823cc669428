//! Sampled energy surface h(x, φ) with the fixed points laid over it.

use std::f64::consts::PI;

use dimer::bifurcation::{find_fixed_points_with, FixedPoint, StationarityForm};
use dimer::model::BOUNDARY_MARGIN;
use dimer::ReducedParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::format::csv_number;

#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub params: ReducedParams,
    /// Uniform over [margin, 1 − margin], mirror-symmetric about 1/2.
    pub x_axis: Vec<f64>,
    /// φ_j = −π + 2π(j+1)/nφ, so the last point is π.
    pub phi_axis: Vec<f64>,
    /// `values[i * nφ + j] = h(x_i, φ_j)`.
    pub values: Vec<f64>,
    pub overlay: Vec<FixedPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
}

/// A discrete extremum of h along both axes. Tied neighbouring nodes of the
/// same kind (a critical point halfway between two grid lines) are merged and
/// reported at their centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCriticalPoint {
    pub x: f64,
    pub phi: f64,
    pub kind: CriticalKind,
    /// Number of grid nodes merged into this point.
    pub nodes: usize,
}

/// JSON companion of the CSV grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourOverlay {
    pub xi: f64,
    pub delta: f64,
    pub nx: usize,
    pub nphi: usize,
    pub fixed_points: Vec<FixedPoint>,
    pub grid_critical_points: Vec<GridCriticalPoint>,
}

impl ContourGrid {
    pub fn build(params: ReducedParams, nx: usize, nphi: usize, form: StationarityForm) -> CliResult<Self> {
        if nx < 3 || nphi < 3 {
            return Err(CliError::Config(format!("grid {nx}x{nphi} is too small")));
        }
        let lo = BOUNDARY_MARGIN;
        let dx = (1.0 - 2.0 * lo) / (nx - 1) as f64;
        let mut x_axis = vec![0.0; nx];
        for i in 0..nx.div_ceil(2) {
            x_axis[i] = lo + i as f64 * dx;
            x_axis[nx - 1 - i] = 1.0 - x_axis[i];
        }
        if nx % 2 == 1 {
            x_axis[nx / 2] = 0.5;
        }
        let phi_axis: Vec<f64> = (0..nphi)
            .map(|j| -PI + 2.0 * PI * (j + 1) as f64 / nphi as f64)
            .collect();

        let mut values = Vec::with_capacity(nx * nphi);
        for (i, &x) in x_axis.iter().enumerate() {
            // Mirrored rows share one product so the δ = 0 grid is exactly symmetric.
            let a = x_axis[i.min(nx - 1 - i)];
            let s2 = a * (1.0 - a);
            let s = s2.sqrt();
            for &phi in &phi_axis {
                values.push(params.delta * x - params.xi * s2 + s * phi.cos());
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Model(dimer::Error::Domain("energy surface is not finite".into())));
        }
        let overlay = find_fixed_points_with(params.xi, params.delta, form)?;
        Ok(ContourGrid { params, x_axis, phi_axis, values, overlay })
    }

    pub fn nx(&self) -> usize {
        self.x_axis.len()
    }

    pub fn nphi(&self) -> usize {
        self.phi_axis.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nphi() + j]
    }

    /// Interior nodes where both one-sided differences change sign along x
    /// and along φ (periodically). Ties count as sign changes.
    pub fn critical_points(&self) -> Vec<GridCriticalPoint> {
        let np = self.nphi();
        let nodes = self.critical_nodes();
        let adjacent = |a: &(usize, usize, CriticalKind), b: &(usize, usize, CriticalKind)| {
            let dj = a.1.abs_diff(b.1);
            a.2 == b.2 && a.0.abs_diff(b.0) <= 1 && dj.min(np - dj) <= 1
        };
        // Group nodes into connected clusters.
        let mut cluster: Vec<usize> = (0..nodes.len()).collect();
        for a in 0..nodes.len() {
            for b in 0..a {
                if adjacent(&nodes[a], &nodes[b]) {
                    let (ra, rb) = (cluster[a], cluster[b]);
                    cluster.iter_mut().filter(|c| **c == ra).for_each(|c| *c = rb);
                }
            }
        }
        let mut out = Vec::new();
        for root in 0..nodes.len() {
            let members: Vec<_> = (0..nodes.len()).filter(|&k| cluster[k] == root).map(|k| nodes[k]).collect();
            if members.is_empty() {
                continue;
            }
            let m = members.len() as f64;
            let x = members.iter().map(|n| self.x_axis[n.0]).sum::<f64>() / m;
            let (sin, cos) = members.iter().fold((0.0, 0.0), |(s, c), n| {
                let phi = self.phi_axis[n.1];
                (s + phi.sin(), c + phi.cos())
            });
            let phi = if members.len() == 1 { self.phi_axis[members[0].1] } else { sin.atan2(cos) };
            out.push(GridCriticalPoint { x, phi, kind: members[0].2, nodes: members.len() });
        }
        out
    }

    fn critical_nodes(&self) -> Vec<(usize, usize, CriticalKind)> {
        let (nx, np) = (self.nx(), self.nphi());
        let mut out = Vec::new();
        for i in 1..nx - 1 {
            for j in 0..np {
                let h = self.value(i, j);
                let (xl, xr) = (h - self.value(i - 1, j), self.value(i + 1, j) - h);
                if xl * xr > 0.0 {
                    continue;
                }
                let (pl, pr) = (
                    h - self.value(i, (j + np - 1) % np),
                    self.value(i, (j + 1) % np) - h,
                );
                if pl * pr > 0.0 {
                    continue;
                }
                let x_max = xl >= 0.0 && xr <= 0.0;
                let phi_max = pl >= 0.0 && pr <= 0.0;
                let kind = match (x_max, phi_max) {
                    (true, true) => CriticalKind::Maximum,
                    (false, false) => CriticalKind::Minimum,
                    _ => CriticalKind::Saddle,
                };
                out.push((i, j, kind));
            }
        }
        out
    }

    /// Long-format CSV `x,phi,h`, x-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48 + 8);
        out.push_str("x,phi,h\n");
        for (i, &x) in self.x_axis.iter().enumerate() {
            for (j, &phi) in self.phi_axis.iter().enumerate() {
                out.push_str(&csv_number(x));
                out.push(',');
                out.push_str(&csv_number(phi));
                out.push(',');
                out.push_str(&csv_number(self.value(i, j)));
                out.push('\n');
            }
        }
        out
    }

    pub fn overlay_report(&self) -> ContourOverlay {
        ContourOverlay {
            xi: self.params.xi,
            delta: self.params.delta,
            nx: self.nx(),
            nphi: self.nphi(),
            fixed_points: self.overlay.clone(),
            grid_critical_points: self.critical_points(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_follow_the_layout() {
        let g = ContourGrid::build(ReducedParams::new(0.6, 0.0), 11, 8, StationarityForm::Flow).unwrap();
        assert_eq!(g.x_axis[0], BOUNDARY_MARGIN);
        assert_eq!(g.x_axis[10], 1.0 - BOUNDARY_MARGIN);
        assert_eq!(g.x_axis[5], 0.5);
        assert_eq!(*g.phi_axis.last().unwrap(), PI);
        assert!((g.phi_axis[0] + PI - 2.0 * PI / 8.0).abs() < 1e-15);
        assert_eq!(g.values.len(), 88);
    }

    #[test]
    fn weak_coupling_has_only_the_symmetric_points() {
        let g = ContourGrid::build(ReducedParams::new(0.6, 0.0), 101, 100, StationarityForm::Flow).unwrap();
        let cps = g.critical_points();
        assert_eq!(cps.len(), 2, "{cps:?}");
        for cp in cps {
            assert_eq!(cp.x, 0.5);
            assert!(cp.phi.abs() < 1e-12 || (cp.phi - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_shape() {
        let g = ContourGrid::build(ReducedParams::new(1.0, 0.1), 5, 4, StationarityForm::Flow).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("x,phi,h\n") && csv.ends_with('\n'));
        assert_eq!(csv.lines().count(), 21);
    }
}
