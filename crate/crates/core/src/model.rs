//! Parameters, reduced units and the mean-field energy surface.
//!
//! Energies are angular frequencies (ħ = 1). With reduced time `tau = 2γt`
//! and population fraction `x = n/N`, the mean-field energy per particle is
//!
//! ```text
//! h(x, φ) = δ·x − ξ·x(1−x) + √(x(1−x))·cos φ,    ξ = gβN/(2γ), δ = Δ/(2γ)
//! ```
//!
//! so that `H − H0 = 2γ·N·h`. The flow is Hamiltonian in the pair (φ, x):
//! `dx/dτ = −∂h/∂φ`, `dφ/dτ = +∂h/∂x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from x = 0 and x = 1 inside which points are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Physical couplings of the two-mode Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Total atom number N.
    pub n_total: usize,
    /// Tunneling rate γ.
    pub tunneling: f64,
    /// Mean-field coupling gβ.
    pub mean_field: f64,
    /// Ground-energy difference Δ between left and right wells.
    pub tilt: f64,
}

impl ModelParams {
    pub fn new(n_total: usize, tunneling: f64, mean_field: f64, tilt: f64) -> Result<Self> {
        let p = ModelParams {
            n_total,
            tunneling,
            mean_field,
            tilt,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with γ = 1/2 so that reduced and physical energies coincide per atom.
    pub fn from_reduced(n_total: usize, xi: f64, delta: f64) -> Result<Self> {
        if n_total == 0 {
            return Err(Error::Parameter("n_total must be at least 1".into()));
        }
        // 2γ = 1, so gβ = ξ / N and Δ = δ.
        Self::new(n_total, 0.5, xi / n_total as f64, delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::Parameter("n_total must be at least 1".into()));
        }
        if !(self.tunneling.is_finite() && self.mean_field.is_finite() && self.tilt.is_finite()) {
            return Err(Error::Parameter("couplings must be finite".into()));
        }
        if self.tunneling == 0.0 {
            return Err(Error::Parameter("tunneling must be nonzero".into()));
        }
        let r = self.reduced_unchecked();
        if !(r.xi.is_finite() && r.delta.is_finite()) {
            return Err(Error::Parameter("reduced parameters are not finite".into()));
        }
        Ok(())
    }

    /// ξ = gβN/(2γ), δ = Δ/(2γ).
    pub fn reduced_params(&self) -> Result<ReducedParams> {
        self.validate()?;
        Ok(self.reduced_unchecked())
    }

    fn reduced_unchecked(&self) -> ReducedParams {
        let two_gamma = 2.0 * self.tunneling;
        ReducedParams {
            xi: self.mean_field * self.n_total as f64 / two_gamma,
            delta: self.tilt / two_gamma,
        }
    }

    pub fn n(&self) -> f64 {
        self.n_total as f64
    }

    /// Conserved offset dropped from the mean-field energy, N(Δ + gβN)/2.
    pub fn h0(&self) -> f64 {
        0.5 * self.n() * (self.tilt + self.mean_field * self.n())
    }
}

/// Reduces an angle to its representative in (−π, π].
pub fn canonical_phase(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = phi.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    // rem_euclid maps −π to π already; guard the rounding case r == −π.
    if r <= -PI {
        r += two_pi;
    }
    r
}

/// A semiclassical state on the cylinder phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// Population fraction of the left well.
    pub x: f64,
    /// Phase difference, canonical in (−π, π].
    pub phi: f64,
}

impl PhasePoint {
    /// Builds a point, reducing `phi` mod 2π and rejecting `x` outside the margin.
    pub fn new(x: f64, phi: f64) -> Result<Self> {
        if !x.is_finite() || !phi.is_finite() {
            return Err(Error::Domain(format!("non-finite phase point ({x}, {phi})")));
        }
        check_interior(x)?;
        Ok(PhasePoint {
            x,
            phi: canonical_phase(phi),
        })
    }

    /// Distance on the cylinder: |Δx| and the wrapped |Δφ|, combined in the max norm.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let dphi = canonical_phase(self.phi - other.phi).abs();
        (self.x - other.x).abs().max(dphi)
    }
}

pub(crate) fn check_interior(x: f64) -> Result<()> {
    if !(BOUNDARY_MARGIN..=1.0 - BOUNDARY_MARGIN).contains(&x) {
        Err(Error::Singularity {
            x,
            margin: BOUNDARY_MARGIN,
        })
    } else {
        Ok(())
    }
}

/// Dimensionless energy per particle; `(H − H0)/(2γ) = N·h`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ReducedEnergy(pub f64);

impl ReducedEnergy {
    /// Converts back to the physical energy `H − H0 = 2γ·N·h`.
    pub fn to_physical(self, p: &ModelParams) -> f64 {
        2.0 * p.tunneling * p.n() * self.0
    }
}

/// Reduced parameters (ξ, δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub xi: f64,
    pub delta: f64,
}

/// Second partial derivatives of `h` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub h_xx: f64,
    pub h_xphi: f64,
    pub h_phiphi: f64,
}

impl Hessian {
    pub fn det(&self) -> f64 {
        self.h_xx * self.h_phiphi - self.h_xphi * self.h_xphi
    }
}

impl ReducedParams {
    pub fn new(xi: f64, delta: f64) -> Self {
        ReducedParams { xi, delta }
    }

    /// `h(x, φ)` for any x in [0, 1]; the edges are finite even though the flow is not.
    pub fn reduced_energy(&self, x: f64, phi: f64) -> Result<ReducedEnergy> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let s = (x * (1.0 - x)).sqrt();
        Ok(ReducedEnergy(
            self.delta * x - self.xi * x * (1.0 - x) + s * phi.cos(),
        ))
    }

    pub fn energy_at(&self, pt: &PhasePoint) -> f64 {
        let x = pt.x;
        let s = (x * (1.0 - x)).sqrt();
        self.delta * x - self.xi * x * (1.0 - x) + s * pt.phi.cos()
    }

    /// Reduced-time velocities `(dx/dτ, dφ/dτ)`.
    pub fn flow_field(&self, pt: &PhasePoint) -> Result<(f64, f64)> {
        check_interior(pt.x)?;
        Ok(self.flow_unchecked(pt.x, pt.phi))
    }

    /// Flow without the margin check; callers guarantee 0 < x < 1.
    #[inline]
    pub(crate) fn flow_unchecked(&self, x: f64, phi: f64) -> (f64, f64) {
        let s = (x * (1.0 - x)).sqrt();
        let u = 1.0 - 2.0 * x;
        let (sin, cos) = phi.sin_cos();
        (
            s * sin,
            self.delta - self.xi * u + u * cos / (2.0 * s),
        )
    }

    /// Exact gradient `(∂h/∂x, ∂h/∂φ)`.
    pub fn energy_gradient(&self, pt: &PhasePoint) -> Result<(f64, f64)> {
        let (dx, dphi) = self.flow_field(pt)?;
        Ok((dphi, -dx))
    }

    /// Exact second partial derivatives of `h`.
    pub fn energy_hessian(&self, pt: &PhasePoint) -> Result<Hessian> {
        check_interior(pt.x)?;
        Ok(self.hessian_unchecked(pt.x, pt.phi))
    }

    pub(crate) fn hessian_unchecked(&self, x: f64, phi: f64) -> Hessian {
        let s2 = x * (1.0 - x);
        let s = s2.sqrt();
        let u = 1.0 - 2.0 * x;
        let (sin, cos) = phi.sin_cos();
        // d/dx [u/(2s)] = −(4s² + u²)/(4s³) = −1/(4s³)
        Hessian {
            h_xx: 2.0 * self.xi - cos / (4.0 * s2 * s),
            h_xphi: -u * sin / (2.0 * s),
            h_phiphi: -s * cos,
        }
    }

    /// Upper bound on |h| over the closed strip.
    pub fn energy_bound(&self) -> f64 {
        self.delta.abs() + self.xi.abs() / 4.0 + 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn reduced_params_examples() {
        let r = ModelParams::new(100, 1.0, 0.02, 0.0).unwrap().reduced_params().unwrap();
        assert_abs_diff_eq!(r.xi, 1.0, epsilon = 1e-14);
        assert_eq!(r.delta, 0.0);

        let r = ModelParams::new(100, 1.0, 0.036, 0.2).unwrap().reduced_params().unwrap();
        assert_abs_diff_eq!(r.xi, 1.8, epsilon = 1e-14);
        assert_abs_diff_eq!(r.delta, 0.1, epsilon = 1e-14);

        let r = ModelParams::new(1, -0.5, 1.0, 0.0).unwrap().reduced_params().unwrap();
        assert_eq!(r.xi, -1.0);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn zero_tunneling_rejected() {
        assert!(matches!(
            ModelParams::new(10, 0.0, 1.0, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            ModelParams::new(0, 1.0, 1.0, 0.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn from_reduced_round_trips() {
        let p = ModelParams::from_reduced(400, 1.8, 0.1).unwrap();
        let r = p.reduced_params().unwrap();
        assert_abs_diff_eq!(r.xi, 1.8, epsilon = 1e-14);
        assert_abs_diff_eq!(r.delta, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn phase_canonicalisation() {
        assert_eq!(canonical_phase(PI), PI);
        assert_eq!(canonical_phase(-PI), PI);
        assert_abs_diff_eq!(canonical_phase(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(canonical_phase(-0.5), -0.5, epsilon = 1e-15);
        let p = PhasePoint::new(0.5, -PI).unwrap();
        assert_eq!(p.phi, PI);
    }

    #[test]
    fn phase_point_margin() {
        assert!(PhasePoint::new(0.0, 0.0).is_err());
        assert!(PhasePoint::new(1.0, 0.0).is_err());
        assert!(PhasePoint::new(1e-10, 0.0).is_err());
        assert!(PhasePoint::new(1e-8, 0.0).is_ok());
    }

    #[test]
    fn reduced_energy_examples() {
        let e = |x, phi, xi, delta| {
            ReducedParams::new(xi, delta).reduced_energy(x, phi).unwrap().0
        };
        assert_abs_diff_eq!(e(0.5, 0.0, 0.0, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e(0.5, PI, 2.0, 0.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e(0.5, PI, 1.8, 0.1), -0.9, epsilon = 1e-15);
        assert!(ReducedParams::new(0.0, 0.0).reduced_energy(1.5, 0.0).is_err());
    }

    #[test]
    fn physical_energy_matches_mean_field_form() {
        // H − H0 = Δn − gβn(N−n) + 2γ√(n(N−n))cos φ
        let p = ModelParams::new(50, 0.7, 0.03, -0.2).unwrap();
        let r = p.reduced_params().unwrap();
        let (n, phi) = (17.0_f64, 1.1_f64);
        let nt = p.n();
        let direct = p.tilt * n - p.mean_field * n * (nt - n)
            + 2.0 * p.tunneling * (n * (nt - n)).sqrt() * phi.cos();
        let h = r.reduced_energy(n / nt, phi).unwrap();
        assert_abs_diff_eq!(h.to_physical(&p), direct, epsilon = 1e-12);
    }

    #[test]
    fn flow_field_examples() {
        let r = ReducedParams::new(0.0, 0.0);
        let (a, b) = r.flow_field(&PhasePoint::new(0.5, 0.0).unwrap()).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        let (a, b) = r.flow_field(&PhasePoint::new(0.5, PI / 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);

        let r = ReducedParams::new(1.0, 0.0);
        let (a, b) = r.flow_field(&PhasePoint::new(0.25, 0.0).unwrap()).unwrap();
        assert_eq!(a, 0.0);
        // −0.5 + 0.5/(2√0.1875)
        assert_abs_diff_eq!(b, 0.077_350_269_189_625_76, epsilon = 1e-14);
    }

    #[test]
    fn flow_rejects_edges() {
        let r = ReducedParams::new(1.0, 0.0);
        let pt = PhasePoint { x: 1e-12, phi: 0.0 };
        assert!(matches!(r.flow_field(&pt), Err(Error::Singularity { .. })));
    }

    #[test]
    fn hessian_examples() {
        let r = ReducedParams::new(0.0, 0.0);
        let h = r.energy_hessian(&PhasePoint::new(0.5, PI).unwrap()).unwrap();
        assert_abs_diff_eq!(h.h_xx, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.h_xphi, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.h_phiphi, 0.5, epsilon = 1e-14);
        let h = r.energy_hessian(&PhasePoint::new(0.5, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(h.h_xx, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.h_xphi, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.h_phiphi, -0.5, epsilon = 1e-14);
    }

    fn h_of(r: &ReducedParams, x: f64, phi: f64) -> f64 {
        r.reduced_energy(x, phi).unwrap().0
    }

    proptest! {
        #[test]
        fn periodic_in_phi(x in 0.0..=1.0f64, phi in -10.0..10.0f64, xi in -5.0..5.0f64, d in -1.0..1.0f64) {
            let r = ReducedParams::new(xi, d);
            let a = h_of(&r, x, phi);
            let b = h_of(&r, x, phi + 2.0 * PI);
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
        }

        #[test]
        fn mirror_symmetric_without_tilt(x in 0.0..=1.0f64, phi in -PI..PI, xi in -5.0..5.0f64) {
            let r = ReducedParams::new(xi, 0.0);
            prop_assert!((h_of(&r, x, phi) - h_of(&r, 1.0 - x, phi)).abs() < 1e-14);
        }

        #[test]
        fn bounded(x in 0.0..=1.0f64, phi in -PI..PI, xi in -5.0..5.0f64, d in -2.0..2.0f64) {
            let r = ReducedParams::new(xi, d);
            prop_assert!(h_of(&r, x, phi).abs() <= r.energy_bound() + 1e-15);
        }

        #[test]
        fn hessian_matches_finite_differences(x in 0.05..0.95f64, phi in -PI..PI, xi in -4.0..4.0f64, d in -1.0..1.0f64) {
            let r = ReducedParams::new(xi, d);
            let pt = PhasePoint::new(x, phi).unwrap();
            let hess = r.energy_hessian(&pt).unwrap();
            let eps = 1e-5;
            let g = |x: f64, phi: f64| r.energy_gradient(&PhasePoint { x, phi }).unwrap();
            let fd_xx = (g(x + eps, phi).0 - g(x - eps, phi).0) / (2.0 * eps);
            let fd_xphi = (g(x, phi + eps).0 - g(x, phi - eps).0) / (2.0 * eps);
            let fd_phix = (g(x + eps, phi).1 - g(x - eps, phi).1) / (2.0 * eps);
            let fd_pp = (g(x, phi + eps).1 - g(x, phi - eps).1) / (2.0 * eps);
            let tol = |v: f64| 1e-6 * (1.0 + v.abs());
            prop_assert!((fd_xx - hess.h_xx).abs() < tol(hess.h_xx));
            prop_assert!((fd_xphi - hess.h_xphi).abs() < tol(hess.h_xphi));
            prop_assert!((fd_phix - hess.h_xphi).abs() < tol(hess.h_xphi));
            prop_assert!((fd_pp - hess.h_phiphi).abs() < tol(hess.h_phiphi));
        }
    }

    #[test]
    fn flow_is_symplectic_gradient() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0_f64;
        for _ in 0..1000 {
            let x = rng.gen_range(0.02..0.98);
            let phi = rng.gen_range(-PI..PI);
            let r = ReducedParams::new(rng.gen_range(-5.0..5.0), rng.gen_range(-1.0..1.0));
            let (dx, dphi) = r.flow_field(&PhasePoint { x, phi }).unwrap();
            let eps = 1e-6;
            let dh_dx = (h_of(&r, x + eps, phi) - h_of(&r, x - eps, phi)) / (2.0 * eps);
            let dh_dphi = (h_of(&r, x, phi + eps) - h_of(&r, x, phi - eps)) / (2.0 * eps);
            worst = worst.max((dx + dh_dphi).abs()).max((dphi - dh_dx).abs());
        }
        assert!(worst < 1e-8, "max deviation {worst}");
    }
}
