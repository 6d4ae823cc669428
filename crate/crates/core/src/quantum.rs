//! Exact finite-N two-mode Hamiltonian in the Fock basis.
//!
//! Basis states `|n, N−n⟩` are labelled by the left-well occupation `n`. The
//! Hamiltonian
//!
//! ```text
//! H = (Δ/2)(n_L − n_R) + (gβ/2)(n_L² + n_R²) + γ(a_L†a_R + a_R†a_L)
//! ```
//!
//! is real symmetric tridiagonal with `H[n][n] = Δ(2n−N)/2 + (gβ/2)(n² + (N−n)²)`
//! and `H[n][n+1] = γ√((n+1)(N−n))`.
//!
//! Phase statistics use the relative-phase states
//! `|φ⟩ = (N+1)^{−1/2} Σ_n e^{inφ}|n, N−n⟩`; the density
//! `P(φ) = |Σ_n c_n e^{−inφ}|² / 2π` is positive and integrates to one.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::tridiag::SymTridiagonal;

/// Largest supported atom number.
pub const MAX_ATOMS: usize = 20_000;
/// Minimum number of points on the phase grid.
pub const PHASE_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockHamiltonian {
    pub n_total: usize,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistribution {
    /// Uniform grid over (−π, π].
    pub phi: Vec<f64>,
    /// Probability density at each grid point.
    pub density: Vec<f64>,
}

impl PhaseDistribution {
    pub fn step(&self) -> f64 {
        2.0 * PI / self.phi.len() as f64
    }

    /// Riemann sum of the density over one period.
    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.step()
    }

    /// Mean resultant length `|⟨e^{iφ}⟩|`.
    pub fn resultant_length(&self) -> f64 {
        let (mut c, mut s) = (0.0, 0.0);
        for (p, w) in self.phi.iter().zip(&self.density) {
            c += w * p.cos();
            s += w * p.sin();
        }
        let dphi = self.step();
        (c * dphi).hypot(s * dphi)
    }

    /// Mean direction of the distribution.
    pub fn mean_direction(&self) -> f64 {
        let (mut c, mut s) = (0.0, 0.0);
        for (p, w) in self.phi.iter().zip(&self.density) {
            c += w * p.cos();
            s += w * p.sin();
        }
        s.atan2(c)
    }

    /// Circular standard deviation `√(−2 ln R)`.
    pub fn circular_std(&self) -> f64 {
        let r = self.resultant_length().min(1.0);
        (-2.0 * r.ln()).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,p\n");
        for (p, w) in self.phi.iter().zip(&self.density) {
            let _ = writeln!(out, "{p},{w}");
        }
        out
    }
}

/// Moments of the left-well number in a normalised state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberMoments {
    pub mean_n: f64,
    pub delta_n: f64,
}

pub fn number_moments(state: &[f64]) -> NumberMoments {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, c) in state.iter().enumerate() {
        let p = c * c;
        let n = n as f64;
        m1 += p * n;
        m2 += p * n * n;
    }
    NumberMoments {
        mean_n: m1,
        delta_n: (m2 - m1 * m1).max(0.0).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumGroundReport {
    pub energy: f64,
    pub state: Vec<f64>,
    pub mean_n: f64,
    pub delta_n: f64,
    pub phase_distribution: PhaseDistribution,
    pub delta_phi_circular: f64,
}

impl QuantumGroundReport {
    fn from_state(energy: f64, state: Vec<f64>) -> Self {
        let m = number_moments(&state);
        let phase_distribution = phase_distribution(&state);
        let delta_phi_circular = phase_distribution.circular_std();
        QuantumGroundReport {
            energy,
            state,
            mean_n: m.mean_n,
            delta_n: m.delta_n,
            phase_distribution,
            delta_phi_circular,
        }
    }

    /// Amplitudes as CSV `n,amplitude`.
    pub fn amplitudes_csv(&self) -> String {
        let mut out = String::from("n,amplitude\n");
        for (n, c) in self.state.iter().enumerate() {
            let _ = writeln!(out, "{n},{c}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedState {
    pub mean_n: f64,
    pub delta_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletReport {
    /// E1 − E0 of the two lowest levels.
    pub gap: f64,
    /// Gap from the second to the third level, for comparison.
    pub next_gap: f64,
    /// Localised combination with the smaller mean occupation.
    pub lower: LocalizedState,
    /// Localised combination with the larger mean occupation.
    pub upper: LocalizedState,
}

impl DoubletReport {
    /// Number fluctuation of the localised states (their mean when they differ).
    pub fn localized_delta_n(&self) -> f64 {
        0.5 * (self.lower.delta_n + self.upper.delta_n)
    }
}

/// Builds the Fock-space Hamiltonian.
pub fn build(p: &ModelParams) -> Result<FockHamiltonian> {
    p.validate()?;
    build_unchecked(p.n_total, p.tunneling, p.mean_field, p.tilt)
}

/// Builds the matrix without requiring γ ≠ 0 (γ = 0 gives Fock eigenstates).
pub fn build_unchecked(n_total: usize, tunneling: f64, mean_field: f64, tilt: f64) -> Result<FockHamiltonian> {
    if n_total == 0 {
        return Err(Error::Parameter("n_total must be at least 1".into()));
    }
    if n_total > MAX_ATOMS {
        return Err(Error::Capacity { n: n_total, cap: MAX_ATOMS });
    }
    let nt = n_total as f64;
    let diag = (0..=n_total)
        .map(|n| {
            let n = n as f64;
            0.5 * tilt * (2.0 * n - nt) + 0.5 * mean_field * (n * n + (nt - n) * (nt - n))
        })
        .collect();
    let offdiag = (0..n_total)
        .map(|n| tunneling * (((n + 1) * (n_total - n)) as f64).sqrt())
        .collect();
    Ok(FockHamiltonian { n_total, diag, offdiag })
}

impl FockHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn matrix(&self) -> SymTridiagonal<'_> {
        SymTridiagonal {
            diag: &self.diag,
            off: &self.offdiag,
        }
    }

    /// `⟨v|H|v⟩` for a real state.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * v[i] * v[i];
            if i + 1 < n {
                acc += 2.0 * self.offdiag[i] * v[i] * v[i + 1];
            }
        }
        acc
    }
}

/// The `k` lowest eigenpairs with non-decreasing energies.
pub fn low_spectrum(h: &FockHamiltonian, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if k == 0 || k > h.dim() {
        return Err(Error::Domain(format!("k = {k} outside 1..={}", h.dim())));
    }
    let mut pairs = h.matrix().lowest(k)?;
    for (_, v) in pairs.iter_mut() {
        fix_sign(v);
    }
    Ok(pairs)
}

/// Makes the largest-magnitude amplitude positive so results are reproducible.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0_f64, |acc, a| if a.abs() > acc.abs() { a } else { acc });
    if pivot < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
}

pub fn ground_state(h: &FockHamiltonian) -> Result<QuantumGroundReport> {
    let (energy, state) = low_spectrum(h, 1)?.pop().expect("one eigenpair");
    Ok(QuantumGroundReport::from_state(energy, state))
}

/// Relative-phase density on a uniform grid of at least [`PHASE_GRID`] points.
///
/// The grid is widened to more than `N + 1` points for large N so the Riemann
/// sum stays exact for the degree-N trigonometric polynomial.
pub fn phase_distribution(state: &[f64]) -> PhaseDistribution {
    let dim = state.len();
    let m = PHASE_GRID.max((2 * dim).next_power_of_two());
    // φ_k = −π + 2π(k+1)/m; e^{−inφ_k} = (−1)^n e^{−2πin(k+1)/m}.
    let mut buf: Vec<Complex<f64>> = (0..m)
        .map(|n| {
            if n < dim {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                Complex::new(sign * state[n], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let norm = 1.0 / (2.0 * PI);
    let phi = (0..m).map(|k| -PI + 2.0 * PI * (k + 1) as f64 / m as f64).collect();
    let density = (0..m).map(|k| buf[(k + 1) % m].norm_sqr() * norm).collect();
    PhaseDistribution { phi, density }
}

/// Symmetry-broken states from the two lowest levels on the attractive side.
///
/// The two localised states are the eigenvectors of the left-well number
/// operator projected onto the span of the ground and first excited states;
/// for parity eigenstates these are exactly `(|g⟩ ± |e⟩)/√2`, and the
/// construction stays well defined when the doublet is numerically degenerate.
pub fn localized_doublet(p: &ModelParams) -> Result<DoubletReport> {
    let r = p.reduced_params()?;
    if r.delta != 0.0 || r.xi >= -1.0 || p.mean_field >= 0.0 {
        return Err(Error::Configuration(format!(
            "localized doublet needs delta = 0 and attractive xi < -1, got xi = {}, delta = {}",
            r.xi, r.delta
        )));
    }
    let h = build(p)?;
    let k = 3.min(h.dim());
    let spectrum = low_spectrum(&h, k)?;
    if spectrum.len() < 3 {
        return Err(Error::Domain("doublet needs at least three levels".into()));
    }
    let (e0, g) = (&spectrum[0].0, &spectrum[0].1);
    let (e1, e) = (&spectrum[1].0, &spectrum[1].1);
    let e2 = spectrum[2].0;

    // 2x2 matrix of n̂ in the {g, e} basis.
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for n in 0..h.dim() {
        let nf = n as f64;
        a += nf * g[n] * g[n];
        b += nf * g[n] * e[n];
        c += nf * e[n] * e[n];
    }
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (ct, st) = (theta.cos(), theta.sin());
    let first: Vec<f64> = g.iter().zip(e).map(|(x, y)| ct * x + st * y).collect();
    let second: Vec<f64> = g.iter().zip(e).map(|(x, y)| -st * x + ct * y).collect();
    let (m1, m2) = (number_moments(&first), number_moments(&second));
    let (lower, upper) = if m1.mean_n <= m2.mean_n { (m1, m2) } else { (m2, m1) };
    Ok(DoubletReport {
        gap: (e1 - e0).max(0.0),
        next_gap: e2 - e1,
        lower: LocalizedState { mean_n: lower.mean_n, delta_n: lower.delta_n },
        upper: LocalizedState { mean_n: upper.mean_n, delta_n: upper.delta_n },
    })
}

/// Ground state with a small extra tilt that selects one of the two wells.
pub fn tilt_localized_ground(p: &ModelParams, reduced_tilt: f64) -> Result<QuantumGroundReport> {
    let mut q = *p;
    q.tilt += 2.0 * p.tunneling * reduced_tilt;
    ground_state(&build(&q)?)
}

/// Energy of the SU(2) coherent state at `(x, φ)`: the mean-field value plus
/// the `gβ·N·x(1−x)` self-interaction correction. Any such energy bounds the
/// exact ground energy from above.
pub fn coherent_state_energy(p: &ModelParams, x: f64, phi: f64) -> f64 {
    let n = p.n();
    let s2 = x * (1.0 - x);
    0.5 * p.tilt * n * (2.0 * x - 1.0)
        + 0.5 * p.mean_field * (n * n * (x * x + (1.0 - x) * (1.0 - x)) + 2.0 * n * s2)
        + 2.0 * p.tunneling * n * s2.sqrt() * phi.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n: usize, gamma: f64, gb: f64, tilt: f64) -> ModelParams {
        ModelParams::new(n, gamma, gb, tilt).unwrap()
    }

    #[test]
    fn build_examples() {
        let h = build(&params(2, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(h.diag, vec![0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(h.offdiag[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(h.offdiag[1], 2f64.sqrt(), epsilon = 1e-15);

        let h = build_unchecked(1, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(h.diag, vec![-1.0, 1.0]);
        assert_eq!(h.offdiag, vec![0.0]);

        let h = build_unchecked(2, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(h.diag, vec![2.0, 1.0, 2.0]);
    }

    #[test]
    fn capacity() {
        assert!(matches!(
            build(&params(MAX_ATOMS + 1, 1.0, 0.0, 0.0)),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn two_atom_ground_state() {
        let g = ground_state(&build(&params(2, 1.0, 0.0, 0.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(g.energy, -2.0, epsilon = 1e-12);
        let expect = [0.5, -0.5 * 2f64.sqrt(), 0.5];
        for (a, b) in g.state.iter().zip(expect) {
            assert_abs_diff_eq!(a.abs(), b.abs(), epsilon = 1e-12);
        }
        assert!(g.state[0] * g.state[1] < 0.0);
        assert_abs_diff_eq!(g.mean_n, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.delta_n, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn one_atom_ground_state() {
        let g = ground_state(&build(&params(1, 1.0, 0.0, 0.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(g.energy, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.delta_n, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn noninteracting_is_binomial() {
        let g = ground_state(&build(&params(200, 0.3, 0.0, 0.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(g.delta_n, 200f64.sqrt() / 2.0, epsilon = 1e-6);
        // Independent oracle: |c_n|² = C(N, n)/2^N.
        let mut logc = 0.0_f64;
        for n in 0..=200usize {
            if n > 0 {
                logc += ((200 - n + 1) as f64).ln() - (n as f64).ln();
            }
            let p = (logc - 200.0 * 2f64.ln()).exp();
            assert_abs_diff_eq!(g.state[n] * g.state[n], p, epsilon = 1e-10);
        }
    }

    #[test]
    fn spectrum_examples() {
        let h = build(&params(2, 1.0, 0.0, 0.0)).unwrap();
        let s = low_spectrum(&h, 3).unwrap();
        let e: Vec<f64> = s.iter().map(|p| p.0).collect();
        for (a, b) in e.iter().zip([-2.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let h = build(&params(30, 1.0, 0.05, 0.1)).unwrap();
        let one = low_spectrum(&h, 1).unwrap();
        let g = ground_state(&h).unwrap();
        assert_eq!(one[0].0, g.energy);
        assert_eq!(one[0].1, g.state);
        assert!(low_spectrum(&h, 0).is_err());
        assert!(low_spectrum(&h, 32).is_err());
    }

    #[test]
    fn attractive_doublet_is_nearly_degenerate() {
        // ξ = gβN/(2γ) = −2 with γ = 1/2, N = 100.
        let p = ModelParams::from_reduced(100, -2.0, 0.0).unwrap();
        let s = low_spectrum(&build(&p).unwrap(), 3).unwrap();
        let gap01 = s[1].0 - s[0].0;
        let gap12 = s[2].0 - s[1].0;
        assert!(gap01 < 0.01 * gap12, "{gap01} vs {gap12}");
    }

    #[test]
    fn doublet_localizes_near_closed_forms() {
        let p = ModelParams::from_reduced(100, -2.0, 0.0).unwrap();
        let d = localized_doublet(&p).unwrap();
        let root = (1.0 - 0.25f64).sqrt();
        assert!((d.lower.mean_n / 100.0 - 0.5 * (1.0 - root)).abs() < 0.02, "{d:?}");
        assert!((d.upper.mean_n / 100.0 - 0.5 * (1.0 + root)).abs() < 0.02, "{d:?}");
        assert_abs_diff_eq!(d.lower.delta_n, d.upper.delta_n, epsilon = 1e-8);
        let near = localized_doublet(&ModelParams::from_reduced(100, -1.1, 0.0).unwrap()).unwrap();
        assert!(near.localized_delta_n() > d.localized_delta_n());
    }

    #[test]
    fn doublet_preconditions() {
        assert!(matches!(
            localized_doublet(&ModelParams::from_reduced(100, 2.0, 0.0).unwrap()),
            Err(Error::Configuration(_))
        ));
        assert!(localized_doublet(&ModelParams::from_reduced(100, -2.0, 0.1).unwrap()).is_err());
    }

    #[test]
    fn tilt_localizes_one_side() {
        let p = ModelParams::from_reduced(100, -2.0, 0.0).unwrap();
        let g = tilt_localized_ground(&p, -1e-4).unwrap();
        // Negative tilt lowers the left-rich states.
        assert!(g.mean_n > 80.0, "{}", g.mean_n);
        let d = localized_doublet(&p).unwrap();
        assert!((g.delta_n - d.upper.delta_n).abs() < 0.05 * d.upper.delta_n);
    }

    #[test]
    fn phase_distribution_normalised_and_peaked() {
        let g = ground_state(&build(&params(50, 1.0, 0.01, 0.0)).unwrap()).unwrap();
        let pd = &g.phase_distribution;
        assert_eq!(pd.phi.len(), PHASE_GRID);
        assert_eq!(*pd.phi.last().unwrap(), PI);
        assert!(pd.density.iter().all(|p| *p >= 0.0));
        assert_abs_diff_eq!(pd.total(), 1.0, epsilon = 1e-10);
        // γ > 0 puts the ground state at relative phase π.
        assert!(pd.mean_direction().abs() > PI - 1e-6);
        assert!(g.delta_n * g.delta_phi_circular >= 0.45);
    }

    #[test]
    fn coherent_bound_holds_where_mean_field_fails() {
        // N = 2, γ = gβ = 1: exact ground −0.56 lies above the mean-field value −1
        // but below the coherent-state energy −0.5 at (1/2, π).
        let p = params(2, 1.0, 1.0, 0.0);
        let g = ground_state(&build(&p).unwrap()).unwrap();
        assert_abs_diff_eq!(g.energy, 0.5 * (3.0 - 17f64.sqrt()), epsilon = 1e-12);
        let e_coh = coherent_state_energy(&p, 0.5, PI);
        assert_abs_diff_eq!(e_coh, -0.5, epsilon = 1e-12);
        assert!(g.energy <= e_coh);
    }

    #[test]
    fn coherent_energy_matches_fock_expectation() {
        // Binomial amplitudes with alternating signs realise the coherent state at (x, π).
        let p = params(40, 0.8, 0.03, 0.2);
        let h = build(&p).unwrap();
        let x: f64 = 0.3;
        let mut v = Vec::with_capacity(41);
        let mut logc = 0.0_f64;
        for n in 0..=40usize {
            if n > 0 {
                logc += ((40 - n + 1) as f64).ln() - (n as f64).ln();
            }
            let amp = (0.5 * (logc + n as f64 * x.ln() + (40 - n) as f64 * (1.0 - x).ln())).exp();
            v.push(if n % 2 == 0 { amp } else { -amp });
        }
        assert_abs_diff_eq!(h.expectation(&v), coherent_state_energy(&p, x, PI), epsilon = 1e-10);
    }
}
