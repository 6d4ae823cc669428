//! Fixed points of the Josephson flow and the multistability transition.
//!
//! Fixed points satisfy `sin φ0 = 0` and `dφ/dτ = 0`. Writing `c = cos φ0 = ±1`,
//! `u = 1 − 2x` and `s = √(x(1−x))`, the second condition multiplied by `2s` is
//!
//! ```text
//! f(x) = u·(c − 2ξs) + 2δs = 0.
//! ```
//!
//! With `x = (1 + sin α)/2` this becomes `ξ = c/cos α − δ/sin α =: g(α)`, and `g`
//! has exactly one stationary point, at `tan³α = −δ/c`. Each half of
//! `(−π/2, 0) ∪ (0, π/2)` therefore splits into at most two monotone pieces and
//! every root is bracketed exactly, including root pairs arbitrarily close to
//! the fold where a fixed grid would miss them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ReducedParams, BOUNDARY_MARGIN};

/// Determinant magnitude below which a fixed point is reported as marginal.
pub const CLASSIFY_TOLERANCE: f64 = 1e-9;
/// Fixed points closer than this in x are merged.
pub const MERGE_TOLERANCE: f64 = 1e-9;
/// Target width of the final bisection bracket on ξ.
pub const CRITICAL_BRACKET_WIDTH: f64 = 1e-9;
/// Largest |δ| accepted by [`critical_xi`].
pub const MAX_CRITICAL_DELTA: f64 = 10.0;
/// Relative offset from ξ_c at which the census on each side is taken.
pub const COUNT_PROBE_OFFSET: f64 = 1e-6;

/// Phase of a fixed point, stored symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhaseBranch {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "pi")]
    Pi,
}

impl PhaseBranch {
    pub fn cos(self) -> f64 {
        match self {
            PhaseBranch::Zero => 1.0,
            PhaseBranch::Pi => -1.0,
        }
    }

    pub fn angle(self) -> f64 {
        match self {
            PhaseBranch::Zero => 0.0,
            PhaseBranch::Pi => PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    P,
    S,
    #[serde(rename = "S+")]
    SPlus,
    #[serde(rename = "S-")]
    SMinus,
    #[serde(rename = "unlabeled")]
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    StableCenter,
    UnstableSaddle,
    Marginal,
}

/// Which stationarity residual to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityForm {
    /// Zero set of the flow: `u(c − 2ξs) = −2δs`.
    #[default]
    Flow,
    /// The alternative printed condition `u(c − 2ξs) = δs`, equivalent to the
    /// flow form with δ replaced by −δ/2.
    Literal,
}

impl StationarityForm {
    /// The tilt that makes this form coincide with the flow stationarity.
    pub fn effective_delta(self, delta: f64) -> f64 {
        match self {
            StationarityForm::Flow => delta,
            StationarityForm::Literal => -0.5 * delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x0: f64,
    pub phi0: PhaseBranch,
    pub branch: Branch,
    pub stability: Stability,
    /// |f(x0)| of the stationarity residual.
    pub residual: f64,
}

/// Number of stable, unstable and marginal fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub stable: usize,
    pub unstable: usize,
    #[serde(default)]
    pub marginal: usize,
}

impl Census {
    pub fn of(points: &[FixedPoint]) -> Self {
        let mut c = Census::default();
        for p in points {
            match p.stability {
                Stability::StableCenter => c.stable += 1,
                Stability::UnstableSaddle => c.unstable += 1,
                Stability::Marginal => c.marginal += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub delta: f64,
    pub xi_c: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub counts_below: Census,
    pub counts_above: Census,
}

/// Stationarity residual `f` and its x-derivative, in the flow form.
pub fn saddle_node_condition(x: f64, phi0: PhaseBranch, xi: f64, delta: f64) -> Result<(f64, f64)> {
    if !(BOUNDARY_MARGIN..=1.0 - BOUNDARY_MARGIN).contains(&x) {
        return Err(Error::Domain(format!("x = {x} is not interior")));
    }
    Ok((
        residual(x, phi0.cos(), xi, delta),
        residual_dx(x, phi0.cos(), xi, delta),
    ))
}

fn residual(x: f64, c: f64, xi: f64, delta: f64) -> f64 {
    let s = (x * (1.0 - x)).sqrt();
    (1.0 - 2.0 * x) * (c - 2.0 * xi * s) + 2.0 * delta * s
}

fn residual_dx(x: f64, c: f64, xi: f64, delta: f64) -> f64 {
    let s = (x * (1.0 - x)).sqrt();
    let u = 1.0 - 2.0 * x;
    -2.0 * c + 4.0 * xi * s - xi * u * u / s + delta * u / s
}

fn residual_dxx(x: f64, xi: f64, delta: f64) -> f64 {
    let s = (x * (1.0 - x)).sqrt();
    let u = 1.0 - 2.0 * x;
    let s3 = s * s * s;
    6.0 * xi * u / s + xi * u * u * u / (2.0 * s3) - delta * (2.0 / s + u * u / (2.0 * s3))
}

/// Classifies a stationary point by the determinant of the energy Hessian,
/// which equals the determinant of the (traceless) linearised flow.
pub fn classify(fp: &FixedPoint, xi: f64, delta: f64) -> Stability {
    classify_at(fp.x0, fp.phi0, xi, delta)
}

fn classify_at(x0: f64, phi0: PhaseBranch, xi: f64, delta: f64) -> Stability {
    let det = ReducedParams::new(xi, delta)
        .hessian_unchecked(x0, phi0.angle())
        .det();
    if det.abs() <= CLASSIFY_TOLERANCE {
        Stability::Marginal
    } else if det > 0.0 {
        Stability::StableCenter
    } else {
        Stability::UnstableSaddle
    }
}

/// `g(α) − ξ` on one phase branch.
struct AngleResidual {
    c: f64,
    xi: f64,
    delta: f64,
}

impl AngleResidual {
    fn eval(&self, a: f64) -> f64 {
        self.c / a.cos() - self.delta / a.sin() - self.xi
    }

    /// α at which g is stationary: tan³α = −δ/c.
    fn turning_angle(&self) -> f64 {
        (-self.delta / self.c).cbrt().atan()
    }

    fn roots(&self) -> Vec<f64> {
        // Edge angles map to x = margin and x = 1 − margin.
        let a_edge = (1.0 - 2.0 * BOUNDARY_MARGIN).asin();
        let a_inner = 1e-300;
        let turning = self.turning_angle();
        let mut out = Vec::new();
        for (lo, hi) in [(-a_edge, -a_inner), (a_inner, a_edge)] {
            let mut knots = vec![lo];
            if turning > lo && turning < hi {
                knots.push(turning);
            }
            knots.push(hi);
            for w in knots.windows(2) {
                if let Some(r) = self.bisect(w[0], w[1]) {
                    out.push(r);
                }
            }
        }
        out
    }

    fn bisect(&self, mut a: f64, mut b: f64) -> Option<f64> {
        let mut fa = self.eval(a);
        let fb = self.eval(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
            return None;
        }
        for _ in 0..400 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return Some(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

/// Interior roots of the flow stationarity on one phase branch, sorted in x.
fn branch_roots(c: f64, xi: f64, delta: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = AngleResidual { c, xi, delta }
        .roots()
        .into_iter()
        .map(|a| 0.5 * (1.0 + a.sin()))
        .collect();
    if delta == 0.0 {
        // α = 0 (x = 1/2) solves the undivided equation on both branches.
        xs.push(0.5);
    }
    xs.retain(|x| (BOUNDARY_MARGIN..=1.0 - BOUNDARY_MARGIN).contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOLERANCE);
    xs
}

/// The phase branch that carries P and S± (φ0 = 0 for ξ ≥ 0, π for ξ < 0).
pub fn primary_phase(xi: f64) -> PhaseBranch {
    if xi >= 0.0 {
        PhaseBranch::Zero
    } else {
        PhaseBranch::Pi
    }
}

/// All fixed points of the flow, sorted by phase then x.
pub fn find_fixed_points(xi: f64, delta: f64) -> Result<Vec<FixedPoint>> {
    find_fixed_points_with(xi, delta, StationarityForm::Flow)
}

pub fn find_fixed_points_with(xi: f64, delta: f64, form: StationarityForm) -> Result<Vec<FixedPoint>> {
    if !(xi.is_finite() && delta.is_finite()) {
        return Err(Error::Parameter(format!("non-finite (xi, delta) = ({xi}, {delta})")));
    }
    let d = form.effective_delta(delta);
    let primary = primary_phase(xi);
    let mut out = Vec::new();
    for phase in [PhaseBranch::Zero, PhaseBranch::Pi] {
        let c = phase.cos();
        let roots = branch_roots(c, xi, d);
        let stab: Vec<Stability> = roots.iter().map(|&x| classify_at(x, phase, xi, d)).collect();
        let labels = label_branch(phase == primary, &roots, &stab);
        for ((&x0, stability), branch) in roots.iter().zip(stab).zip(labels) {
            out.push(FixedPoint {
                x0,
                phi0: phase,
                branch,
                stability,
                residual: residual(x0, c, xi, d).abs(),
            });
        }
    }
    out.sort_by(|a, b| a.phi0.cmp(&b.phi0).then(a.x0.total_cmp(&b.x0)));
    Ok(out)
}

/// Labels follow continuity with the untilted closed forms: on the primary
/// branch a lone root is P, three roots are S−, P, S+ in increasing x, and
/// two roots (exactly at the fold) are the marginal P plus one of S±.
fn label_branch(primary: bool, roots: &[f64], stab: &[Stability]) -> Vec<Branch> {
    if !primary {
        return match roots.len() {
            1 => vec![Branch::S],
            n => vec![Branch::Unlabeled; n],
        };
    }
    let side = |x: f64| if x > 0.5 { Branch::SPlus } else { Branch::SMinus };
    match roots.len() {
        1 => vec![Branch::P],
        2 => roots
            .iter()
            .zip(stab)
            .map(|(&x, s)| if *s == Stability::Marginal { Branch::P } else { side(x) })
            .collect(),
        3 => vec![Branch::SMinus, Branch::P, Branch::SPlus],
        n => vec![Branch::Unlabeled; n],
    }
}

/// Number of fixed points on the primary branch for ξ > 0 (1 below the fold, 3 above).
fn fold_count(xi: f64, delta: f64) -> usize {
    branch_roots(1.0, xi, delta).len()
}

/// Critical |ξ| of the saddle-node transition by bisection on the fixed-point count.
pub fn critical_xi(delta: f64) -> Result<CriticalResult> {
    critical_xi_with(delta, StationarityForm::Flow)
}

pub fn critical_xi_with(delta: f64, form: StationarityForm) -> Result<CriticalResult> {
    if !delta.is_finite() || delta.abs() > MAX_CRITICAL_DELTA {
        return Err(Error::Domain(format!(
            "|delta| = {} exceeds {MAX_CRITICAL_DELTA}",
            delta.abs()
        )));
    }
    let d = form.effective_delta(delta);
    let mut lo = 0.0;
    if fold_count(lo, d) != 1 {
        return Err(Error::Refinement(format!(
            "expected a single primary fixed point at xi = 0 for delta = {delta}"
        )));
    }
    let mut hi = 2.0;
    while fold_count(hi, d) < 3 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Refinement(format!("no fold below xi = 1e6 for delta = {delta}")));
        }
    }
    while hi - lo > 0.5 * CRITICAL_BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        match fold_count(mid, d) {
            1 => lo = mid,
            2 | 3 => hi = mid,
            n => {
                return Err(Error::Refinement(format!(
                    "non-monotone count {n} at xi = {mid} in [{lo}, {hi}]"
                )))
            }
        }
    }
    let xi_c = 0.5 * (lo + hi);
    let probe = COUNT_PROBE_OFFSET * xi_c.max(1.0);
    let counts_below = Census::of(&find_fixed_points_with(xi_c - probe, delta, form)?);
    let counts_above = Census::of(&find_fixed_points_with(xi_c + probe, delta, form)?);
    Ok(CriticalResult {
        delta,
        xi_c,
        bracket_lo: lo,
        bracket_hi: hi,
        counts_below,
        counts_above,
    })
}

/// A point where the residual and its x-derivative vanish together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    pub x: f64,
    pub xi: f64,
}

/// Locates the fold on the φ0 = 0 branch with ξ > 0, independently of the
/// bisection in [`critical_xi`]: along the root curve `ξ(x)` solving `f = 0`,
/// the fold is where `∂f/∂x` also vanishes, refined by Newton on `(f, ∂f/∂x)`.
pub fn locate_fold(delta: f64) -> Result<FoldPoint> {
    let c = 1.0;
    if delta == 0.0 {
        // The untilted fold is the pitchfork at the symmetric point.
        return Ok(FoldPoint { x: 0.5, xi: 1.0 });
    }
    let xi_of = |x: f64| {
        let s = (x * (1.0 - x)).sqrt();
        let u = 1.0 - 2.0 * x;
        (u * c + 2.0 * delta * s) / (2.0 * s * u)
    };
    let fold_residual = |x: f64| residual_dx(x, c, xi_of(x), delta);

    let grid = 4096;
    let mut best: Option<FoldPoint> = None;
    for (a, b) in [(BOUNDARY_MARGIN, 0.5), (0.5, 1.0 - BOUNDARY_MARGIN)] {
        let pts: Vec<f64> = (1..grid).map(|i| a + (b - a) * i as f64 / grid as f64).collect();
        for w in pts.windows(2) {
            let (f0, f1) = (fold_residual(w[0]), fold_residual(w[1]));
            if !(f0.is_finite() && f1.is_finite()) || f0.signum() == f1.signum() {
                continue;
            }
            let (mut lo, mut hi, mut flo) = (w[0], w[1], f0);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                let fm = fold_residual(m);
                if fm.signum() == flo.signum() {
                    lo = m;
                    flo = fm;
                } else {
                    hi = m;
                }
            }
            let mut x = 0.5 * (lo + hi);
            let mut xi = xi_of(x);
            // Newton polish on the pair (f, ∂f/∂x) in (x, ξ).
            for _ in 0..8 {
                let s = (x * (1.0 - x)).sqrt();
                let u = 1.0 - 2.0 * x;
                let f = residual(x, c, xi, delta);
                let g = residual_dx(x, c, xi, delta);
                let (j11, j12) = (g, -2.0 * s * u);
                let (j21, j22) = (residual_dxx(x, xi, delta), 4.0 * s - u * u / s);
                let det = j11 * j22 - j12 * j21;
                if det == 0.0 || !det.is_finite() {
                    break;
                }
                x -= (f * j22 - g * j12) / det;
                xi -= (j11 * g - j21 * f) / det;
            }
            if xi.is_finite() && xi > 0.0 && best.is_none_or(|b| xi < b.xi) {
                best = Some(FoldPoint { x, xi });
            }
        }
    }
    best.ok_or_else(|| Error::Estimation(format!("no fold found for delta = {delta}")))
}

/// Analytic fold location of the flow stationarity, `(1 + |δ|^{2/3})^{3/2}`.
pub fn critical_xi_closed_form(delta: f64) -> f64 {
    (1.0 + delta.abs().powf(2.0 / 3.0)).powf(1.5)
}

/// Residual used by brute-force scans: the flow form evaluated on an arbitrary grid point.
pub fn stationarity_residual(x: f64, phi0: PhaseBranch, xi: f64, delta: f64) -> f64 {
    residual(x, phi0.cos(), xi, delta)
}
