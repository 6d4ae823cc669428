//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a pivoted tridiagonal LU. Vectors belonging to clustered
//! eigenvalues are re-orthogonalised against each other, so near-degenerate
//! pairs still come back as an orthonormal basis of their subspace.

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const INVERSE_ITERATIONS: usize = 8;

pub(crate) struct SymTridiagonal<'a> {
    pub diag: &'a [f64],
    /// Sub/super-diagonal, one shorter than `diag`.
    pub off: &'a [f64],
}

impl SymTridiagonal<'_> {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based).
    fn eigenvalue(&self, k: usize, bounds: (f64, f64), pivmin: f64) -> f64 {
        let (mut lo, mut hi) = bounds;
        let scale = lo.abs().max(hi.abs()).max(pivmin);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 2.0 * EPS * scale || mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k` lowest eigenpairs, eigenvalues non-decreasing, vectors unit-norm.
    pub fn lowest(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::Domain(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
        }
        if self.diag.iter().chain(self.off).any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence("matrix has non-finite entries".into()));
        }
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let pivmin = f64::MIN_POSITIVE.max(EPS * EPS * norm);
        let (glo, ghi) = self.gershgorin();
        let pad = 2.0 * EPS * norm * n as f64 + pivmin;
        let bounds = (glo - pad, ghi + pad);

        let values: Vec<f64> = (0..k).map(|j| self.eigenvalue(j, bounds, pivmin)).collect();

        let cluster_gap = 1e-3 * norm;
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
        let mut cluster_start = 0;
        let mut last_shift = f64::NEG_INFINITY;
        for (j, &lambda) in values.iter().enumerate() {
            if j > 0 && lambda - values[j - 1] > cluster_gap {
                cluster_start = j;
            }
            // Separate coincident shifts so each solve sees a distinct matrix.
            let mut shift = lambda;
            if j > cluster_start {
                shift = shift.max(last_shift + 10.0 * EPS * norm);
            }
            last_shift = shift;
            let vec = self.inverse_iteration(shift, &out[cluster_start..j], j, norm)?;
            out.push((lambda, vec));
        }
        Ok(out)
    }

    fn inverse_iteration(
        &self,
        shift: f64,
        previous: &[(f64, Vec<f64>)],
        seed: usize,
        norm: f64,
    ) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let lu = TridiagonalLu::factor(self, shift, norm);
        // Deterministic, non-degenerate start vector.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i * 7919 + seed * 104_729) as f64 * 0.618_033_988_749_895).fract())
            .collect();
        normalize(&mut v);
        for _ in 0..INVERSE_ITERATIONS {
            lu.solve(&mut v);
            for (_, p) in previous {
                let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
            }
            if !normalize(&mut v) {
                return Err(Error::NoConvergence(format!(
                    "inverse iteration collapsed at shift {shift}"
                )));
            }
        }
        let residual = self.residual(&v, shift);
        let tol = 1e3 * n as f64 * EPS * norm;
        if !(residual <= tol.max(1e-10 * norm)) {
            return Err(Error::NoConvergence(format!(
                "eigenvector residual {residual:e} above {tol:e} at shift {shift}"
            )));
        }
        Ok(v)
    }

    fn residual(&self, v: &[f64], lambda: f64) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = (self.diag[i] - lambda) * v[i];
                if i > 0 {
                    r += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += self.off[i] * v[i + 1];
                }
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|a| *a /= nrm);
    true
}

/// LU factors of `T − σI` with partial pivoting (two super-diagonals after pivoting).
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &SymTridiagonal<'_>, shift: f64, norm: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.to_vec();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du = t.off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = EPS * norm;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = EPS * norm;
        }
        TridiagonalLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
