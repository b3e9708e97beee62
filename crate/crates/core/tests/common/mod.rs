//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver or resolvent code; only closed forms of φ are used.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// 5-point Gauss–Legendre rule on [a, b].
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * X.iter().zip(W).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Thomas solve of a complex tridiagonal system; `sub[0]` and
/// `sup[last]` are ignored.
pub fn thomas(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64], rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = diag[0];
    c[0] = sup[0] / d;
    rhs[0] /= d;
    for j in 1..n {
        d = diag[j] - sub[j] * c[j - 1];
        if j + 1 < n {
            c[j] = sup[j] / d;
        }
        rhs[j] = (rhs[j] - sub[j] * rhs[j - 1]) / d;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= c[j] * next;
    }
}

/// Finite-volume Crank–Nicolson scheme for i∂ₜu + φ^{1−n}∂_r(φ^{n−1}∂_r u) = 0
/// acting directly on u. Unknowns at r_j = j·h for j = 0..=len (the origin
/// included, with zero flux through it), u = 0 at r_{len+1}.
pub struct DirectUScheme {
    pub h: f64,
    volume: Vec<f64>,
    // flux coefficient φ^{n−1}/h at r_{j+1/2}
    flux: Vec<f64>,
}

impl DirectUScheme {
    pub fn new<F: Fn(f64) -> f64>(phi: F, n: usize, r_max: f64, len: usize) -> Self {
        let h = r_max / len as f64;
        let dens = |r: f64| phi(r).powi(n as i32 - 1);
        let volume = (0..=len)
            .map(|j| {
                let r = j as f64 * h;
                gauss5(dens, (r - 0.5 * h).max(0.0), r + 0.5 * h)
            })
            .collect();
        let flux = (0..=len).map(|j| dens((j as f64 + 0.5) * h) / h).collect();
        Self { h, volume, flux }
    }

    /// Advances u (length len + 1) by `steps` steps of size dt.
    pub fn evolve(&self, u: &mut [Complex64], dt: f64, steps: usize) {
        let m = u.len();
        let half = Complex64::new(0.0, 0.5 * dt);
        let left = |j: usize| if j == 0 { 0.0 } else { self.flux[j - 1] };
        let mut sub = vec![Complex64::new(0.0, 0.0); m];
        let mut diag = vec![Complex64::new(0.0, 0.0); m];
        let mut sup = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..m {
            let k_diag = left(j) + self.flux[j];
            diag[j] = self.volume[j] + half * k_diag;
            if j > 0 {
                sub[j] = -half * self.flux[j - 1];
            }
            if j + 1 < m {
                sup[j] = -half * self.flux[j];
            }
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        for _ in 0..steps {
            for j in 0..m {
                let lo = if j > 0 { u[j - 1] } else { Complex64::new(0.0, 0.0) };
                let hi = if j + 1 < m { u[j + 1] } else { Complex64::new(0.0, 0.0) };
                let ku = (left(j) + self.flux[j]) * u[j] - left(j) * lo - self.flux[j] * hi;
                rhs[j] = self.volume[j] * u[j] - half * ku;
            }
            thomas(&sub, &diag, &sup, &mut rhs);
            u.copy_from_slice(&rhs);
        }
    }
}

/// Largest singular value of D(P − z)⁻¹D by dense inversion and SVD, for a
/// symmetric tridiagonal P given by its diagonal and constant off-diagonal.
pub fn dense_weighted_resolvent_norm(diag: &[f64], off: f64, nodes: &[f64], z: Complex64) -> f64 {
    let m = diag.len();
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    for j in 0..m {
        a[(j, j)] = Complex64::new(diag[j], 0.0) - z;
        if j + 1 < m {
            a[(j, j + 1)] = Complex64::new(off, 0.0);
            a[(j + 1, j)] = Complex64::new(off, 0.0);
        }
    }
    let inv = a.try_inverse().expect("shifted operator is invertible");
    let weight: Vec<f64> = nodes.iter().map(|r| 1.0 / (1.0 + r * r).sqrt()).collect();
    let weighted = DMatrix::from_fn(m, m, |i, j| inv[(i, j)] * weight[i] * weight[j]);
    weighted.singular_values().max()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
