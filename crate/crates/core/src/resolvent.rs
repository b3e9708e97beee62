//! Radial P = −∂²_r + Q on the half-line grid, its weighted resolvent norm
//! along the real axis, and Sturm-sequence eigenvalue bounds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manifold::centrifugal_coefficient;
use crate::tridiag::TridiagonalLu;

/// Seed of the power-iteration start vector.
pub const POWER_SEED: u64 = 0x5e_ed0f_d15c;
pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 500;
/// Default ε ladder of a sweep.
pub const DEFAULT_EPS: [f64; 3] = [0.5, 0.1, 0.02];

/// Symmetric tridiagonal P with constant off-diagonal, Dirichlet at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub grid: Grid,
    /// 2/h² + Q_j.
    pub diag: Vec<f64>,
    /// −1/h².
    pub offdiag: f64,
    pub n: usize,
}

impl DiscreteOperator {
    /// P from the half-line potential Q sampled at the nodes.
    pub fn assemble_from_q(q: &[f64], grid: Grid, n: usize) -> Self {
        assert_eq!(q.len(), grid.len(), "potential length must match grid");
        let h2 = grid.spacing().powi(2);
        Self {
            grid,
            diag: q.iter().map(|q| 2.0 / h2 + q).collect(),
            offdiag: -1.0 / h2,
            n,
        }
    }

    /// P from a flat-space potential V; adds the centrifugal term
    /// (n−1)(n−3)/(4r²).
    pub fn assemble_from_v(v: &[f64], grid: Grid, n: usize) -> Self {
        let c = centrifugal_coefficient(n);
        let q: Vec<f64> = v
            .iter()
            .zip(grid.nodes())
            .map(|(v, r)| v + c / (r * r))
            .collect();
        Self::assemble_from_q(&q, grid, n)
    }

    /// P evaluated from a closure V(r).
    pub fn from_potential_fn<F: Fn(f64) -> f64>(v: F, grid: Grid, n: usize) -> Self {
        let values: Vec<f64> = grid.nodes().into_iter().map(v).collect();
        Self::assemble_from_v(&values, grid, n)
    }

    /// P + β.
    pub fn shifted(&self, beta: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|d| *d += beta);
        out
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let last = self.diag.len() - 1;
        let off = self.offdiag.abs();
        self.diag
            .iter()
            .enumerate()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (j, d)| {
                let radius = if j == 0 || j == last { off } else { 2.0 * off };
                (lo.min(d - radius), hi.max(d + radius))
            })
    }

    /// y = P x.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                let mut y = self.diag[j] * x[j];
                if j > 0 {
                    y += self.offdiag * x[j - 1];
                }
                if j + 1 < n {
                    y += self.offdiag * x[j + 1];
                }
                y
            })
            .collect()
    }

    /// LU factors of P − z.
    pub fn factor_shifted(&self, z: Complex64) -> Result<TridiagonalLu> {
        let diag: Vec<Complex64> = self.diag.iter().map(|d| d - z).collect();
        TridiagonalLu::factor_constant_offdiag(&diag, Complex64::new(self.offdiag, 0.0))
    }

    /// Number of eigenvalues strictly below x (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let b2 = self.offdiag * self.offdiag;
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.offdiag.abs());
        let mut count = 0;
        let mut d = 1.0;
        for (j, a) in self.diag.iter().enumerate() {
            d = if j == 0 { a - x } else { a - x - b2 / d };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Smallest eigenvalue by Sturm bisection, absolute tolerance 1e-10·scale,
/// where scale is the spectral radius bound.
pub fn smallest_eigenvalue(op: &DiscreteOperator) -> f64 {
    let (mut lo, mut hi) = op.spectral_bounds();
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let tol = 1e-10 * scale;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if op.count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One evaluation of ‖⟨r⟩⁻¹(P − λ − iε)⁻¹⟨r⟩⁻¹‖.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSample {
    pub lambda: f64,
    pub eps: f64,
    pub norm: f64,
    /// norm·√(|λ|+1).
    pub scaled: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|z| *z /= nrm);
    }
    nrm
}

/// Largest singular value of D(P − λ − iε)⁻¹D, D = diag(⟨r_j⟩⁻¹), by power
/// iteration on M*M started from a [`POWER_SEED`] random vector.
pub fn weighted_resolvent_norm(op: &DiscreteOperator, lambda: f64, eps: f64) -> Result<ResolventSample> {
    weighted_resolvent_norm_seeded(op, lambda, eps, POWER_SEED)
}

/// [`weighted_resolvent_norm`] with an explicit start-vector seed.
pub fn weighted_resolvent_norm_seeded(
    op: &DiscreteOperator,
    lambda: f64,
    eps: f64,
    seed: u64,
) -> Result<ResolventSample> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be nonzero, got {eps}")));
    }
    let z = Complex64::new(lambda, eps);
    let forward = op.factor_shifted(z)?;
    let adjoint = op.factor_shifted(z.conj())?;
    let weight: Vec<f64> = op
        .grid
        .nodes()
        .iter()
        .map(|r| 1.0 / (1.0 + r * r).sqrt())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // a real start vector makes the iterates for −ε the exact conjugates of
    // those for ε, so the adjoint symmetry holds to rounding
    let mut x: Vec<Complex64> = (0..op.len())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();
    normalize(&mut x);

    let mut prev = 0.0;
    let mut last = [0.0, 0.0];
    for it in 1..=POWER_MAX_ITER {
        // y = M x
        x.iter_mut().zip(&weight).for_each(|(v, w)| *v *= w);
        forward.solve_in_place(&mut x);
        x.iter_mut().zip(&weight).for_each(|(v, w)| *v *= w);
        let sigma = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // x = M* y
        x.iter_mut().zip(&weight).for_each(|(v, w)| *v *= w);
        adjoint.solve_in_place(&mut x);
        x.iter_mut().zip(&weight).for_each(|(v, w)| *v *= w);
        normalize(&mut x);

        last = [prev, sigma];
        if it > 1 && (sigma - prev).abs() <= POWER_TOL * sigma {
            return Ok(ResolventSample {
                lambda,
                eps,
                norm: sigma,
                scaled: sigma * (lambda.abs() + 1.0).sqrt(),
                converged: true,
                iterations: it,
            });
        }
        prev = sigma;
    }
    Err(Error::NotConverged {
        iterations: POWER_MAX_ITER,
        last,
    })
}

/// Result of a (λ, ε) sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    /// Samples ordered by λ, then by ε in input order.
    pub samples: Vec<ResolventSample>,
    pub sup_scaled: f64,
    pub sup_at: (f64, f64),
    /// λ values where the norm grows like 1/ε along the ε ladder.
    pub blowup_lambdas: Vec<f64>,
    /// (λ, ε, message) of excluded samples.
    pub failures: Vec<(f64, f64, String)>,
}

impl SweepReport {
    pub fn all_converged(&self) -> bool {
        self.failures.is_empty()
    }

    /// Largest over smallest scaled value.
    pub fn scaled_spread(&self) -> f64 {
        let min = self.samples.iter().map(|s| s.scaled).fold(f64::INFINITY, f64::min);
        self.sup_scaled / min
    }
}

/// True when norm(ε_min)/norm(ε_max) is at least half of ε_max/ε_min.
pub fn is_blowup(samples: &[ResolventSample]) -> bool {
    let Some(small) = samples.iter().min_by(|a, b| a.eps.abs().total_cmp(&b.eps.abs())) else {
        return false;
    };
    let Some(large) = samples.iter().max_by(|a, b| a.eps.abs().total_cmp(&b.eps.abs())) else {
        return false;
    };
    if small.eps.abs() == large.eps.abs() {
        return false;
    }
    small.norm / large.norm >= 0.5 * large.eps.abs() / small.eps.abs()
}

pub fn resolvent_sweep(op: &DiscreteOperator, lambdas: &[f64], eps_list: &[f64]) -> SweepReport {
    resolvent_sweep_seeded(op, lambdas, eps_list, POWER_SEED)
}

/// [`resolvent_sweep`] with an explicit start-vector seed.
pub fn resolvent_sweep_seeded(op: &DiscreteOperator, lambdas: &[f64], eps_list: &[f64], seed: u64) -> SweepReport {
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| eps_list.iter().map(move |&e| (l, e)))
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(l, e)| (l, e, weighted_resolvent_norm_seeded(op, l, e, seed)))
        .collect();

    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (l, e, r) in results {
        match r {
            Ok(s) => samples.push(s),
            Err(err) => failures.push((l, e, err.to_string())),
        }
    }
    let (sup_scaled, sup_at) = samples.iter().fold((0.0, (f64::NAN, f64::NAN)), |acc, s| {
        if s.scaled > acc.0 {
            (s.scaled, (s.lambda, s.eps))
        } else {
            acc
        }
    });
    let blowup_lambdas = lambdas
        .iter()
        .copied()
        .filter(|&l| {
            let at: Vec<ResolventSample> = samples.iter().filter(|s| s.lambda == l).copied().collect();
            is_blowup(&at)
        })
        .collect();
    SweepReport {
        samples,
        sup_scaled,
        sup_at,
        blowup_lambdas,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn free(points: usize, r_max: f64) -> DiscreteOperator {
        let grid = Grid::new(r_max, points).unwrap();
        DiscreteOperator::assemble_from_q(&vec![0.0; points], grid, 3)
    }

    fn dirichlet_ground(op: &DiscreteOperator) -> f64 {
        let h = op.grid.spacing();
        let l = h * (op.len() + 1) as f64;
        4.0 / (h * h) * (PI * h / (2.0 * l)).sin().powi(2)
    }

    #[test]
    fn free_ground_state_matches_closed_form() {
        let op = free(200, 20.0);
        let got = smallest_eigenvalue(&op);
        let want = dirichlet_ground(&op);
        assert!((got - want).abs() < 1e-10 * 1600.0, "{got} vs {want}");
        assert!(got > 0.0);
        let shifted = smallest_eigenvalue(&op.shifted(-1.0));
        assert!((shifted - (want - 1.0)).abs() < 1e-10 * 1600.0);
    }

    #[test]
    fn hyperbolic_q_gives_unit_diagonal_shift() {
        let grid = Grid::new(10.0, 100).unwrap();
        let op = DiscreteOperator::assemble_from_q(&vec![1.0; 100], grid, 3);
        let h = grid.spacing();
        assert!(op.diag.iter().all(|d| (d - (2.0 / (h * h) + 1.0)).abs() < 1e-12));
    }

    #[test]
    fn free_resolvent_below_spectrum_is_contracted() {
        let op = free(200, 20.0);
        let s = weighted_resolvent_norm(&op, -1.0, 0.1).unwrap();
        assert!(s.converged);
        assert!(s.norm <= 1.0 && s.norm > 0.0);
    }

    #[test]
    fn adjoint_symmetry() {
        let op = free(150, 15.0);
        for lambda in [-3.0, 0.5, 4.0] {
            let a = weighted_resolvent_norm(&op, lambda, 0.1).unwrap();
            let b = weighted_resolvent_norm(&op, lambda, -0.1).unwrap();
            assert!((a.norm - b.norm).abs() <= 1e-10 * a.norm);
        }
    }

    #[test]
    fn single_point_sweep() {
        let op = free(100, 10.0);
        let rep = resolvent_sweep(&op, &[2.0], &[0.5]);
        assert_eq!(rep.samples.len(), 1);
        assert_eq!(rep.sup_at, (2.0, 0.5));
        assert!(rep.blowup_lambdas.is_empty());
    }

    #[test]
    fn zero_eps_rejected() {
        let op = free(50, 5.0);
        assert!(weighted_resolvent_norm(&op, 0.0, 0.0).is_err());
    }

    #[test]
    fn sturm_count_is_monotone() {
        let op = free(60, 6.0);
        let (lo, hi) = op.spectral_bounds();
        assert_eq!(op.count_below(lo - 1.0), 0);
        assert_eq!(op.count_below(hi + 1.0), 60);
    }
}
