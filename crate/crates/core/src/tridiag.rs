//! Complex tridiagonal factorization (Thomas algorithm without pivoting).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    // Multipliers l_i = a_i / u_{i-1}.
    lower: Vec<Complex64>,
    // Pivots u_i.
    pivots: Vec<Complex64>,
    upper: Vec<Complex64>,
}

impl TridiagonalLu {
    /// Factors the matrix with sub-diagonal `sub` (len n−1), diagonal `diag`
    /// (len n) and super-diagonal `sup` (len n−1).
    pub fn factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        assert!(sub.len() + 1 == n && sup.len() + 1 == n, "band length mismatch");
        let mut lower = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut pivots = vec![Complex64::new(0.0, 0.0); n];
        pivots[0] = diag[0];
        for i in 1..n {
            let prev = pivots[i - 1];
            if prev.norm() == 0.0 || !prev.is_finite() {
                return Err(Error::SingularSystem(i - 1));
            }
            let l = sub[i - 1] / prev;
            lower[i - 1] = l;
            pivots[i] = diag[i] - l * sup[i - 1];
        }
        if pivots[n - 1].norm() == 0.0 || !pivots[n - 1].is_finite() {
            return Err(Error::SingularSystem(n - 1));
        }
        Ok(Self {
            lower,
            pivots,
            upper: sup.to_vec(),
        })
    }

    /// Factors a matrix with constant off-diagonals.
    pub fn factor_constant_offdiag(diag: &[Complex64], off: Complex64) -> Result<Self> {
        let band = vec![off; diag.len().saturating_sub(1)];
        Self::factor(&band, diag, &band)
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.pivots.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 1..n {
            let l = self.lower[i - 1];
            rhs[i] -= l * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] = (rhs[i] - self.upper[i] * next) / self.pivots[i];
        }
    }
}
