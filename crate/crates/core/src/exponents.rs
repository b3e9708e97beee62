//! Admissible Strichartz pairs, effective dimension and scattering windows.
//!
//! The endpoint p = ∞ is stored as `f64::INFINITY`, so `2.0 / p == 0.0` holds
//! in every identity without special cases.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// (p, q) with 2/p + dim/q = dim/2, p ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub p: f64,
    pub q: f64,
    pub dim: f64,
}

impl AdmissiblePair {
    /// Largest admissible q, 2·dim/(dim−2).
    pub fn q_upper(dim: f64) -> f64 {
        2.0 * dim / (dim - 2.0)
    }

    /// Builds the pair with the given q, solving the admissibility relation
    /// for p.
    pub fn from_q(q: f64, dim: f64) -> Result<Self> {
        if !(dim > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "admissibility dimension must exceed 2, got {dim}"
            )));
        }
        let upper = Self::q_upper(dim);
        if !(q >= 2.0 && q <= upper) {
            return Err(Error::ExponentOutOfRange { q, upper, dim });
        }
        let p = if q == 2.0 {
            f64::INFINITY
        } else if q == upper {
            2.0
        } else {
            2.0 / (dim / 2.0 - dim / q)
        };
        Ok(Self { p, q, dim })
    }

    /// Builds the pair with the given p (p = ∞ allowed).
    pub fn from_p(p: f64, dim: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        if !(dim > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "admissibility dimension must exceed 2, got {dim}"
            )));
        }
        let q = if p.is_infinite() {
            2.0
        } else if p == 2.0 {
            Self::q_upper(dim)
        } else {
            dim / (dim / 2.0 - 2.0 / p)
        };
        Ok(Self { p, q, dim })
    }

    /// |2/p + dim/q − dim/2|.
    pub fn admissibility_defect(&self) -> f64 {
        (2.0 / self.p + self.dim / self.q - self.dim / 2.0).abs()
    }

    /// Exponent of the weight (φ/r) carried by the weighted L^q norm on a
    /// manifold of dimension n: (n−1)/2·(1 − 2/q).
    pub fn weight_exponent(&self, n: usize) -> f64 {
        (n as f64 - 1.0) / 2.0 * (1.0 - 2.0 / self.q)
    }
}

impl fmt::Display for AdmissiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.p.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", self.p)
        };
        write!(f, "p={p}, q={}, dim={}", self.q, self.dim)
    }
}

/// N = m(n−1) + 1, the dimension whose volume growth r^{N−1} the manifold
/// mimics when φ ~ A r^m.
pub fn effective_dimension(m: f64, n: usize) -> Result<f64> {
    let n1 = n as f64 - 1.0;
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !(m > 1.0 / n1) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power m = {m} must exceed 1/(n-1) = {}",
            1.0 / n1
        )));
    }
    Ok(m * n1 + 1.0)
}

/// Growth regime of the volume density at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Growth {
    /// φ^{n−1} ~ r^{N−1}.
    Polynomial { effective_dim: f64 },
    /// φ ~ A e^{αr}.
    Exponential,
}

/// Open interval of nonlinearity powers p for which the NLS scatters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringWindow {
    pub p_low: f64,
    pub p_high: f64,
    /// True when the lower end beats the Euclidean critical power 2/n.
    pub improves_on_euclidean: bool,
}

impl ScatteringWindow {
    pub fn contains(&self, p: f64) -> bool {
        p > self.p_low && p < self.p_high
    }
}

pub fn scattering_window(n: usize, growth: Growth) -> ScatteringWindow {
    let nf = n as f64;
    let p_high = 4.0 / (nf - 2.0);
    let p_low = match growth {
        Growth::Polynomial { effective_dim } => 4.0 / effective_dim,
        Growth::Exponential => 0.0,
    };
    ScatteringWindow {
        p_low,
        p_high,
        improves_on_euclidean: p_low < 2.0 / nf,
    }
}

/// Open interval (n, N) of dimensions d for which unweighted d-admissible
/// estimates hold; `None` when N ≤ n.
pub fn classical_d_range(n: usize, effective_dim: f64) -> Option<(f64, f64)> {
    let nf = n as f64;
    (effective_dim > nf).then_some((nf, effective_dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_from_q_examples() {
        assert!(AdmissiblePair::from_q(2.0, 3.0).unwrap().p.is_infinite());
        assert_eq!(AdmissiblePair::from_q(6.0, 3.0).unwrap().p, 2.0);
        let p = AdmissiblePair::from_q(3.0, 3.0).unwrap().p;
        assert!((p - 4.0).abs() < 1e-12);
        assert!(AdmissiblePair::from_q(7.0, 3.0).is_err());
        assert!(AdmissiblePair::from_q(1.5, 3.0).is_err());
    }

    #[test]
    fn from_p_inverts_from_q() {
        for q in [2.0, 2.5, 3.0, 4.0, 6.0] {
            let a = AdmissiblePair::from_q(q, 3.0).unwrap();
            let b = AdmissiblePair::from_p(a.p, 3.0).unwrap();
            assert!((a.q - b.q).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_dimension_examples() {
        assert_eq!(effective_dimension(3.0, 3).unwrap(), 7.0);
        assert_eq!(effective_dimension(1.0, 5).unwrap(), 5.0);
        assert_eq!(effective_dimension(2.5, 4).unwrap(), 8.5);
        assert!(effective_dimension(0.4, 3).is_err());
    }

    #[test]
    fn scattering_window_examples() {
        let w = scattering_window(3, Growth::Polynomial { effective_dim: 7.0 });
        assert_eq!((w.p_low, w.p_high), (4.0 / 7.0, 4.0));
        assert!(w.improves_on_euclidean);
        let w = scattering_window(3, Growth::Polynomial { effective_dim: 3.0 });
        assert_eq!((w.p_low, w.p_high), (4.0 / 3.0, 4.0));
        assert!(!w.improves_on_euclidean);
        let w = scattering_window(3, Growth::Exponential);
        assert_eq!((w.p_low, w.p_high), (0.0, 4.0));
    }

    #[test]
    fn d_range_examples() {
        assert_eq!(classical_d_range(3, 7.0), Some((3.0, 7.0)));
        assert_eq!(classical_d_range(3, 3.0), None);
        assert_eq!(classical_d_range(4, 10.0), Some((4.0, 10.0)));
    }

    #[test]
    fn display_uses_inf() {
        let p = AdmissiblePair::from_q(2.0, 3.0).unwrap();
        assert_eq!(p.to_string(), "p=inf, q=2, dim=3");
    }
}
