use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform half-line grid `r_j = j·h`, `j = 1..=num_points`, `h = r_max/num_points`.
///
/// The origin is not a node; fields vanish there (Dirichlet) and beyond the
/// last node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    r_max: f64,
    num_points: usize,
}

impl Grid {
    pub fn new(r_max: f64, num_points: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidParameter(format!("r_max must be > 0, got {r_max}")));
        }
        if num_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 points, got {num_points}"
            )));
        }
        Ok(Self { r_max, num_points })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.num_points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.num_points as f64
    }

    /// Radius of node `j` (0-based index into value arrays, so `r = (j+1)·h`).
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.node(j)).collect()
    }

    /// Same radius, twice the points.
    pub fn refined(&self) -> Self {
        Self {
            r_max: self.r_max,
            num_points: 2 * self.num_points,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_exclude_origin() {
        let g = Grid::new(2.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.spacing(), 0.5);
        assert!(Grid::new(0.0, 10).is_err());
        assert!(Grid::new(1.0, 2).is_err());
    }
}
