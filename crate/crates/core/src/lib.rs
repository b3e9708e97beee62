//! Radial Schrödinger dynamics on rotationally symmetric manifolds
//! `ds² = dr² + φ(r)² dω²`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod hypotheses;
pub mod manifold;
pub mod norms;
pub mod numerics;
pub mod resolvent;
pub mod solver;
pub mod tridiag;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use grid::Grid;
pub use manifold::WarpProfile;
