//! TOML experiment configuration.
//!
//! One file drives every subcommand; each command reads its own table and
//! falls back to the defaults below when the table is absent. The config
//! hash stamped into outputs is the SHA-256 of the canonical re-serialized
//! TOML, so formatting and key order in the source file do not affect it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hypotheses::{BuiltinPotential, CheckGrid};
use crate::manifold::{ProfileSpec, WarpProfile};
use crate::norms::Modulation;
use crate::solver::{NlsSign, Representation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub profile: ProfileSpec,
    /// Directory receiving CSV and JSON outputs.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Seed of every randomized start vector.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub datum: DatumConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub describe: DescribeConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub resolvent: ResolventConfig,
    #[serde(default)]
    pub scatter: ScatterConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("warpdisp-out")
}

fn default_seed() -> u64 {
    crate::resolvent::POWER_SEED
}

/// Uniform radial grid (0, r_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max: 40.0,
            points: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    /// Number of snapshot intervals on [0, t_final].
    pub snapshots: usize,
    /// Largest substep; defaults to min(h, t_final/100).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_final: 2.0,
            snapshots: 200,
            dt: None,
        }
    }
}

/// Gaussian datum exp(−r²/width² + i·chirp·(r/width)^power) on M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatumConfig {
    pub width: f64,
    pub chirp: f64,
    pub modulation: Modulation,
    pub amplitude: f64,
}

impl Default for DatumConfig {
    fn default() -> Self {
        Self {
            width: 1.0,
            chirp: 0.0,
            modulation: Modulation::Quadratic,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescribeConfig {
    pub radii: Vec<f64>,
}

impl Default for DescribeConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Negative curvature plus polynomial behaviour.
    Poly,
    /// Exponential behaviour plus the curvature lower bound.
    Exp,
    /// The three conditions on τ''/τ − c₀.
    Tau,
    /// The three conditions on a flat-space potential.
    Potential,
}

/// Potential used by `check --theorem potential` and by `resolvent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// V − c₀ of the configured manifold.
    Manifold { c0: f64 },
    Zero,
    Constant { value: f64 },
    /// β/⟨r⟩².
    InverseBracket { beta: f64 },
}

impl PotentialSpec {
    pub fn build(&self, profile: &WarpProfile, n: usize) -> BuiltinPotential {
        match self {
            PotentialSpec::Manifold { c0 } => BuiltinPotential::Manifold {
                profile: profile.clone(),
                n,
                c0: *c0,
            },
            PotentialSpec::Zero => BuiltinPotential::Zero,
            PotentialSpec::Constant { value } => BuiltinPotential::Constant(*value),
            PotentialSpec::InverseBracket { beta } => BuiltinPotential::InverseBracket { beta: *beta },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub theorem: Theorem,
    /// Shift for the τ conditions.
    pub c0: f64,
    pub potential: PotentialSpec,
    pub grid: CheckGrid,
    /// Fit window of the growth-law checks; the last decade when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            theorem: Theorem::Poly,
            c0: 0.0,
            potential: PotentialSpec::Manifold { c0: 0.0 },
            grid: CheckGrid::standard(),
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormsMode {
    /// Space-time norms of the configured datum over the configured time grid.
    Datum,
    /// Adaptive quotient sweep over the standard Gaussian family.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsConfig {
    pub mode: NormsMode,
    /// Spatial exponents; p follows from admissibility in dimension n.
    pub q: Vec<f64>,
    pub weighted: bool,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self {
            mode: NormsMode::Datum,
            q: vec![2.0, 6.0],
            weighted: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventConfig {
    pub potential: PotentialSpec,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub eps: Vec<f64>,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::Manifold { c0: 0.0 },
            lambda_min: -2.0,
            lambda_max: 20.0,
            lambda_count: 40,
            eps: crate::resolvent::DEFAULT_EPS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    /// Nonlinearity power p in |u|^p u.
    pub power: f64,
    pub sign: NlsSign,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            power: 2.0,
            sign: NlsSign::Defocusing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Representation of the exported snapshots.
    pub representation: Representation,
    /// Export every k-th snapshot to the field CSV.
    pub export_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            representation: Representation::UOnM,
            export_every: 10,
        }
    }
}

impl ExperimentConfig {
    /// A minimal valid config for the given profile.
    pub fn new(profile: ProfileSpec, n: usize) -> Self {
        Self {
            n,
            profile,
            output: default_output(),
            seed: default_seed(),
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            datum: DatumConfig::default(),
            solve: SolveConfig::default(),
            describe: DescribeConfig::default(),
            check: CheckConfig::default(),
            norms: NormsConfig::default(),
            resolvent: ResolventConfig::default(),
            scatter: ScatterConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML. The output directory is excluded,
    /// so moving results does not change their hash.
    pub fn hash(&self) -> Result<String> {
        let canonical = Self {
            output: PathBuf::new(),
            ..self.clone()
        };
        Ok(hex::encode(Sha256::digest(canonical.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 3 {
            return bad(format!("n = {} but dimension n >= 3 is required", self.n));
        }
        if !(self.grid.r_max > 0.0) || self.grid.points < 4 {
            return bad(format!(
                "grid needs r_max > 0 and >= 4 points, got {} x {}",
                self.grid.r_max, self.grid.points
            ));
        }
        if !(self.time.t_final > 0.0) || self.time.snapshots == 0 {
            return bad("time block needs t_final > 0 and snapshots >= 1".into());
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be > 0, got {dt}"));
            }
        }
        if !(self.datum.width > 0.0) {
            return bad(format!("datum width must be > 0, got {}", self.datum.width));
        }
        if self.resolvent.lambda_count == 0 || !(self.resolvent.lambda_max >= self.resolvent.lambda_min) {
            return bad("resolvent block needs lambda_count >= 1 and lambda_max >= lambda_min".into());
        }
        if self.resolvent.eps.is_empty() || self.resolvent.eps.iter().any(|e| !(*e > 0.0)) {
            return bad("resolvent eps list must be non-empty and positive".into());
        }
        if self.solve.export_every == 0 {
            return bad("solve.export_every must be >= 1".into());
        }
        if self.norms.q.is_empty() {
            return bad("norms block needs at least one q".into());
        }
        Ok(())
    }

    pub fn build_profile(&self) -> Result<WarpProfile> {
        let profile = self.profile.build()?;
        profile.validate_origin()?;
        Ok(profile)
    }

    /// The λ grid of the resolvent sweep, endpoints included.
    pub fn lambdas(&self) -> Vec<f64> {
        let r = &self.resolvent;
        if r.lambda_count == 1 {
            return vec![r.lambda_min];
        }
        crate::numerics::linspace(r.lambda_min, r.lambda_max, r.lambda_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HYPERBOLIC: &str = r#"
n = 3
seed = 11

[profile]
kind = "hyperbolic"
alpha = 1.0

[grid]
r_max = 20.0
points = 512

[check]
theorem = "tau"
c0 = 1.0
potential = { kind = "inverse_bracket", beta = 0.5 }
grid = { r_min = 1.0, r_max = 100.0, points = 300 }
"#;

    #[test]
    fn round_trip_is_lossless() {
        let c = ExperimentConfig::from_toml(HYPERBOLIC).unwrap();
        assert_eq!(c.check.theorem, Theorem::Tau);
        assert_eq!(c.seed, 11);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash().unwrap(), again.hash().unwrap());
    }

    #[test]
    fn closed_form_profile_round_trips() {
        let text = r#"
n = 4
[profile]
kind = "closed_form"
name = "cubic"
phi3_at_0 = 6.0
phi = [{ coef = 1.0, power = 1.0 }, { coef = 1.0, power = 3.0 }]
dphi = [{ coef = 1.0 }, { coef = 3.0, power = 2.0 }]
d2phi = [{ coef = 6.0, power = 1.0 }]
d3phi = [{ coef = 6.0 }]
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        let p = c.build_profile().unwrap();
        assert!((p.phi(2.0, 0).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_dimension_and_unknown_keys() {
        let low = HYPERBOLIC.replace("n = 3", "n = 2");
        assert!(matches!(ExperimentConfig::from_toml(&low), Err(Error::Config(_))));
        let typo = HYPERBOLIC.replace("seed = 11", "sead = 11");
        assert!(matches!(ExperimentConfig::from_toml(&typo), Err(Error::Config(_))));
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = ExperimentConfig::from_toml(HYPERBOLIC).unwrap();
        let spaced = HYPERBOLIC.replace("seed = 11", "seed    =   11   # comment");
        let b = ExperimentConfig::from_toml(&spaced).unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let other = ExperimentConfig::from_toml(&HYPERBOLIC.replace("seed = 11", "seed = 12")).unwrap();
        assert_ne!(a.hash().unwrap(), other.hash().unwrap());
    }

    #[test]
    fn lambda_grid_includes_endpoints() {
        let c = ExperimentConfig::new(ProfileSpec::Euclidean, 3);
        let l = c.lambdas();
        assert_eq!(l.len(), 40);
        assert_eq!((l[0], l[39]), (-2.0, 20.0));
    }
}
