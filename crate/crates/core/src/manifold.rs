//! Warp profiles φ of rotationally symmetric metrics `dr² + φ(r)² dω²`, and
//! everything derived from them pointwise: curvatures, the transform weights
//! τ = φ^{(n-1)/2} and σ = (r/φ)^{(n-1)/2}, the half-line potential
//! Q = τ''/τ and the flat-space potential V = Q − (n−1)(n−3)/(4r²).
//!
//! All evaluators work with the ratios φ^{(k)}/φ and with log φ so that
//! exponentially growing profiles stay finite far past `sinh` overflow.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Relative radius below which V is evaluated from its Taylor expansion at 0.
pub const SERIES_RADIUS: f64 = 1e-3;

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied profile given by closed-form evaluators for φ, φ', φ'', φ'''.
#[derive(Clone)]
pub struct CustomProfile {
    pub name: String,
    pub derivatives: [Option<ProfileFn>; 4],
    /// φ⁽⁵⁾(0), if known; sharpens the near-origin expansion of V.
    pub phi5_at_0: Option<f64>,
    /// Closed-form description, kept so the profile can be written back to a
    /// config file.
    pub terms: Option<ClosedFormSpec>,
}

#[derive(Clone)]
pub enum ProfileKind {
    /// φ(r) = r.
    Euclidean,
    /// φ(r) = sinh(αr)/α.
    Hyperbolic { alpha: f64 },
    /// φ(r) = r + a₁r³ + … + a_k r^{2k+1}.
    OddPolynomial { coeffs: Vec<f64> },
    /// φ(r) = r on [0, r₀], r^m on [2r₀, ∞), glued by a C³ septic smoothstep.
    PowerTail { m: f64, r0: f64 },
    Custom(CustomProfile),
}

#[derive(Clone)]
pub struct WarpProfile {
    kind: ProfileKind,
    phi3_at_0: f64,
}

impl fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WarpProfile({}, φ'''(0)={})", self.label(), self.phi3_at_0)
    }
}

/// φ'/φ, φ''/φ, φ'''/φ at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratios {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvaturePoint {
    pub r: f64,
    pub sec_rad: f64,
    pub sec_tan: f64,
    pub ricci_tan: f64,
    pub ricci_rad: f64,
    pub scalar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauSigma {
    pub tau: f64,
    pub dtau: f64,
    pub d2tau: f64,
    pub sigma: f64,
}

/// Q = τ''/τ and V = Q − (n−1)(n−3)/(4r²) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotential {
    pub grid: Grid,
    pub n: usize,
    pub q_values: Vec<f64>,
    pub v_values: Vec<f64>,
    /// Constant shift the consumer should subtract (0 in the polynomial
    /// regime, α²(n−1)²/4 in the exponential one).
    pub c0: f64,
}

impl EffectivePotential {
    pub fn shifted_q(&self) -> Vec<f64> {
        self.q_values.iter().map(|q| q - self.c0).collect()
    }

    pub fn shifted_v(&self) -> Vec<f64> {
        self.v_values.iter().map(|v| v - self.c0).collect()
    }
}

/// (n−1)(n−3)/4, the coefficient of the centrifugal term linking Q and V.
pub fn centrifugal_coefficient(n: usize) -> f64 {
    let n = n as f64;
    (n - 1.0) * (n - 3.0) / 4.0
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::DimensionTooSmall(n))
    } else {
        Ok(())
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveRadius(r))
    }
}

// Septic smoothstep and its t-derivatives; C³ with s(0)=0, s(1)=1.
fn smoothstep7(t: f64) -> [f64; 4] {
    if t <= 0.0 {
        return [0.0; 4];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    [
        t4 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t3),
        t3 * (140.0 - 420.0 * t + 420.0 * t2 - 140.0 * t3),
        t2 * (420.0 - 1680.0 * t + 2100.0 * t2 - 840.0 * t3),
        t * (840.0 - 5040.0 * t + 8400.0 * t2 - 4200.0 * t3),
    ]
}

impl WarpProfile {
    pub fn euclidean() -> Self {
        Self {
            kind: ProfileKind::Euclidean,
            phi3_at_0: 0.0,
        }
    }

    /// φ(r) = sinh(αr)/α, so that φ'(0) = 1 for every α.
    pub fn hyperbolic(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        Ok(Self {
            kind: ProfileKind::Hyperbolic { alpha },
            phi3_at_0: alpha * alpha,
        })
    }

    pub fn odd_polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter(
                "odd polynomial needs at least one coefficient, all > 0".into(),
            ));
        }
        let phi3 = 6.0 * coeffs[0];
        Ok(Self {
            kind: ProfileKind::OddPolynomial { coeffs },
            phi3_at_0: phi3,
        })
    }

    /// Euclidean core of radius `r0`, exact power law r^m beyond `2·r0`.
    pub fn power_tail(m: f64, r0: f64) -> Result<Self> {
        if !(m > 0.0) || !(r0 > 0.0) || !m.is_finite() || !r0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power tail needs m > 0 and r0 > 0, got m={m}, r0={r0}"
            )));
        }
        Ok(Self {
            kind: ProfileKind::PowerTail { m, r0 },
            phi3_at_0: 0.0,
        })
    }

    /// Custom profile; `phi3_at_0` must be supplied by the caller.
    pub fn custom(custom: CustomProfile, phi3_at_0: f64) -> Self {
        Self {
            kind: ProfileKind::Custom(custom),
            phi3_at_0,
        }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn phi3_at_0(&self) -> f64 {
        self.phi3_at_0
    }

    pub fn phi5_at_0(&self) -> Option<f64> {
        match &self.kind {
            ProfileKind::Euclidean | ProfileKind::PowerTail { .. } => Some(0.0),
            ProfileKind::Hyperbolic { alpha } => Some(alpha.powi(4)),
            ProfileKind::OddPolynomial { coeffs } => {
                Some(120.0 * coeffs.get(1).copied().unwrap_or(0.0))
            }
            ProfileKind::Custom(c) => c.phi5_at_0,
        }
    }

    /// Natural length scale, used to place the series/direct switch.
    pub fn scale(&self) -> f64 {
        match &self.kind {
            ProfileKind::Euclidean => 1.0,
            ProfileKind::Hyperbolic { alpha } => 1.0 / alpha,
            ProfileKind::OddPolynomial { coeffs } => 1.0 / coeffs[0].sqrt().max(1.0),
            ProfileKind::PowerTail { r0, .. } => r0.min(1.0),
            ProfileKind::Custom(_) => 1.0,
        }
    }

    pub fn series_radius(&self) -> f64 {
        SERIES_RADIUS * self.scale()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::Euclidean => "euclidean".into(),
            ProfileKind::Hyperbolic { alpha } => format!("hyperbolic(alpha={alpha})"),
            ProfileKind::OddPolynomial { coeffs } => format!("odd_polynomial({coeffs:?})"),
            ProfileKind::PowerTail { m, r0 } => format!("power_tail(m={m},r0={r0})"),
            ProfileKind::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// Errors if a custom profile lacks any of φ, φ', φ'', φ'''.
    pub fn require_complete(&self) -> Result<()> {
        if let ProfileKind::Custom(c) = &self.kind {
            for (order, d) in c.derivatives.iter().enumerate() {
                if d.is_none() {
                    return Err(Error::MissingDerivative {
                        name: c.name.clone(),
                        order,
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks φ(0)=0, φ'(0)=1, vanishing even derivatives (orders 0, 2, 4),
    /// and agreement of the supplied φ'''(0). Built-in kinds pass by
    /// construction.
    pub fn validate_origin(&self) -> Result<()> {
        let ProfileKind::Custom(c) = &self.kind else {
            return Ok(());
        };
        self.require_complete()?;
        let d = |k: usize, r: f64| (c.derivatives[k].as_ref().unwrap())(r);
        let scale = self.scale();
        let fail = |msg: String| Err(Error::InvalidProfile(format!("{}: {msg}", c.name)));
        if d(0, 0.0).abs() > 1e-12 * scale {
            return fail(format!("phi(0) = {} != 0", d(0, 0.0)));
        }
        if (d(1, 0.0) - 1.0).abs() > 1e-12 {
            return fail(format!("phi'(0) = {} != 1", d(1, 0.0)));
        }
        let delta = 1e-2 * scale;
        let even0 = 0.5 * (d(0, delta) + d(0, -delta)) / scale;
        let even2 = (d(0, delta) - 2.0 * d(0, 0.0) + d(0, -delta)) / (delta * delta) * scale;
        let even4 = (d(2, delta) - 2.0 * d(2, 0.0) + d(2, -delta)) / (delta * delta) * scale.powi(3);
        for (order, val) in [(0, even0), (2, even2), (4, even4)] {
            if !val.is_finite() || val.abs() > 1e-6 {
                return fail(format!("even derivative of order {order} at 0 is {val:e}"));
            }
        }
        if d(2, 0.0).abs() * scale > 1e-6 {
            return fail(format!("phi''(0) = {} != 0", d(2, 0.0)));
        }
        let phi3 = d(3, 0.0);
        if (phi3 - self.phi3_at_0).abs() > 1e-6 * (1.0 + phi3.abs()) {
            return fail(format!(
                "declared phi'''(0) = {} disagrees with evaluator value {phi3}",
                self.phi3_at_0
            ));
        }
        Ok(())
    }

    /// φ^{(order)}(r), analytically.
    pub fn phi(&self, r: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::UnsupportedOrder(order));
        }
        if !(r >= 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        Ok(match &self.kind {
            ProfileKind::Euclidean => [r, 1.0, 0.0, 0.0][order],
            ProfileKind::Hyperbolic { alpha } => {
                let x = alpha * r;
                match order {
                    0 => x.sinh() / alpha,
                    1 => x.cosh(),
                    2 => alpha * x.sinh(),
                    _ => alpha * alpha * x.cosh(),
                }
            }
            ProfileKind::OddPolynomial { coeffs } => odd_poly_derivs(coeffs, r)[order],
            ProfileKind::PowerTail { m, r0 } => power_tail_derivs(*m, *r0, r)[order],
            ProfileKind::Custom(c) => match &c.derivatives[order] {
                Some(f) => f(r),
                None => {
                    return Err(Error::MissingDerivative {
                        name: c.name.clone(),
                        order,
                    })
                }
            },
        })
    }

    fn raw_derivs(&self, r: f64) -> [f64; 4] {
        match &self.kind {
            ProfileKind::Euclidean => [r, 1.0, 0.0, 0.0],
            ProfileKind::Hyperbolic { alpha } => {
                let x = alpha * r;
                let (s, c) = (x.sinh(), x.cosh());
                [s / alpha, c, alpha * s, alpha * alpha * c]
            }
            ProfileKind::OddPolynomial { coeffs } => odd_poly_derivs(coeffs, r),
            ProfileKind::PowerTail { m, r0 } => power_tail_derivs(*m, *r0, r),
            ProfileKind::Custom(c) => {
                let mut out = [f64::NAN; 4];
                for (k, d) in c.derivatives.iter().enumerate() {
                    if let Some(f) = d {
                        out[k] = f(r);
                    }
                }
                out
            }
        }
    }

    /// ln φ(r), finite for exponential profiles far beyond `sinh` overflow.
    pub fn ln_phi(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Euclidean => r.ln(),
            ProfileKind::Hyperbolic { alpha } => {
                let x = alpha * r;
                if x < 20.0 {
                    x.sinh().ln() - alpha.ln()
                } else {
                    x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p() - alpha.ln()
                }
            }
            ProfileKind::PowerTail { m, r0 } if r >= 2.0 * r0 => m * r.ln(),
            _ => self.raw_derivs(r)[0].ln(),
        }
    }

    /// 1/φ(r).
    pub fn inv_phi(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Hyperbolic { alpha } => alpha / (alpha * r).sinh(),
            _ => 1.0 / self.raw_derivs(r)[0],
        }
    }

    /// φ'/φ, φ''/φ, φ'''/φ.
    pub fn ratios(&self, r: f64) -> Ratios {
        match &self.kind {
            ProfileKind::Euclidean => Ratios {
                d1: 1.0 / r,
                d2: 0.0,
                d3: 0.0,
            },
            ProfileKind::Hyperbolic { alpha } => {
                let d1 = alpha / (alpha * r).tanh();
                Ratios {
                    d1,
                    d2: alpha * alpha,
                    d3: alpha * alpha * d1,
                }
            }
            ProfileKind::PowerTail { m, r0 } if r >= 2.0 * r0 => Ratios {
                d1: m / r,
                d2: m * (m - 1.0) / (r * r),
                d3: m * (m - 1.0) * (m - 2.0) / (r * r * r),
            },
            _ => {
                let d = self.raw_derivs(r);
                Ratios {
                    d1: d[1] / d[0],
                    d2: d[2] / d[0],
                    d3: d[3] / d[0],
                }
            }
        }
    }

    /// ((φ')² − 1)/φ², evaluated without cancellation where possible.
    pub fn tangential_ratio(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Euclidean => 0.0,
            ProfileKind::Hyperbolic { alpha } => alpha * alpha,
            ProfileKind::OddPolynomial { coeffs } => {
                // φ' − 1 = Σ (2i+1) a_i r^{2i}, no cancellation
                let mut dm1 = 0.0;
                let mut pow = r * r;
                for (i, a) in coeffs.iter().enumerate() {
                    dm1 += (2 * i + 3) as f64 * a * pow;
                    pow *= r * r;
                }
                let inv = self.inv_phi(r);
                (dm1 * inv) * ((dm1 + 2.0) * inv)
            }
            ProfileKind::PowerTail { r0, .. } if r <= *r0 => 0.0,
            _ => {
                let d = self.raw_derivs(r);
                let inv = 1.0 / d[0];
                ((d[1] - 1.0) * inv) * ((d[1] + 1.0) * inv)
            }
        }
    }

    /// Sectional and Ricci curvatures at r > 0.
    pub fn curvature(&self, n: usize, r: f64) -> Result<CurvaturePoint> {
        check_dim(n)?;
        check_radius(r)?;
        self.require_complete()?;
        let nf = n as f64;
        let sec_rad = -self.ratios(r).d2;
        let sec_tan = -self.tangential_ratio(r);
        Ok(CurvaturePoint {
            r,
            sec_rad,
            sec_tan,
            ricci_rad: (nf - 1.0) * sec_rad,
            ricci_tan: sec_rad + (nf - 2.0) * sec_tan,
            scalar: 2.0 * (nf - 1.0) * sec_rad + (nf - 1.0) * (nf - 2.0) * sec_tan,
        })
    }

    /// τ, τ', τ'' and σ at r > 0.
    pub fn tau_sigma(&self, n: usize, r: f64) -> Result<TauSigma> {
        check_dim(n)?;
        check_radius(r)?;
        self.require_complete()?;
        let k = (n as f64 - 1.0) / 2.0;
        let ln_phi = self.ln_phi(r);
        let tau = (k * ln_phi).exp();
        let p = self.ratios(r);
        Ok(TauSigma {
            tau,
            dtau: k * p.d1 * tau,
            d2tau: tau * (k * p.d2 + k * (k - 1.0) * p.d1 * p.d1),
            sigma: (k * (r.ln() - ln_phi)).exp(),
        })
    }

    /// ln σ(r) = (n−1)/2 · (ln r − ln φ).
    pub fn ln_sigma(&self, n: usize, r: f64) -> f64 {
        (n as f64 - 1.0) / 2.0 * (r.ln() - self.ln_phi(r))
    }

    /// ln τ(r) = (n−1)/2 · ln φ.
    pub fn ln_tau(&self, n: usize, r: f64) -> f64 {
        (n as f64 - 1.0) / 2.0 * self.ln_phi(r)
    }

    /// σ'(r) by differentiating (r/φ)^k directly from φ and φ'.
    pub fn sigma_prime(&self, n: usize, r: f64) -> f64 {
        let k = (n as f64 - 1.0) / 2.0;
        let d = self.raw_derivs(r);
        k * (r / d[0]).powf(k - 1.0) * (d[0] - r * d[1]) / (d[0] * d[0])
    }

    /// σ'/σ = (n−1)/2 · (1/r − φ'/φ).
    pub fn sigma_log_derivative(&self, n: usize, r: f64) -> f64 {
        (n as f64 - 1.0) / 2.0 * (1.0 / r - self.ratios(r).d1)
    }

    /// Q = τ''/τ at r > 0.
    pub fn q_at(&self, n: usize, r: f64) -> f64 {
        self.v_at(n, r) + centrifugal_coefficient(n) / (r * r)
    }

    /// V = τ''/τ − (n−1)(n−3)/(4r²) at r > 0, switching to the Taylor
    /// expansion below [`WarpProfile::series_radius`].
    pub fn v_at(&self, n: usize, r: f64) -> f64 {
        let k = (n as f64 - 1.0) / 2.0;
        let c = centrifugal_coefficient(n);
        if r < self.series_radius() {
            let (d2, bracket) = self.origin_expansion(r);
            return k * d2 + c * bracket;
        }
        let p = self.ratios(r);
        let bracket = if c == 0.0 { 0.0 } else { p.d1 * p.d1 - 1.0 / (r * r) };
        k * p.d2 + c * bracket
    }

    /// V evaluated by the direct formula regardless of radius.
    pub fn v_direct(&self, n: usize, r: f64) -> f64 {
        let k = (n as f64 - 1.0) / 2.0;
        let p = self.ratios(r);
        k * p.d2 + centrifugal_coefficient(n) * (p.d1 * p.d1 - 1.0 / (r * r))
    }

    /// V evaluated by the near-origin expansion regardless of radius.
    pub fn v_series(&self, n: usize, r: f64) -> f64 {
        let k = (n as f64 - 1.0) / 2.0;
        let (d2, bracket) = self.origin_expansion(r);
        k * d2 + centrifugal_coefficient(n) * bracket
    }

    // φ''/φ ≈ φ'''(0) + (φ⁽⁵⁾(0) − φ'''(0)²) r²/6,
    // (φ'/φ)² − 1/r² ≈ (2/3) φ'''(0) + φ⁽⁵⁾(0) r²/15.
    fn origin_expansion(&self, r: f64) -> (f64, f64) {
        let a = self.phi3_at_0;
        match self.phi5_at_0() {
            Some(b) => (
                a + (b - a * a) * r * r / 6.0,
                2.0 * a / 3.0 + b * r * r / 15.0,
            ),
            None => (a, 2.0 * a / 3.0),
        }
    }

    /// d/dr (τ''/τ), analytic from φ-derivatives up to order 3.
    pub fn dq_at(&self, n: usize, r: f64) -> f64 {
        self.dv_at(n, r) - 2.0 * centrifugal_coefficient(n) / (r * r * r)
    }

    /// dV/dr, analytic.
    pub fn dv_at(&self, n: usize, r: f64) -> f64 {
        let k = (n as f64 - 1.0) / 2.0;
        let c = centrifugal_coefficient(n);
        if r < self.series_radius() {
            let a = self.phi3_at_0;
            return match self.phi5_at_0() {
                Some(b) => k * (b - a * a) * r / 3.0 + c * 2.0 * b * r / 15.0,
                None => 0.0,
            };
        }
        let p = self.ratios(r);
        let d_d2 = p.d3 - p.d1 * p.d2;
        let d_bracket = 2.0 * p.d1 * (p.d2 - p.d1 * p.d1) + 2.0 / (r * r * r);
        k * d_d2 + c * d_bracket
    }

    /// Samples Q and V on a grid; `c0` is recorded, not subtracted.
    pub fn potential(&self, n: usize, grid: &Grid, c0: f64) -> Result<EffectivePotential> {
        check_dim(n)?;
        self.validate_origin()?;
        let mut q_values = Vec::with_capacity(grid.len());
        let mut v_values = Vec::with_capacity(grid.len());
        let c = centrifugal_coefficient(n);
        for r in grid.nodes() {
            if !self.ln_phi(r).is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "{}: phi is not positive at r = {r}",
                    self.label()
                )));
            }
            let v = self.v_at(n, r);
            if !v.is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "{}: V is not finite at r = {r}",
                    self.label()
                )));
            }
            v_values.push(v);
            q_values.push(v + c / (r * r));
        }
        Ok(EffectivePotential {
            grid: *grid,
            n,
            q_values,
            v_values,
            c0,
        })
    }

    /// Radial volume density φ(r)^{n−1}.
    pub fn volume_weight(&self, n: usize, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        self.raw_derivs(r)[0].powi(n as i32 - 1)
    }

    /// Serializable description, if the profile has one.
    pub fn spec(&self) -> Option<ProfileSpec> {
        Some(match &self.kind {
            ProfileKind::Euclidean => ProfileSpec::Euclidean,
            ProfileKind::Hyperbolic { alpha } => ProfileSpec::Hyperbolic { alpha: *alpha },
            ProfileKind::OddPolynomial { coeffs } => ProfileSpec::OddPolynomial {
                coeffs: coeffs.clone(),
            },
            ProfileKind::PowerTail { m, r0 } => ProfileSpec::PowerTail { m: *m, r0: *r0 },
            ProfileKind::Custom(c) => ProfileSpec::ClosedForm(c.terms.clone()?),
        })
    }
}

fn odd_poly_derivs(coeffs: &[f64], r: f64) -> [f64; 4] {
    let mut d = [r, 1.0, 0.0, 0.0];
    for (i, a) in coeffs.iter().enumerate() {
        let p = (2 * i + 3) as i32;
        let pf = p as f64;
        d[0] += a * r.powi(p);
        d[1] += a * pf * r.powi(p - 1);
        d[2] += a * pf * (pf - 1.0) * r.powi(p - 2);
        d[3] += a * pf * (pf - 1.0) * (pf - 2.0) * r.powi(p - 3);
    }
    d
}

fn power_tail_derivs(m: f64, r0: f64, r: f64) -> [f64; 4] {
    if r <= r0 {
        return [r, 1.0, 0.0, 0.0];
    }
    let g = [
        r.powf(m) - r,
        m * r.powf(m - 1.0) - 1.0,
        m * (m - 1.0) * r.powf(m - 2.0),
        m * (m - 1.0) * (m - 2.0) * r.powf(m - 3.0),
    ];
    if r >= 2.0 * r0 {
        return [g[0] + r, g[1] + 1.0, g[2], g[3]];
    }
    let st = smoothstep7((r - r0) / r0);
    let s = [st[0], st[1] / r0, st[2] / (r0 * r0), st[3] / (r0 * r0 * r0)];
    [
        r + s[0] * g[0],
        1.0 + s[1] * g[0] + s[0] * g[1],
        s[2] * g[0] + 2.0 * s[1] * g[1] + s[0] * g[2],
        s[3] * g[0] + 3.0 * s[2] * g[1] + 3.0 * s[1] * g[2] + s[0] * g[3],
    ]
}

/// One term `coef · r^power · exp(rate · r)` of a closed-form evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(default)]
    pub power: f64,
    #[serde(default)]
    pub rate: f64,
}

impl Term {
    fn eval(&self, r: f64) -> f64 {
        let p = if self.power == self.power.trunc() && self.power.abs() < 64.0 {
            r.powi(self.power as i32)
        } else {
            r.powf(self.power)
        };
        let e = if self.rate == 0.0 { 1.0 } else { (self.rate * r).exp() };
        self.coef * p * e
    }
}

/// Closed-form custom profile: each derivative is a user-supplied sum of
/// terms. Missing derivatives stay missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSpec {
    pub name: String,
    pub phi3_at_0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi5_at_0: Option<f64>,
    pub phi: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dphi: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2phi: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d3phi: Option<Vec<Term>>,
}

/// Profile description as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Euclidean,
    Hyperbolic { alpha: f64 },
    OddPolynomial { coeffs: Vec<f64> },
    PowerTail { m: f64, r0: f64 },
    ClosedForm(ClosedFormSpec),
}

impl ProfileSpec {
    pub fn build(&self) -> Result<WarpProfile> {
        match self {
            ProfileSpec::Euclidean => Ok(WarpProfile::euclidean()),
            ProfileSpec::Hyperbolic { alpha } => WarpProfile::hyperbolic(*alpha),
            ProfileSpec::OddPolynomial { coeffs } => WarpProfile::odd_polynomial(coeffs.clone()),
            ProfileSpec::PowerTail { m, r0 } => WarpProfile::power_tail(*m, *r0),
            ProfileSpec::ClosedForm(spec) => {
                let to_fn = |terms: &Option<Vec<Term>>| -> Option<ProfileFn> {
                    terms.clone().map(|t| {
                        Arc::new(move |r: f64| t.iter().map(|term| term.eval(r)).sum::<f64>())
                            as ProfileFn
                    })
                };
                let custom = CustomProfile {
                    name: spec.name.clone(),
                    derivatives: [
                        to_fn(&Some(spec.phi.clone())),
                        to_fn(&spec.dphi),
                        to_fn(&spec.d2phi),
                        to_fn(&spec.d3phi),
                    ],
                    phi5_at_0: spec.phi5_at_0,
                    terms: Some(spec.clone()),
                };
                Ok(WarpProfile::custom(custom, spec.phi3_at_0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> WarpProfile {
        WarpProfile::odd_polynomial(vec![1.0]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn phi_eval_examples() {
        assert_eq!(WarpProfile::euclidean().phi(2.0, 0).unwrap(), 2.0);
        assert_eq!(WarpProfile::hyperbolic(1.0).unwrap().phi(0.0, 1).unwrap(), 1.0);
        assert_eq!(cubic().phi(2.0, 2).unwrap(), 12.0);
        assert!(matches!(
            cubic().phi(1.0, 4),
            Err(Error::UnsupportedOrder(4))
        ));
    }

    #[test]
    fn custom_missing_derivative_is_reported() {
        let custom = CustomProfile {
            name: "partial".into(),
            derivatives: [Some(Arc::new(|r: f64| r)), Some(Arc::new(|_| 1.0)), None, None],
            phi5_at_0: None,
            terms: None,
        };
        let p = WarpProfile::custom(custom, 0.0);
        assert!(p.phi(1.0, 1).is_ok());
        assert!(matches!(
            p.phi(1.0, 2),
            Err(Error::MissingDerivative { order: 2, .. })
        ));
        assert!(p.curvature(3, 1.0).is_err());
    }

    #[test]
    fn curvature_examples() {
        let c = WarpProfile::euclidean().curvature(3, 1.0).unwrap();
        assert_eq!([c.sec_rad, c.sec_tan, c.ricci_rad, c.ricci_tan, c.scalar], [0.0; 5]);

        let c = WarpProfile::hyperbolic(1.0).unwrap().curvature(3, 1.7).unwrap();
        assert!(rel(c.sec_rad, -1.0) < 1e-12);
        assert!(rel(c.sec_tan, -1.0) < 1e-12);

        let c = cubic().curvature(4, 1.0).unwrap();
        assert!(rel(c.sec_rad, -3.0) < 1e-14);
        assert!(rel(c.sec_tan, -15.0 / 4.0) < 1e-14);
        assert!(rel(c.ricci_rad, 3.0 * c.sec_rad) < 1e-15);
        assert!(rel(c.scalar, 6.0 * c.sec_rad + 6.0 * c.sec_tan) < 1e-14);

        assert!(WarpProfile::euclidean().curvature(3, 0.0).is_err());
    }

    #[test]
    fn tau_sigma_examples() {
        let t = WarpProfile::euclidean().tau_sigma(5, 3.0).unwrap();
        assert!(rel(t.tau, 9.0) < 1e-14);
        assert!(rel(t.sigma, 1.0) < 1e-14);

        let t = WarpProfile::hyperbolic(1.0).unwrap().tau_sigma(3, 1.0).unwrap();
        assert!(rel(t.tau, 1f64.sinh()) < 1e-14);
        assert!(rel(t.d2tau, 1f64.sinh()) < 1e-14);

        let t = cubic().tau_sigma(3, 1.0).unwrap();
        assert!(rel(t.tau, 2.0) < 1e-14);
        assert!(rel(t.sigma, 0.5) < 1e-14);
    }

    #[test]
    fn potential_examples() {
        let grid = Grid::new(10.0, 1000).unwrap();
        let e = WarpProfile::euclidean().potential(3, &grid, 0.0).unwrap();
        assert!(e.v_values.iter().all(|v| *v == 0.0));

        let h = WarpProfile::hyperbolic(1.0).unwrap().potential(3, &grid, 0.0).unwrap();
        assert!(h.v_values.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn hyperbolic_stays_finite_past_overflow() {
        let p = WarpProfile::hyperbolic(1.0).unwrap();
        assert!(p.phi(800.0, 0).unwrap().is_infinite());
        assert!((p.ln_phi(800.0) - (800.0 - 2f64.ln())).abs() < 1e-12);
        assert!((p.v_at(4, 800.0) - (2.25 - 0.75 / 640_000.0)).abs() < 1e-12);
        assert_eq!(p.curvature(3, 800.0).unwrap().sec_tan, -1.0);
    }

    #[test]
    fn series_and_direct_agree_at_switch() {
        let profiles = [
            WarpProfile::euclidean(),
            WarpProfile::hyperbolic(1.0).unwrap(),
            WarpProfile::hyperbolic(2.5).unwrap(),
            WarpProfile::odd_polynomial(vec![1.0]).unwrap(),
            WarpProfile::odd_polynomial(vec![0.5, 0.2, 0.1]).unwrap(),
            WarpProfile::power_tail(2.0, 1.0).unwrap(),
        ];
        for p in &profiles {
            let r = p.series_radius();
            for n in 3..=6 {
                let (s, d) = (p.v_series(n, r), p.v_direct(n, r));
                assert!((s - d).abs() <= 1e-8 * (1.0 + d.abs()), "{p:?} n={n}: {s} vs {d}");
            }
        }
    }

    #[test]
    fn volume_weight_examples() {
        assert_eq!(WarpProfile::euclidean().volume_weight(3, 2.0), 4.0);
        let h = WarpProfile::hyperbolic(1.0).unwrap().volume_weight(3, 1.0);
        assert!(rel(h, 1f64.sinh().powi(2)) < 1e-15);
        assert_eq!(cubic().volume_weight(4, 1.0), 8.0);
    }

    #[test]
    fn power_tail_is_exact_power_beyond_glue() {
        let p = WarpProfile::power_tail(3.0, 1.0).unwrap();
        assert_eq!(p.phi(2.5, 0).unwrap(), 2.5f64.powf(3.0));
        assert_eq!(p.phi(0.5, 0).unwrap(), 0.5);
        // C³ glue: derivatives continuous at both ends
        for r in [1.0, 2.0] {
            for order in 0..=3 {
                let lo = p.phi(r - 1e-12, order).unwrap();
                let hi = p.phi(r + 1e-12, order).unwrap();
                assert!((lo - hi).abs() < 1e-6, "order {order} at {r}: {lo} vs {hi}");
            }
        }
    }

    #[test]
    fn closed_form_spec_validates() {
        let spec = ClosedFormSpec {
            name: "sinh-like".into(),
            phi3_at_0: 1.0,
            phi5_at_0: None,
            phi: vec![
                Term { coef: 1.0, power: 1.0, rate: 0.0 },
                Term { coef: 1.0 / 6.0, power: 3.0, rate: 0.0 },
            ],
            dphi: Some(vec![
                Term { coef: 1.0, power: 0.0, rate: 0.0 },
                Term { coef: 0.5, power: 2.0, rate: 0.0 },
            ]),
            d2phi: Some(vec![Term { coef: 1.0, power: 1.0, rate: 0.0 }]),
            d3phi: Some(vec![Term { coef: 1.0, power: 0.0, rate: 0.0 }]),
        };
        let p = ProfileSpec::ClosedForm(spec.clone()).build().unwrap();
        p.validate_origin().unwrap();
        let grid = Grid::new(1.0, 10).unwrap();
        assert!(p.potential(3, &grid, 0.0).is_ok());

        let mut even = spec.clone();
        even.phi.push(Term { coef: 0.3, power: 2.0, rate: 0.0 });
        let p = ProfileSpec::ClosedForm(even).build().unwrap();
        assert!(matches!(p.validate_origin(), Err(Error::InvalidProfile(_))));

        let mut missing = spec;
        missing.d3phi = None;
        let p = ProfileSpec::ClosedForm(missing).build().unwrap();
        assert!(matches!(
            p.potential(3, &grid, 0.0),
            Err(Error::MissingDerivative { order: 3, .. })
        ));
    }
}
