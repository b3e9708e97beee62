//! Finite-grid certification of the geometric and potential hypotheses,
//! with explicit margins and extracted constants.
//!
//! Every report satisfies `passed ⟺ worst_margin > 0` and places `worst_r`
//! inside `grid_range`. Conditions asserting only that some constant exists
//! report the margin 1/(1 + constant), positive exactly when the constant is
//! finite on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::WarpProfile;
use crate::numerics::{fit_line, log_spaced};

/// Default upper end of every check grid.
pub const CHECK_R_MAX: f64 = 1e3;
pub const CHECK_POINTS: usize = 2000;
/// Lower end of grids for conditions stated for all r > 0.
pub const CHECK_R_MIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    SecBounded,
    NegCurvPoly,
    PolyBehaviour,
    #[serde(rename = "TauShifted_H1")]
    TauShiftedH1,
    #[serde(rename = "TauShifted_H2")]
    TauShiftedH2,
    #[serde(rename = "TauShifted_H3")]
    TauShiftedH3,
    ExpCurv,
    ExpBehaviour,
    PotH1,
    PotH2,
    PotH3,
    IntegrabilityI1,
}

/// Constants extracted by a check; absent entries are not produced by it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c0: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    pub n_eff: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none", default)]
    pub c: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub condition_id: ConditionId,
    pub passed: bool,
    pub worst_margin: f64,
    pub worst_r: f64,
    pub extracted: Constants,
    pub grid_range: (f64, f64),
    pub caveat: String,
}

impl HypothesisReport {
    fn new(id: ConditionId, worst: (f64, f64), range: (f64, f64), extracted: Constants, caveat: String) -> Self {
        let (margin, r) = worst;
        Self {
            condition_id: id,
            passed: margin > 0.0,
            worst_margin: margin,
            worst_r: r.clamp(range.0, range.1),
            extracted,
            grid_range: range,
            caveat,
        }
    }
}

/// Geometric sampling radii of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl CheckGrid {
    pub fn new(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && points >= 2) {
            return Err(Error::InvalidParameter(format!(
                "check grid needs 0 < r_min < r_max and >= 2 points, got [{r_min}, {r_max}] x {points}"
            )));
        }
        Ok(Self { r_min, r_max, points })
    }

    /// [1e-2, 1e3] with 2000 points.
    pub fn standard() -> Self {
        Self {
            r_min: CHECK_R_MIN,
            r_max: CHECK_R_MAX,
            points: CHECK_POINTS,
        }
    }

    /// [1, 1e3] with 2000 points.
    pub fn from_one() -> Self {
        Self {
            r_min: 1.0,
            ..Self::standard()
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        log_spaced(self.r_min, self.r_max, self.points)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    /// The last decade [r_max/10, r_max].
    pub fn last_decade(&self) -> (f64, f64) {
        ((self.r_max / 10.0).max(self.r_min), self.r_max)
    }

    pub fn refined(&self) -> Self {
        Self {
            points: 2 * self.points,
            ..self.clone()
        }
    }
}

/// (min margin, radius), NaN margins counting as failures.
fn worst_of(radii: &[f64], margin: impl Fn(f64) -> f64) -> (f64, f64) {
    radii.iter().fold((f64::INFINITY, radii[0]), |(m, at), &r| {
        let v = margin(r);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if v < m {
            (v, r)
        } else {
            (m, at)
        }
    })
}

fn sup_of(radii: &[f64], value: impl Fn(f64) -> f64) -> (f64, f64) {
    let (m, r) = worst_of(radii, |r| -value(r));
    (-m, r)
}

fn bounded_margin(bound: f64) -> f64 {
    if bound.is_finite() {
        1.0 / (1.0 + bound.abs())
    } else {
        0.0
    }
}

/// Sup over the grid of 1/φ + |sec_rad|; the grid must start at r ≥ 1.
pub fn check_local(profile: &WarpProfile, n: usize, grid: &CheckGrid) -> Result<HypothesisReport> {
    if grid.r_min < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "the local bound is stated on [1, inf); grid starts at {}",
            grid.r_min
        )));
    }
    profile.curvature(n, grid.r_min)?;
    let radii = grid.radii();
    let (m, at) = sup_of(&radii, |r| profile.inv_phi(r) + profile.ratios(r).d2.abs());
    Ok(HypothesisReport::new(
        ConditionId::SecBounded,
        (bounded_margin(m), at),
        grid.range(),
        Constants {
            m: Some(m),
            ..Default::default()
        },
        format!("sup taken on the grid; [{}, inf) is unchecked", grid.r_max),
    ))
}

/// Negative-curvature bound and power-law behaviour φ ~ A r^m.
pub fn check_poly_theorem(
    profile: &WarpProfile,
    n: usize,
    grid: &CheckGrid,
    fit_window: Option<(f64, f64)>,
) -> Result<(HypothesisReport, HypothesisReport)> {
    profile.curvature(n, grid.r_min)?;
    let radii = grid.radii();
    let nf = n as f64;
    let (delta0, at) = worst_of(&radii, |r| 1.0 / (2.0 * (nf - 1.0)) + r * r * profile.ratios(r).d2);
    let curv = HypothesisReport::new(
        ConditionId::NegCurvPoly,
        (delta0, at),
        grid.range(),
        Constants {
            delta0: Some(delta0),
            ..Default::default()
        },
        format!("checked on [{}, {}]", grid.r_min, grid.r_max),
    );

    let (lo, hi) = fit_window.unwrap_or_else(|| grid.last_decade());
    let window: Vec<f64> = radii.iter().copied().filter(|r| *r >= lo && *r <= hi).collect();
    let x: Vec<f64> = window.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = window.iter().map(|&r| profile.ln_phi(r)).collect();
    let fit = fit_line(&x, &y)?;
    let (m, a) = (fit.slope, fit.intercept.exp());
    let r_p1 = |r: f64| r * profile.ratios(r).d1;
    let drift = (r_p1(lo) - r_p1(hi)).abs();

    // o₃ constant: sup r^{j−m}|ε^{(j)}| with ε = φ − A r^m, relative to A
    let mut o3 = 0.0f64;
    for &r in &window {
        let p = profile.ratios(r);
        let ratios = [1.0, p.d1, p.d2, p.d3];
        let ln_phi = profile.ln_phi(r);
        let mut falling = 1.0;
        for (j, ratio) in ratios.iter().enumerate() {
            if j > 0 {
                falling *= m - (j as f64 - 1.0);
            }
            // r^{j−m}·φ^{(j)} = e^{ln φ − m ln r}·r^j·φ^{(j)}/φ
            let scaled = (ln_phi - m * r.ln()).exp() * r.powi(j as i32) * ratio;
            o3 = o3.max((scaled - a * falling).abs());
        }
    }
    let poly = HypothesisReport::new(
        ConditionId::PolyBehaviour,
        (0.01 - drift, hi),
        grid.range(),
        Constants {
            m: Some(m),
            a: Some(a),
            n_eff: Some(m * (nf - 1.0) + 1.0),
            c: Some(o3),
            ..Default::default()
        },
        format!(
            "m, A fitted on [{lo}, {hi}]; passes when r·phi'/phi drifts by < 0.01 across the window (drift {drift:.3e}); \
             C = sup r^(j-m)|eps^(j)| over the window, j = 0..3"
        ),
    );
    Ok((curv, poly))
}

fn check_c0(c0: f64) -> Result<()> {
    if !(c0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("c0 must be >= 0, got {c0}")));
    }
    Ok(())
}

/// Certificate for a condition required only for r ≥ R.
///
/// If the margin is positive on the whole grid, R is the first radius and
/// the worst margin is the grid minimum. Otherwise δ is half the margin at
/// the last radius and R the smallest radius beyond which the margin stays
/// ≥ δ; the reported margin is δ itself, which does not depend on where the
/// grid happens to sample the crossing. `None` when the margin is not
/// positive at the last radius.
fn tail_certificate(radii: &[f64], margin: impl Fn(f64) -> f64) -> Option<(f64, (f64, f64))> {
    let values: Vec<f64> = radii.iter().map(|&r| margin(r)).collect();
    let last = *values.last()?;
    if !(last > 0.0) {
        return None;
    }
    if values.iter().all(|v| *v > 0.0) {
        let worst = values
            .iter()
            .zip(radii)
            .fold((f64::INFINITY, radii[0]), |a, (v, r)| if *v < a.0 { (*v, *r) } else { a });
        return Some((radii[0], worst));
    }
    let delta = 0.5 * last;
    let mut start = radii.len();
    while start > 0 && values[start - 1] >= delta {
        start -= 1;
    }
    Some((radii[start], (delta, radii[start])))
}

/// The three conditions on g = τ''/τ − c₀: r²|g| bounded, 1/4 + r²g ≥ δ₀,
/// and 1/4 − r²(rg)' ≥ δ₀ beyond some R.
pub fn check_tau_conditions(
    profile: &WarpProfile,
    n: usize,
    c0: f64,
    grid: &CheckGrid,
) -> Result<[HypothesisReport; 3]> {
    check_c0(c0)?;
    profile.tau_sigma(n, grid.r_min)?;
    let radii = grid.radii();
    let g = |r: f64| profile.q_at(n, r) - c0;
    let (c, at_c) = sup_of(&radii, |r| r * r * g(r).abs());
    let h1 = HypothesisReport::new(
        ConditionId::TauShiftedH1,
        (bounded_margin(c), at_c),
        grid.range(),
        Constants {
            c: Some(c),
            c0: Some(c0),
            ..Default::default()
        },
        "C = sup r^2 |tau''/tau - c0| on the grid".into(),
    );
    let (d2, at2) = worst_of(&radii, |r| 0.25 + r * r * g(r));
    let h2 = HypothesisReport::new(
        ConditionId::TauShiftedH2,
        (d2, at2),
        grid.range(),
        Constants {
            delta0: Some(d2),
            c0: Some(c0),
            ..Default::default()
        },
        "delta0 reported separately from the third condition".into(),
    );
    let h3_margin = |r: f64| 0.25 - r * r * (g(r) + r * profile.dq_at(n, r));
    let h3 = match tail_certificate(&radii, h3_margin) {
        Some((big_r, worst)) => HypothesisReport::new(
            ConditionId::TauShiftedH3,
            worst,
            grid.range(),
            Constants {
                delta0: Some(worst.0),
                c0: Some(c0),
                r: Some(big_r),
                ..Default::default()
            },
            format!(
                "holds with the reported margin on [R, {}], R = {big_r}; derivative from analytic phi-derivatives",
                grid.r_max
            ),
        ),
        None => HypothesisReport::new(
            ConditionId::TauShiftedH3,
            worst_of(&radii[radii.len() - 1..], h3_margin),
            grid.range(),
            Constants {
                c0: Some(c0),
                ..Default::default()
            },
            "fails at the largest grid radius; no R found".into(),
        ),
    };
    Ok([h1, h2, h3])
}

/// Exponential behaviour φ ~ A e^{αr} and the curvature bound
/// τ''/τ ≥ α²(n−1)²/4 − (1/4 − δ₀)/r².
pub fn check_exp_theorem(
    profile: &WarpProfile,
    n: usize,
    grid: &CheckGrid,
    fit_window: Option<(f64, f64)>,
) -> Result<(HypothesisReport, HypothesisReport)> {
    profile.tau_sigma(n, grid.r_min)?;
    let radii = grid.radii();
    let (lo, hi) = fit_window.unwrap_or_else(|| grid.last_decade());
    let window: Vec<f64> = radii.iter().copied().filter(|r| *r >= lo && *r <= hi).collect();
    let y: Vec<f64> = window.iter().map(|&r| profile.ln_phi(r)).collect();
    if let Some(k) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ln phi is not finite at r = {}; shrink the check grid or the fit window",
            window[k]
        )));
    }
    let fit = fit_line(&window, &y)?;
    let (alpha, a) = (fit.slope, fit.intercept.exp());
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponential rate estimate is not positive (alpha = {alpha})"
        )));
    }
    let nf = n as f64;
    let c0 = alpha * alpha * (nf - 1.0) * (nf - 1.0) / 4.0;
    let (delta0, at) = worst_of(&radii, |r| 0.25 + r * r * (profile.q_at(n, r) - c0));
    let curv = HypothesisReport::new(
        ConditionId::ExpCurv,
        (delta0, at),
        grid.range(),
        Constants {
            alpha: Some(alpha),
            delta0: Some(delta0),
            c0: Some(c0),
            ..Default::default()
        },
        format!("c0 = alpha^2 (n-1)^2 / 4 with alpha fitted on [{lo}, {hi}]"),
    );
    let drift = (profile.ratios(lo).d1 - profile.ratios(hi).d1).abs() / alpha;
    let behaviour = HypothesisReport::new(
        ConditionId::ExpBehaviour,
        (0.005 - drift, hi),
        grid.range(),
        Constants {
            alpha: Some(alpha),
            a: Some(a),
            ..Default::default()
        },
        format!(
            "ln phi fitted linearly on [{lo}, {hi}]; passes when phi'/phi drifts by < 0.5% of alpha (drift {drift:.3e})"
        ),
    );
    Ok((curv, behaviour))
}

/// A radial potential V(r) with optional analytic derivative.
pub trait RadialPotential: Sync {
    fn value(&self, r: f64) -> f64;
    /// V'(r), if known.
    fn derivative(&self, r: f64) -> Option<f64>;
    fn label(&self) -> String;
}

/// Potentials used across the crate's examples and tests.
#[derive(Debug, Clone)]
pub enum BuiltinPotential {
    Zero,
    Constant(f64),
    /// β/⟨r⟩² = β/(1 + r²).
    InverseBracket { beta: f64 },
    /// V − c₀ of a warped manifold.
    Manifold { profile: WarpProfile, n: usize, c0: f64 },
    /// Values only, no derivative.
    Sampled { label: String, f: fn(f64) -> f64 },
}

impl RadialPotential for BuiltinPotential {
    fn value(&self, r: f64) -> f64 {
        match self {
            BuiltinPotential::Zero => 0.0,
            BuiltinPotential::Constant(c) => *c,
            BuiltinPotential::InverseBracket { beta } => beta / (1.0 + r * r),
            BuiltinPotential::Manifold { profile, n, c0 } => profile.v_at(*n, r) - c0,
            BuiltinPotential::Sampled { f, .. } => f(r),
        }
    }

    fn derivative(&self, r: f64) -> Option<f64> {
        match self {
            BuiltinPotential::Zero | BuiltinPotential::Constant(_) => Some(0.0),
            BuiltinPotential::InverseBracket { beta } => Some(-2.0 * beta * r / (1.0 + r * r).powi(2)),
            BuiltinPotential::Manifold { profile, n, .. } => Some(profile.dv_at(*n, r)),
            BuiltinPotential::Sampled { .. } => None,
        }
    }

    fn label(&self) -> String {
        match self {
            BuiltinPotential::Zero => "zero".into(),
            BuiltinPotential::Constant(c) => format!("constant({c})"),
            BuiltinPotential::InverseBracket { beta } => format!("{beta}/<r>^2"),
            BuiltinPotential::Manifold { profile, n, c0 } => {
                format!("V-c0 of {} (n={n}, c0={c0})", profile.label())
            }
            BuiltinPotential::Sampled { label, .. } => label.clone(),
        }
    }
}

/// The three potential conditions checked together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialReports {
    pub h1: HypothesisReport,
    pub h2: HypothesisReport,
    pub h3: HypothesisReport,
}

impl PotentialReports {
    /// All three hold with the given δ₀.
    pub fn holds_with(&self, delta0: f64) -> bool {
        self.h1.passed && self.h2.worst_margin >= delta0 && self.h3.worst_margin >= delta0 && self.h3.passed
    }

    /// Largest δ₀ both inequality conditions support.
    pub fn delta0(&self) -> f64 {
        self.h2.worst_margin.min(self.h3.worst_margin)
    }

    pub fn all_passed(&self) -> bool {
        self.h1.passed && self.h2.passed && self.h3.passed
    }

    pub fn into_vec(self) -> Vec<HypothesisReport> {
        vec![self.h1, self.h2, self.h3]
    }
}

/// |V| ≤ C/⟨r⟩², (n/2−1)² + r²V ≥ δ₀, and (n/2−1)² − r²∂_r(rV) ≥ δ₀ for r ≥ R.
pub fn check_potential_h(v: &dyn RadialPotential, n: usize, grid: &CheckGrid) -> PotentialReports {
    let radii = grid.radii();
    let base = (n as f64 / 2.0 - 1.0).powi(2);
    let (c, at_c) = sup_of(&radii, |r| (1.0 + r * r) * v.value(r).abs());
    let h1 = HypothesisReport::new(
        ConditionId::PotH1,
        (bounded_margin(c), at_c),
        grid.range(),
        Constants {
            c: Some(c),
            ..Default::default()
        },
        format!("C = sup <r>^2 |V| for {}", v.label()),
    );
    let (d2, at2) = worst_of(&radii, |r| base + r * r * v.value(r));
    let h2 = HypothesisReport::new(
        ConditionId::PotH2,
        (d2, at2),
        grid.range(),
        Constants {
            delta0: Some(d2),
            ..Default::default()
        },
        "delta0 reported separately from the third condition".into(),
    );
    let h3 = if v.derivative(radii[0]).is_none() {
        HypothesisReport::new(
            ConditionId::PotH3,
            (f64::NAN, radii[0]),
            grid.range(),
            Constants::default(),
            "unverifiable: potential has no derivative data".into(),
        )
    } else {
        let margin = |r: f64| base - r * r * (v.value(r) + r * v.derivative(r).unwrap_or(f64::NAN));
        match tail_certificate(&radii, margin) {
            Some((first, worst)) => {
                let big_r = if first == radii[0] { 0.0 } else { first };
                HypothesisReport::new(
                    ConditionId::PotH3,
                    worst,
                    grid.range(),
                    Constants {
                        delta0: Some(worst.0),
                        r: Some(big_r),
                        ..Default::default()
                    },
                    format!("holds on [max(R, {}), {}]", grid.r_min, grid.r_max),
                )
            }
            None => HypothesisReport::new(
                ConditionId::PotH3,
                worst_of(&radii[radii.len() - 1..], margin),
                grid.range(),
                Constants::default(),
                "fails at the largest grid radius; no R found".into(),
            ),
        }
    };
    // a NaN margin must not read as passed
    let h3 = HypothesisReport {
        passed: h3.worst_margin > 0.0,
        ..h3
    };
    PotentialReports { h1, h2, h3 }
}

/// Quintic cutoff 6t⁵ − 15t⁴ + 10t³ on [R, 2R]: value and r-derivative.
pub fn chi(r: f64, big_r: f64) -> (f64, f64) {
    let t = (r - big_r) / big_r;
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let value = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    let slope = 30.0 * t * t * (1.0 - t) * (1.0 - t) / big_r;
    (value, slope)
}

/// W_A = (1 − χ)A/r² + χV.
pub struct WaPotential<'a> {
    pub v: &'a dyn RadialPotential,
    pub a: f64,
    pub big_r: f64,
}

impl RadialPotential for WaPotential<'_> {
    fn value(&self, r: f64) -> f64 {
        let (c, _) = chi(r, self.big_r);
        (1.0 - c) * self.a / (r * r) + c * self.v.value(r)
    }

    fn derivative(&self, r: f64) -> Option<f64> {
        let (c, dc) = chi(r, self.big_r);
        let dv = if c > 0.0 { self.v.derivative(r)? } else { 0.0 };
        Some(
            -dc * self.a / (r * r) - 2.0 * (1.0 - c) * self.a / (r * r * r)
                + dc * self.v.value(r)
                + c * dv,
        )
    }

    fn label(&self) -> String {
        format!("W_A(A={}, R={}) of {}", self.a, self.big_r, self.v.label())
    }
}

/// Outcome of the minimal-A search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaSearch {
    pub a: f64,
    /// sup r²V on the grid.
    pub sup_r2v: f64,
    pub delta0: f64,
    pub reports: PotentialReports,
}

/// Candidate values of A: 0 and 2^{j/8} for j = −80..=80.
pub fn a_candidates() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((-80..=80).map(|j| 2f64.powf(j as f64 / 8.0)))
        .collect()
}

/// Smallest candidate A with A ≥ sup r²V and (n/2−1)² + A ≥ δ₀ for which
/// W_A satisfies the three potential conditions with δ₀ on the grid.
pub fn build_w_a(
    v: &dyn RadialPotential,
    n: usize,
    big_r: f64,
    delta0: f64,
    grid: &CheckGrid,
) -> Result<WaSearch> {
    if !(big_r > 0.0) {
        return Err(Error::InvalidParameter(format!("R must be > 0, got {big_r}")));
    }
    let radii = grid.radii();
    let (sup_r2v, _) = sup_of(&radii, |r| r * r * v.value(r));
    let base = (n as f64 / 2.0 - 1.0).powi(2);
    for a in a_candidates() {
        if a < sup_r2v || base + a < delta0 {
            continue;
        }
        let w = WaPotential { v, a, big_r };
        let reports = check_potential_h(&w, n, grid);
        if reports.holds_with(delta0.min(reports.delta0())) && reports.all_passed() {
            return Ok(WaSearch {
                a,
                sup_r2v,
                delta0,
                reports,
            });
        }
    }
    Err(Error::InvalidParameter(format!(
        "no A <= 1024 makes W_A satisfy the conditions for {}",
        v.label()
    )))
}

/// ∫₀^∞ σ^{2d/(d−n)} φ^{n−1} dr < ∞, judged by the log-log tail slope of
/// the integrand over the last decade below r_max.
pub fn check_integrability_i1(profile: &WarpProfile, n: usize, d: f64, r_max: f64) -> Result<HypothesisReport> {
    let nf = n as f64;
    if !(d > nf) {
        return Err(Error::InvalidParameter(format!("need d > n, got d = {d}, n = {n}")));
    }
    profile.tau_sigma(n, r_max)?;
    let p = 2.0 * d / (d - nf);
    let ln_f = |r: f64| p * profile.ln_sigma(n, r) + (nf - 1.0) * profile.ln_phi(r);
    let integral = crate::numerics::gauss_legendre(|r| if r > 0.0 { ln_f(r).exp() } else { 0.0 }, 0.0, r_max, 4000);
    let tail = log_spaced(r_max / 10.0, r_max, 200);
    let x: Vec<f64> = tail.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|&r| ln_f(r)).collect();
    let exponent = fit_line(&x, &y)?.slope;
    Ok(HypothesisReport::new(
        ConditionId::IntegrabilityI1,
        (-1.0 - exponent, r_max),
        (0.0, r_max),
        Constants {
            c: Some(integral),
            ..Default::default()
        },
        format!(
            "integral over [0, {r_max}] = {integral:.6e}; tail exponent {exponent:.4} from a log-log fit on [{}, {r_max}]",
            r_max / 10.0
        ),
    ))
}
