//! Lebesgue norms on M and Rⁿ, space-time Strichartz functionals and the
//! diagnostics built on them.
//!
//! Every norm is computed from ln|u| assembled out of the stored
//! representation and the log-weights, so a field whose u-values would
//! underflow or overflow (exponential profiles, large r) is still measured
//! correctly. Quadrature is composite trapezoid in r (with the vanishing
//! value at r = 0 as first node) and in t.

use std::ops::ControlFlow;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::AdmissiblePair;
use crate::grid::Grid;
use crate::manifold::WarpProfile;
use crate::numerics::{fit_line, sphere_area, LineFit};
use crate::solver::{CnStepper, LinearProblem, RadialField, Representation, TimeGrid, Trajectory};

/// Minimum snapshot density of a space-time norm.
pub const MIN_SNAPSHOTS_PER_UNIT_TIME: f64 = 32.0;
/// Integrand level, relative to its peak, at which adaptive runs stop.
pub const DECAY_STOP: f64 = 1e-3;
/// Version tag of [`DataFamily::standard`].
pub const FAMILY_VERSION: u32 = 1;

/// ‖x‖ from per-node log-integrands L_j, trapezoid on [0, r_max] with a
/// zero value at the origin, returned as ln ∫.
fn ln_trapezoid_from_origin(h: f64, ln_f: &[f64]) -> f64 {
    let peak = ln_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let last = ln_f.len() - 1;
    let sum: f64 = ln_f
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let w = if j == last { 0.5 } else { 1.0 };
            w * (l - peak).exp()
        })
        .sum();
    peak + (h * sum).ln()
}

fn ln_abs(z: Complex64) -> f64 {
    let a = z.norm();
    if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        a.ln()
    }
}

/// (ω ∫ |u·(φ/r)^{weight_exp}|^q φ^{n−1} dr)^{1/q}; q = ∞ gives the weighted
/// sup over nodes. The field may be stored in any representation.
pub fn lq_on_m(field: &RadialField, profile: &WarpProfile, q: f64, weight_exp: f64) -> f64 {
    let n = field.n;
    let grid = field.grid;
    let to_u = |j: usize, r: f64| {
        let lnphi = profile.ln_phi(r);
        let ln_u = ln_abs(field.values[j]) + field.representation.ln_weight_to_w(profile, n, r)
            - profile.ln_tau(n, r);
        (ln_u + weight_exp * (lnphi - r.ln()), lnphi)
    };
    if q.is_infinite() {
        return (0..grid.len())
            .map(|j| to_u(j, grid.node(j)).0.exp())
            .fold(0.0, f64::max);
    }
    let ln_f: Vec<f64> = (0..grid.len())
        .map(|j| {
            let (ln_wu, lnphi) = to_u(j, grid.node(j));
            q * ln_wu + (n as f64 - 1.0) * lnphi
        })
        .collect();
    ((sphere_area(n).ln() + ln_trapezoid_from_origin(grid.spacing(), &ln_f)) / q).exp()
}

/// (ω ∫ |v|^q r^{n−1} dr)^{1/q} for v = u/σ, the flat radial L^q(Rⁿ) norm.
pub fn lq_on_rn(field: &RadialField, profile: &WarpProfile, q: f64) -> f64 {
    let n = field.n;
    let k = (n as f64 - 1.0) / 2.0;
    let grid = field.grid;
    let ln_v = |j: usize, r: f64| {
        ln_abs(field.values[j]) + field.representation.ln_weight_to_w(profile, n, r) - k * r.ln()
    };
    if q.is_infinite() {
        return (0..grid.len())
            .map(|j| ln_v(j, grid.node(j)).exp())
            .fold(0.0, f64::max);
    }
    let ln_f: Vec<f64> = (0..grid.len())
        .map(|j| {
            let r = grid.node(j);
            q * ln_v(j, r) + (n as f64 - 1.0) * r.ln()
        })
        .collect();
    ((sphere_area(n).ln() + ln_trapezoid_from_origin(grid.spacing(), &ln_f)) / q).exp()
}

/// ‖u‖_{L²(M)}.
pub fn l2_on_m(field: &RadialField, profile: &WarpProfile) -> f64 {
    lq_on_m(field, profile, 2.0, 0.0)
}

/// ‖u‖_{L²(M)} + ‖∂_r u‖_{L²(M)}, with ∂_r u = (w' − τ'/τ·w)/τ and w' by
/// centered differences against the Dirichlet ghosts.
pub fn h1_on_m(field: &RadialField, profile: &WarpProfile) -> f64 {
    let w = crate::solver::transform(field, Representation::WHalfline, profile);
    let n = field.n;
    let k = (n as f64 - 1.0) / 2.0;
    let h = field.grid.spacing();
    let len = w.values.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut grad = Vec::with_capacity(len);
    for j in 0..len {
        let left = if j > 0 { w.values[j - 1] } else { zero };
        let right = if j + 1 < len { w.values[j + 1] } else { zero };
        let r = field.grid.node(j);
        let dw = (right - left) / (2.0 * h);
        grad.push(dw - k * profile.ratios(r).d1 * w.values[j]);
    }
    let omega = sphere_area(n);
    let l2 = |vals: &[Complex64]| {
        let last = vals.len() - 1;
        let s: f64 = vals
            .iter()
            .enumerate()
            .map(|(j, z)| if j == last { 0.5 } else { 1.0 } * z.norm_sqr())
            .sum();
        (omega * h * s).sqrt()
    };
    l2(&w.values) + l2(&grad)
}

/// One space-time Strichartz evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub pair: AdmissiblePair,
    pub weighted: bool,
    /// (n−1)/2·(1−2/q) when weighted, else 0.
    pub weight_exponent: f64,
    /// Norm over the sampled interval [0, t_final].
    pub value: f64,
    /// value / ‖u₀‖_{L²(M)}.
    pub quotient: f64,
    /// Value including a fitted power-law tail beyond t_final, if the tail
    /// is integrable.
    pub tail_value: Option<f64>,
    pub t_final: f64,
}

impl NormReport {
    pub fn tail_quotient(&self) -> Option<f64> {
        let mass = if self.value > 0.0 { self.value / self.quotient } else { 0.0 };
        self.tail_value
            .map(|v| if mass > 0.0 { v / mass } else { 0.0 })
    }
}

/// Streaming accumulator of ‖·‖_{L^p_t L^q_x(M)} over w-snapshots.
#[derive(Debug, Clone)]
pub struct SpacetimeAccumulator {
    pair: AdmissiblePair,
    weighted: bool,
    weight_exp: f64,
    h: f64,
    ln_omega: f64,
    // ln of (u·weight)/w at each node
    ln_to_weighted_u: Vec<f64>,
    ln_volume: Vec<f64>,
    times: Vec<f64>,
    // ‖u(t)‖_q^p (or ‖u(t)‖_q when p = ∞)
    integrand: Vec<f64>,
}

impl SpacetimeAccumulator {
    pub fn new(profile: &WarpProfile, n: usize, grid: Grid, pair: AdmissiblePair, weighted: bool) -> Self {
        let weight_exp = if weighted { pair.weight_exponent(n) } else { 0.0 };
        let nodes = grid.nodes();
        let ln_phi: Vec<f64> = nodes.iter().map(|&r| profile.ln_phi(r)).collect();
        let ln_to_weighted_u = nodes
            .iter()
            .zip(&ln_phi)
            .map(|(&r, lp)| -profile.ln_tau(n, r) + weight_exp * (lp - r.ln()))
            .collect();
        let ln_volume = ln_phi.iter().map(|lp| (n as f64 - 1.0) * lp).collect();
        Self {
            pair,
            weighted,
            weight_exp,
            h: grid.spacing(),
            ln_omega: sphere_area(n).ln(),
            ln_to_weighted_u,
            ln_volume,
            times: Vec::new(),
            integrand: Vec::new(),
        }
    }

    /// Spatial norm ‖u(t)·weight‖_{L^q(M)} of a w-snapshot.
    pub fn spatial_norm(&self, w: &[Complex64]) -> f64 {
        let q = self.pair.q;
        if q.is_infinite() {
            return w
                .iter()
                .zip(&self.ln_to_weighted_u)
                .map(|(z, l)| (ln_abs(*z) + l).exp())
                .fold(0.0, f64::max);
        }
        let ln_f: Vec<f64> = w
            .iter()
            .zip(&self.ln_to_weighted_u)
            .zip(&self.ln_volume)
            .map(|((z, l), v)| q * (ln_abs(*z) + l) + v)
            .collect();
        ((self.ln_omega + ln_trapezoid_from_origin(self.h, &ln_f)) / q).exp()
    }

    /// Records a snapshot and returns its time integrand.
    pub fn push(&mut self, t: f64, w: &[Complex64]) -> f64 {
        let s = self.spatial_norm(w);
        let g = if self.pair.p.is_infinite() { s } else { s.powf(self.pair.p) };
        self.times.push(t);
        self.integrand.push(g);
        g
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn integrand(&self) -> &[f64] {
        &self.integrand
    }

    pub fn peak(&self) -> f64 {
        self.integrand.iter().copied().fold(0.0, f64::max)
    }

    /// ∫₀^T g dt (or max g when p = ∞).
    pub fn raw_integral(&self) -> f64 {
        if self.pair.p.is_infinite() {
            self.peak()
        } else {
            crate::numerics::trapezoid(&self.times, &self.integrand)
        }
    }

    /// Power-law fit ln g ≈ s·ln t + c on the last half of the samples.
    pub fn tail_fit(&self) -> Option<LineFit> {
        let t_end = *self.times.last()?;
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.integrand)
            .filter(|(t, g)| **t >= 0.5 * t_end && **t > 0.0 && **g > 0.0)
            .map(|(t, g)| (t.ln(), g.ln()))
            .unzip();
        fit_line(&x, &y).ok()
    }

    pub fn finish(&self, initial_l2: f64) -> NormReport {
        let p = self.pair.p;
        let raw = self.raw_integral();
        let t_final = self.times.last().copied().unwrap_or(0.0);
        let (value, tail_value) = if p.is_infinite() {
            (raw, Some(raw))
        } else {
            let tail = self.tail_fit().and_then(|fit| {
                (fit.slope < -1.0 && t_final > 0.0)
                    .then(|| fit.intercept.exp() * t_final.powf(fit.slope + 1.0) / (-fit.slope - 1.0))
            });
            (raw.powf(1.0 / p), tail.map(|t| (raw + t).powf(1.0 / p)))
        };
        NormReport {
            pair: self.pair,
            weighted: self.weighted,
            weight_exponent: self.weight_exp,
            value,
            quotient: if initial_l2 > 0.0 { value / initial_l2 } else { 0.0 },
            tail_value,
            t_final,
        }
    }
}

/// ‖u·(φ/r)^{(n−1)/2·(1−2/q)}‖_{L^p([0,T], L^q(M))} over a trajectory, the
/// weight dropped when `weighted` is false. The first snapshot is taken as
/// u₀ for the quotient.
pub fn spacetime_norm(
    traj: &Trajectory,
    profile: &WarpProfile,
    pair: AdmissiblePair,
    weighted: bool,
) -> Result<NormReport> {
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    if traj.times.len() > 1 {
        let span = traj.times[traj.times.len() - 1] - traj.times[0];
        let density = (traj.times.len() - 1) as f64 / span;
        if density < MIN_SNAPSHOTS_PER_UNIT_TIME {
            return Err(Error::TooFewSnapshots {
                found: density,
                required: MIN_SNAPSHOTS_PER_UNIT_TIME,
            });
        }
    }
    let mut acc = SpacetimeAccumulator::new(profile, first.n, first.grid, pair, weighted);
    for (t, s) in traj.times.iter().zip(&traj.snapshots) {
        let w = crate::solver::transform(s, Representation::WHalfline, profile);
        acc.push(*t, &w.values);
    }
    Ok(acc.finish(l2_on_m(first, profile)))
}

/// Shape of the outgoing phase b·(r/width)^power of a Gaussian datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// Momentum boost b/width, uniform in r.
    Linear,
    /// Chirp; momentum 2b·r/width² grows with r.
    Quadratic,
}

impl Modulation {
    pub fn power(self) -> i32 {
        match self {
            Modulation::Linear => 1,
            Modulation::Quadratic => 2,
        }
    }
}

/// Gaussian initial data exp(−r²/width² + i·b·(r/width)^power) on M.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataFamily {
    pub widths: Vec<f64>,
    /// Modulation strengths b.
    pub chirps: Vec<f64>,
    pub modulation: Modulation,
}

impl DataFamily {
    /// Widths 2^{−3}, …, 2³ and linear modulations b = 0, 1, 2: 21 data.
    pub fn standard() -> Self {
        Self {
            widths: (-3..=3).map(|k| 2f64.powi(k)).collect(),
            chirps: vec![0.0, 1.0, 2.0],
            modulation: Modulation::Linear,
        }
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn members(&self) -> Vec<(f64, f64)> {
        self.widths
            .iter()
            .flat_map(|&w| self.chirps.iter().map(move |&b| (w, b)))
            .collect()
    }
}

/// Resolution and stopping parameters of an adaptive quotient run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveSettings {
    /// h·k_eff, where k_eff is the rms wavenumber of the datum.
    pub h_times_k: f64,
    /// dt·k_eff².
    pub dt_times_k2: f64,
    /// Initial r_max beyond the datum support, in units of 1/k_eff.
    pub reach: f64,
    pub max_doublings: usize,
    /// Hard limit on t·k_eff².
    pub t_cap: f64,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        Self {
            h_times_k: 0.15,
            dt_times_k2: 0.1,
            reach: 150.0,
            max_doublings: 6,
            t_cap: 2e4,
        }
    }
}

/// Outcome of one datum of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientRun {
    pub width: f64,
    pub chirp: f64,
    pub report: NormReport,
    pub r_max: f64,
    pub num_points: usize,
    pub dt: f64,
    pub attempts: usize,
    pub boundary_flagged: bool,
    /// True when the integrand fell below the stop level before t_cap.
    pub decayed: bool,
}

struct Probe {
    support: f64,
    k_eff: f64,
    // mean and mean deviation of Q under |w₀|²
    q_mean: f64,
    q_spread: f64,
}

/// Support radius, rms wavenumber and potential statistics of the
/// w-representation of a Gaussian datum, from analytic derivatives.
fn probe_datum(profile: &WarpProfile, n: usize, width: f64, chirp: f64, modulation: Modulation) -> Probe {
    let k = (n as f64 - 1.0) / 2.0;
    let ln_w2 = |r: f64| 2.0 * profile.ln_tau(n, r) - 2.0 * r * r / (width * width);
    // the log-magnitude is concave-ish past its peak; grow until it has
    // dropped by ln(1e16) below the running max
    let mut r_hi = 4.0 * width;
    loop {
        let probe: Vec<f64> = (1..=400).map(|j| r_hi * j as f64 / 400.0).collect();
        let peak = probe.iter().map(|&r| ln_w2(r)).fold(f64::NEG_INFINITY, f64::max);
        if ln_w2(r_hi) < peak - 16.0 * std::f64::consts::LN_10 * 2.0 {
            break;
        }
        r_hi *= 2.0;
    }
    let count = 8000;
    let h = r_hi / count as f64;
    let nodes: Vec<f64> = (1..=count).map(|j| j as f64 * h).collect();
    let logs: Vec<f64> = nodes.iter().map(|&r| ln_w2(r)).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = peak - 2.0 * 8.0 * std::f64::consts::LN_10;
    let support = nodes
        .iter()
        .zip(&logs)
        .filter(|(_, l)| **l > cut)
        .map(|(r, _)| *r)
        .fold(0.0, f64::max);
    let (mut num, mut den, mut qsum) = (0.0, 0.0, 0.0);
    let mut q_at = Vec::with_capacity(nodes.len());
    for (&r, &l) in nodes.iter().zip(&logs) {
        let m = (l - peak).exp();
        let q = profile.q_at(n, r);
        q_at.push(q);
        qsum += m * q;
        let slope = Complex64::new(
            k * profile.ratios(r).d1 - 2.0 * r / (width * width),
            match modulation {
                Modulation::Linear => chirp / width,
                Modulation::Quadratic => 2.0 * chirp * r / (width * width),
            },
        );
        num += m * slope.norm_sqr();
        den += m;
    }
    let q_mean = qsum / den;
    let q_spread = nodes
        .iter()
        .zip(&logs)
        .zip(&q_at)
        .map(|((_, l), q)| (l - peak).exp() * (q - q_mean).abs())
        .sum::<f64>()
        / den;
    Probe {
        support,
        k_eff: (num / den).sqrt(),
        q_mean,
        q_spread,
    }
}

/// Weighted or unweighted Strichartz quotient of one Gaussian datum, with
/// an adaptive grid, adaptive horizon and domain doubling on boundary
/// contamination.
pub fn quotient_for_datum(
    profile: &WarpProfile,
    n: usize,
    pair: AdmissiblePair,
    weighted: bool,
    width: f64,
    chirp: f64,
    modulation: Modulation,
    settings: AdaptiveSettings,
) -> Result<QuotientRun> {
    let probe = probe_datum(profile, n, width, chirp, modulation);
    let (support, k_eff) = (probe.support, probe.k_eff);
    let h = settings.h_times_k / k_eff;
    // one snapshot per step; the time unit of the datum is 1/(k_eff² + ΔQ)
    // once the mean of Q is removed as a phase
    let dt = settings.dt_times_k2 / (k_eff * k_eff + probe.q_spread);
    let t_cap = settings.t_cap / (k_eff * k_eff);
    let steps = (t_cap / dt).ceil() as usize;
    let times = TimeGrid {
        snapshot_times: (0..=steps).map(|j| j as f64 * dt).collect(),
        dt_max: dt * (1.0 + 1e-12),
    };
    let mut r_max = support + settings.reach / k_eff;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let points = (r_max / h).ceil() as usize;
        let grid = Grid::new(points as f64 * h, points)?;
        let u0 = RadialField::modulated_gaussian(
            grid,
            n,
            profile,
            width,
            chirp,
            modulation.power(),
            Representation::WHalfline,
        );
        let initial = l2_on_m(&u0, profile);
        let mut acc = SpacetimeAccumulator::new(profile, n, grid, pair, weighted);
        let tail_start = (0.9 * points as f64).floor() as usize;
        let mut flagged = false;
        let mut decayed = false;
        let problem = LinearProblem::new(profile, n, grid).with_shift(probe.q_mean);
        problem.run(&u0, &times, |t, w| {
            let total: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            let tail: f64 = w[tail_start..].iter().map(|z| z.norm_sqr()).sum();
            if total > 0.0 && tail / total > crate::solver::BOUNDARY_FLAG {
                flagged = true;
                return ControlFlow::Break(());
            }
            let g = acc.push(t, w);
            if t > 0.0 && g < DECAY_STOP * acc.peak() {
                decayed = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        })?;
        if !flagged || attempts > settings.max_doublings {
            return Ok(QuotientRun {
                width,
                chirp,
                report: acc.finish(initial),
                r_max: grid.r_max(),
                num_points: points,
                dt,
                attempts,
                boundary_flagged: flagged,
                decayed,
            });
        }
        r_max *= 2.0;
    }
}

/// Sweep result over a data family.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientSweep {
    pub runs: Vec<QuotientRun>,
    pub max: f64,
    pub argmax: (f64, f64),
    pub min: f64,
    /// (width, chirp) of runs excluded for boundary contamination.
    pub excluded: Vec<(f64, f64)>,
    pub family_version: u32,
}

impl QuotientSweep {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

/// Runs every datum of `family` in parallel and collects quotients.
pub fn strichartz_quotient_sweep(
    profile: &WarpProfile,
    n: usize,
    pair: AdmissiblePair,
    weighted: bool,
    family: &DataFamily,
    settings: AdaptiveSettings,
) -> Result<QuotientSweep> {
    let runs: Vec<QuotientRun> = family
        .members()
        .par_iter()
        .map(|&(w, b)| quotient_for_datum(profile, n, pair, weighted, w, b, family.modulation, settings))
        .collect::<Result<_>>()?;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut argmax = (f64::NAN, f64::NAN);
    let mut excluded = Vec::new();
    for run in &runs {
        if run.boundary_flagged {
            excluded.push((run.width, run.chirp));
            continue;
        }
        let q = run.report.quotient;
        if q > max {
            max = q;
            argmax = (run.width, run.chirp);
        }
        min = min.min(q);
    }
    Ok(QuotientSweep {
        runs,
        max,
        argmax,
        min,
        excluded,
        family_version: FAMILY_VERSION,
    })
}

/// Least-squares fit of ln sup|·| against ln t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub points: usize,
}

/// Decay exponent of sup|field| over `window`, in the trajectory's own
/// representation. Rejects windows where the sup changes by under 5%.
pub fn decay_fit(traj: &Trajectory, window: (f64, f64)) -> Result<DecayFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = traj
        .times
        .iter()
        .zip(&traj.snapshots)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1 && **t > 0.0)
        .map(|(t, s)| (t.ln(), s.sup_norm().ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::FitRejected(format!(
            "only {} snapshots in window {window:?}",
            x.len()
        )));
    }
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(hi - lo >= 1.05f64.ln()) {
        return Err(Error::FitRejected(format!(
            "sup norm varies by less than 5% over {window:?}; dispersion has not set in"
        )));
    }
    let fit = fit_line(&x, &y)?;
    Ok(DecayFit {
        slope: fit.slope,
        intercept: fit.intercept,
        rms: fit.rms,
        points: x.len(),
    })
}

/// ‖u(t) − e^{i(t−T)Δ_M}u(T)‖_{H¹(M)} on the trajectory times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    pub residual: Vec<f64>,
    pub boundary_flagged: bool,
}

/// Distance in H¹(M) between a (nonlinear) trajectory and the free
/// evolution matching it at the final sampled time. The free state is
/// pulled back with the same Crank–Nicolson substeps run in reverse.
pub fn scattering_residual(traj: &Trajectory, profile: &WarpProfile) -> Result<ResidualSeries> {
    let last = traj
        .snapshots
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let grid = last.grid;
    let n = last.n;
    let op = LinearProblem::new(profile, n, grid).operator()?;
    let mut free = crate::solver::transform(last, Representation::WHalfline, profile).values;
    let count = traj.times.len();
    let mut residual = vec![0.0; count];
    let mut scratch = Vec::with_capacity(free.len());
    let mut steppers: Vec<(u64, CnStepper)> = Vec::new();
    for k in (0..count).rev() {
        if k + 1 < count {
            let span = traj.times[k + 1] - traj.times[k];
            let steps = if traj.step_dt > 0.0 {
                (span / traj.step_dt - 1e-9).ceil().max(1.0) as usize
            } else {
                1
            };
            let dt = -span / steps as f64;
            let idx = match steppers.iter().position(|(b, _)| *b == dt.to_bits()) {
                Some(i) => i,
                None => {
                    steppers.push((dt.to_bits(), CnStepper::new(&op, dt)?));
                    steppers.len() - 1
                }
            };
            for _ in 0..steps {
                steppers[idx].1.step(&mut free, &mut scratch, None);
            }
        }
        let u = crate::solver::transform(&traj.snapshots[k], Representation::WHalfline, profile);
        let diff: Vec<Complex64> = u.values.iter().zip(&free).map(|(a, b)| a - b).collect();
        let field = RadialField::new(grid, n, Representation::WHalfline, diff);
        residual[k] = h1_on_m(&field, profile);
    }
    Ok(ResidualSeries {
        times: traj.times.clone(),
        residual,
        boundary_flagged: traj.boundary_flagged(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_linear;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn euclidean_l2_of_gaussian() {
        // ∫ e^{−2r²} 4πr² dr = (π/2)^{3/2}
        let grid = Grid::new(8.0, 4000).unwrap();
        let flat = WarpProfile::euclidean();
        let u = RadialField::gaussian(grid, 3, &flat, 1.0, 0.0, Representation::UOnM);
        let want = (std::f64::consts::FRAC_PI_2).powf(0.75);
        assert!(rel(l2_on_m(&u, &flat), want) < 1e-6);
    }

    #[test]
    fn weight_is_trivial_on_euclidean() {
        let grid = Grid::new(6.0, 300).unwrap();
        let flat = WarpProfile::euclidean();
        let u = RadialField::gaussian(grid, 3, &flat, 1.3, 0.7, Representation::UOnM);
        for q in [2.0, 3.0, 6.0, f64::INFINITY] {
            let a = lq_on_m(&u, &flat, q, 0.0);
            let b = lq_on_m(&u, &flat, q, 0.6);
            assert!(rel(a, b) < 1e-14);
        }
    }

    #[test]
    fn weighted_sup_on_hyperbolic() {
        let grid = Grid::new(5.0, 50).unwrap();
        let hyp = WarpProfile::hyperbolic(1.0).unwrap();
        let u = RadialField::gaussian(grid, 3, &hyp, 1.0, 0.0, Representation::UOnM);
        let got = lq_on_m(&u, &hyp, f64::INFINITY, 1.0);
        let want = grid
            .nodes()
            .iter()
            .map(|&r| (-r * r).exp() * r.sinh() / r)
            .fold(0.0, f64::max);
        assert!(rel(got, want) < 1e-13);
    }

    #[test]
    fn zero_trajectory_has_zero_norm() {
        let grid = Grid::new(5.0, 50).unwrap();
        let flat = WarpProfile::euclidean();
        let u0 = RadialField::zeros(grid, 3, Representation::UOnM);
        let times = TimeGrid::uniform(1.0, 40, &grid);
        let traj = solve_linear(&flat, 3, &u0, None, &times, None, Representation::UOnM).unwrap();
        let pair = AdmissiblePair::from_q(6.0, 3.0).unwrap();
        let rep = spacetime_norm(&traj, &flat, pair, false).unwrap();
        assert_eq!(rep.value, 0.0);
        assert_eq!(rep.quotient, 0.0);
    }

    #[test]
    fn sparse_snapshots_rejected() {
        let grid = Grid::new(5.0, 50).unwrap();
        let flat = WarpProfile::euclidean();
        let u0 = RadialField::gaussian(grid, 3, &flat, 1.0, 0.0, Representation::UOnM);
        let times = TimeGrid::uniform(1.0, 4, &grid);
        let traj = solve_linear(&flat, 3, &u0, None, &times, None, Representation::UOnM).unwrap();
        let pair = AdmissiblePair::from_q(2.0, 3.0).unwrap();
        assert!(matches!(
            spacetime_norm(&traj, &flat, pair, false),
            Err(Error::TooFewSnapshots { .. })
        ));
    }

    #[test]
    fn early_window_fit_is_rejected() {
        let grid = Grid::new(20.0, 400).unwrap();
        let flat = WarpProfile::euclidean();
        let u0 = RadialField::gaussian(grid, 3, &flat, 4.0, 0.0, Representation::UOnM);
        let times = TimeGrid::uniform(0.1, 10, &grid);
        let traj = solve_linear(&flat, 3, &u0, None, &times, None, Representation::UOnM).unwrap();
        assert!(matches!(
            decay_fit(&traj, (0.01, 0.1)),
            Err(Error::FitRejected(_))
        ));
    }

    #[test]
    fn linear_trajectory_has_zero_residual() {
        let grid = Grid::new(30.0, 600).unwrap();
        let hyp = WarpProfile::hyperbolic(1.0).unwrap();
        let u0 = RadialField::gaussian(grid, 3, &hyp, 1.0, 0.5, Representation::UOnM);
        let times = TimeGrid::uniform(2.0, 20, &grid).with_dt(0.01);
        let traj = solve_linear(&hyp, 3, &u0, None, &times, None, Representation::UOnM).unwrap();
        let res = scattering_residual(&traj, &hyp).unwrap();
        assert!(res.residual.iter().all(|r| *r < 1e-9), "{:?}", res.residual);
    }

    #[test]
    fn standard_family_has_21_members() {
        assert_eq!(DataFamily::standard().members().len(), 21);
    }
}
