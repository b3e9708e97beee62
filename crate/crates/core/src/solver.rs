//! Time evolution of radial solutions in the half-line representation
//! w = τu, where the manifold equation i∂ₜu + Δ_M u = f becomes
//! i∂ₜw + ∂²_r w − Q w = τf with Q = τ''/τ and w(0) = 0.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manifold::WarpProfile;
use crate::numerics::sphere_area;
use crate::resolvent::DiscreteOperator;
use crate::tridiag::TridiagonalLu;

/// Mass fraction in the outer grid tail above which a run is flagged.
pub const BOUNDARY_FLAG: f64 = 1e-6;
/// Growth of sup|w| that aborts a nonlinear run.
pub const BLOWUP_GROWTH: f64 = 1e6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which unknown a field holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// u on the manifold.
    UOnM,
    /// v = u/σ on Rⁿ.
    VOnRn,
    /// w = τu = r^{(n−1)/2} v on the half-line.
    WHalfline,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::UOnM => "u_on_m",
            Representation::VOnRn => "v_on_rn",
            Representation::WHalfline => "w_halfline",
        })
    }
}

impl Representation {
    /// ln of the factor taking this representation to w at radius r.
    pub fn ln_weight_to_w(self, profile: &WarpProfile, n: usize, r: f64) -> f64 {
        match self {
            Representation::UOnM => profile.ln_tau(n, r),
            Representation::VOnRn => (n as f64 - 1.0) / 2.0 * r.ln(),
            Representation::WHalfline => 0.0,
        }
    }
}

/// Complex samples of a radial function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub representation: Representation,
    pub n: usize,
}

impl RadialField {
    pub fn new(grid: Grid, n: usize, representation: Representation, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match grid");
        Self {
            grid,
            values,
            representation,
            n,
        }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(
        grid: Grid,
        n: usize,
        representation: Representation,
        f: F,
    ) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, n, representation, values)
    }

    pub fn zeros(grid: Grid, n: usize, representation: Representation) -> Self {
        Self::new(grid, n, representation, vec![ZERO; grid.len()])
    }

    /// Gaussian datum exp(−(1 − i·chirp)·r²/width²) given as u on M.
    ///
    /// A positive chirp makes the datum outgoing. Built directly in the
    /// requested representation through log-weights, so no overflow occurs
    /// for exponentially growing profiles.
    pub fn gaussian(
        grid: Grid,
        n: usize,
        profile: &WarpProfile,
        width: f64,
        chirp: f64,
        representation: Representation,
    ) -> Self {
        Self::modulated_gaussian(grid, n, profile, width, chirp, 2, representation)
    }

    /// exp(−r²/width² + i·b·(r/width)^power) given as u on M.
    pub fn modulated_gaussian(
        grid: Grid,
        n: usize,
        profile: &WarpProfile,
        width: f64,
        b: f64,
        power: i32,
        representation: Representation,
    ) -> Self {
        Self::from_fn(grid, n, representation, |r| {
            let x = r / width;
            let ln_w = Representation::UOnM.ln_weight_to_w(profile, n, r)
                - representation.ln_weight_to_w(profile, n, r);
            Complex64::from_polar((ln_w - x * x).exp(), b * x.powi(power))
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Discrete ℓ² mass of the w-representation, ω_{n−1}·h·Σ|w_j|²; equals
    /// ‖u‖²_{L²(M)} up to quadrature error.
    pub fn mass(&self, profile: &WarpProfile) -> f64 {
        let w = transform(self, Representation::WHalfline, profile);
        sphere_area(self.n) * self.grid.spacing() * w.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Pointwise multiplication by the exact weights σ, τ or r^{(n−1)/2}.
pub fn transform(field: &RadialField, target: Representation, profile: &WarpProfile) -> RadialField {
    if field.representation == target {
        return field.clone();
    }
    let n = field.n;
    let values = field
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if *v == ZERO {
                return ZERO;
            }
            let r = field.grid.node(j);
            let ln = field.representation.ln_weight_to_w(profile, n, r)
                - target.ln_weight_to_w(profile, n, r);
            v * ln.exp()
        })
        .collect();
    RadialField::new(field.grid, n, target, values)
}

/// Crank–Nicolson propagator for i∂ₜw = P w − s with P = −∂²_r + Q.
#[derive(Debug, Clone)]
pub struct CnStepper {
    dt: f64,
    lu: TridiagonalLu,
    // L = −P entries
    l_diag: Vec<f64>,
    l_off: f64,
}

impl CnStepper {
    pub fn new(op: &DiscreteOperator, dt: f64) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be nonzero, got {dt}")));
        }
        let theta = 0.5 * dt;
        let l_diag: Vec<f64> = op.diag.iter().map(|d| -d).collect();
        let l_off = -op.offdiag;
        let lhs_diag: Vec<Complex64> = l_diag.iter().map(|d| 1.0 - I * theta * d).collect();
        let lu = TridiagonalLu::factor_constant_offdiag(&lhs_diag, -I * theta * l_off)?;
        Ok(Self {
            dt,
            lu,
            l_diag,
            l_off,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `w` by one step; `source` is s at the half step, in the
    /// w-representation.
    pub fn step(&self, w: &mut [Complex64], scratch: &mut Vec<Complex64>, source: Option<&[Complex64]>) {
        let n = w.len();
        let theta = I * (0.5 * self.dt);
        scratch.clear();
        scratch.extend((0..n).map(|j| {
            let left = if j > 0 { w[j - 1] } else { ZERO };
            let right = if j + 1 < n { w[j + 1] } else { ZERO };
            w[j] + theta * (self.l_off * (left + right) + self.l_diag[j] * w[j])
        }));
        if let Some(s) = source {
            for (r, s) in scratch.iter_mut().zip(s) {
                *r -= I * self.dt * s;
            }
        }
        self.lu.solve_in_place(scratch);
        w.copy_from_slice(scratch);
    }
}

/// One Crank–Nicolson step of a w-field under the potential Q.
pub fn cn_step(
    field: &RadialField,
    q_values: &[f64],
    dt: f64,
    source_at_half_step: Option<&[Complex64]>,
) -> Result<RadialField> {
    if field.representation != Representation::WHalfline {
        return Err(Error::Representation {
            expected: Representation::WHalfline.to_string(),
            found: field.representation.to_string(),
        });
    }
    let op = DiscreteOperator::assemble_from_q(q_values, field.grid, field.n);
    let stepper = CnStepper::new(&op, dt)?;
    let mut out = field.clone();
    let mut scratch = Vec::with_capacity(out.values.len());
    stepper.step(&mut out.values, &mut scratch, source_at_half_step);
    Ok(out)
}

/// Source sampled at increasing times, piecewise linear in between.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub times: Vec<f64>,
    pub samples: Vec<RadialField>,
}

impl SourceSpec {
    /// Interpolated source at time t in the w-representation; zero outside
    /// the sampled interval.
    fn at(&self, t: f64, profile: &WarpProfile, out: &mut Vec<Complex64>) {
        let len = self.samples[0].values.len();
        out.clear();
        out.resize(len, ZERO);
        let Some(k) = self.times.windows(2).position(|w| t >= w[0] && t <= w[1]) else {
            return;
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let s = (t - t0) / (t1 - t0);
        let a = transform(&self.samples[k], Representation::WHalfline, profile);
        let b = transform(&self.samples[k + 1], Representation::WHalfline, profile);
        for ((o, x), y) in out.iter_mut().zip(&a.values).zip(&b.values) {
            *o = x * (1.0 - s) + y * s;
        }
    }
}

/// Snapshot times plus the largest allowed step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub snapshot_times: Vec<f64>,
    pub dt_max: f64,
}

impl TimeGrid {
    /// `count + 1` equally spaced snapshots on [0, t_final] and the default
    /// step min(h, t_final/100).
    pub fn uniform(t_final: f64, count: usize, grid: &Grid) -> Self {
        let snapshot_times = (0..=count).map(|k| t_final * k as f64 / count as f64).collect();
        Self {
            snapshot_times,
            dt_max: grid.spacing().min(1e-2 * t_final),
        }
    }

    pub fn with_dt(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }

    pub fn t_final(&self) -> f64 {
        *self.snapshot_times.last().unwrap_or(&0.0)
    }

    fn validate(&self) -> Result<()> {
        if self.snapshot_times.is_empty() {
            return Err(Error::InvalidParameter("no snapshot times".into()));
        }
        if self.snapshot_times[0] < 0.0 {
            return Err(Error::InvalidParameter("snapshot times must be >= 0".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("snapshot times must increase strictly".into()));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::InvalidParameter("dt_max must be > 0".into()));
        }
        Ok(())
    }

    /// (number of substeps, step) for each interval, starting from t = 0.
    fn intervals(&self) -> Vec<(usize, f64)> {
        let mut prev = 0.0;
        self.snapshot_times
            .iter()
            .map(|&t| {
                let span = t - prev;
                prev = t;
                if span == 0.0 {
                    (0, 0.0)
                } else {
                    let steps = (span / self.dt_max - 1e-9).ceil().max(1.0) as usize;
                    (steps, span / steps as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub mass_series: Vec<f64>,
    pub boundary_mass_series: Vec<f64>,
}

/// Snapshots of one run, all on one grid and in one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialField>,
    pub step_dt: f64,
    pub diagnostics: Diagnostics,
    pub profile: WarpProfileTag,
}

/// Label of the profile a trajectory was produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpProfileTag(pub String);

impl Trajectory {
    pub fn representation(&self) -> Representation {
        self.snapshots[0].representation
    }

    pub fn grid(&self) -> Grid {
        self.snapshots[0].grid
    }

    pub fn boundary_flagged(&self) -> bool {
        self.diagnostics
            .boundary_mass_series
            .iter()
            .any(|m| *m > BOUNDARY_FLAG)
    }

    /// Snapshots converted to another representation.
    pub fn in_representation(&self, target: Representation, profile: &WarpProfile) -> Trajectory {
        let mut out = self.clone();
        out.snapshots = self.snapshots.iter().map(|s| transform(s, target, profile)).collect();
        out
    }
}

/// Fraction of the w-mass in the outer `tail_fraction` of the grid.
pub fn boundary_fraction(field: &RadialField, profile: &WarpProfile, tail_fraction: f64) -> f64 {
    let w = transform(field, Representation::WHalfline, profile);
    let total: f64 = w.values.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let len = w.values.len();
    let start = ((1.0 - tail_fraction) * len as f64).floor() as usize;
    let tail: f64 = w.values[start.min(len)..].iter().map(|z| z.norm_sqr()).sum();
    tail / total
}

/// Per-snapshot boundary mass fraction of a trajectory.
pub fn boundary_diagnostic(traj: &Trajectory, profile: &WarpProfile, tail_fraction: f64) -> Vec<f64> {
    traj.snapshots
        .iter()
        .map(|s| boundary_fraction(s, profile, tail_fraction))
        .collect()
}

/// Linear evolution driver shared by the trajectory-producing solvers and
/// the streaming norm sweeps.
#[derive(Debug, Clone)]
pub struct LinearProblem<'a> {
    pub profile: &'a WarpProfile,
    pub n: usize,
    pub grid: Grid,
    /// Evolve with Q − c₀ and restore the phase e^{−ic₀t}.
    pub c0_shift: Option<f64>,
    pub source: Option<&'a SourceSpec>,
}

impl<'a> LinearProblem<'a> {
    pub fn new(profile: &'a WarpProfile, n: usize, grid: Grid) -> Self {
        Self {
            profile,
            n,
            grid,
            c0_shift: None,
            source: None,
        }
    }

    pub fn with_shift(mut self, c0: f64) -> Self {
        self.c0_shift = Some(c0);
        self
    }

    pub fn with_source(mut self, source: &'a SourceSpec) -> Self {
        self.source = Some(source);
        self
    }

    pub fn operator(&self) -> Result<DiscreteOperator> {
        let pot = self.profile.potential(self.n, &self.grid, self.c0_shift.unwrap_or(0.0))?;
        let q = match self.c0_shift {
            Some(_) => pot.shifted_q(),
            None => pot.q_values,
        };
        Ok(DiscreteOperator::assemble_from_q(&q, self.grid, self.n))
    }

    /// Evolves `u0` through `times`, handing each snapshot (as w, with the
    /// shift phase restored) to `observer`. Stops early on `Break`.
    pub fn run<F>(&self, u0: &RadialField, times: &TimeGrid, mut observer: F) -> Result<f64>
    where
        F: FnMut(f64, &[Complex64]) -> ControlFlow<()>,
    {
        times.validate()?;
        if u0.grid != self.grid || u0.n != self.n {
            return Err(Error::InvalidParameter("initial datum grid/dimension mismatch".into()));
        }
        let op = self.operator()?;
        let c0 = self.c0_shift.unwrap_or(0.0);
        let mut w = transform(u0, Representation::WHalfline, self.profile).values;
        let mut steppers: HashMap<u64, CnStepper> = HashMap::new();
        let mut scratch = Vec::with_capacity(w.len());
        let mut src = Vec::new();
        let mut out = vec![ZERO; w.len()];
        let mut t = 0.0;
        let mut max_dt: f64 = 0.0;
        for (k, (steps, dt)) in times.intervals().into_iter().enumerate() {
            if steps > 0 {
                max_dt = max_dt.max(dt);
                let stepper = match steppers.entry(dt.to_bits()) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => e.insert(CnStepper::new(&op, dt)?),
                };
                for _ in 0..steps {
                    let source = match self.source {
                        Some(spec) => {
                            let th = t + 0.5 * dt;
                            spec.at(th, self.profile, &mut src);
                            if c0 != 0.0 {
                                let phase = Complex64::from_polar(1.0, c0 * th);
                                src.iter_mut().for_each(|s| *s *= phase);
                            }
                            Some(src.as_slice())
                        }
                        None => None,
                    };
                    stepper.step(&mut w, &mut scratch, source);
                    t += dt;
                }
            }
            t = times.snapshot_times[k];
            let phase = Complex64::from_polar(1.0, -c0 * t);
            for (o, x) in out.iter_mut().zip(&w) {
                *o = x * phase;
            }
            if observer(t, &out).is_break() {
                break;
            }
        }
        Ok(max_dt)
    }

    pub fn solve(&self, u0: &RadialField, times: &TimeGrid, output: Representation) -> Result<Trajectory> {
        let mut snapshots = Vec::new();
        let mut recorded = Vec::new();
        let step_dt = self.run(u0, times, |t, w| {
            recorded.push(t);
            snapshots.push(RadialField::new(self.grid, self.n, Representation::WHalfline, w.to_vec()));
            ControlFlow::Continue(())
        })?;
        Ok(finish_trajectory(self.profile, recorded, snapshots, step_dt, output))
    }
}

fn finish_trajectory(
    profile: &WarpProfile,
    times: Vec<f64>,
    w_snapshots: Vec<RadialField>,
    step_dt: f64,
    output: Representation,
) -> Trajectory {
    let mass_series = w_snapshots.iter().map(|s| s.mass(profile)).collect();
    let boundary_mass_series = w_snapshots
        .iter()
        .map(|s| boundary_fraction(s, profile, 0.1))
        .collect();
    let snapshots = w_snapshots.iter().map(|s| transform(s, output, profile)).collect();
    Trajectory {
        times,
        snapshots,
        step_dt,
        diagnostics: Diagnostics {
            mass_series,
            boundary_mass_series,
        },
        profile: WarpProfileTag(profile.label()),
    }
}

/// Linear radial evolution on the manifold; see [`LinearProblem`].
pub fn solve_linear(
    profile: &WarpProfile,
    n: usize,
    u0: &RadialField,
    source: Option<&SourceSpec>,
    times: &TimeGrid,
    c0_shift: Option<f64>,
    output: Representation,
) -> Result<Trajectory> {
    let mut problem = LinearProblem::new(profile, n, u0.grid);
    problem.c0_shift = c0_shift;
    problem.source = source;
    problem.solve(u0, times, output)
}

/// Free flat-space evolution of a radial datum on Rⁿ (the Euclidean profile).
pub fn free_euclidean_reference(
    n: usize,
    v0: &RadialField,
    times: &TimeGrid,
) -> Result<Trajectory> {
    let flat = WarpProfile::euclidean();
    solve_linear(&flat, n, v0, None, times, None, v0.representation)
}

/// Sign of the power nonlinearity in i∂ₜu + Δ_M u + s|u|^p u = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlsSign {
    /// s = +1.
    Focusing,
    /// s = −1.
    Defocusing,
}

impl NlsSign {
    pub fn value(self) -> f64 {
        match self {
            NlsSign::Focusing => 1.0,
            NlsSign::Defocusing => -1.0,
        }
    }
}

/// Strang-split NLS on the manifold: half nonlinear phase, CN step, half
/// nonlinear phase. The phase uses |u| = |w|/τ.
pub fn solve_nls(
    profile: &WarpProfile,
    n: usize,
    u0: &RadialField,
    power: f64,
    sign: NlsSign,
    times: &TimeGrid,
    output: Representation,
) -> Result<Trajectory> {
    if !(power > 0.0) {
        return Err(Error::InvalidParameter(format!("power must be > 0, got {power}")));
    }
    times.validate()?;
    let grid = u0.grid;
    let op = LinearProblem::new(profile, n, grid).operator()?;
    let inv_tau: Vec<f64> = grid.nodes().iter().map(|&r| (-profile.ln_tau(n, r)).exp()).collect();
    let s = sign.value();
    let mut w = transform(u0, Representation::WHalfline, profile).values;
    let sup0 = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut steppers: HashMap<u64, CnStepper> = HashMap::new();
    let mut scratch = Vec::with_capacity(w.len());
    let mut snapshots = Vec::new();
    let mut recorded = Vec::new();
    let mut t = 0.0;
    let mut max_dt: f64 = 0.0;

    let half_phase = |w: &mut [Complex64], dt: f64| {
        for (z, it) in w.iter_mut().zip(&inv_tau) {
            let amp = (z.norm() * it).powf(power);
            *z *= Complex64::from_polar(1.0, s * 0.5 * dt * amp);
        }
    };

    for (k, (steps, dt)) in times.intervals().into_iter().enumerate() {
        if steps > 0 {
            max_dt = max_dt.max(dt);
            let stepper = match steppers.entry(dt.to_bits()) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => e.insert(CnStepper::new(&op, dt)?),
            };
            for _ in 0..steps {
                half_phase(&mut w, dt);
                stepper.step(&mut w, &mut scratch, None);
                half_phase(&mut w, dt);
                t += dt;
            }
            let sup = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if sup0 > 0.0 && (sup > BLOWUP_GROWTH * sup0 || !sup.is_finite()) {
                return Err(Error::BlowUp {
                    time: t,
                    growth: sup / sup0,
                });
            }
        }
        t = times.snapshot_times[k];
        recorded.push(t);
        snapshots.push(RadialField::new(grid, n, Representation::WHalfline, w.clone()));
    }
    Ok(finish_trajectory(profile, recorded, snapshots, max_dt, output))
}
