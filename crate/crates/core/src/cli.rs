//! Config-driven subcommands. Each command reads one [`ExperimentConfig`],
//! prints a short summary and writes its CSV/JSON artifacts into the output
//! directory. Every artifact starts with the config hash, and nothing in the
//! pipeline depends on wall-clock time or thread scheduling, so a rerun with
//! the same config reproduces the files byte for byte.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ExperimentConfig, NormsMode, Theorem};
use crate::error::{Error, Result};
use crate::exponents::{effective_dimension, AdmissiblePair};
use crate::grid::Grid;
use crate::hypotheses::{
    check_exp_theorem, check_local, check_poly_theorem, check_potential_h, check_tau_conditions,
    CheckGrid, HypothesisReport, RadialPotential,
};
use crate::manifold::WarpProfile;
use crate::norms::{
    scattering_residual, spacetime_norm, strichartz_quotient_sweep, AdaptiveSettings, DataFamily,
};
use crate::resolvent::{resolvent_sweep_seeded, smallest_eigenvalue, DiscreteOperator};
use crate::solver::{solve_linear, solve_nls, RadialField, Representation, TimeGrid, Trajectory};

#[derive(Debug, Parser)]
#[command(name = "warpdisp", version, about = "Radial Schrödinger experiments on warped manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature, potential and weight tables plus a growth-regime guess.
    Describe(CommonArgs),
    /// Certify the hypotheses of one theorem; exit 1 if any fails.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Overrides `check.theorem` of the config.
        #[arg(long, value_enum)]
        theorem: Option<Theorem>,
    },
    /// Linear evolution of the configured datum.
    Solve(CommonArgs),
    /// Space-time Strichartz norms and quotients.
    Norms(CommonArgs),
    /// Weighted resolvent sweep over the λ and ε grids.
    Resolvent(CommonArgs),
    /// NLS run and distance to the free evolution.
    Scatter(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    HypothesisFail,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::HypothesisFail => 1,
            Outcome::NotConverged => 3,
        }
    }
}

/// 3 for numerical failures, 2 for everything the user can fix.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::NotConverged { .. } | Error::BlowUp { .. } | Error::SingularSystem(_) | Error::FitRejected(_) => 3,
        _ => 2,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_exit_code(&e)
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<Outcome> {
    let (common, theorem) = match command {
        Command::Check { common, theorem } => (common, *theorem),
        Command::Describe(c)
        | Command::Solve(c)
        | Command::Norms(c)
        | Command::Resolvent(c)
        | Command::Scatter(c) => (c, None),
    };
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(dir) = &common.output {
        config.output = dir.clone();
    }
    if let Some(t) = theorem {
        config.check.theorem = t;
    }
    match command {
        Command::Describe(_) => cmd_describe(&config, out),
        Command::Check { .. } => cmd_check(&config, out),
        Command::Solve(_) => cmd_solve(&config, out),
        Command::Norms(_) => cmd_norms(&config, out),
        Command::Resolvent(_) => cmd_resolvent(&config, out),
        Command::Scatter(_) => cmd_scatter(&config, out),
    }
}

/// Large-r growth law read off the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Polynomial {
        m: f64,
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "N")]
        effective_dim: f64,
    },
    Exponential {
        alpha: f64,
        #[serde(rename = "A")]
        a: f64,
    },
    Undetermined,
}

/// Exponential if the exponential-behaviour check passes, else polynomial
/// if the power-law check passes, else undetermined.
pub fn regime_guess(profile: &WarpProfile, n: usize) -> Regime {
    let grid = CheckGrid::standard();
    if let Ok((_, exp)) = check_exp_theorem(profile, n, &grid, None) {
        if exp.passed {
            return Regime::Exponential {
                alpha: exp.extracted.alpha.unwrap_or(f64::NAN),
                a: exp.extracted.a.unwrap_or(f64::NAN),
            };
        }
    }
    if let Ok((_, poly)) = check_poly_theorem(profile, n, &grid, None) {
        if let (true, Some(m), Some(a)) = (poly.passed, poly.extracted.m, poly.extracted.a) {
            if let Ok(effective_dim) = effective_dimension(m, n) {
                return Regime::Polynomial { m, a, effective_dim };
            }
        }
    }
    Regime::Undetermined
}

fn header(config: &ExperimentConfig) -> Result<String> {
    Ok(format!("# config-hash: {}\n", config.hash()?))
}

fn write_artifact(config: &ExperimentConfig, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&config.output)?;
    let path = config.output.join(name);
    let mut text = header(config)?;
    text.push_str(body);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

pub fn cmd_describe(config: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let profile = config.build_profile()?;
    profile.require_complete()?;
    let n = config.n;
    let mut s = header(config)?;
    writeln!(s, "# profile: {}, n = {n}", profile.label()).ok();
    writeln!(s, "\n## curvature\nr,sec_rad,sec_tan,ricci_rad,ricci_tan,scalar").ok();
    for &r in &config.describe.radii {
        let c = profile.curvature(n, r)?;
        writeln!(s, "{r},{},{},{},{},{}", c.sec_rad, c.sec_tan, c.ricci_rad, c.ricci_tan, c.scalar).ok();
    }
    writeln!(s, "\n## potentials\nr,Q,V").ok();
    for &r in &config.describe.radii {
        writeln!(s, "{r},{},{}", profile.q_at(n, r), profile.v_at(n, r)).ok();
    }
    writeln!(s, "\n## weights\nr,ln_sigma,ln_tau").ok();
    for &r in &config.describe.radii {
        writeln!(s, "{r},{},{}", profile.ln_sigma(n, r), profile.ln_tau(n, r)).ok();
    }
    let regime = regime_guess(&profile, n);
    writeln!(s, "\n## regime").ok();
    match regime {
        Regime::Polynomial { m, a, effective_dim } => {
            writeln!(s, "polynomial: m = {m:.4}, A = {a:.4}, N = {effective_dim:.4}").ok()
        }
        Regime::Exponential { alpha, a } => writeln!(s, "exponential: alpha = {alpha:.4}, A = {a:.4}").ok(),
        Regime::Undetermined => writeln!(s, "undetermined").ok(),
    };
    out.write_all(s.as_bytes())?;
    Ok(Outcome::Pass)
}

/// Reports of the configured theorem and whether all of its conditions pass.
pub fn run_checks(config: &ExperimentConfig) -> Result<(Vec<HypothesisReport>, bool)> {
    let profile = config.build_profile()?;
    profile.require_complete()?;
    let n = config.n;
    let c = &config.check;
    let grid = &c.grid;
    Ok(match c.theorem {
        Theorem::Poly => {
            let (curv, poly) = check_poly_theorem(&profile, n, grid, c.fit_window)?;
            let local_grid = CheckGrid::new(grid.r_min.max(1.0), grid.r_max.max(2.0), grid.points)?;
            let local = check_local(&profile, n, &local_grid)?;
            let passed = curv.passed && poly.passed;
            (vec![curv, poly, local], passed)
        }
        Theorem::Exp => {
            let (curv, behaviour) = check_exp_theorem(&profile, n, grid, c.fit_window)?;
            let passed = curv.passed && behaviour.passed;
            (vec![curv, behaviour], passed)
        }
        Theorem::Tau => {
            let reports = check_tau_conditions(&profile, n, c.c0, grid)?;
            let passed = reports.iter().all(|r| r.passed);
            (reports.to_vec(), passed)
        }
        Theorem::Potential => {
            let v = c.potential.build(&profile, n);
            let reports = check_potential_h(&v, n, grid);
            let passed = reports.all_passed();
            (reports.into_vec(), passed)
        }
    })
}

#[derive(Serialize)]
struct CheckDocument<'a> {
    config_hash: String,
    theorem: Theorem,
    passed: bool,
    reports: &'a [HypothesisReport],
}

pub fn cmd_check(config: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let (reports, passed) = run_checks(config)?;
    let doc = CheckDocument {
        config_hash: config.hash()?,
        theorem: config.check.theorem,
        passed,
        reports: &reports,
    };
    let json = serde_json::to_string_pretty(&doc)?;
    std::fs::create_dir_all(&config.output)?;
    std::fs::write(config.output.join("check.json"), format!("{json}\n"))?;
    writeln!(out, "{json}")?;
    Ok(if passed { Outcome::Pass } else { Outcome::HypothesisFail })
}

fn build_grid(config: &ExperimentConfig) -> Result<Grid> {
    Grid::new(config.grid.r_max, config.grid.points)
}

fn initial_datum(config: &ExperimentConfig, profile: &WarpProfile, grid: Grid) -> RadialField {
    let d = &config.datum;
    RadialField::modulated_gaussian(
        grid,
        config.n,
        profile,
        d.width,
        d.chirp,
        d.modulation.power(),
        Representation::WHalfline,
    )
    .scaled(Complex64::new(d.amplitude, 0.0))
}

fn time_grid(config: &ExperimentConfig, grid: &Grid) -> TimeGrid {
    let t = TimeGrid::uniform(config.time.t_final, config.time.snapshots, grid);
    match config.time.dt {
        Some(dt) => t.with_dt(dt),
        None => t,
    }
}

fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,mass,boundary_fraction\n");
    for ((t, m), b) in traj
        .times
        .iter()
        .zip(&traj.diagnostics.mass_series)
        .zip(&traj.diagnostics.boundary_mass_series)
    {
        writeln!(s, "{t:e},{m:e},{b:e}").ok();
    }
    s
}

pub fn cmd_solve(config: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let profile = config.build_profile()?;
    let grid = build_grid(config)?;
    let u0 = initial_datum(config, &profile, grid);
    let times = time_grid(config, &grid);
    let traj = solve_linear(&profile, config.n, &u0, None, &times, None, config.solve.representation)?;

    let mut field = format!("# representation: {}\nt,r,re,im\n", config.solve.representation);
    let nodes = grid.nodes();
    for (t, snap) in traj.times.iter().zip(&traj.snapshots).step_by(config.solve.export_every) {
        for (r, z) in nodes.iter().zip(&snap.values) {
            writeln!(field, "{t:e},{r:e},{:e},{:e}", z.re, z.im).ok();
        }
    }
    let field_path = write_artifact(config, "solve.csv", &field)?;
    let diag_path = write_artifact(config, "solve_diagnostics.csv", &diagnostics_csv(&traj))?;
    let masses = &traj.diagnostics.mass_series;
    let drift = masses.iter().map(|m| (m - masses[0]).abs()).fold(0.0, f64::max) / masses[0];
    writeln!(
        out,
        "solved {} on {} points to T = {}: relative mass drift {drift:.3e}, boundary flagged: {}",
        profile.label(),
        grid.len(),
        times.t_final(),
        traj.boundary_flagged()
    )?;
    writeln!(out, "wrote {} and {}", show(&field_path), show(&diag_path))?;
    Ok(Outcome::Pass)
}

const NORMS_COLUMNS: &str =
    "profile,n,p,q,weighted,T,value,quotient,tail_value,width,chirp,boundary_flagged\n";

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn cmd_norms(config: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let profile = config.build_profile()?;
    let n = config.n;
    let pairs: Vec<AdmissiblePair> = config
        .norms
        .q
        .iter()
        .map(|&q| AdmissiblePair::from_q(q, n as f64))
        .collect::<Result<_>>()?;
    let weighted = config.norms.weighted;
    let label = profile.label().replace(',', ";");
    let mut s = String::from(NORMS_COLUMNS);
    match config.norms.mode {
        NormsMode::Datum => {
            let grid = build_grid(config)?;
            let u0 = initial_datum(config, &profile, grid);
            let traj = solve_linear(&profile, n, &u0, None, &time_grid(config, &grid), None, Representation::WHalfline)?;
            let flagged = traj.boundary_flagged();
            for pair in pairs {
                let rep = spacetime_norm(&traj, &profile, pair, weighted)?;
                writeln!(
                    s,
                    "{label},{n},{:e},{:e},{weighted},{:e},{:e},{:e},{},{:e},{:e},{flagged}",
                    pair.p,
                    pair.q,
                    rep.t_final,
                    rep.value,
                    rep.quotient,
                    opt(rep.tail_value),
                    config.datum.width,
                    config.datum.chirp
                )
                .ok();
                writeln!(out, "{pair}: value {:.6e}, quotient {:.6e}", rep.value, rep.quotient)?;
            }
        }
        NormsMode::Family => {
            let family = DataFamily::standard();
            for pair in pairs {
                let sweep = strichartz_quotient_sweep(&profile, n, pair, weighted, &family, AdaptiveSettings::default())?;
                for run in &sweep.runs {
                    let rep = &run.report;
                    writeln!(
                        s,
                        "{label},{n},{:e},{:e},{weighted},{:e},{:e},{:e},{},{:e},{:e},{}",
                        pair.p,
                        pair.q,
                        rep.t_final,
                        rep.value,
                        rep.quotient,
                        opt(rep.tail_value),
                        run.width,
                        run.chirp,
                        run.boundary_flagged
                    )
                    .ok();
                }
                writeln!(
                    out,
                    "{pair}: quotient max {:.6e} at (width, chirp) = {:?}, min {:.6e}, spread {:.3}, excluded {}",
                    sweep.max,
                    sweep.argmax,
                    sweep.min,
                    sweep.spread(),
                    sweep.excluded.len()
                )?;
            }
        }
    }
    let path = write_artifact(config, "norms.csv", &s)?;
    writeln!(out, "wrote {}", show(&path))?;
    Ok(Outcome::Pass)
}

pub fn cmd_resolvent(config: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let profile = config.build_profile()?;
    let grid = build_grid(config)?;
    let potential = config.resolvent.potential.build(&profile, config.n);
    let op = DiscreteOperator::from_potential_fn(|r| potential.value(r), grid, config.n);
    let lambdas = config.lambdas();
    let eps = &config.resolvent.eps;
    let report = resolvent_sweep_seeded(&op, &lambdas, eps, config.seed);

    let mut s = String::from("lambda,eps,norm,scaled,converged,iterations\n");
    for &l in &lambdas {
        for &e in eps {
            match report.samples.iter().find(|x| x.lambda == l && x.eps == e) {
                Some(x) => writeln!(s, "{l:e},{e:e},{:e},{:e},true,{}", x.norm, x.scaled, x.iterations),
                None => writeln!(s, "{l:e},{e:e},NaN,NaN,false,"),
            }
            .ok();
        }
    }
    let path = write_artifact(config, "resolvent.csv", &s)?;
    writeln!(out, "potential: {}", potential.label())?;
    writeln!(out, "smallest eigenvalue: {:.10e}", smallest_eigenvalue(&op))?;
    writeln!(
        out,
        "sup norm*sqrt(|lambda|+1) = {:.6e} at (lambda, eps) = {:?}; spread {:.3}",
        report.sup_scaled,
        report.sup_at,
        report.scaled_spread()
    )?;
    writeln!(out, "eps-blow-up at lambda: {:?}", report.blowup_lambdas)?;
    for (l, e, msg) in &report.failures {
        writeln!(out, "not converged at lambda = {l}, eps = {e}: {msg}")?;
    }
    writeln!(out, "wrote {}", show(&path))?;
    Ok(if report.all_converged() {
        Outcome::Pass
    } else {
        Outcome::NotConverged
    })
}

pub fn cmd_scatter(config: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    let profile = config.build_profile()?;
    let grid = build_grid(config)?;
    let u0 = initial_datum(config, &profile, grid);
    let times = time_grid(config, &grid);
    let sc = &config.scatter;
    let traj = solve_nls(&profile, config.n, &u0, sc.power, sc.sign, &times, Representation::WHalfline)?;
    let res = scattering_residual(&traj, &profile)?;
    let mut s = String::from("t,mass,residual_h1,boundary_fraction\n");
    for (k, t) in traj.times.iter().enumerate() {
        writeln!(
            s,
            "{t:e},{:e},{:e},{:e}",
            traj.diagnostics.mass_series[k], res.residual[k], traj.diagnostics.boundary_mass_series[k]
        )
        .ok();
    }
    let path = write_artifact(config, "scatter.csv", &s)?;
    let masses = &traj.diagnostics.mass_series;
    let drift = masses.iter().map(|m| (m - masses[0]).abs()).fold(0.0, f64::max) / masses[0];
    writeln!(
        out,
        "NLS p = {} ({:?}): relative mass drift {drift:.3e}, residual at t = 0: {:.6e}, boundary flagged: {}",
        sc.power, sc.sign, res.residual[0], res.boundary_flagged
    )?;
    writeln!(out, "wrote {}", show(&path))?;
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ProfileSpec;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(error_exit_code(&Error::Config("x".into())), 2);
        assert_eq!(error_exit_code(&Error::BlowUp { time: 1.0, growth: 1e7 }), 3);
        assert_eq!(
            error_exit_code(&Error::NotConverged {
                iterations: 500,
                last: [1.0, 2.0]
            }),
            3
        );
        assert_eq!(Outcome::HypothesisFail.exit_code(), 1);
    }

    #[test]
    fn regime_examples() {
        let cubic = WarpProfile::odd_polynomial(vec![1.0]).unwrap();
        match regime_guess(&cubic, 3) {
            Regime::Polynomial { m, effective_dim, .. } => {
                assert!((m - 3.0).abs() < 0.01);
                assert!((effective_dim - 7.0).abs() < 0.02);
            }
            other => panic!("expected polynomial, got {other:?}"),
        }
        let hyp = WarpProfile::hyperbolic(1.0).unwrap();
        assert!(matches!(regime_guess(&hyp, 3), Regime::Exponential { .. }));
        match regime_guess(&WarpProfile::euclidean(), 3) {
            Regime::Polynomial { m, .. } => assert!((m - 1.0).abs() < 1e-9),
            other => panic!("expected polynomial, got {other:?}"),
        }
    }

    #[test]
    fn check_decisions() {
        let mut c = ExperimentConfig::new(ProfileSpec::OddPolynomial { coeffs: vec![1.0] }, 3);
        assert!(run_checks(&c).unwrap().1);
        c.profile = ProfileSpec::Euclidean;
        c.check.theorem = Theorem::Exp;
        assert!(!run_checks(&c).unwrap().1);
    }
}
