//! Pointwise decay rate of a radial wave on R³, fitted on a log-log window.
//! The free rate is t^{-3/2}.

use warpdisp::norms::decay_fit;
use warpdisp::solver::{solve_linear, RadialField, Representation, TimeGrid};
use warpdisp::{Grid, WarpProfile};

fn main() -> warpdisp::Result<()> {
    let n = 3;
    let profile = WarpProfile::euclidean();
    let grid = Grid::new(200.0, 4000)?;
    let u0 = RadialField::gaussian(grid, n, &profile, 1.0, 0.0, Representation::UOnM);
    let times = TimeGrid::uniform(8.0, 160, &grid).with_dt(1e-2);
    let traj = solve_linear(&profile, n, &u0, None, &times, None, Representation::UOnM)?;
    let fit = decay_fit(&traj, (1.0, 8.0))?;
    println!("slope {:.4} (expected -1.5), rms {:.2e}, {} points", fit.slope, fit.rms, fit.points);
    println!("boundary flagged: {}", traj.boundary_flagged());
    Ok(())
}
