//! Defocusing cubic NLS on hyperbolic space and its distance to the free
//! evolution in H¹.

use warpdisp::norms::scattering_residual;
use warpdisp::solver::{solve_nls, NlsSign, RadialField, Representation, TimeGrid};
use warpdisp::{Grid, WarpProfile};

fn main() -> warpdisp::Result<()> {
    let n = 3;
    let profile = WarpProfile::hyperbolic(1.0)?;
    let grid = Grid::new(150.0, 7500)?;
    let u0 = RadialField::gaussian(grid, n, &profile, 1.0, 0.0, Representation::UOnM);
    let times = TimeGrid::uniform(5.0, 25, &grid);
    let traj = solve_nls(&profile, n, &u0, 2.0, NlsSign::Defocusing, &times, Representation::UOnM)?;
    let res = scattering_residual(&traj, &profile)?;
    for (k, t) in res.times.iter().enumerate().step_by(5) {
        println!("t = {t:5.2}  mass {:.10}  residual {:.4e}", traj.diagnostics.mass_series[k], res.residual[k]);
    }
    println!("boundary flagged: {}", res.boundary_flagged);
    Ok(())
}
