//! Linear Schrödinger evolution of a Gaussian on hyperbolic space, with
//! mass conservation and the boundary diagnostic.

use warpdisp::solver::{solve_linear, RadialField, Representation, TimeGrid};
use warpdisp::{Grid, WarpProfile};

fn main() -> warpdisp::Result<()> {
    let n = 3;
    let profile = WarpProfile::hyperbolic(1.0)?;
    let grid = Grid::new(60.0, 3000)?;
    let u0 = RadialField::gaussian(grid, n, &profile, 1.0, 0.0, Representation::UOnM);
    let times = TimeGrid::uniform(4.0, 8, &grid);
    let traj = solve_linear(&profile, n, &u0, None, &times, None, Representation::UOnM)?;
    println!("{:>6} {:>14} {:>14} {:>12}", "t", "sup|u|", "mass", "boundary");
    for (k, t) in traj.times.iter().enumerate() {
        println!(
            "{t:>6.2} {:>14.6e} {:>14.10} {:>12.3e}",
            traj.snapshots[k].sup_norm(),
            traj.diagnostics.mass_series[k],
            traj.diagnostics.boundary_mass_series[k]
        );
    }
    println!("boundary flagged: {}", traj.boundary_flagged());
    Ok(())
}
