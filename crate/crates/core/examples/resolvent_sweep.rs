//! Weighted resolvent norms of −∂²_r + V for a repulsive and an attractive
//! inverse-square-bracket potential. The attractive well has a bound state
//! and the norm blows up like 1/ε there.

use warpdisp::numerics::linspace;
use warpdisp::resolvent::{resolvent_sweep, smallest_eigenvalue, DiscreteOperator};
use warpdisp::Grid;

fn main() -> warpdisp::Result<()> {
    let grid = Grid::new(100.0, 2000)?;
    let eps = [0.2, 0.1, 0.05];
    for beta in [1.0, -5.0] {
        let op = DiscreteOperator::from_potential_fn(|r| beta / (1.0 + r * r), grid, 3);
        let e0 = smallest_eigenvalue(&op);
        let mut lambdas = linspace(-2.0, 10.0, 13);
        if e0 < 0.0 {
            lambdas.push(e0);
        }
        let report = resolvent_sweep(&op, &lambdas, &eps);
        println!("beta = {beta}: smallest eigenvalue {e0:.5}");
        println!(
            "  sup scaled {:.4} at {:?}, spread {:.3}, blow-up at {:?}",
            report.sup_scaled,
            report.sup_at,
            report.scaled_spread(),
            report.blowup_lambdas
        );
    }
    Ok(())
}
