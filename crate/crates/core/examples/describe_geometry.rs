//! Curvature, the weights τ and σ, and the effective potentials of a few
//! warped profiles.

use warpdisp::{Grid, WarpProfile};

fn main() -> warpdisp::Result<()> {
    let n = 3;
    let profiles = [
        WarpProfile::euclidean(),
        WarpProfile::hyperbolic(1.0)?,
        WarpProfile::odd_polynomial(vec![1.0, 1.0])?,
        WarpProfile::power_tail(2.0, 1.0)?,
    ];
    for p in &profiles {
        println!("{} (n = {n})", p.label());
        println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}", "r", "sec_rad", "sec_tan", "ln tau", "Q", "V");
        for r in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let c = p.curvature(n, r)?;
            println!(
                "{r:>8.2} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                c.sec_rad,
                c.sec_tan,
                p.ln_tau(n, r),
                p.q_at(n, r),
                p.v_at(n, r)
            );
        }
        let pot = p.potential(n, &Grid::new(20.0, 200)?, 0.0)?;
        println!("suggested shift c0 = {}\n", pot.c0);
    }
    Ok(())
}
