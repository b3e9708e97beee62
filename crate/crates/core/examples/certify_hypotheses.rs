//! Certifies the growth hypotheses of polynomial and exponential profiles
//! and the potential conditions of a few model potentials.

use warpdisp::hypotheses::{
    check_exp_theorem, check_poly_theorem, check_potential_h, BuiltinPotential, CheckGrid, HypothesisReport,
};
use warpdisp::WarpProfile;

fn show(r: &HypothesisReport) {
    println!(
        "  {:?}: passed {} margin {:.4e} at r = {:.3e}; {}",
        r.condition_id, r.passed, r.worst_margin, r.worst_r, r.caveat
    );
}

fn main() -> warpdisp::Result<()> {
    let grid = CheckGrid::standard();
    let n = 3;

    let cubic = WarpProfile::odd_polynomial(vec![1.0, 1.0])?;
    println!("{}", cubic.label());
    let (curv, poly) = check_poly_theorem(&cubic, n, &grid, None)?;
    show(&curv);
    show(&poly);
    println!("  extracted {:?}", poly.extracted);

    let hyp = WarpProfile::hyperbolic(1.0)?;
    println!("{}", hyp.label());
    let (curv, growth) = check_exp_theorem(&hyp, n, &grid, None)?;
    show(&curv);
    show(&growth);
    println!("  extracted {:?}", growth.extracted);

    for v in [
        BuiltinPotential::Zero,
        BuiltinPotential::InverseBracket { beta: 1.0 },
        BuiltinPotential::InverseBracket { beta: -5.0 },
    ] {
        let reports = check_potential_h(&v, n, &grid);
        println!("potential: all passed {}, delta0 = {:.4}", reports.all_passed(), reports.delta0());
        reports.into_vec().iter().for_each(show);
    }
    Ok(())
}
