//! Weighted Strichartz quotients over the standard Gaussian family on
//! hyperbolic space. A bounded spread is evidence for the estimate.

use warpdisp::exponents::AdmissiblePair;
use warpdisp::norms::{strichartz_quotient_sweep, AdaptiveSettings, DataFamily};
use warpdisp::WarpProfile;

fn main() -> warpdisp::Result<()> {
    let n = 3;
    let profile = WarpProfile::hyperbolic(1.0)?;
    let pair = AdmissiblePair::from_q(6.0, n as f64)?;
    let sweep = strichartz_quotient_sweep(&profile, n, pair, true, &DataFamily::standard(), AdaptiveSettings::default())?;
    println!("{:>8} {:>6} {:>10} {:>8}", "width", "chirp", "quotient", "flagged");
    for run in &sweep.runs {
        println!("{:>8.3} {:>6.1} {:>10.4} {:>8}", run.width, run.chirp, run.report.quotient, run.boundary_flagged);
    }
    println!("max {:.4} at {:?}, spread {:.3}", sweep.max, sweep.argmax, sweep.spread());
    Ok(())
}
