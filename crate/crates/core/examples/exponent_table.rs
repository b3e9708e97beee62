//! Admissible pairs, effective dimensions and NLS scattering windows.

use warpdisp::exponents::{classical_d_range, effective_dimension, scattering_window, AdmissiblePair, Growth};

fn main() -> warpdisp::Result<()> {
    let n = 3;
    println!("admissible pairs in dimension {n}");
    for q in [2.0, 3.0, 4.0, 5.0, 6.0] {
        let pair = AdmissiblePair::from_q(q, n as f64)?;
        println!("  q = {q:<4} p = {:<10.4} weight exponent {:.4}", pair.p, pair.weight_exponent(n));
    }
    for m in [1.0, 2.0, 3.0] {
        let dim = effective_dimension(m, n)?;
        let w = scattering_window(n, Growth::Polynomial { effective_dim: dim });
        println!(
            "phi ~ r^{m}: N = {dim}, p in ({:.4}, {:.4}), beats Euclidean {}, classical d-range {:?}",
            w.p_low,
            w.p_high,
            w.improves_on_euclidean,
            classical_d_range(n, dim)
        );
    }
    let w = scattering_window(n, Growth::Exponential);
    println!("exponential growth: p in ({}, {})", w.p_low, w.p_high);
    Ok(())
}
