//! Hardy-Rellich Rayleigh quotients on a long annulus: per-mode minima
//! against the explicit bounds, and an eigenvalue spectrum export.
//!
//! Run with `cargo run --example rellich_spectra`.

use biharm::stability::{self, RellichDenominator};
use std::f64::consts::PI;

fn main() -> biharm::Result<()> {
    let l: f64 = 50.0;
    let b = l.exp();
    println!("annulus (1, e^{l}), threshold log(b/a) >= {:.4}", stability::rellich_a_threshold());
    let bound = (4.0 + PI * PI / (l * l)) * PI * PI / (l * l);
    println!("Laplacian vs |x|^-4 weight, bound = {bound:.6e}:");
    for check in stability::verify_rellich_a(1.0, b, 10, 40)? {
        println!(
            "  mode {:2}: min Rayleigh = {:.6e}  margin = {:+.3e} ({})",
            check.params["mode"] as i64,
            check.rhs,
            check.margin,
            if check.pass { "pass" } else { "FAIL" }
        );
    }

    let l2: f64 = 30.0;
    println!("gradient weight on (1, e^{l2}), threshold {:.4}:", stability::rellich_b_threshold(50));
    for check in stability::verify_rellich_b(1.0, l2.exp(), 6, 40)? {
        println!(
            "  mode {:2}: min Rayleigh = {:.6}  bound = {:.6} ({})",
            check.params["mode"] as i64,
            check.rhs,
            check.params["bound"],
            if check.pass { "pass" } else { "FAIL" }
        );
    }

    println!("Holder-weight constants on (1, e^10):");
    for beta in [0.5, 1.0, 2.0] {
        let check = stability::verify_rellich_c(1.0, 10f64.exp(), beta, 8, 40)?;
        println!(
            "  beta = {beta}: C_beta = {:.6} (refined {:.6}, {})",
            check.params["c_beta"],
            check.params["c_refined"],
            if check.pass { "stable" } else { "UNSTABLE" }
        );
    }

    println!("lowest eigenvalues of the mode-0 pencil (basis 40):");
    let evs = stability::rellich_spectrum(1.0, b, 0, 40, RellichDenominator::ValueWeight4)?;
    for (i, ev) in evs.iter().take(6).enumerate() {
        println!("  index {i}: {ev:.6e}");
    }
    Ok(())
}
