//! Print the full constant ledger: Bessel zeros, eigenvalues, Lambert-W
//! thresholds, the weighted Wente constant and the extension constants.
//!
//! Run with `cargo run --example constants_ledger`.

use biharm::specfun::{bessel_first_zero, lambert_w, sphere_area};
use std::f64::consts::PI;

fn main() -> biharm::Result<()> {
    println!("sphere areas");
    for d in 2..=6u32 {
        println!("  beta({d}) = {:.12}", sphere_area(d)?);
    }

    println!("first Bessel zeros");
    for order in [0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("  j_({order}, 1) = {:.10}", bessel_first_zero(order)?);
    }
    let j11 = bessel_first_zero(1.0)?;
    println!("  lambda_1(B^4) = j_(1,1)^2 = {:.8}", j11 * j11);
    println!(
        "  variational cross-check     = {:.8}",
        biharm::stability::ball_dirichlet_lambda1(24)
    );

    println!("Lambert-W ledger");
    let w32 = lambert_w(1.5)?;
    println!("  W(3/2)            = {:.6}", w32);
    println!("  e^W(3/2)          = {:.6}", w32.exp());
    println!("  2 W(1/(2 sqrt 2)) = {:.6}", 2.0 * lambert_w(1.0 / (2.0 * 2f64.sqrt()))?);
    let w94 = lambert_w(2.25)?;
    println!("  2/(3 W(9/4))      = {:.6}", 2.0 / (3.0 * w94));
    println!("  1 - 8/(9 W(9/4))  = {:.6} (> 1/50: {})", 1.0 - 8.0 / (9.0 * w94), 1.0 - 8.0 / (9.0 * w94) > 0.02);

    println!("weighted gradient and extension constants");
    let g1 = biharm::poisson::gamma_one();
    println!("  Gamma_1   = {:.7} (Gamma_1^2 = {:.3})", g1, g1 * g1);
    println!("  Gamma_W   = {:.3}", biharm::calculus::gamma_w());
    println!("  Lambda_4  = {:.10} (= 8 sqrt(30)/pi)", biharm::annulus::pointwise_lambda(4));
    println!("  Lambda_3  = {:.10} (= 2 sqrt(38/pi))", biharm::annulus::pointwise_lambda(3));
    println!("  C(4,2)    = {:.6} (improved Sobolev, < 14)", biharm::lorentz::improved_sobolev_constant(4, 2.0)?);
    println!("  c_4       = {:.6} (averaging, = 2 pi sqrt 2 = {:.6})", 2.0 * sphere_area(4)?.sqrt(), 2.0 * PI * 2f64.sqrt());
    Ok(())
}
