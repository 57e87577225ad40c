//! Pohozaev flux of the singular biharmonic map x/|x| (constant 9 pi^2 at
//! every radius) and the surface identity for ball-regular biharmonic fields.
//!
//! Run with `cargo run --example pohozaev_flux`.

use biharm::field::{ModalScalar, ModalVector, Radial, RadialProjection};
use biharm::stability;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn main() -> biharm::Result<()> {
    let u = RadialProjection { d: 4 };
    println!("pohozaev flux of x/|x| (exact value 9 pi^2 = {:.8}):", 9.0 * PI * PI);
    for r in [0.3, 0.7, 1.3, 2.1] {
        println!("  Q({r:.1}) = {:.10}", stability::pohozaev_flux(&u, r, 8)?);
    }
    println!("the singular map fails the surface identity but keeps flux constancy:");
    for check in stability::verify_pohozaev_identity(&u, &[0.5, 1.0, 1.5], 8)? {
        println!("  {} at r = {}: {}", check.lemma_id, check.params["r"], if check.pass { "pass" } else { "FAIL" });
    }

    // ball-regular componentwise-biharmonic field: both surface integrals agree
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut v = ModalVector { d: 4, components: Vec::new() };
    for _ in 0..3 {
        let mut comp = ModalScalar::new(4);
        for n in 0..=2u32 {
            let dim = biharm::harmonics::dim_harmonics(4, n)?;
            let k = rng.gen_range(1..=dim);
            comp.push(n, k, Radial::PowerPair {
                ca: rng.gen_range(-1.0..1.0),
                pa: n as f64,
                cb: rng.gen_range(-1.0..1.0),
                pb: n as f64 + 2.0,
            })?;
        }
        v.components.push(comp);
    }
    println!("ball-regular biharmonic field:");
    for check in stability::verify_pohozaev_identity(&v, &[0.4, 0.8, 1.2], 10)? {
        println!(
            "  identity at r = {}: lhs = {:12.6e}  rhs = {:12.6e} ({})",
            check.params["r"],
            check.lhs,
            check.rhs,
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    for r in [0.5, 1.1] {
        println!("  flux Q({r}) = {:.3e} (vanishes across the origin)", stability::pohozaev_flux(&v, r, 10)?);
    }
    Ok(())
}
