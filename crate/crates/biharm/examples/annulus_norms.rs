//! Exact spectral energies of a random harmonic field on an annulus versus
//! tensor quadrature, plus the radius-independent boundary flux.
//!
//! Run with `cargo run --example annulus_norms`.

use biharm::annulus::{self, Domain, Quantity, SpectralField};
use rand::SeedableRng;

fn main() -> biharm::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for d in [3u32, 4] {
        let u = SpectralField::random(d, Domain::Annulus { a: 0.5, b: 1.2 }, 5, &mut rng)?;
        println!("d = {d}, random field with N = 5 on (0.5, 1.2):");
        let cases = [
            ("int u^2            ", annulus::l2_norm(&u), Quantity::Value),
            ("int |grad u|^2     ", annulus::dirichlet_norm(&u), Quantity::GradNorm),
            ("int |grad u|^2/r^2 ", annulus::weighted_dirichlet_norm(&u), Quantity::WeightedGradNorm),
            ("int |Hess u|^2     ", annulus::hessian_norm(&u), Quantity::HessNorm),
        ];
        for (name, exact, q) in cases {
            let quad = annulus::quadrature_energy(&u, q, 32, 6)?;
            println!(
                "  {name} exact = {exact:14.8e}   quadrature = {quad:14.8e}   rel.err = {:.2e}",
                (exact - quad).abs() / quad.abs()
            );
        }
        let f1 = annulus::flux(&u, 0.6)?;
        let f2 = annulus::flux(&u, 1.1)?;
        println!("  flux at r = 0.6: {f1:.10e}, at r = 1.1: {f2:.10e} (difference {:.1e})", (f1 - f2).abs());
    }
    Ok(())
}
