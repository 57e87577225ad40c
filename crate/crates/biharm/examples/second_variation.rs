//! Second variation of the biharmonic energy at the singular sphere map
//! x/|x| against the finite-difference oracle on E(Pi(u + t w)).
//!
//! Run with `cargo run --example second_variation`.

use biharm::field::{MapField, ModalScalar, ModalVector, Radial, RadialProjection, VolumeGrid};
use biharm::stability::{self, TangentAlongRadial};
use rand::{Rng, SeedableRng};

fn main() -> biharm::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    let u = RadialProjection { d: 4 };
    let grid = VolumeGrid::annulus(4, 0.5, 1.5, 24, 4)?;
    println!("u = x/|x| on (0.5, 1.5); random compactly supported tangent variations:");
    for i in 0..5 {
        let mut raw = ModalVector { d: 4, components: Vec::new() };
        for _ in 0..4 {
            let mut comp = ModalScalar::new(4);
            for n in 0..=2u32 {
                let dim = biharm::harmonics::dim_harmonics(4, n)?;
                let k = rng.gen_range(1..=dim);
                if rng.gen_bool(0.5) {
                    continue;
                }
                let amp = rng.gen_range(-1.0..1.0f64);
                comp.push(n, k, Radial::Scaled(amp, Box::new(Radial::Bump { lo: 0.55, hi: 1.45 })))?;
            }
            if comp.modes.is_empty() {
                comp.push(0, 1, Radial::Bump { lo: 0.55, hi: 1.45 })?;
            }
            raw.components.push(comp);
        }
        let w = TangentAlongRadial { raw: &raw };
        let q = stability::second_variation(&u, &w, &grid)?;
        let oracle = stability::second_variation_fd_oracle(&u, &w, &grid, 1e-2);
        let first = stability::first_variation_fd(&u, &w, &grid, 1e-3);
        println!(
            "  w_{i}: Q_u(w) = {q:14.8e}   d2 E oracle = {oracle:14.8e}   rel.err = {:.2e}   dE|_0 = {:+.2e}",
            (q - oracle).abs() / oracle.abs(),
            first
        );
    }

    // constant map: the form reduces to the biharmonic energy of w
    let c = biharm::field::ConstantMap { d: 4, point: [1.0, 0.0, 0.0, 0.0] };
    let mut comp = ModalScalar::new(4);
    comp.push(1, 2, Radial::Bump { lo: 0.55, hi: 1.45 })?;
    let w = ModalVector { d: 4, components: vec![comp] };
    let q = stability::second_variation(&c, &w, &grid)?;
    let lap = grid.integrate(|x| {
        let j = w.jet(x);
        j.lap.iter().map(|v| v * v).sum::<f64>()
    });
    println!("constant map: Q = {q:.10e} vs int |Del w|^2 = {lap:.10e}");
    Ok(())
}
