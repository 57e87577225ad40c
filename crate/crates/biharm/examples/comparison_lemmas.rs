//! The dyadic comparison lemmas and the coefficient lower bound on
//! adversarial fields at the tight conformal class b/a = 9/4.
//!
//! Run with `cargo run --example comparison_lemmas`.

use biharm::annulus::{self, Domain, SpectralField, COMPARISON_LEMMAS};
use rand::{Rng, SeedableRng};

fn main() -> biharm::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for d in [3u32, 4, 5] {
        let mut u = SpectralField::random(d, Domain::Annulus { a: 1.0, b: 2.25 }, 5, &mut rng)?;
        u.adversarial_signs();
        let r = rng.gen_range(1.0..1.8);
        let s = rng.gen_range(r..2.25);
        println!("d = {d}, adversarial field, restriction ({r:.3}, {s:.3}):");
        for lemma in COMPARISON_LEMMAS {
            let check = match *lemma {
                "dirichlet_comp3" | "dirichlet_comp_weighted" | "function_comp_dyadic2" => {
                    let v = SpectralField::random(d, Domain::Ball { b: 1.0 }, 4, &mut rng)?;
                    annulus::verify_comparison_lemma(lemma, &v, 0.5, 0.5)?
                }
                "dirichlet_weighted_typeI" => {
                    annulus::verify_comparison_lemma(lemma, &u, r, (2.0 * r).min(2.25))?
                }
                _ => annulus::verify_comparison_lemma(lemma, &u, r, s)?,
            };
            println!(
                "  {:28} {}   restricted = {:10.4e}  bound = {:10.4e}",
                check.lemma_id,
                if check.pass { "pass" } else { "FAIL" },
                check.lhs,
                check.rhs
            );
        }
        let mut w = u.clone();
        if d <= 4 {
            w.project_zero_flux();
        }
        let check = annulus::verify_coefficient_lower_bound(&w)?;
        println!(
            "  {:28} {}   coefficient sum = {:10.4e}  <= int u^2 = {:10.4e}",
            check.lemma_id,
            if check.pass { "pass" } else { "FAIL" },
            check.lhs,
            check.rhs
        );
    }
    Ok(())
}
