//! Exact rearrangements and Lorentz norms of simple functions: the closed
//! `L^{2,1}` form, the sphere-averaging lemma, duality, exponentiation
//! stability and the improved Sobolev embedding.
//!
//! Run with `cargo run --example lorentz_rearrangement`.

use biharm::lorentz::{self, Flavor, LorentzExponents, SimpleFunction};
use rand::SeedableRng;

fn main() -> biharm::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);

    // two-cell staircase: values sorted into a decreasing step function
    let f = SimpleFunction::new(4, &[(1.0, 0.5, 0.9, 0.6), (2.0, 1.0, 1.5, 0.4)])?;
    let step = f.rearrangement();
    println!("two-cell rearrangement: values {:?}", step.vals);
    println!("cumulative measures     {:?}", step.cum);

    let e21 = LorentzExponents::new(2.0, 1.0)?;
    println!("closed form  ||f||_(2,1) = {:.12}", f.l21_closed_form());
    println!("integral def ||f||_(2,1) = {:.12}", f.lorentz(e21, Flavor::Norm));

    // averaging lemma over a random simple function
    for d in [2u32, 3, 4] {
        let g = lorentz::random_simple_function(d, 0.5, 2.0, 8, &mut rng);
        let check = lorentz::verify_averaging_lemma(&g, 1.0)?;
        println!(
            "averaging lemma d={d}: ||gbar||_(2,1) = {:.5} <= {:.5} ({})",
            check.lhs,
            check.rhs,
            if check.pass { "pass" } else { "FAIL" }
        );
    }

    // combinatorial core at the worked pair c = (1,2), D = (1,1)
    let core = lorentz::averaging_core_inequality(&[1.0, 2.0], &[1.0, 1.0]);
    println!("combinatorial core: sqrt(5) = {:.4} <= sqrt(2)+1 = {:.4}", core.lhs, core.rhs);

    // squaring stability and duality
    let g = lorentz::random_simple_function(4, 0.5, 2.0, 6, &mut rng);
    let sq = lorentz::verify_power_stability(&g, 2.0, e21)?;
    println!("squaring stability (seminorm equality): {}", if sq.pass { "pass" } else { "FAIL" });
    let h = lorentz::random_simple_function(4, 0.5, 2.0, 6, &mut rng);
    let dual = lorentz::duality_pairing_check(&g, &h)?;
    println!("duality: int |g h| = {:.5} <= |g|_(2,1) |h|_(2,inf) = {:.5}", dual.lhs, dual.rhs);

    // power weights
    println!(
        "|| 1/|x|^2 ||_(2,inf)(R^4) declared constant = {:.8} (= 2 pi sqrt 2)",
        lorentz::power_weight_constant(4, 2.0)?
    );
    Ok(())
}
