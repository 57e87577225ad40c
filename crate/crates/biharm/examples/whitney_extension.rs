//! Extend an annulus field to the whole space by cutoff, mean subtraction and
//! inversion, then check the eight extension inequality rows, the norm
//! equivalence with Gamma_W, and the Poincare-Wirtinger roots.
//!
//! Run with `cargo run --example whitney_extension`.

use biharm::calculus::{self, WhitneyExtension};
use biharm::field::{ModalScalar, Radial};
use rand::{Rng, SeedableRng};

fn main() -> biharm::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    let mut u = ModalScalar::new(4);
    for n in 0..=2u32 {
        let dim = biharm::harmonics::dim_harmonics(4, n)?;
        for k in 1..=dim {
            if rng.gen_bool(0.5) {
                continue;
            }
            let a = rng.gen_range(-1.0..1.0f64);
            let p = rng.gen_range(-2.0..2.0f64);
            u.push(n, k, Radial::PowerPair { ca: a, pa: p, cb: 0.2 * a, pb: p - 1.0 })?;
        }
    }
    if u.modes.is_empty() {
        u.push(1, 1, Radial::power(1.0, 1.0))?;
    }

    let ext = WhitneyExtension::new(&u, 0.5, 2.0, 4)?;
    println!("extension plateaus: inner mean = {:.6}, outer mean = {:.6}", ext.mean_inner, ext.mean_outer);
    let norms = calculus::whitney_norms(&ext, 20, 4)?;
    println!(
        "annulus norms: |Hess|_2 = {:.4}, |grad/x|_2 = {:.4}, |grad|_4 = {:.4}, |grad|_(4,2) = {:.4}",
        norms.hess_l2, norms.weighted_grad_l2, norms.grad_l4, norms.grad_l42
    );
    println!(
        "extension norms: |Hess|_2 = {:.4}, |grad/x|_2 = {:.4}, |grad|_4 = {:.4}, |grad|_(4,2) = {:.4}",
        norms.hess_l2_ext, norms.weighted_grad_l2_ext, norms.grad_l4_ext, norms.grad_l42_ext
    );
    for check in calculus::verify_whitney_inequalities(&norms) {
        println!(
            "  {:28} {}   {:10.4e} <= {:10.4e}",
            check.lemma_id,
            if check.pass { "pass" } else { "FAIL" },
            check.lhs,
            check.rhs
        );
    }
    for check in calculus::verify_norm_equivalence(&norms) {
        println!(
            "  {:28} {}   Gamma_W = {:.3}",
            check.lemma_id,
            if check.pass { "pass" } else { "FAIL" },
            check.params["gamma_w"]
        );
    }

    println!("Poincare-Wirtinger Neumann roots (mode 0):");
    for d in 3..=10u32 {
        let check = calculus::verify_poincare_wirtinger(d, 0)?;
        println!(
            "  d = {d:2}: mu = {:9.5} > lambda + (d-2)^2/4 = {:9.5}, constant 4/(d-2)^2 = {:.5}",
            check.params["mu"],
            check.rhs.max(check.lhs),
            check.params["constant"]
        );
    }
    Ok(())
}
