//! Mode-wise Poisson solves on the unit ball: the shell gradient bound
//! 1/j_{1,1}, the weighted Wente-type estimate with Gamma_1 and the dyadic
//! decay of solutions away from their source shell.
//!
//! Run with `cargo run --example poisson_shells`.

use biharm::field::Radial;
use biharm::poisson::{self, RadialSource};
use rand::SeedableRng;

fn main() -> biharm::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);

    // constant source on the radial mode: u = (r^2 - 1)/8
    let mut f = RadialSource::new(4);
    f.push(0, 1, Radial::Poly(vec![1.0]))?;
    let sol = poisson::solve_dirichlet_ball(&f)?;
    println!("Delta u = 1 on B(0,1):");
    for r in [0.25, 0.5, 0.75] {
        let (u, _) = sol.modes[0].eval(r);
        println!("  u({r:.2}) = {u:.10}   closed form (r^2-1)/8 = {:.10}", (r * r - 1.0) / 8.0);
    }

    // shell-supported source: gradient bound with 1/j_{1,1}
    let mut g = RadialSource::new(4);
    g.push(1, 2, Radial::Bump { lo: 0.26, hi: 0.49 })?;
    let check = poisson::verify_shell_gradient_bound(&g, 1)?;
    println!(
        "shell bound: ||grad u||_2 = {:.6e} <= ||f||_2/j_(1,1) = {:.6e} ({})",
        check.lhs,
        check.rhs,
        if check.pass { "pass" } else { "FAIL" }
    );

    // weighted Wente estimate over random multi-shell sources
    println!("weighted gradient lemma, Gamma_1 = {:.7}:", poisson::gamma_one());
    for _ in 0..5 {
        let f = poisson::random_multishell_source(4, 3, 4, &mut rng)?;
        let check = poisson::verify_weighted_gradient_lemma(&f)?;
        println!(
            "  || |x| grad u ||_2 = {:10.4e} <= Gamma_1 ||omega f||_2 = {:10.4e} ({})",
            check.lhs,
            check.rhs,
            if check.pass { "pass" } else { "FAIL" }
        );
    }

    // solution decay away from a deep source shell
    let mut h = RadialSource::new(4);
    h.push(1, 1, Radial::Bump { lo: 2f64.powi(-7), hi: 2f64.powi(-6) })?;
    let u = poisson::solve_dirichlet_ball(&h)?;
    println!("per-shell L2 norms of the solution (source in shell k = 6):");
    for k in (0..=8).rev() {
        let lo = 2f64.powi(-(k as i32 + 1));
        let hi = 2f64.powi(-(k as i32));
        println!("  shell {k}: {:.4e}", u.l2_energy(lo, hi).sqrt());
    }
    Ok(())
}
