//! Acceptance battery: one test per criterion, each printing a pass/fail
//! line with its wall time. Every tolerance is pinned in code.

use biharm::harness::{comparison_lemma_battery, run_suite, SuiteConfig, SuiteReport};
use std::time::Instant;

fn report_line(n: u32, name: &str, report: &SuiteReport, budget_s: f64) {
    let status = if report.all_pass() { "PASS" } else { "FAIL" };
    println!(
        "acceptance {n} ({name}): {status} - {}/{} checks in {} ms (budget {budget_s} s)",
        report.summary.pass,
        report.checks.len(),
        report.wall_ms
    );
    for c in report.checks.iter().filter(|c| !c.pass) {
        println!("  failing: {c:?}");
    }
}

fn assert_report(n: u32, name: &str, report: &SuiteReport, budget_s: f64) {
    report_line(n, name, report, budget_s);
    assert!(report.all_pass(), "criterion {n} ({name}) has failing checks");
    assert!(
        (report.wall_ms as f64) < budget_s * 1000.0,
        "criterion {n} ({name}) exceeded its {budget_s}s budget: {} ms",
        report.wall_ms
    );
}

/// Criterion 1: the constant ledger reproduces every pinned value (< 5 s).
#[test]
fn acceptance_1_constant_ledger() {
    let report = run_suite("constants", &SuiteConfig::default()).unwrap();
    assert_report(1, "constants", &report, 5.0);
    // spot-check the pinned entries are present
    for id in [
        "j_0_first_zero",
        "j_half_first_zero",
        "j_1_first_zero",
        "ball_dirichlet_lambda1",
        "gamma1",
        "gamma1_squared",
        "lambda4_formula",
        "lambert_2w_half_sqrt2",
        "lambert_w_3_2",
        "lambert_exp_w_3_2",
        "lambert_2_3w_9_4",
        "lambert_gap_above_one_fiftieth",
        "gamma_w",
        "sobolev_8_2_34_below_14",
        "averaging_c4",
        "weight_l2inf_r4",
    ] {
        assert!(
            report.checks.iter().any(|c| c.lemma_id == id),
            "ledger entry {id} missing"
        );
    }
}

/// Criterion 2: spectral norms match tensor quadrature within 1e-7 over 50
/// random fields for d in {3,4}, N <= 6; flux is radius-independent to 1e-10;
/// the generating-function identities hold to 1e-10 at nine points (< 60 s).
#[test]
fn acceptance_2_spectral_vs_quadrature() {
    let config = SuiteConfig { tol: 1e-7, ..Default::default() };
    let report = run_suite("annulus-norms", &config).unwrap();
    assert_report(2, "annulus-norms", &report, 60.0);
}

/// Criterion 3: comparison lemmas and the coefficient lower bound pass on 100
/// randomized (field, r, s) instances including adversarial signs at the
/// tight conformal class b/a = 9/4.
#[test]
fn acceptance_3_comparison_lemmas() {
    let start = Instant::now();
    let checks = comparison_lemma_battery(&SuiteConfig::default(), 100).unwrap();
    let pass = checks.iter().filter(|c| c.pass).count();
    let status = if pass == checks.len() { "PASS" } else { "FAIL" };
    println!(
        "acceptance 3 (comparison-lemmas): {status} - {pass}/{} checks in {} ms",
        checks.len(),
        start.elapsed().as_millis()
    );
    for c in checks.iter().filter(|c| !c.pass) {
        println!("  failing: {c:?}");
    }
    assert_eq!(pass, checks.len());
    // the battery covers the full registry plus the lower bound
    for id in [
        "dirichlet_comp",
        "dirichlet_comp2",
        "dirichlet_comp_weighted0",
        "dirichlet_comp_weighted2",
        "dirichlet_comp3",
        "dirichlet_comp_weighted",
        "function_comp_dyadic",
        "function_comp_dyadic2",
        "no_flux_ineq",
    ] {
        assert!(checks.iter().any(|c| c.lemma_id == id), "lemma {id} missing");
    }
}

/// Criterion 4: the Lorentz machinery (closed form vs integral at 1e-12,
/// averaging lemma over 100 simple functions for d in {2,3,4} and q in {1,2},
/// the combinatorial core over 10^4 tuples, squaring equality, duality,
/// improved Sobolev with constant 14) (< 30 s).
#[test]
fn acceptance_4_lorentz() {
    let config = SuiteConfig { ensemble: 100, ..Default::default() };
    let report = run_suite("lorentz", &config).unwrap();
    assert_report(4, "lorentz", &report, 30.0);
    let averaging = run_suite("averaging", &config).unwrap();
    assert!(averaging.all_pass(), "averaging suite failed");
}

/// Criterion 5: shell bound 1/j_{1,1}, weighted gradient lemma with Gamma_1,
/// decay cores, and iteration-constant stability within 20% (< 120 s).
#[test]
fn acceptance_5_poisson_wente() {
    let report = run_suite("poisson-wente", &SuiteConfig::default()).unwrap();
    assert_report(5, "poisson-wente", &report, 120.0);
}

/// Criterion 6: the eight extension inequality rows on 30 random fields with
/// 2a < b, the norm equivalence with Gamma_W, and the Poincare-Wirtinger
/// constant for d in {3,...,10} with positive margin (< 120 s).
#[test]
fn acceptance_6_whitney() {
    let report = run_suite("whitney", &SuiteConfig::default()).unwrap();
    assert_report(6, "whitney", &report, 120.0);
    // positive Neumann-root margins for every dimension
    for c in report.checks.iter().filter(|c| c.lemma_id == "dyadic_poincare_wirtinger") {
        assert!(c.margin > 0.0, "no margin: {c:?}");
    }
}

/// Criterion 7: per-mode Rayleigh minima at a = 1, b = e^50 stay above
/// (4 + pi^2/2500)(pi^2/2500) with positive margin for modes n <= 10 at basis
/// 40; the gradient inequality likewise; the Holder-weight constant is
/// positive and refinement-stable for beta in {1/2, 1, 2} (< 60 s).
#[test]
fn acceptance_7_rellich() {
    let report = run_suite("rellich", &SuiteConfig::default()).unwrap();
    assert_report(7, "rellich", &report, 60.0);
    let modes = report
        .checks
        .iter()
        .filter(|c| c.lemma_id == "rellich_value_weight4")
        .count();
    assert_eq!(modes, 11, "expected modes 0..=10");
    for c in &report.checks {
        if c.lemma_id.starts_with("rellich_") {
            assert!(c.margin > 0.0, "no positive margin: {c:?}");
        }
    }
}

/// Criterion 8: Pohozaev flux constancy with Q = 9 pi^2 for x/|x| (1e-7
/// relative), the surface identity for ball-regular fields (1e-6), the
/// second variation against the finite-difference oracle (1e-4 relative on
/// 10 random tangent variations), and exact biharmonic-form equality at a
/// constant map (< 120 s).
#[test]
fn acceptance_8_variational() {
    let start = Instant::now();
    let pohozaev = run_suite("pohozaev", &SuiteConfig::default()).unwrap();
    let second = run_suite("second-variation", &SuiteConfig::default()).unwrap();
    let pass = pohozaev.summary.pass + second.summary.pass;
    let total = pohozaev.checks.len() + second.checks.len();
    let status = if pass == total { "PASS" } else { "FAIL" };
    println!(
        "acceptance 8 (variational): {status} - {pass}/{total} checks in {} ms",
        start.elapsed().as_millis()
    );
    for c in pohozaev.checks.iter().chain(&second.checks).filter(|c| !c.pass) {
        println!("  failing: {c:?}");
    }
    assert_eq!(pass, total);
    assert!(start.elapsed().as_secs_f64() < 120.0);
    let fd = second
        .checks
        .iter()
        .filter(|c| c.lemma_id == "second_variation_vs_fd")
        .count();
    assert_eq!(fd, 10, "expected 10 oracle comparisons");
}

/// Reports are reproducible: identical (config, seed) give identical bytes.
#[test]
fn reports_reproducible() {
    let config = SuiteConfig { ensemble: 6, ..Default::default() };
    for suite in ["harmonics", "pohozaev", "second-variation"] {
        let a = run_suite(suite, &config).unwrap().to_json_string();
        let b = run_suite(suite, &config).unwrap().to_json_string();
        assert_eq!(a, b, "suite {suite} not deterministic");
    }
}
