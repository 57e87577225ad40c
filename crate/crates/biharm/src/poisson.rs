//! Mode-wise spectral Poisson solver on the unit ball with zero Dirichlet
//! data, and the dyadic weighted (Wente-type) gradient estimates built on it.
//!
//! Per mode `(n, k)` the radial problem
//! `u'' + (d-1)/r u' - lambda_n/r^2 u = f`, `u(1) = 0`, regular at 0, is
//! solved by variation of parameters with the homogeneous pair
//! `{r^n, r^{-(n+d-2)}}`; the moment integrals are evaluated panel-wise by
//! Gauss quadrature, which is exact on the piecewise-polynomial sources used
//! throughout.

use crate::check::LemmaCheck;
use crate::field::Radial;
use crate::harmonics::{gauss_legendre, HarmonicIndex};
use crate::specfun::{bessel_first_zero, sphere_area};
use crate::{Error, Result};

/// The logarithmic weight `omega(x) = |x| (1 + log2(1/|x|)) log(e + log2(1/|x|))`.
pub fn wente_weight(r: f64) -> f64 {
    let l = (1.0 / r).log2();
    r * (1.0 + l) * (std::f64::consts::E + l).ln()
}

/// Closed form of the weighted-gradient constant:
/// `Gamma_1 = (1/j_{1,1}) sqrt(72 + 2^14/(3^3 7^2) + 192 (1/log 2 + 1/(2 log^2 2)))`.
pub fn gamma_one() -> f64 {
    let j11 = bessel_first_zero(1.0).expect("first Bessel zero");
    let l2 = 2f64.ln();
    (72.0 + 16384.0 / 1323.0 + 192.0 * (1.0 / l2 + 1.0 / (2.0 * l2 * l2))).sqrt() / j11
}

/// Recorded empirical constant for the unweighted-gradient variant of the
/// dyadic lemma (no closed form is available for it).
pub const FITTED_GAMMA3: f64 = 2.0;

/// Mode-truncated source on the unit ball: radial profiles per harmonic.
pub struct RadialSource {
    pub d: u32,
    pub modes: Vec<(HarmonicIndex, Radial)>,
}

impl RadialSource {
    pub fn new(d: u32) -> Self {
        RadialSource { d, modes: Vec::new() }
    }

    pub fn push(&mut self, n: u32, k: u64, profile: Radial) -> Result<()> {
        self.modes.push((HarmonicIndex::new(self.d, n, k)?, profile));
        Ok(())
    }

    /// Support breakpoints of all profiles (panel edges for quadrature).
    fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![0.0, 1.0];
        for (_, p) in &self.modes {
            radial_breaks(p, &mut out);
        }
        out.retain(|&r| (0.0..=1.0).contains(&r));
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }
}

fn radial_breaks(r: &Radial, acc: &mut Vec<f64>) {
    match r {
        Radial::Bump { lo, hi } | Radial::RampDown { lo, hi } => {
            acc.push(*lo);
            acc.push(*hi);
        }
        Radial::Product(a, b) => {
            radial_breaks(a, acc);
            radial_breaks(b, acc);
        }
        Radial::Sum(terms) => {
            for t in terms {
                radial_breaks(t, acc);
            }
        }
        Radial::Scaled(_, inner) => radial_breaks(inner, acc),
        _ => {}
    }
}

/// Gauss integration of `g` over panels defined by sorted breakpoints.
fn panel_integral(breaks: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let (gx, gw) = gauss_legendre(24);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&x, &wq) in gx.iter().zip(&gw) {
            acc += wq * half * g(mid + half * x);
        }
    }
    acc
}

/// Panels combining the source breakpoints with dyadic refinement near 0.
fn solution_panels(source_breaks: &[f64], k_max: u32) -> Vec<f64> {
    let mut out: Vec<f64> = source_breaks.to_vec();
    for k in 0..=k_max {
        out.push(2f64.powi(-(k as i32)));
    }
    out.push(0.0);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out
}

/// One solved radial mode.
pub struct ModeSolution {
    pub n: u32,
    pub lam: f64,
    d: u32,
    profile: Radial,
    breaks: Vec<f64>,
    /// cumulative `int_0^{breaks[i]} phi f s^{d-1} ds`
    cum_phi: Vec<f64>,
    /// tail `int_{breaks[i]}^1 psi f s^{d-1} ds`
    tail_psi: Vec<f64>,
}

impl ModeSolution {
    fn new(d: u32, n: u32, profile: Radial, breaks: &[f64]) -> Self {
        let lam = crate::harmonics::laplace_eigenvalue(d, n);
        let nf = n as f64;
        let df = d as f64;
        let phi = move |s: f64| s.powf(nf);
        let psi = move |s: f64| s.powf(-(nf + df - 2.0)) - s.powf(nf);
        let mut cum_phi = vec![0.0; breaks.len()];
        let mut tail_psi = vec![0.0; breaks.len()];
        for i in 1..breaks.len() {
            let seg = panel_integral(&breaks[i - 1..=i], |s| {
                phi(s) * profile.jet(s)[0] * s.powi(d as i32 - 1)
            });
            cum_phi[i] = cum_phi[i - 1] + seg;
        }
        for i in (0..breaks.len() - 1).rev() {
            let seg = panel_integral(&breaks[i..=i + 1], |s| {
                psi(s) * profile.jet(s)[0] * s.powi(d as i32 - 1)
            });
            tail_psi[i] = tail_psi[i + 1] + seg;
        }
        ModeSolution { n, lam, d, profile, breaks: breaks.to_vec(), cum_phi, tail_psi }
    }

    fn locate(&self, r: f64) -> usize {
        match self.breaks.binary_search_by(|b| b.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(self.breaks.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.breaks.len() - 2),
        }
    }

    /// `(u(r), u'(r))` of the mode.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let nf = self.n as f64;
        let df = self.d as f64;
        let c = -(2.0 * nf + df - 2.0);
        let i = self.locate(r);
        let lo = self.breaks[i];
        let hi = self.breaks[i + 1];
        let gauss_phi = panel_integral(&[lo, r.min(hi)], |s| {
            s.powf(nf) * self.profile.jet(s)[0] * s.powi(self.d as i32 - 1)
        });
        let int_phi = self.cum_phi[i] + gauss_phi;
        let gauss_psi = panel_integral(&[lo, r.min(hi)], |s| {
            (s.powf(-(nf + df - 2.0)) - s.powf(nf)) * self.profile.jet(s)[0]
                * s.powi(self.d as i32 - 1)
        });
        // int_r^1 = tail(lo) - int_lo^r
        let int_psi = self.tail_psi[i] - gauss_psi;
        let phi = r.powf(nf);
        let dphi = if self.n == 0 { 0.0 } else { nf * r.powf(nf - 1.0) };
        let m = nf + df - 2.0;
        let psi = r.powf(-m) - phi;
        let dpsi = -m * r.powf(-m - 1.0) - dphi;
        let u = (psi * int_phi + phi * int_psi) / c;
        let du = (dpsi * int_phi + dphi * int_psi) / c;
        (u, du)
    }
}

/// Solution of the ball Dirichlet problem, mode by mode.
pub struct BallSolution {
    pub d: u32,
    pub modes: Vec<ModeSolution>,
    panels: Vec<f64>,
}

/// Solve `Delta u = f` in `B(0,1)`, `u = 0` on the boundary.
pub fn solve_dirichlet_ball(f: &RadialSource) -> Result<BallSolution> {
    if f.d < 3 {
        return Err(Error::Domain("solver needs d >= 3".into()));
    }
    let breaks = f.breakpoints();
    let panels = solution_panels(&breaks, 24);
    let modes = f
        .modes
        .iter()
        .map(|(idx, p)| ModeSolution::new(f.d, idx.n, p.clone(), &panels))
        .collect();
    Ok(BallSolution { d: f.d, modes, panels })
}

impl BallSolution {
    /// `sum_modes beta int (u'^2 + lam u^2/r^2) r^{d-1} dr` over `lo < r < hi`.
    pub fn gradient_energy(&self, lo: f64, hi: f64) -> f64 {
        let beta = sphere_area(self.d).expect("sphere area");
        let panels = self.clip_panels(lo, hi);
        self.modes
            .iter()
            .map(|m| {
                beta * panel_integral(&panels, |r| {
                    let (u, du) = m.eval(r);
                    (du * du + m.lam * u * u / (r * r)) * r.powi(self.d as i32 - 1)
                })
            })
            .sum()
    }

    /// Same with an extra radial weight `w(r)^2`.
    pub fn weighted_gradient_energy(&self, lo: f64, hi: f64, w: impl Fn(f64) -> f64) -> f64 {
        let beta = sphere_area(self.d).expect("sphere area");
        let panels = self.clip_panels(lo, hi);
        self.modes
            .iter()
            .map(|m| {
                beta * panel_integral(&panels, |r| {
                    let ww = w(r);
                    let (u, du) = m.eval(r);
                    ww * ww * (du * du + m.lam * u * u / (r * r)) * r.powi(self.d as i32 - 1)
                })
            })
            .sum()
    }

    /// `sum_modes beta int u^2 r^{d-1} dr` over `lo < r < hi`.
    pub fn l2_energy(&self, lo: f64, hi: f64) -> f64 {
        let beta = sphere_area(self.d).expect("sphere area");
        let panels = self.clip_panels(lo, hi);
        self.modes
            .iter()
            .map(|m| {
                beta * panel_integral(&panels, |r| {
                    let (u, _) = m.eval(r);
                    u * u * r.powi(self.d as i32 - 1)
                })
            })
            .sum()
    }

    fn clip_panels(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut panels: Vec<f64> =
            self.panels.iter().copied().filter(|&r| r > lo && r < hi).collect();
        panels.push(lo);
        panels.push(hi);
        panels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        panels
    }

    /// Flux of the solution through the sphere of radius `r`:
    /// `beta(d) r^{d-1} u_0'(r)` (only the radial mode contributes).
    pub fn flux(&self, r: f64) -> f64 {
        let beta = sphere_area(self.d).expect("sphere area");
        self.modes
            .iter()
            .filter(|m| m.n == 0)
            .map(|m| beta * r.powi(self.d as i32 - 1) * m.eval(r).1)
            .sum()
    }
}

/// `L^2` energy of the source, with an optional radial weight.
pub fn source_energy(f: &RadialSource, w: impl Fn(f64) -> f64) -> f64 {
    let beta = sphere_area(f.d).expect("sphere area");
    let mut breaks = f.breakpoints();
    if breaks.len() < 2 {
        breaks = vec![0.0, 1.0];
    }
    f.modes
        .iter()
        .map(|(_, p)| {
            beta * panel_integral(&breaks, |r| {
                let ww = w(r);
                let v = p.jet(r)[0];
                ww * ww * v * v * r.powi(f.d as i32 - 1)
            })
        })
        .sum()
}

// ---------------------------------------------------------------------------
// verification operations
// ---------------------------------------------------------------------------

/// Elementary gradient bound `||grad u||_2 <= (1/j_{1,1}) ||f||_2` for sources
/// supported in the extended shell `A~_k`.
pub fn verify_shell_gradient_bound(f: &RadialSource, k: u32) -> Result<LemmaCheck> {
    let lo = 2f64.powi(-(k as i32 + 1));
    let hi = 2f64.powi(-(k as i32 - 1)).min(1.0);
    for w in f.breakpoints().windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let inside = (lo..=hi).contains(&mid);
        let has_mass = f.modes.iter().any(|(_, p)| p.jet(mid)[0].abs() > 1e-14);
        if has_mass && !inside {
            return Err(Error::Precondition(format!(
                "source not supported in the shell ({lo}, {hi})"
            )));
        }
    }
    let u = solve_dirichlet_ball(f)?;
    let j11 = bessel_first_zero(1.0)?;
    let lhs = u.gradient_energy(0.0, 1.0).sqrt();
    let rhs = source_energy(f, |_| 1.0).sqrt() / j11;
    Ok(LemmaCheck::le("elementary_gradient_estimate", lhs, rhs, 1e-9).with("k", k as f64))
}

/// Weighted gradient lemma:
/// `|| |x| grad u ||_2 <= Gamma_1 || omega f ||_2` with the closed-form
/// `Gamma_1 = 6.1824966...`.
pub fn verify_weighted_gradient_lemma(f: &RadialSource) -> Result<LemmaCheck> {
    let u = solve_dirichlet_ball(f)?;
    let g1 = gamma_one();
    let lhs = u.weighted_gradient_energy(0.0, 1.0, |r| r).sqrt();
    let rhs = g1 * source_energy(f, wente_weight).sqrt();
    Ok(LemmaCheck::le("dyadic_gradient_weighted", lhs, rhs, 1e-9).with("gamma1", g1))
}

/// Unweighted variant `||grad u||_2 <= Gamma_3 || omega f ||_2` with the
/// recorded empirical constant [`FITTED_GAMMA3`].
pub fn verify_weighted_dirichlet_lemma(f: &RadialSource) -> Result<LemmaCheck> {
    let u = solve_dirichlet_ball(f)?;
    let lhs = u.gradient_energy(0.0, 1.0).sqrt();
    let rhs_base = source_energy(f, wente_weight).sqrt();
    Ok(LemmaCheck::le("weighted_modified_dirichlet", lhs, FITTED_GAMMA3 * rhs_base, 1e-9)
        .with("fitted_gamma3", FITTED_GAMMA3)
        .with("ratio", if rhs_base > 0.0 { lhs / rhs_base } else { 0.0 }))
}

/// Decay-lemma cores for a source supported inside `B_{2^{-j}}` with zero
/// radial mean (hence zero flux):
/// `int_{A_k} u^2 <= (8/3) 2^{2(k+1-j)} int_{B_1 \ B_{2^{-j}}} u^2` for
/// `k < j`; when the support even lies in the shell `A_j`,
/// `int_{B_{2^{-k}}} u^2 <= 2^{4(j+1-k)} int_{B_{2^{-j}}} u^2` for `k > j`.
pub fn verify_decay_lemma(f: &RadialSource, j: u32) -> Result<Vec<LemmaCheck>> {
    let cap = 2f64.powi(-(j as i32));
    let shell_lo = 2f64.powi(-(j as i32 + 1));
    let mut radial_mean = 0.0;
    let mut in_shell = true;
    for (idx, p) in &f.modes {
        let breaks = {
            let mut b = vec![0.0, 1.0];
            radial_breaks(p, &mut b);
            b.sort_by(|a, c| a.partial_cmp(c).unwrap());
            b
        };
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if p.jet(mid)[0].abs() > 1e-14 {
                if mid > cap {
                    return Err(Error::Precondition(format!(
                        "source reaches radius {mid} beyond 2^-{j}"
                    )));
                }
                if mid < shell_lo {
                    in_shell = false;
                }
            }
        }
        if idx.n == 0 {
            radial_mean += panel_integral(&breaks, |r| p.jet(r)[0] * r.powi(f.d as i32 - 1));
        }
    }
    if radial_mean.abs() > 1e-10 {
        return Err(Error::Precondition("radial mode must have zero mean (zero flux)".into()));
    }
    let u = solve_dirichlet_ball(f)?;
    let mut checks = Vec::new();
    // the exterior-harmonic part has zero flux
    let flux_r = 1.5 * cap;
    if flux_r < 1.0 {
        checks.push(
            LemmaCheck::eq("decay_zero_flux", u.flux(flux_r), 0.0, 1e-8).with("r", flux_r),
        );
    }
    let outer = u.l2_energy(cap, 1.0);
    for k in 0..j {
        let lhs = u.l2_energy(2f64.powi(-(k as i32 + 1)), 2f64.powi(-(k as i32)));
        let factor = 8.0 / 3.0 * 2f64.powi(2 * (k as i32 + 1 - j as i32));
        checks.push(
            LemmaCheck::le("decay_outer_shells", lhs, factor * outer, 1e-9).with("k", k as f64),
        );
    }
    if in_shell {
        let inner_ref = u.l2_energy(0.0, cap);
        for k in (j + 1)..=(j + 4) {
            let lhs = u.l2_energy(0.0, 2f64.powi(-(k as i32)));
            let factor = 2f64.powi(4 * (j as i32 + 1 - k as i32));
            checks.push(
                LemmaCheck::le("decay_inner_balls", lhs, factor * inner_ref, 1e-9)
                    .with("k", k as f64),
            );
        }
    }
    Ok(checks)
}

/// Dyadic iteration inequalities: the smallest constants `C_u(alpha)` and
/// `C_g(alpha)` such that for all `k <= k_max`
/// `||u||_{L^2(A_k)}    <= 4^{-k} ||u||_{L^2(A_0)} + C (1-alpha)^{-3} S_k` and
/// `||grad u/|x|||_{A_k} <= 2^{-k} ||grad u/|x|||_{A_0} + C (1-alpha)^{-3} S_k`
/// with `S_k = (sum_l 2^{-2 alpha |l-k+1|} int_{A_l} f^2)^{1/2}`.
pub fn fit_iteration_constants(
    sources: &[RadialSource],
    alpha: f64,
    k_max: u32,
) -> Result<(f64, f64)> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Precondition(format!("need alpha in (0,1), got {alpha}")));
    }
    let l_max = k_max + 4;
    let mut c_u: f64 = 0.0;
    let mut c_g: f64 = 0.0;
    for f in sources {
        let u = solve_dirichlet_ball(f)?;
        let shell = |k: u32| (2f64.powi(-(k as i32 + 1)), 2f64.powi(-(k as i32)));
        let f_shell: Vec<f64> = (0..=l_max)
            .map(|l| {
                let (lo, hi) = shell(l);
                let mut breaks = f.breakpoints();
                breaks.retain(|&r| r > lo && r < hi);
                breaks.push(lo);
                breaks.push(hi);
                breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
                f.modes
                    .iter()
                    .map(|(_, p)| {
                        sphere_area(f.d).unwrap()
                            * panel_integral(&breaks, |r| {
                                let v = p.jet(r)[0];
                                v * v * r.powi(f.d as i32 - 1)
                            })
                    })
                    .sum::<f64>()
            })
            .collect();
        let (lo0, hi0) = shell(0);
        let u0 = u.l2_energy(lo0, hi0).sqrt();
        let g0 = u.weighted_gradient_energy(lo0, hi0, |r| 1.0 / r).sqrt();
        for k in 1..=k_max {
            let (lo, hi) = shell(k);
            let sk = (0..=l_max)
                .map(|l| 2f64.powf(-2.0 * alpha * (l as f64 - k as f64 + 1.0).abs()) * f_shell[l as usize])
                .sum::<f64>()
                .sqrt();
            if sk <= 0.0 {
                continue;
            }
            let uk = u.l2_energy(lo, hi).sqrt();
            let gk = u.weighted_gradient_energy(lo, hi, |r| 1.0 / r).sqrt();
            let excess_u = uk - 4f64.powi(-(k as i32)) * u0;
            let excess_g = gk - 2f64.powi(-(k as i32)) * g0;
            c_u = c_u.max(excess_u * (1.0 - alpha).powi(3) / sk);
            c_g = c_g.max(excess_g * (1.0 - alpha).powi(3) / sk);
        }
    }
    Ok((c_u.max(0.0), c_g.max(0.0)))
}

/// Random multi-shell source: bumps in a few dyadic shells across low modes.
pub fn random_multishell_source(
    d: u32,
    n_max: u32,
    shells: u32,
    rng: &mut impl rand::Rng,
) -> Result<RadialSource> {
    let mut f = RadialSource::new(d);
    for _ in 0..shells {
        let k: i32 = rng.gen_range(0..8);
        let lo = 2f64.powi(-(k + 1));
        let hi = 2f64.powi(-k);
        let n = rng.gen_range(0..=n_max);
        let dim = crate::harmonics::dim_harmonics(d, n)?;
        let kk = rng.gen_range(1..=dim);
        let amp = rng.gen_range(-2.0..2.0f64);
        f.push(
            n,
            kk,
            Radial::Scaled(amp, Box::new(Radial::Bump { lo: lo * 1.05, hi: hi * 0.95 })),
        )?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_one_ledger() {
        let g1 = gamma_one();
        assert_abs_diff_eq!(g1, 6.1824966, epsilon = 1e-6);
        assert_abs_diff_eq!(g1 * g1, 38.223, epsilon = 1e-2);
    }

    #[test]
    fn constant_source_closed_form() {
        // f = 1 on mode (0,1), d = 4: u = (r^2 - 1)/8
        let mut f = RadialSource::new(4);
        f.push(0, 1, Radial::Poly(vec![1.0])).unwrap();
        let sol = solve_dirichlet_ball(&f).unwrap();
        for r in [0.05, 0.3, 0.62, 0.95] {
            let (u, du) = sol.modes[0].eval(r);
            assert_relative_eq!(u, (r * r - 1.0) / 8.0, max_relative = 1e-11, epsilon = 1e-12);
            assert_relative_eq!(du, r / 4.0, max_relative = 1e-11, epsilon = 1e-12);
        }
        // f = 0 -> u = 0
        let mut z = RadialSource::new(4);
        z.push(0, 1, Radial::Zero).unwrap();
        let sol = solve_dirichlet_ball(&z).unwrap();
        assert_eq!(sol.modes[0].eval(0.5).0, 0.0);
    }

    #[test]
    fn ode_residual_small() {
        // residual of u'' + (d-1)/r u' - lam/r^2 u - f via FD second derivative
        let mut f = RadialSource::new(4);
        f.push(1, 2, Radial::Product(
            Box::new(Radial::Bump { lo: 0.2, hi: 0.8 }),
            Box::new(Radial::Poly(vec![0.5, 1.0])),
        ))
        .unwrap();
        let sol = solve_dirichlet_ball(&f).unwrap();
        let m = &sol.modes[0];
        for r in [0.3, 0.45, 0.6, 0.7] {
            let h = 1e-5;
            let up = m.eval(r + h).1;
            let um = m.eval(r - h).1;
            let d2 = (up - um) / (2.0 * h);
            let (u, du) = m.eval(r);
            let res = d2 + 3.0 / r * du - m.lam / (r * r) * u - f.modes[0].1.jet(r)[0];
            assert!(res.abs() < 1e-8, "residual {res} at r={r}");
        }
    }

    #[test]
    fn mode_one_matches_finite_difference_oracle() {
        // f = r * (bump) on mode (1,1): compare against a dense second-order
        // FD boundary-value solve
        let mut f = RadialSource::new(4);
        let profile = Radial::Product(
            Box::new(Radial::Bump { lo: 0.1, hi: 0.9 }),
            Box::new(Radial::Poly(vec![0.0, 1.0])),
        );
        f.push(1, 1, profile.clone()).unwrap();
        let sol = solve_dirichlet_ball(&f).unwrap();
        // FD oracle on [0, 1] with u(0) = 0 (mode n >= 1), u(1) = 0
        let n = 4000;
        let h = 1.0 / n as f64;
        let lam = 3.0;
        let mut diag = vec![0.0; n - 1];
        let mut lower = vec![0.0; n - 1];
        let mut upper = vec![0.0; n - 1];
        let mut rhs = vec![0.0; n - 1];
        for i in 1..n {
            let r = i as f64 * h;
            diag[i - 1] = -2.0 / (h * h) - lam / (r * r);
            lower[i - 1] = 1.0 / (h * h) - 3.0 / (2.0 * r * h);
            upper[i - 1] = 1.0 / (h * h) + 3.0 / (2.0 * r * h);
            rhs[i - 1] = profile.jet(r)[0];
        }
        // Thomas algorithm
        for i in 1..n - 1 {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut sol_fd = vec![0.0; n - 1];
        sol_fd[n - 2] = rhs[n - 2] / diag[n - 2];
        for i in (0..n - 2).rev() {
            sol_fd[i] = (rhs[i] - upper[i] * sol_fd[i + 1]) / diag[i];
        }
        for &i in &[400usize, 1200, 2400, 3600] {
            let r = i as f64 * h;
            let (u, _) = sol.modes[0].eval(r);
            assert_abs_diff_eq!(u, sol_fd[i - 1], epsilon = 1e-6);
        }
    }

    #[test]
    fn solver_linearity_and_green_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let f1 = random_multishell_source(4, 2, 3, &mut rng).unwrap();
        let f2 = random_multishell_source(4, 2, 3, &mut rng).unwrap();
        // linearity on a shared mode
        let mut g1 = RadialSource::new(4);
        g1.push(1, 1, Radial::Bump { lo: 0.2, hi: 0.5 }).unwrap();
        let mut g2 = RadialSource::new(4);
        g2.push(1, 1, Radial::Bump { lo: 0.4, hi: 0.8 }).unwrap();
        let mut g12 = RadialSource::new(4);
        g12.push(
            1,
            1,
            Radial::Sum(vec![
                Radial::Bump { lo: 0.2, hi: 0.5 },
                Radial::Bump { lo: 0.4, hi: 0.8 },
            ]),
        )
        .unwrap();
        let s1 = solve_dirichlet_ball(&g1).unwrap();
        let s2 = solve_dirichlet_ball(&g2).unwrap();
        let s12 = solve_dirichlet_ball(&g12).unwrap();
        for r in [0.1, 0.35, 0.66, 0.9] {
            let u_sum = s1.modes[0].eval(r).0 + s2.modes[0].eval(r).0;
            assert_abs_diff_eq!(s12.modes[0].eval(r).0, u_sum, epsilon = 1e-12);
        }
        // Green symmetry: int u1 f2 = int u2 f1 (same mode pairing)
        let u1 = solve_dirichlet_ball(&g1).unwrap();
        let u2 = solve_dirichlet_ball(&g2).unwrap();
        let beta = sphere_area(4).unwrap();
        let breaks: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let p12 = beta
            * panel_integral(&breaks, |r| {
                u1.modes[0].eval(r).0 * g2.modes[0].1.jet(r)[0] * r.powi(3)
            });
        let p21 = beta
            * panel_integral(&breaks, |r| {
                u2.modes[0].eval(r).0 * g1.modes[0].1.jet(r)[0] * r.powi(3)
            });
        assert_relative_eq!(p12, p21, max_relative = 1e-10);
        let _ = (f1, f2);
    }

    #[test]
    fn maximum_principle_radial_mode() {
        // f <= 0 implies u >= 0 for the radial mode
        let mut f = RadialSource::new(4);
        f.push(0, 1, Radial::Scaled(-1.0, Box::new(Radial::Bump { lo: 0.3, hi: 0.7 })))
            .unwrap();
        let sol = solve_dirichlet_ball(&f).unwrap();
        for i in 1..40 {
            let r = i as f64 / 40.0;
            assert!(sol.modes[0].eval(r).0 >= -1e-14, "u({r}) < 0");
        }
    }

    #[test]
    fn shell_gradient_bound_and_sharpness() {
        let mut f = RadialSource::new(4);
        f.push(0, 1, Radial::Sum(vec![
            Radial::Bump { lo: 0.26, hi: 0.4 },
            Radial::Scaled(-1.0, Box::new(Radial::Bump { lo: 0.4, hi: 0.49 })),
        ]))
        .unwrap();
        let check = verify_shell_gradient_bound(&f, 1).unwrap();
        assert!(check.pass, "{check:?}");
        // zero source
        let mut z = RadialSource::new(4);
        z.push(0, 1, Radial::Zero).unwrap();
        let check = verify_shell_gradient_bound(&z, 1).unwrap();
        assert_eq!(check.lhs, 0.0);
        // near-first-eigenfunction source drives the ratio towards 1/j11
        let j11 = bessel_first_zero(1.0).unwrap();
        let mut e = RadialSource::new(4);
        // approximate J_1(j11 r)/r by a polynomial fit via its series
        let mut coeffs = vec![0.0; 12];
        let mut term = j11 / 2.0;
        coeffs[0] = term;
        for m in 1..5 {
            term *= -(j11 / 2.0) * (j11 / 2.0) / ((m as f64) * (m as f64 + 1.0));
            coeffs[2 * m] = term;
        }
        e.push(0, 1, Radial::Poly(coeffs)).unwrap();
        let u = solve_dirichlet_ball(&e).unwrap();
        let ratio = u.gradient_energy(0.0, 1.0).sqrt() / source_energy(&e, |_| 1.0).sqrt();
        assert!(ratio < 1.0 / j11);
        assert!(ratio > 0.95 / j11, "ratio {ratio} far from 1/j11 {}", 1.0 / j11);
    }

    #[test]
    fn weighted_gradient_lemma_ensemble() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..30 {
            let f = random_multishell_source(4, 3, 4, &mut rng).unwrap();
            let check = verify_weighted_gradient_lemma(&f).unwrap();
            assert!(check.pass, "{check:?}");
        }
        // zero source
        let mut z = RadialSource::new(4);
        z.push(0, 1, Radial::Zero).unwrap();
        assert!(verify_weighted_gradient_lemma(&z).unwrap().pass);
    }

    #[test]
    fn weighted_dirichlet_lemma_ratio_recorded() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let f = random_multishell_source(4, 2, 3, &mut rng).unwrap();
            let check = verify_weighted_dirichlet_lemma(&f).unwrap();
            assert!(check.pass, "{check:?}");
            worst = worst.max(check.params["ratio"]);
        }
        // recorded constant keeps clear headroom over the observed ratios
        assert!(
            worst < FITTED_GAMMA3 * 0.9,
            "observed ratio {worst} too close to the recorded constant"
        );
    }

    #[test]
    fn decay_lemma_cores() {
        // zero-mean radial source inside B(0, 2^-3) plus an angular mode
        let mut f = RadialSource::new(4);
        f.push(0, 1, Radial::Sum(vec![
            Radial::Bump { lo: 0.02, hi: 0.06 },
            Radial::Scaled(
                -bump_mass(0.02, 0.06) / bump_mass(0.07, 0.12),
                Box::new(Radial::Bump { lo: 0.07, hi: 0.12 }),
            ),
        ]))
        .unwrap();
        f.push(2, 3, Radial::Bump { lo: 0.03, hi: 0.11 }).unwrap();
        let checks = verify_decay_lemma(&f, 3).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        assert!(checks.iter().any(|c| c.lemma_id == "decay_zero_flux"));
        // source confined to the shell A_3: both cores apply, k = j - 1 included
        let mut g = RadialSource::new(4);
        g.push(1, 1, Radial::Bump { lo: 0.0651, hi: 0.124 }).unwrap();
        let checks = verify_decay_lemma(&g, 3).unwrap();
        assert!(checks.iter().any(|c| c.lemma_id == "decay_inner_balls"));
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        // support violation rejected
        let mut h = RadialSource::new(4);
        h.push(1, 1, Radial::Bump { lo: 0.3, hi: 0.6 }).unwrap();
        assert!(verify_decay_lemma(&h, 3).is_err());
    }

    fn bump_mass(lo: f64, hi: f64) -> f64 {
        let b = Radial::Bump { lo, hi };
        panel_integral(&[lo, hi], |r| b.jet(r)[0] * r.powi(3))
    }

    #[test]
    fn iteration_constants_stable_and_shell_decay_visible() {
        // ensemble = a deterministic sweep of single-shell sources (the
        // binding cases) plus random multi-shell extras; doubling the random
        // part moves the fitted constants by less than 20%
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut sweep = Vec::new();
        for k in 0..8i32 {
            for n in 0..=2u32 {
                let mut f = RadialSource::new(4);
                f.push(n, 1, Radial::Bump { lo: 2f64.powi(-(k + 1)) * 1.02, hi: 2f64.powi(-k) * 0.98 })
                    .unwrap();
                sweep.push(f);
            }
        }
        let extra: Vec<RadialSource> =
            (0..8).map(|_| random_multishell_source(4, 2, 3, &mut rng).unwrap()).collect();
        let small: Vec<&RadialSource> = sweep.iter().chain(extra.iter().take(4)).collect();
        let double: Vec<&RadialSource> = sweep.iter().chain(extra.iter()).collect();
        let fit = |set: &[&RadialSource], alpha: f64| {
            let owned: Vec<RadialSource> = set
                .iter()
                .map(|f| RadialSource {
                    d: f.d,
                    modes: f.modes.iter().map(|(i, p)| (*i, p.clone())).collect(),
                })
                .collect();
            fit_iteration_constants(&owned, alpha, 8).unwrap()
        };
        let (cu1, cg1) = fit(&small, 0.5);
        let (cu2, cg2) = fit(&double, 0.5);
        assert!(cu2 <= cu1 * 1.2 + 1e-12, "C_u unstable: {cu1} -> {cu2}");
        assert!(cg2 <= cg1 * 1.2 + 1e-12, "C_g unstable: {cg1} -> {cg2}");
        // single far shell: per-shell u norms decay away from the source shell
        let mut f = RadialSource::new(4);
        f.push(1, 1, Radial::Bump { lo: 2f64.powi(-7), hi: 2f64.powi(-6) }).unwrap();
        let u = solve_dirichlet_ball(&f).unwrap();
        let n0 = u.l2_energy(2f64.powi(-7), 2f64.powi(-6)).sqrt();
        let n_far = u.l2_energy(0.5, 1.0).sqrt();
        assert!(n_far < n0, "no decay away from the source shell");
    }
}
