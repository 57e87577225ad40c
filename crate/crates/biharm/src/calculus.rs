//! Grid-level differential calculus: inversion pullbacks with their conformal
//! identities, radial cutoffs, the Whitney extension from an annulus to the
//! whole space with its explicit constant ledger, and the Poincaré-Wirtinger
//! and Poincaré-Sobolev inequalities on dyadic annuli.

use crate::check::LemmaCheck;
use crate::field::{random_compact_field, ModalScalar, Radial, ScalarField, VolumeGrid};
use crate::linalg::{add_outer, add_sym_outer, axpy, dot, frobenius_sq, mat_add, mat_vec, norm, scale, Mat4, Vec4, ZERO_MAT, ZERO_VEC};
use crate::lorentz::{Flavor, LorentzExponents, WeightedSamples};
use crate::{Error, Result};
use std::f64::consts::PI;

pub type Jet = (f64, Vec4, Mat4);

/// Combined constant `1 + 160 ( (2 log 2)^{1/4} + 4 * 30^{1/4} )` of the
/// L^4-flavoured extension rows.
pub fn whitney_k() -> f64 {
    1.0 + 160.0 * ((2.0 * 2f64.ln()).powf(0.25) + 4.0 * 30f64.powf(0.25))
}

/// The norm-equivalence constant `Gamma_W = 28 * 2^{1/4} sqrt(pi) * whitney_k()
/// = 98705.182...`.
pub fn gamma_w() -> f64 {
    28.0 * 2f64.powf(0.25) * PI.sqrt() * whitney_k()
}

// ---------------------------------------------------------------------------
// cutoffs
// ---------------------------------------------------------------------------

/// Radial plateau cutoff `chi_r(x) = eta(|x|/r)`: equal to 1 on `B_r`,
/// ramping to 0 across `B_{2r} \ B_r`.
///
/// The profile is the C^{1,1} quadratic spline
/// `eta(1+s) = 1 - 2s^2` for `s <= 1/2`, `2(1-s)^2` for `s >= 1/2`,
/// which keeps `|eta'| <= 2` sharply. No C^1 ramp confined to `[r, 2r]` with
/// unit drop can keep `|eta''| <= 2` (integrating `|h''| <= 2` from rest
/// yields a drop below 0.7), so the Hessian bound certified here is
/// `|Hess chi_r| <= 8/(r |x|)` in Frobenius norm, attained at the outer edge.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub r: f64,
}

impl Cutoff {
    pub fn new(r: f64) -> Self {
        Cutoff { r }
    }

    fn profile(&self, rho: f64) -> [f64; 3] {
        let s = rho / self.r - 1.0;
        if s <= 0.0 {
            [1.0, 0.0, 0.0]
        } else if s >= 1.0 {
            [0.0, 0.0, 0.0]
        } else if s <= 0.5 {
            [1.0 - 2.0 * s * s, -4.0 * s / self.r, -4.0 / (self.r * self.r)]
        } else {
            [
                2.0 * (1.0 - s) * (1.0 - s),
                -4.0 * (1.0 - s) / self.r,
                4.0 / (self.r * self.r),
            ]
        }
    }

    pub fn jet(&self, x: &Vec4) -> Jet {
        let rho = norm(x);
        let omega = scale(x, 1.0 / rho);
        let [v, d1, d2] = self.profile(rho);
        let grad = scale(&omega, d1);
        let mut hess = ZERO_MAT;
        add_outer(&mut hess, d2 - d1 / rho, &omega);
        for i in 0..4 {
            hess[i][i] += d1 / rho;
        }
        (v, grad, hess)
    }

    /// Pointwise bounds `|grad chi_r| <= 2/r` and `|Hess chi_r| <= 8/(r |x|)`
    /// on the ramp region.
    pub fn check_bounds(&self, x: &Vec4) -> (bool, bool) {
        let (_, g, h) = self.jet(x);
        let rr = norm(x);
        (
            norm(&g) <= 2.0 / self.r * (1.0 + 1e-12),
            frobenius_sq(&h).sqrt() <= 8.0 / (self.r * rr) * (1.0 + 1e-12),
        )
    }
}

/// Jet of a purely radial field `f(|x|)`.
fn radial_jet(profile: &Radial, x: &Vec4) -> Jet {
    let r = norm(x);
    let omega = scale(x, 1.0 / r);
    let j = profile.jet(r);
    let grad = scale(&omega, j[1]);
    let mut hess = ZERO_MAT;
    add_outer(&mut hess, j[2] - j[1] / r, &omega);
    for i in 0..4 {
        hess[i][i] += j[1] / r;
    }
    (j[0], grad, hess)
}

// ---------------------------------------------------------------------------
// inversion pullback
// ---------------------------------------------------------------------------

/// Jet of `v(x) = inner(c x / |x|^2)` from the jet of `inner` at the image
/// point, by the chain rule with the exact derivatives of the inversion.
pub fn inverted_jet(c: f64, x: &Vec4, inner: impl Fn(&Vec4) -> Jet) -> Jet {
    let r2 = dot(x, x);
    let y = scale(x, c / r2);
    let (v, g, h) = inner(&y);
    // J_{ik} = d iota_k/d x_i = c (delta_{ik} - 2 w_i w_k)/r^2
    let mut jac = ZERO_MAT;
    for i in 0..4 {
        for k in 0..4 {
            let idd = if i == k { 1.0 } else { 0.0 };
            jac[i][k] = c * (idd - 2.0 * x[i] * x[k] / r2) / r2;
        }
    }
    let grad = mat_vec(&jac, &g);
    // Hess v = J H J^t + sum_k g_k Hess(iota_k)
    let mut hess = ZERO_MAT;
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    s += jac[i][p] * h[p][q] * jac[j][q];
                }
            }
            hess[i][j] = s;
        }
    }
    let r4 = r2 * r2;
    for k in 0..4 {
        if g[k] == 0.0 {
            continue;
        }
        for i in 0..4 {
            for j in 0..4 {
                let idd_ik = if i == k { 1.0 } else { 0.0 };
                let idd_jk = if j == k { 1.0 } else { 0.0 };
                let idd_ij = if i == j { 1.0 } else { 0.0 };
                let d2 = c
                    * (-2.0 * (idd_ik * x[j] + idd_jk * x[i] + idd_ij * x[k]) / r4
                        + 8.0 * x[i] * x[j] * x[k] / (r4 * r2));
                hess[i][j] += g[k] * d2;
            }
        }
    }
    (v, grad, hess)
}

/// Pointwise verification of the conformal gradient identity
/// `|grad v|^2 = |grad u|^2 o iota / |x|^4` and the Hessian identity
/// `|Hess v|^2 = |x|^{-8} (|Hess u|^2 + 8 |x|^2 |grad u|^2 + 8 |x . grad u|^2
/// + 8 x^t Hess u grad u - 4 (x . grad u) lap u)` for `v = u o iota`.
pub fn invert_pullback_check(u: &dyn ScalarField, x: &Vec4) -> Result<(LemmaCheck, LemmaCheck)> {
    let r2 = dot(x, x);
    if r2 <= 0.0 {
        return Err(Error::Domain("inversion undefined at the origin".into()));
    }
    let jet = inverted_jet(1.0, x, |y| {
        let (v, g, h) = (u.value(y), u.grad(y), u.hess(y));
        (v, g, h)
    });
    let y = scale(x, 1.0 / r2);
    let gu = u.grad(&y);
    let hu = u.hess(&y);
    let grad_check = LemmaCheck::eq(
        "inversion_gradient_identity",
        dot(&jet.1, &jet.1),
        dot(&gu, &gu) / (r2 * r2),
        1e-8,
    );
    let hg = mat_vec(&hu, &gu);
    let xg = dot(x, &gu);
    let lap = crate::linalg::trace(&hu);
    let rhs = (frobenius_sq(&hu) + 8.0 * r2 * dot(&gu, &gu) + 8.0 * xg * xg
        + 8.0 * dot(x, &hg)
        - 4.0 * xg * lap)
        / (r2 * r2 * r2 * r2);
    let hess_check =
        LemmaCheck::eq("inversion_hessian_identity", frobenius_sq(&jet.2), rhs, 1e-6);
    Ok((grad_check, hess_check))
}

/// Quadrature verification of `int |grad(u o iota)|^4 = int |grad u|^4` for a
/// field on the annulus `(a, b)` (the image annulus is `(1/b, 1/a)`).
pub fn invert_conformal_l4_check(
    u: &dyn ScalarField,
    a: f64,
    b: f64,
    n_radial: usize,
    level: u32,
) -> Result<LemmaCheck> {
    let grid_u = VolumeGrid::annulus(u.dim(), a, b, n_radial, level)?;
    let lhs_src = grid_u.integrate(|x| {
        let g = u.grad(x);
        let s = dot(&g, &g);
        s * s
    });
    let grid_v = VolumeGrid::annulus(u.dim(), 1.0 / b, 1.0 / a, n_radial, level)?;
    let rhs_inv = grid_v.integrate(|x| {
        let jet = inverted_jet(1.0, x, |y| (u.value(y), u.grad(y), u.hess(y)));
        let s = dot(&jet.1, &jet.1);
        s * s
    });
    Ok(LemmaCheck::eq("inversion_conformal_l4", rhs_inv, lhs_src, 1e-6))
}

// ---------------------------------------------------------------------------
// Whitney extension
// ---------------------------------------------------------------------------

/// The extension of an annulus field to the whole space by cutoff, mean
/// subtraction and inversion on both boundary spheres. The result agrees with
/// `u` on the annulus, is constant (`mean_inner`) on `B_{a/2}` and constant
/// (`mean_outer`) outside `B_{2b}`.
pub struct WhitneyExtension<'a> {
    pub u: &'a dyn ScalarField,
    pub a: f64,
    pub b: f64,
    pub mean_inner: f64,
    pub mean_outer: f64,
    chi_in: Radial,
    chi_out: Radial,
}

impl<'a> WhitneyExtension<'a> {
    /// Requires `2a < b` so that the two collar regions are disjoint.
    pub fn new(u: &'a dyn ScalarField, a: f64, b: f64, level: u32) -> Result<Self> {
        if !(0.0 < a && 2.0 * a < b) {
            return Err(Error::Precondition(format!("need 2a < b, got a={a}, b={b}")));
        }
        let mean = |lo: f64, hi: f64| -> Result<f64> {
            let grid = VolumeGrid::annulus(u.dim(), lo, hi, 24, level)?;
            let vol = grid.integrate(|_| 1.0);
            Ok(grid.integrate(|x| u.value(x)) / vol)
        };
        let mean_inner = mean(a, 2.0 * a)?;
        let mean_outer = mean(b / 2.0, b)?;
        Ok(WhitneyExtension {
            u,
            a,
            b,
            mean_inner,
            mean_outer,
            chi_in: Radial::RampDown { lo: a, hi: 2.0 * a },
            chi_out: Radial::RampDown { lo: b / 2.0, hi: b },
        })
    }

    fn blend_in(&self, y: &Vec4) -> Jet {
        blend_jet(
            (self.u.value(y), self.u.grad(y), self.u.hess(y)),
            radial_jet(&self.chi_in, y),
            self.mean_inner,
        )
    }

    fn blend_out(&self, y: &Vec4) -> Jet {
        // chi = 1 - ramp(b/2, b) rises from 0 at b/2 to 1 at b
        let (c, gc, hc) = radial_jet(&self.chi_out, y);
        let mut gneg = gc;
        let mut hneg = hc;
        for i in 0..4 {
            gneg[i] = -gneg[i];
            for j in 0..4 {
                hneg[i][j] = -hneg[i][j];
            }
        }
        blend_jet(
            (self.u.value(y), self.u.grad(y), self.u.hess(y)),
            (1.0 - c, gneg, hneg),
            self.mean_outer,
        )
    }

    /// Jet at any point of `R^4 \ {0}`.
    pub fn jet(&self, x: &Vec4) -> Jet {
        let r = norm(x);
        if r >= self.a && r <= self.b {
            (self.u.value(x), self.u.grad(x), self.u.hess(x))
        } else if r < self.a {
            if r <= self.a / 2.0 {
                (self.mean_inner, ZERO_VEC, ZERO_MAT)
            } else {
                inverted_jet(self.a * self.a, x, |y| self.blend_in(y))
            }
        } else if r >= 2.0 * self.b {
            (self.mean_outer, ZERO_VEC, ZERO_MAT)
        } else {
            inverted_jet(self.b * self.b, x, |y| self.blend_out(y))
        }
    }
}

/// `chi u + (1 - chi) m` with its first two derivatives.
fn blend_jet(u: Jet, chi: Jet, m: f64) -> Jet {
    let (uv, ug, uh) = u;
    let (cv, cg, ch) = chi;
    let v = cv * uv + (1.0 - cv) * m;
    let mut g = scale(&ug, cv);
    axpy(&mut g, uv - m, &cg);
    let mut h = ZERO_MAT;
    mat_add(&mut h, cv, &uh);
    mat_add(&mut h, uv - m, &ch);
    add_sym_outer(&mut h, 1.0, &cg, &ug);
    (v, g, h)
}

/// Seminorms of the extension over its support (three regions), plus the
/// restriction norms of `u` on the annulus.
pub struct WhitneyNorms {
    pub hess_l2_ext: f64,
    pub weighted_grad_l2_ext: f64,
    pub grad_l4_ext: f64,
    pub grad_l42_ext: f64,
    pub hess_l2: f64,
    pub weighted_grad_l2: f64,
    pub grad_l4: f64,
    pub grad_l42: f64,
}

pub fn whitney_norms(
    ext: &WhitneyExtension,
    n_radial: usize,
    level: u32,
) -> Result<WhitneyNorms> {
    let d = ext.u.dim();
    let regions = [
        (ext.a / 2.0, ext.a),
        (ext.a, ext.b),
        (ext.b, 2.0 * ext.b),
    ];
    let mut hess_sq = 0.0;
    let mut wgrad_sq = 0.0;
    let mut grad4 = 0.0;
    let mut values = Vec::new();
    let mut measures = Vec::new();
    let mut omega_vals = Vec::new();
    let mut omega_meas = Vec::new();
    for (i, &(lo, hi)) in regions.iter().enumerate() {
        let grid = VolumeGrid::annulus(d, lo, hi, n_radial, level)?;
        for (&r, &wr) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
            for (node, &wa) in grid.angular.nodes.iter().zip(&grid.angular.weights) {
                let x = scale(node, r);
                let (_, g, h) = ext.jet(&x);
                let w = wr * wa;
                let gsq = dot(&g, &g);
                hess_sq += w * frobenius_sq(&h);
                wgrad_sq += w * gsq / (r * r);
                grad4 += w * gsq * gsq;
                values.push(gsq.sqrt());
                measures.push(w);
                if i == 1 {
                    omega_vals.push(gsq.sqrt());
                    omega_meas.push(w);
                }
            }
        }
    }
    let e42 = LorentzExponents::new(4.0, 2.0)?;
    let grad_l42_ext = WeightedSamples::new(values, measures).lorentz(e42, Flavor::Norm);
    let grad_l42 = WeightedSamples::new(omega_vals, omega_meas).lorentz(e42, Flavor::Norm);
    // restriction norms on the annulus
    let grid = VolumeGrid::annulus(d, ext.a, ext.b, n_radial, level)?;
    let mut h2 = 0.0;
    let mut wg2 = 0.0;
    let mut g4 = 0.0;
    for (&r, &wr) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
        for (node, &wa) in grid.angular.nodes.iter().zip(&grid.angular.weights) {
            let x = scale(node, r);
            let g = ext.u.grad(&x);
            let h = ext.u.hess(&x);
            let w = wr * wa;
            let gsq = dot(&g, &g);
            h2 += w * frobenius_sq(&h);
            wg2 += w * gsq / (r * r);
            g4 += w * gsq * gsq;
        }
    }
    Ok(WhitneyNorms {
        hess_l2_ext: hess_sq.sqrt(),
        weighted_grad_l2_ext: wgrad_sq.sqrt(),
        grad_l4_ext: grad4.powf(0.25),
        grad_l42_ext,
        hess_l2: h2.sqrt(),
        weighted_grad_l2: wg2.sqrt(),
        grad_l4: g4.powf(0.25),
        grad_l42,
    })
}

/// The eight inequality rows of the extension theorem.
pub fn verify_whitney_inequalities(norms: &WhitneyNorms) -> Vec<LemmaCheck> {
    let k = whitney_k();
    let q = 2f64.powf(0.25);
    let sp = PI.sqrt();
    let n = norms;
    vec![
        LemmaCheck::le("whitney_row1_hess_weighted", n.hess_l2_ext, 19.0 * n.hess_l2 + 289.0 * n.weighted_grad_l2, 1e-9),
        LemmaCheck::le("whitney_row2_hess_l4", n.hess_l2_ext, 7.0 * n.hess_l2 + k * n.grad_l4, 1e-9),
        LemmaCheck::le("whitney_row3_weighted_control", n.weighted_grad_l2_ext, 51f64.sqrt() * n.weighted_grad_l2, 1e-9),
        LemmaCheck::le("whitney_row4_weighted_l4", n.weighted_grad_l2_ext, 196.0 * q * sp * n.hess_l2 + 28.0 * q * sp * k * n.grad_l4, 1e-9),
        LemmaCheck::le("whitney_row5_lorentz_weighted", n.grad_l42_ext, 261.0 * n.hess_l2 + 4046.0 * n.weighted_grad_l2, 1e-9),
        LemmaCheck::le("whitney_row6_lorentz_l4", n.grad_l42_ext, 98.0 * n.hess_l2 + 14.0 * k * n.grad_l4, 1e-9),
        LemmaCheck::le("whitney_row7_l4_weighted", n.grad_l4_ext, 261.0 * q * n.hess_l2 + 4046.0 * q * n.weighted_grad_l2, 1e-9),
        LemmaCheck::le("whitney_row8_l4_l4", n.grad_l4_ext, 98.0 * q * n.hess_l2 + 14.0 * q * k * n.grad_l4, 1e-9),
    ]
}

/// Mutual equivalence of the three annulus norms
/// `N_{2,2} = |Hess|_2 + |grad/x|_2`, `N_{2,4} = |Hess|_2 + |grad|_4`,
/// `N_{2,(4,2)} = |Hess|_2 + |grad|_{4,2}` with constant `Gamma_W`.
pub fn verify_norm_equivalence(norms: &WhitneyNorms) -> Vec<LemmaCheck> {
    let gw = gamma_w();
    let n22 = norms.hess_l2 + norms.weighted_grad_l2;
    let n24 = norms.hess_l2 + norms.grad_l4;
    let n242 = norms.hess_l2 + norms.grad_l42;
    vec![
        LemmaCheck::le("norm_equiv_22_le_24", n22.max(n242), gw * n24, 1e-9)
            .with("gamma_w", gw),
        LemmaCheck::le("norm_equiv_24_le_22", n24.max(n242), gw * n22, 1e-9)
            .with("gamma_w", gw),
    ]
}

// ---------------------------------------------------------------------------
// Poincare inequalities
// ---------------------------------------------------------------------------

/// Smallest Neumann eigenvalue with a nonconstant radial profile of
/// `-Delta u = mu u/|x|^2` on `B_2 \ B_1`, per harmonic mode `n`, found by
/// shooting on the log-variable equation `Y'' + (d-2) Y' + (mu - lambda_n) Y = 0`
/// over `[0, log 2]` with `Y'(0) = Y'(L) = 0`.
///
/// The check asserts `mu > lambda_n + (d-2)^2/4`, which yields the weighted
/// Poincare-Wirtinger constant `4/(d-2)^2` (and `16 r^2/(d-2)^2` unweighted)
/// on dyadic annuli.
pub fn verify_poincare_wirtinger(d: u32, n: u32) -> Result<LemmaCheck> {
    if d < 3 {
        return Err(Error::Domain(format!("need d >= 3, got {d}")));
    }
    let l = 2f64.ln();
    let lam = crate::harmonics::laplace_eigenvalue(d, n);
    let kappa_sq = (d as f64 - 2.0) * (d as f64 - 2.0) / 4.0;
    // shooting: Y(0) = 1, Y'(0) = 0; find mu with Y'(L) = 0
    let shoot = |mu: f64| -> f64 {
        let steps = 2000;
        let h = l / steps as f64;
        let mut y = 1.0;
        let mut yp = 0.0;
        let f = |y: f64, yp: f64| (yp, -(d as f64 - 2.0) * yp - (mu - lam) * y);
        for _ in 0..steps {
            let (k1y, k1p) = f(y, yp);
            let (k2y, k2p) = f(y + 0.5 * h * k1y, yp + 0.5 * h * k1p);
            let (k3y, k3p) = f(y + 0.5 * h * k2y, yp + 0.5 * h * k2p);
            let (k4y, k4p) = f(y + h * k3y, yp + h * k3p);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            yp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        yp
    };
    // scan upward from just above lambda + kappa^2
    let step = (PI / l).powi(2) / 40.0;
    let mut lo = lam + kappa_sq + 1e-9;
    let mut flo = shoot(lo);
    let mut hi = lo;
    let mut found = false;
    for _ in 0..200 {
        hi = lo + step;
        let fhi = shoot(hi);
        if flo.signum() != fhi.signum() {
            found = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if !found {
        return Err(Error::Numeric("Neumann root bracketing failed".into()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    // margin over lambda + kappa^2 certifies the constant 4/(d-2)^2
    Ok(LemmaCheck::le("dyadic_poincare_wirtinger", lam + kappa_sq, mu, 1e-12)
        .with("mu", mu)
        .with("lambda", lam)
        .with("kappa_sq", kappa_sq)
        .with("constant", 4.0 / ((d as f64 - 2.0) * (d as f64 - 2.0)))
        .with("analytic_mu", lam + kappa_sq + (PI / l).powi(2)))
}

/// Fit the Poincare-Sobolev constant
/// `||u - mean||_4 <= Gamma (||grad u||_2 + r ||Hess u||_2)` on `B_2 \ B_1`
/// over an ensemble of single-mode and random fields. Returns the fitted
/// constant for each of the two halves of the ensemble (the second uses the
/// doubled ensemble), so stability can be asserted by the caller.
pub fn estimate_poincare_sobolev(
    ensemble: usize,
    rng: &mut impl rand::Rng,
) -> Result<(f64, f64)> {
    let d = 4;
    let grid = VolumeGrid::annulus(d, 1.0, 2.0, 24, 5)?;
    let vol = grid.integrate(|_| 1.0);
    let ratio = |f: &ModalScalar| -> f64 {
        let mean = grid.integrate(|x| f.value(x)) / vol;
        let mut l4 = 0.0;
        let mut g2 = 0.0;
        let mut h2 = 0.0;
        for (&r, &wr) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
            for (node, &wa) in grid.angular.nodes.iter().zip(&grid.angular.weights) {
                let x = scale(node, r);
                let (v, g, h) = f.jet(&x);
                let w = wr * wa;
                l4 += w * (v - mean).powi(4);
                g2 += w * dot(&g, &g);
                h2 += w * frobenius_sq(&h);
            }
        }
        let denom = g2.sqrt() + h2.sqrt();
        if denom > 0.0 {
            l4.powf(0.25) / denom
        } else {
            0.0
        }
    };
    let mut worst_half: f64 = 0.0;
    let mut worst_full: f64 = 0.0;
    // deterministic sweep: single modes with plain power profiles
    for n in 0..=4u32 {
        let dim = crate::harmonics::dim_harmonics(d, n)?;
        for &p in &[-2.0, 0.0, 2.0] {
            let mut f = ModalScalar::new(d);
            f.push(n, 1.min(dim), Radial::power(1.0, p))?;
            let r = ratio(&f);
            worst_half = worst_half.max(r);
            worst_full = worst_full.max(r);
        }
    }
    for i in 0..2 * ensemble {
        let f = random_compact_field(d, 1.0, 2.0, 3, rng)?;
        let r = ratio(&f);
        if i < ensemble {
            worst_half = worst_half.max(r);
        }
        worst_full = worst_full.max(r);
    }
    Ok((worst_half, worst_full))
}

/// Export a scalar field snapshot as CSV rows `r,omega_index,value`.
pub fn grid_snapshot_csv(field: &dyn ScalarField, grid: &VolumeGrid) -> String {
    let mut out = String::from("r,omega_index,value\n");
    for &r in &grid.radial_nodes {
        for (ai, node) in grid.angular.nodes.iter().enumerate() {
            let x = scale(node, r);
            out.push_str(&format!("{r},{ai},{}\n", field.value(&x)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_annulus_field(rng: &mut ChaCha8Rng, n_max: u32) -> ModalScalar {
        // smooth non-harmonic modal field on (0.4, 2.5)
        let mut f = ModalScalar::new(4);
        for n in 0..=n_max {
            let dim = crate::harmonics::dim_harmonics(4, n).unwrap();
            for k in 1..=dim {
                if rng.gen_bool(0.4) {
                    continue;
                }
                let a = rng.gen_range(-1.0..1.0f64);
                let p = rng.gen_range(-2.0..2.0f64);
                f.push(n, k, Radial::PowerPair { ca: a, pa: p, cb: 0.2 * a, pb: p - 1.0 })
                    .unwrap();
            }
        }
        if f.modes.is_empty() {
            f.push(1, 1, Radial::power(1.0, 1.0)).unwrap();
        }
        f
    }

    #[test]
    fn constants_ledger() {
        assert_abs_diff_eq!(gamma_w(), 98705.182, epsilon = 0.01);
        assert!(8.0 * 2f64.powf(0.75) < 14.0);
    }

    #[test]
    fn cutoff_bounds_hold_pointwise() {
        let chi = Cutoff::new(0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..200 {
            let r = rng.gen_range(0.3..1.8);
            let mut x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = norm(&x);
            for c in x.iter_mut() {
                *c *= r / n;
            }
            let (g_ok, h_ok) = chi.check_bounds(&x);
            assert!(g_ok && h_ok, "cutoff bounds failed at r={r}");
        }
        // plateau values
        assert_eq!(chi.jet(&[0.3, 0.0, 0.0, 0.0]).0, 1.0);
        assert_eq!(chi.jet(&[1.5, 0.0, 0.0, 0.0]).0, 0.0);
    }

    #[test]
    fn inversion_identities_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..10 {
            let u = random_annulus_field(&mut rng, 3);
            for _ in 0..10 {
                let r = rng.gen_range(0.6..1.6);
                let mut x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let n = norm(&x);
                for c in x.iter_mut() {
                    *c *= r / n;
                }
                let (g, h) = invert_pullback_check(&u, &x).unwrap();
                assert!(g.pass, "gradient identity failed: {g:?}");
                assert!(h.pass, "hessian identity failed: {h:?}");
            }
        }
    }

    #[test]
    fn inversion_constant_field() {
        // u constant: all derivative norms vanish after pullback
        let mut u = ModalScalar::new(4);
        u.push(0, 1, Radial::Poly(vec![3.0])).unwrap();
        let jet = inverted_jet(1.0, &[0.5, 0.2, -0.1, 0.3], |y| {
            (u.value(y), u.grad(y), u.hess(y))
        });
        assert_relative_eq!(jet.0, 3.0, max_relative = 1e-14);
        assert_abs_diff_eq!(norm(&jet.1), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(frobenius_sq(&jet.2), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inversion_linear_field_closed_form() {
        // u = x_1: v = x_1/|x|^2, gradient identity in closed form
        let mut u = ModalScalar::new(4);
        u.push(1, 1, Radial::Scaled(0.5, Box::new(Radial::power(1.0, 1.0)))).unwrap();
        // Y_1^1 = 2 omega_1, so this field is exactly x_1
        let x = [0.8, -0.3, 0.5, 0.1];
        assert_relative_eq!(u.value(&x), x[0], max_relative = 1e-12);
        let (g, h) = invert_pullback_check(&u, &x).unwrap();
        assert!(g.pass && h.pass);
    }

    #[test]
    fn conformal_l4_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..3 {
            let u = random_annulus_field(&mut rng, 2);
            let check = invert_conformal_l4_check(&u, 0.5, 2.0, 32, 5).unwrap();
            assert!(check.pass, "{check:?}");
        }
    }

    #[test]
    fn whitney_extension_restriction_and_plateaus() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let u = random_annulus_field(&mut rng, 2);
        let ext = WhitneyExtension::new(&u, 0.5, 2.0, 5).unwrap();
        // restriction identity on the annulus
        for _ in 0..20 {
            let r = rng.gen_range(0.5..2.0);
            let x = [r, 0.0, 0.0, 0.0];
            assert_relative_eq!(ext.jet(&x).0, u.value(&x), max_relative = 1e-13);
        }
        // constant plateaus
        let inner = ext.jet(&[0.2, 0.0, 0.0, 0.0]);
        assert_relative_eq!(inner.0, ext.mean_inner, max_relative = 1e-13);
        assert_abs_diff_eq!(norm(&inner.1), 0.0, epsilon = 1e-13);
        let outer = ext.jet(&[4.5, 0.0, 0.0, 0.0]);
        assert_relative_eq!(outer.0, ext.mean_outer, max_relative = 1e-13);
        // traces match across the gluing spheres
        for &(r_in, r_out) in &[(0.499999, 0.500001), (1.999999, 2.000001)] {
            let xi = [r_in, 0.0, 0.0, 0.0];
            let xo = [r_out, 0.0, 0.0, 0.0];
            assert_abs_diff_eq!(ext.jet(&xi).0, ext.jet(&xo).0, epsilon = 1e-4);
        }
        // constant field: extension has vanishing seminorms
        let mut c = ModalScalar::new(4);
        c.push(0, 1, Radial::Poly(vec![2.5])).unwrap();
        let ext = WhitneyExtension::new(&c, 0.5, 2.0, 5).unwrap();
        let norms = whitney_norms(&ext, 16, 4).unwrap();
        assert_abs_diff_eq!(norms.hess_l2_ext, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(norms.grad_l4_ext, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn whitney_inequalities_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..5 {
            let u = random_annulus_field(&mut rng, 2);
            let ext = WhitneyExtension::new(&u, 0.5, 2.0, 4).unwrap();
            let norms = whitney_norms(&ext, 20, 4).unwrap();
            for check in verify_whitney_inequalities(&norms) {
                assert!(check.pass, "{check:?}");
            }
            for check in verify_norm_equivalence(&norms) {
                assert!(check.pass, "{check:?}");
            }
        }
    }

    #[test]
    fn poincare_wirtinger_modes() {
        // mu = lambda + (d-2)^2/4 + pi^2/log^2(2) for every mode; margin > 0
        for d in 3..=10u32 {
            for n in [0u32, 1, 3] {
                let check = verify_poincare_wirtinger(d, n).unwrap();
                assert!(check.pass, "PW failed d={d} n={n}: {check:?}");
                let mu = check.params["mu"];
                let analytic = check.params["analytic_mu"];
                assert_relative_eq!(mu, analytic, max_relative = 1e-6);
            }
        }
        // the certified constant is 1 at d = 4 and 1/16 at d = 10
        let c4 = verify_poincare_wirtinger(4, 0).unwrap().params["constant"];
        assert_relative_eq!(c4, 1.0, max_relative = 1e-14);
        let c10 = verify_poincare_wirtinger(10, 0).unwrap().params["constant"];
        assert_relative_eq!(c10, 1.0 / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn grid_snapshot_export() {
        let mut u = ModalScalar::new(4);
        u.push(1, 1, Radial::power(1.0, 1.0)).unwrap();
        let grid = crate::field::VolumeGrid::annulus(4, 0.5, 1.0, 3, 2).unwrap();
        let csv = grid_snapshot_csv(&u, &grid);
        let rows = csv.lines().count();
        assert_eq!(rows, 1 + 3 * grid.angular.nodes.len());
        assert!(csv.starts_with("r,omega_index,value"));
    }

    #[test]
    fn poincare_sobolev_fitted_constant_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let (half, full) = estimate_poincare_sobolev(10, &mut rng).unwrap();
        assert!(half > 0.0);
        assert!(full <= half * 1.10, "PS constant unstable: {half} -> {full}");
    }
}
