//! The variational core: second variation of the biharmonic energy for
//! sphere targets, Pohozaev flux and identity, Hardy-Rellich inequalities on
//! annuli via per-mode Rayleigh quotients in the log variable, and the
//! neck-positivity assembly.
//!
//! For sphere targets the geometry is closed-form: `P_u = Id - u u^t`,
//! `A_u(X, Y) = -<X, Y> u`, so every term of the second variation reduces to
//! contractions of the map jets.

use crate::check::LemmaCheck;
use crate::field::{MapField, ModalVector, ProjectedPerturbation, VolumeGrid};
use crate::harmonics::gauss_legendre;
use crate::linalg::{dot, norm, scale, Vec4, ZERO_VEC};
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Recorded constant for the elementary second-variation lower bound (the
/// target-geometry constant is existential; sphere targets calibrate well
/// below this).
pub const FITTED_D2_CONSTANT: f64 = 8.0;

/// Recorded ensemble constant for the neck quadratic-form bound.
pub const FITTED_NECK_LAMBDA1: f64 = 50.0;

// ---------------------------------------------------------------------------
// second variation
// ---------------------------------------------------------------------------

/// Verify that a map takes values on the unit sphere of its target.
pub fn check_sphere_valued(u: &dyn MapField, grid: &VolumeGrid) -> Result<()> {
    for (&r, _) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
        for node in grid.angular.nodes.iter().take(7) {
            let x = scale(node, r);
            let v = u.jet(&x).value;
            if (norm(&v) - 1.0).abs() > 1e-10 {
                return Err(Error::Precondition(format!(
                    "map is not sphere-valued at |x| = {r}: |u| = {}",
                    norm(&v)
                )));
            }
        }
    }
    Ok(())
}

/// Pointwise integrand of `Q_u(w)` for a sphere target and a tangent
/// variation `w` (`<w, u> = 0` pointwise).
///
/// For the projection `Pi(y) = y/|y|` the second-order term of the variation
/// `Pi(u + t w)` is `Hess Pi_u(w, w) = -|w|^2 u`, so
/// `Q_u(w) = int |Del w|^2 + <Del u, Del(Hess Pi_u(w,w))>
///         = int |Del w|^2 - Del(|w|^2) <Del u, u>
///           - 2 sum_i d_i(|w|^2) <Del u, d_i u> - |w|^2 |Del u|^2`,
/// with `Del(|w|^2) = 2 <w, Del w> + 2 |Dw|^2`. The finite-difference oracle
/// on `E(Pi(u + t w))` pins this form down in the tests; for a constant map
/// only `|Del w|^2` survives.
fn q_integrand(u: &dyn MapField, w: &dyn MapField, x: &Vec4) -> f64 {
    let ju = u.jet(x);
    let jw = w.jet(x);
    let w_sq = dot(&jw.value, &jw.value);
    let lap_w_sq_field = 2.0 * dot(&jw.value, &jw.lap) + 2.0 * jw.grad_norm_sq();
    let mut acc = dot(&jw.lap, &jw.lap);
    acc -= lap_w_sq_field * dot(&ju.lap, &ju.value);
    for i in 0..4 {
        let diu = [ju.jac[i][0], ju.jac[i][1], ju.jac[i][2], ju.jac[i][3]];
        let diw = [jw.jac[i][0], jw.jac[i][1], jw.jac[i][2], jw.jac[i][3]];
        acc -= 4.0 * dot(&diw, &jw.value) * dot(&ju.lap, &diu);
    }
    acc -= w_sq * dot(&ju.lap, &ju.lap);
    acc
}

/// Second variation `Q_u(w)` of the extrinsic biharmonic energy at a
/// sphere-valued map, assembled by quadrature over the support of `w`.
///
/// The formula represents `d^2/dt^2 E(Pi(u + t w))` when `w` is tangent along
/// `u` (`w = P_u v`); see [`TangentAlongRadial`] for projecting a raw field.
pub fn second_variation(u: &dyn MapField, w: &dyn MapField, grid: &VolumeGrid) -> Result<f64> {
    check_sphere_valued(u, grid)?;
    Ok(grid.integrate(|x| q_integrand(u, w, x)))
}

/// Tangential projection `w = P_u v = v - <v, omega> omega` of a raw field
/// along the radial projection `u(x) = x/|x|`, with exact jets.
pub struct TangentAlongRadial<'a> {
    pub raw: &'a dyn MapField,
}

impl MapField for TangentAlongRadial<'_> {
    fn dim(&self) -> u32 {
        self.raw.dim()
    }
    fn target_dim(&self) -> usize {
        self.raw.target_dim()
    }
    fn jet(&self, x: &Vec4) -> crate::field::MapJet {
        let j = self.raw.jet(x);
        let d = self.raw.dim() as f64;
        let r = norm(x);
        let omega = scale(x, 1.0 / r);
        // s = <v, omega>, with gradient and Laplacian by the product rule
        let s = dot(&j.value, &omega);
        let mut ds = ZERO_VEC;
        for i in 0..4 {
            let div = [j.jac[i][0], j.jac[i][1], j.jac[i][2], j.jac[i][3]];
            // d_i omega_c = (delta_ic - omega_i omega_c)/r
            ds[i] = dot(&div, &omega) + (j.value[i] - s * omega[i]) / r;
        }
        // lap s = <lap v, omega> + 2 sum_i d_i v . d_i omega + <v, lap omega>
        let mut lap_s = dot(&j.lap, &omega) - (d - 1.0) / (r * r) * s;
        for i in 0..4 {
            let div = [j.jac[i][0], j.jac[i][1], j.jac[i][2], j.jac[i][3]];
            lap_s += 2.0 * (div[i] - dot(&div, &omega) * omega[i]) / r;
        }
        let mut value = j.value;
        crate::linalg::axpy(&mut value, -s, &omega);
        let mut jac = j.jac;
        for i in 0..4 {
            for c in 0..4 {
                let domega = (if i == c { 1.0 } else { 0.0 } - omega[i] * omega[c]) / r;
                jac[i][c] -= ds[i] * omega[c] + s * domega;
            }
        }
        // lap(s omega_c) = lap s omega_c + 2 grad s . grad omega_c + s lap omega_c
        let mut lap = j.lap;
        for c in 0..4 {
            let mut cross = 0.0;
            for i in 0..4 {
                let domega = (if i == c { 1.0 } else { 0.0 } - omega[i] * omega[c]) / r;
                cross += ds[i] * domega;
            }
            lap[c] -= lap_s * omega[c] + 2.0 * cross - s * (d - 1.0) / (r * r) * omega[c];
        }
        crate::field::MapJet { value, jac, lap }
    }
}

/// Biharmonic energy `E(t) = 1/2 int |Delta Pi(u + t w)|^2` of the projected
/// perturbation, the oracle for `Q_u` via Richardson-extrapolated second
/// differences.
pub fn projected_energy(u: &dyn MapField, w: &dyn MapField, t: f64, grid: &VolumeGrid) -> f64 {
    let map = ProjectedPerturbation { base: u, dir: w, t };
    0.5 * grid.integrate(|x| {
        let j = map.jet(x);
        dot(&j.lap, &j.lap)
    })
}

/// Second difference with Richardson extrapolation: `d^2/dt^2 E(t)|_0`.
pub fn second_variation_fd_oracle(
    u: &dyn MapField,
    w: &dyn MapField,
    grid: &VolumeGrid,
    h: f64,
) -> f64 {
    let e0 = projected_energy(u, w, 0.0, grid);
    let d = |h: f64| {
        (projected_energy(u, w, h, grid) - 2.0 * e0 + projected_energy(u, w, -h, grid)) / (h * h)
    };
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// First variation `d/dt E(t)|_0` by central differences (vanishes at
/// biharmonic maps).
pub fn first_variation_fd(u: &dyn MapField, w: &dyn MapField, grid: &VolumeGrid, h: f64) -> f64 {
    (projected_energy(u, w, h, grid) - projected_energy(u, w, -h, grid)) / (2.0 * h)
}

/// Elementary lower bound
/// `Q_u(w) >= (1-eps) int |Del w|^2 - C int (|Du|^2 + |Del u|) |Dw|^2
///  - C int |Del u|^2 |w|^2 - C/eps int |Du|^4 |w|^2`
/// with the recorded constant [`FITTED_D2_CONSTANT`].
pub fn verify_d2_lower_bound(
    u: &dyn MapField,
    w: &dyn MapField,
    eps: f64,
    grid: &VolumeGrid,
) -> Result<LemmaCheck> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Precondition(format!("need eps in (0,1), got {eps}")));
    }
    let q = second_variation(u, w, grid)?;
    let mut int_lap_w = 0.0;
    let mut int_mixed = 0.0;
    let mut int_lap_u_w = 0.0;
    let mut int_quart = 0.0;
    for (&r, &wr) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
        for (node, &wa) in grid.angular.nodes.iter().zip(&grid.angular.weights) {
            let x = scale(node, r);
            let wgt = wr * wa;
            let ju = u.jet(&x);
            let jw = w.jet(&x);
            let gu = ju.grad_norm_sq();
            let lu = dot(&ju.lap, &ju.lap).sqrt();
            let w2 = dot(&jw.value, &jw.value);
            int_lap_w += wgt * dot(&jw.lap, &jw.lap);
            int_mixed += wgt * (gu + lu) * jw.grad_norm_sq();
            int_lap_u_w += wgt * lu * lu * w2;
            int_quart += wgt * gu * gu * w2;
        }
    }
    let c = FITTED_D2_CONSTANT;
    let rhs = (1.0 - eps) * int_lap_w - c * int_mixed - c * int_lap_u_w - c / eps * int_quart;
    // direction: Q >= rhs
    Ok(LemmaCheck::le("elementary_d2_lower_bound", rhs, q, 1e-9)
        .with("eps", eps)
        .with("fitted_c", c)
        .with("q", q))
}

// ---------------------------------------------------------------------------
// Pohozaev identities
// ---------------------------------------------------------------------------

/// Radial jets of a map on a sphere of fixed radius, as needed by the
/// Pohozaev integrands.
pub struct PohozaevData {
    pub du_r: Vec4,
    pub d2u_r: Vec4,
    pub d3u_r: Vec4,
    pub lap: Vec4,
    pub dlap_r: Vec4,
    pub lap_sphere: Vec4,
    pub dlap_sphere_r: Vec4,
}

pub trait PohozaevMap {
    fn dim(&self) -> u32;
    fn data(&self, x: &Vec4) -> PohozaevData;
    /// Whether the map extends smoothly across the origin.
    fn ball_regular(&self) -> bool;
}

impl PohozaevMap for crate::field::RadialProjection {
    fn dim(&self) -> u32 {
        self.d
    }
    fn data(&self, x: &Vec4) -> PohozaevData {
        let r = norm(x);
        let omega = scale(x, 1.0 / r);
        let dm1 = self.d as f64 - 1.0;
        PohozaevData {
            du_r: ZERO_VEC,
            d2u_r: ZERO_VEC,
            d3u_r: ZERO_VEC,
            lap: scale(&omega, -dm1 / (r * r)),
            dlap_r: scale(&omega, 2.0 * dm1 / (r * r * r)),
            lap_sphere: scale(&omega, -dm1),
            dlap_sphere_r: ZERO_VEC,
        }
    }
    fn ball_regular(&self) -> bool {
        false
    }
}

impl PohozaevMap for ModalVector {
    fn dim(&self) -> u32 {
        self.d
    }
    fn data(&self, x: &Vec4) -> PohozaevData {
        let r = norm(x);
        let omega = scale(x, 1.0 / r);
        let df = self.d as f64;
        let mut out = PohozaevData {
            du_r: ZERO_VEC,
            d2u_r: ZERO_VEC,
            d3u_r: ZERO_VEC,
            lap: ZERO_VEC,
            dlap_r: ZERO_VEC,
            lap_sphere: ZERO_VEC,
            dlap_sphere_r: ZERO_VEC,
        };
        for (c, comp) in self.components.iter().enumerate() {
            for (idx, radial) in &comp.modes {
                let f = radial.jet(r);
                let y = crate::harmonics::eval_basis(*idx, &omega).expect("basis");
                let lam = crate::harmonics::laplace_eigenvalue(idx.d, idx.n);
                out.du_r[c] += f[1] * y;
                out.d2u_r[c] += f[2] * y;
                out.d3u_r[c] += f[3] * y;
                let lap = f[2] + (df - 1.0) * f[1] / r - lam * f[0] / (r * r);
                out.lap[c] += lap * y;
                out.dlap_r[c] +=
                    (f[3] + (df - 1.0) * f[2] / r - (df - 1.0) * f[1] / (r * r)
                        - lam * f[1] / (r * r)
                        + 2.0 * lam * f[0] / (r * r * r))
                        * y;
                out.lap_sphere[c] += -lam * f[0] * y;
                out.dlap_sphere_r[c] += -lam * f[1] * y;
            }
        }
        out
    }
    fn ball_regular(&self) -> bool {
        true
    }
}

/// Pohozaev flux through the sphere of radius `R`:
/// `Q(R) = int_{dB_R} ( r/2 |Del u|^2 + r d_r u . d_r(Del u)
///         - r d_r^2 u . Del u - d_r u . Del u ) dH^3`.
pub fn pohozaev_flux(map: &dyn PohozaevMap, radius: f64, level: u32) -> Result<f64> {
    let quad = crate::harmonics::AngularQuadrature::new(map.dim(), level)?;
    let r3 = radius.powi(map.dim() as i32 - 1);
    Ok(quad.integrate(|node| {
        let x = scale(node, radius);
        let d = map.data(&x);
        let lap_sq = dot(&d.lap, &d.lap);
        radius / 2.0 * lap_sq + radius * dot(&d.du_r, &d.dlap_r)
            - radius * dot(&d.d2u_r, &d.lap)
            - dot(&d.du_r, &d.lap)
    }) * r3)
}

/// Surface form of the Pohozaev identity at radius `R` for ball-regular maps:
/// `int (|d_r^2 u|^2 + 3/r^2 |d_r u|^2 - 2 d_r u . (d_r^3 u + 2/r d_r^2 u))
///  = int (1/r^4 |Del_S u|^2 + 2/r^2 d_r u . d_r(Del_S u))`.
/// Singular maps are routed to the flux-constancy check instead.
pub fn verify_pohozaev_identity(
    map: &dyn PohozaevMap,
    radii: &[f64],
    level: u32,
) -> Result<Vec<LemmaCheck>> {
    let quad = crate::harmonics::AngularQuadrature::new(map.dim(), level)?;
    let mut checks = Vec::new();
    if !map.ball_regular() {
        // flux constancy only
        let q0 = pohozaev_flux(map, radii[0], level)?;
        for &r in &radii[1..] {
            let q = pohozaev_flux(map, r, level)?;
            checks.push(
                LemmaCheck::eq("pohozaev_flux_constancy", q, q0, 1e-7)
                    .with("r", r)
                    .with("q0", q0),
            );
        }
        return Ok(checks);
    }
    for &r in radii {
        let rr = r;
        let r3 = rr.powi(map.dim() as i32 - 1);
        let lhs = quad.integrate(|node| {
            let x = scale(node, rr);
            let d = map.data(&x);
            dot(&d.d2u_r, &d.d2u_r) + 3.0 / (rr * rr) * dot(&d.du_r, &d.du_r)
                - 2.0 * dot(&d.du_r, &crate::linalg::add(&d.d3u_r, &scale(&d.d2u_r, 2.0 / rr)))
        }) * r3;
        let rhs = quad.integrate(|node| {
            let x = scale(node, rr);
            let d = map.data(&x);
            dot(&d.lap_sphere, &d.lap_sphere) / rr.powi(4)
                + 2.0 / (rr * rr) * dot(&d.du_r, &d.dlap_sphere_r)
        }) * r3;
        checks.push(LemmaCheck::eq("pohozaev_identity", lhs, rhs, 1e-6).with("r", r));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Hardy-Rellich Rayleigh quotients (log variable)
// ---------------------------------------------------------------------------

/// Trial basis on `[0, L]` vanishing to second order at both ends:
/// `g_k(t) = (t (L-t)/L^2)^2 T_k(2t/L - 1)`; returns `(g, g', g'')` at `t`.
fn trial_jet(k: usize, l: f64, t: f64) -> (f64, f64, f64) {
    let x = 2.0 * t / l - 1.0;
    // Chebyshev values and derivatives via the standard identities
    let (tk, uk1) = chebyshev_t_u(k, x);
    let t1 = k as f64 * uk1 * 2.0 / l;
    let t2 = if k == 0 {
        0.0
    } else {
        let denom = x * x - 1.0;
        let tpp = if denom.abs() > 1e-9 {
            k as f64 * (k as f64 * tk - x * uk1) / denom
        } else {
            // limit at the endpoints (not reached by Gauss nodes)
            0.0
        };
        tpp * 4.0 / (l * l)
    };
    let q = (t * (l - t) / (l * l)).powi(2);
    let q1 = 2.0 * (t * (l - t) / (l * l)) * ((l - 2.0 * t) / (l * l));
    let q2 = 2.0 * ((l - 2.0 * t) / (l * l)).powi(2) - 4.0 * t * (l - t) / (l * l * l * l);
    let g = q * tk;
    let g1 = q1 * tk + q * t1;
    let g2 = q2 * tk + 2.0 * q1 * t1 + q * t2;
    (g, g1, g2)
}

/// `(T_k(x), U_{k-1}(x))` by recurrence.
fn chebyshev_t_u(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut t0, mut t1) = (1.0, x);
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    for _ in 1..k {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    (t1, u0)
}

/// Denominator of the Rayleigh quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RellichDenominator {
    /// `int u^2/|x|^4`
    ValueWeight4,
    /// `int |grad u|^2/|x|^2`
    GradientWeight2,
    /// `int (u^2/|x|^4 + |grad u|^2/|x|^2) ((|x|/b)^beta + (a/|x|)^beta)`
    HolderWeight(f64),
}

/// Per-mode minimum of `int (Del u)^2 / denominator` over the trial space,
/// for d = 4 on the annulus `(a, b)`; all integrals reduce to the log
/// variable `t in [0, L]`, `L = log(b/a)`.
pub fn rellich_rayleigh_min(
    a: f64,
    b: f64,
    mode: u32,
    basis: usize,
    denom: RellichDenominator,
) -> Result<f64> {
    if !(0.0 < a && a < b) {
        return Err(Error::Domain("need 0 < a < b".into()));
    }
    let l = (b / a).ln();
    let lam = crate::harmonics::laplace_eigenvalue(4, mode);
    let npts = 60 + 2 * basis;
    let (gx, gw) = gauss_legendre(npts);
    let mut amat: DMatrix<f64> = DMatrix::zeros(basis, basis);
    let mut bmat: DMatrix<f64> = DMatrix::zeros(basis, basis);
    for (&xq, &wq) in gx.iter().zip(&gw) {
        let t = 0.5 * l * (xq + 1.0);
        let w = 0.5 * l * wq;
        let jets: Vec<(f64, f64, f64)> = (0..basis).map(|k| trial_jet(k, l, t)).collect();
        for i in 0..basis {
            let di = jets[i].2 + 2.0 * jets[i].1 - lam * jets[i].0;
            for j in 0..=i {
                let dj = jets[j].2 + 2.0 * jets[j].1 - lam * jets[j].0;
                amat[(i, j)] += w * di * dj;
                let bb = match denom {
                    RellichDenominator::ValueWeight4 => jets[i].0 * jets[j].0,
                    RellichDenominator::GradientWeight2 => {
                        jets[i].1 * jets[j].1 + lam * jets[i].0 * jets[j].0
                    }
                    RellichDenominator::HolderWeight(beta) => {
                        let wgt = (beta * (t - l)).exp() + (-beta * t).exp();
                        (jets[i].0 * jets[j].0
                            + jets[i].1 * jets[j].1
                            + lam * jets[i].0 * jets[j].0)
                            * wgt
                    }
                };
                bmat[(i, j)] += w * bb;
            }
        }
    }
    for i in 0..basis {
        for j in 0..i {
            amat[(j, i)] = amat[(i, j)];
            bmat[(j, i)] = bmat[(i, j)];
        }
    }
    generalized_min_eig(&amat, &bmat)
}

/// Smallest generalized eigenvalue of `A x = mu B x` for symmetric `A`,
/// positive-semidefinite `B`, via spectral filtering of `B`.
fn generalized_min_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let eig_b = nalgebra::SymmetricEigen::new(b.clone());
    let max_ev = eig_b.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if max_ev <= 0.0 {
        return Err(Error::Numeric("degenerate denominator form".into()));
    }
    let tol = 1e-12 * max_ev;
    let kept: Vec<usize> =
        (0..eig_b.eigenvalues.len()).filter(|&i| eig_b.eigenvalues[i] > tol).collect();
    if kept.is_empty() {
        return Err(Error::Numeric("denominator form numerically zero".into()));
    }
    let n = a.nrows();
    let mut s: DMatrix<f64> = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let scale = 1.0 / eig_b.eigenvalues[i].sqrt();
        for row in 0..n {
            s[(row, col)] = eig_b.eigenvectors[(row, i)] * scale;
        }
    }
    let mut m = s.transpose() * a * &s;
    let mt = m.transpose();
    m += mt;
    m *= 0.5;
    let eig_m = nalgebra::SymmetricEigen::new(m);
    Ok(eig_m.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Conformal threshold of the first Rellich inequality:
/// `log(b/a) >= 15 sqrt(4 + 3 pi (pi + 1))/2`.
pub fn rellich_a_threshold() -> f64 {
    15.0 * (4.0 + 3.0 * PI * (PI + 1.0)).sqrt() / 2.0
}

/// First Hardy-Rellich inequality on `(a, b)`:
/// `int (Del u)^2 >= (4 + pi^2/L^2)(pi^2/L^2) int u^2/|x|^4` per mode.
pub fn verify_rellich_a(a: f64, b: f64, modes: u32, basis: usize) -> Result<Vec<LemmaCheck>> {
    let l = (b / a).ln();
    if l < rellich_a_threshold() {
        return Err(Error::Precondition(format!(
            "conformal class {l} below the threshold {}",
            rellich_a_threshold()
        )));
    }
    let bound = (4.0 + PI * PI / (l * l)) * PI * PI / (l * l);
    let mut checks = Vec::new();
    for n in 0..=modes {
        let min = rellich_rayleigh_min(a, b, n, basis, RellichDenominator::ValueWeight4)?;
        checks.push(
            LemmaCheck::le("rellich_value_weight4", bound, min, 1e-9)
                .with("mode", n as f64)
                .with("bound", bound),
        );
    }
    Ok(checks)
}

/// Conformal threshold of the gradient Rellich inequality (supremum over
/// positive modes of the explicit expression; attained at n = 1).
pub fn rellich_b_threshold(n_max: u32) -> f64 {
    let mut sup: f64 = 0.0;
    for n in 1..=n_max {
        let lam = (n * (n + 2)) as f64;
        let base = 8.0 + 204.0 * lam;
        let inner = (base * base + 4.0 * lam + 16.0 * lam * lam).sqrt();
        let v = PI * (base + inner).sqrt() / (32.0 * lam + 16.0 * lam * lam).sqrt();
        sup = sup.max(v);
    }
    sup
}

/// Gradient Hardy-Rellich inequality:
/// `int (Del u)^2 >= (9 + 10 pi^2/L^2 + pi^4/L^4)/(3 + pi^2/L^2)
///  int |grad u|^2/|x|^2` per mode.
pub fn verify_rellich_b(a: f64, b: f64, modes: u32, basis: usize) -> Result<Vec<LemmaCheck>> {
    let l = (b / a).ln();
    let thr = rellich_b_threshold(50);
    if l < thr {
        return Err(Error::Precondition(format!("conformal class {l} below the threshold {thr}")));
    }
    let l2 = l * l;
    let bound = (9.0 + 10.0 * PI * PI / l2 + PI.powi(4) / (l2 * l2)) / (3.0 + PI * PI / l2);
    let mut checks = Vec::new();
    for n in 0..=modes {
        let min = rellich_rayleigh_min(a, b, n, basis, RellichDenominator::GradientWeight2)?;
        checks.push(
            LemmaCheck::le("rellich_gradient_weight2", bound, min, 1e-9)
                .with("mode", n as f64)
                .with("bound", bound),
        );
    }
    Ok(checks)
}

/// Weighted Rellich inequality with Holder weight: returns the best constant
/// `C_beta = min over modes` together with its value at an enriched basis
/// (refinement stability of the reported constant).
pub fn verify_rellich_c(
    a: f64,
    b: f64,
    beta: f64,
    modes: u32,
    basis: usize,
) -> Result<LemmaCheck> {
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!("need beta > 0, got {beta}")));
    }
    let best = |basis: usize| -> Result<f64> {
        let mut best = f64::INFINITY;
        for n in 0..=modes {
            let m = rellich_rayleigh_min(a, b, n, basis, RellichDenominator::HolderWeight(beta))?;
            best = best.min(m);
        }
        Ok(best)
    };
    let c_beta = best(basis)?;
    let c_refined = best(basis + 16)?;
    let stable = (c_beta - c_refined).abs() <= 0.01 * c_beta.abs() && c_refined <= c_beta * (1.0 + 1e-9);
    let mut check = LemmaCheck::le("rellich_holder_weight", 0.0, c_beta, 1e-12)
        .with("beta", beta)
        .with("c_beta", c_beta)
        .with("c_refined", c_refined);
    if !(c_beta > 0.0) || !stable {
        check = check.failed();
    }
    Ok(check)
}

/// Eigenvalue spectra (per mode) for CSV export.
pub fn rellich_spectrum(
    a: f64,
    b: f64,
    mode: u32,
    basis: usize,
    denom: RellichDenominator,
) -> Result<Vec<f64>> {
    let l = (b / a).ln();
    let lam = crate::harmonics::laplace_eigenvalue(4, mode);
    let npts = 60 + 2 * basis;
    let (gx, gw) = gauss_legendre(npts);
    let mut amat: DMatrix<f64> = DMatrix::zeros(basis, basis);
    let mut bmat: DMatrix<f64> = DMatrix::zeros(basis, basis);
    for (&xq, &wq) in gx.iter().zip(&gw) {
        let t = 0.5 * l * (xq + 1.0);
        let w = 0.5 * l * wq;
        let jets: Vec<(f64, f64, f64)> = (0..basis).map(|k| trial_jet(k, l, t)).collect();
        for i in 0..basis {
            let di = jets[i].2 + 2.0 * jets[i].1 - lam * jets[i].0;
            for j in 0..=i {
                let dj = jets[j].2 + 2.0 * jets[j].1 - lam * jets[j].0;
                amat[(i, j)] += w * di * dj;
                let bb = match denom {
                    RellichDenominator::ValueWeight4 => jets[i].0 * jets[j].0,
                    RellichDenominator::GradientWeight2 => {
                        jets[i].1 * jets[j].1 + lam * jets[i].0 * jets[j].0
                    }
                    RellichDenominator::HolderWeight(beta) => {
                        let wgt = (beta * (t - l)).exp() + (-beta * t).exp();
                        (jets[i].0 * jets[j].0 + jets[i].1 * jets[j].1 + lam * jets[i].0 * jets[j].0) * wgt
                    }
                };
                bmat[(i, j)] += w * bb;
            }
        }
    }
    for i in 0..basis {
        for j in 0..i {
            amat[(j, i)] = amat[(i, j)];
            bmat[(j, i)] = bmat[(i, j)];
        }
    }
    // full generalized spectrum via the filtered transform
    let eig_b = nalgebra::SymmetricEigen::new(bmat.clone());
    let max_ev = eig_b.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-12 * max_ev;
    let kept: Vec<usize> =
        (0..eig_b.eigenvalues.len()).filter(|&i| eig_b.eigenvalues[i] > tol).collect();
    let n = basis;
    let mut s: DMatrix<f64> = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let sc = 1.0 / eig_b.eigenvalues[i].sqrt();
        for row in 0..n {
            s[(row, col)] = eig_b.eigenvectors[(row, i)] * sc;
        }
    }
    let mut m = s.transpose() * amat * &s;
    let mt = m.transpose();
    m += mt;
    m *= 0.5;
    let mut evs: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().cloned().collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(evs)
}

/// First Dirichlet eigenvalue of the Laplacian on the unit ball of `R^4` from
/// the radial Rayleigh problem (trial functions `(1-r) P_k(r)`), which
/// converges to `j_{1,1}^2 = 14.681970...` and cross-validates the Bessel
/// zero machinery.
pub fn ball_dirichlet_lambda1(basis: usize) -> f64 {
    let (gx, gw) = gauss_legendre(80);
    let mut amat: DMatrix<f64> = DMatrix::zeros(basis, basis);
    let mut bmat: DMatrix<f64> = DMatrix::zeros(basis, basis);
    for (&xq, &wq) in gx.iter().zip(&gw) {
        let r = 0.5 * (xq + 1.0);
        let w = 0.5 * wq * r * r * r;
        // v_k = (1 - r) r^k ... with k >= 0; v_k' = -(k+1) r^k + k r^{k-1}
        let jets: Vec<(f64, f64)> = (0..basis)
            .map(|k| {
                let kf = k as f64;
                let v = (1.0 - r) * r.powi(k as i32);
                let dv = kf * r.powi(k as i32 - 1) - (kf + 1.0) * r.powi(k as i32);
                (v, dv)
            })
            .collect();
        for i in 0..basis {
            for j in 0..=i {
                amat[(i, j)] += w * jets[i].1 * jets[j].1;
                bmat[(i, j)] += w * jets[i].0 * jets[j].0;
            }
        }
    }
    for i in 0..basis {
        for j in 0..i {
            amat[(j, i)] = amat[(i, j)];
            bmat[(j, i)] = bmat[(i, j)];
        }
    }
    generalized_min_eig(&amat, &bmat).expect("ball eigenvalue")
}

// ---------------------------------------------------------------------------
// neck positivity
// ---------------------------------------------------------------------------

/// The three-branch neck weight
/// `omega(x) = |x|^{-4} ((|x|/b)^{2 beta} + (a/|x|)^{2 beta} + 1/log^2(b/a))`
/// on the annulus, continued by its boundary values inside `B_a` and outside
/// `B_b`.
#[derive(Debug, Clone, Copy)]
pub struct NeckWeight {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
}

impl NeckWeight {
    pub fn eval(&self, r: f64) -> f64 {
        let rr = r.clamp(self.a, self.b);
        let l = (self.b / self.a).ln();
        ((rr / self.b).powf(2.0 * self.beta) + (self.a / rr).powf(2.0 * self.beta)
            + 1.0 / (l * l))
            / rr.powi(4)
    }

    /// Continuity across the two branch radii.
    pub fn continuity_checks(&self) -> Vec<LemmaCheck> {
        let eps = 1e-9;
        vec![
            LemmaCheck::eq(
                "neck_weight_continuity_inner",
                self.eval(self.a * (1.0 - eps)),
                self.eval(self.a * (1.0 + eps)),
                1e-7,
            ),
            LemmaCheck::eq(
                "neck_weight_continuity_outer",
                self.eval(self.b * (1.0 - eps)),
                self.eval(self.b * (1.0 + eps)),
                1e-7,
            ),
        ]
    }
}

/// Arithmetic assembly of the neck inequality for a variation supported in
/// `Omega_{1/2} = B_{b/2} \ B_{2a}`:
/// `3/4 int |Del v|^2 >= int |grad v|^2/|x|^2
///  + 2 pi^2/log^2(b/(4a)) int v^2/|x|^4
///  + C_{2 beta}/12 int v^2 ((|x|/b)^{2 beta} + (a/|x|)^{2 beta})/|x|^4`,
/// with `C_{2 beta}` certified by the weighted Rellich quotient on
/// `Omega_{1/2}`, followed by the full quadratic-form bound
/// `Q_u(v) >= lambda_0 int (|grad v|^2 + v^2) omega - lambda_1 eps(u) int v^2 omega`.
pub fn assemble_neck_positivity(
    u: &dyn MapField,
    v: &ModalVector,
    beta: f64,
    a: f64,
    b: f64,
    grid: &VolumeGrid,
) -> Result<Vec<LemmaCheck>> {
    let mut checks = NeckWeight { a, b, beta }.continuity_checks();
    let l4 = (b / (4.0 * a)).ln();
    // certified constant on the support annulus
    let c2b = {
        let check = verify_rellich_c(2.0 * a, b / 2.0, 2.0 * beta, 8, 40)?;
        if !check.pass {
            return Err(Error::Numeric("weighted Rellich constant not certified".into()));
        }
        check.params["c_beta"]
    };
    let mut lap_sq = 0.0;
    let mut grad_w2 = 0.0;
    let mut val_w4 = 0.0;
    let mut val_holder = 0.0;
    let mut grad_neck = 0.0;
    let mut val_neck = 0.0;
    let neck = NeckWeight { a, b, beta };
    for (&r, &wr) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
        for (node, &wa) in grid.angular.nodes.iter().zip(&grid.angular.weights) {
            let x = scale(node, r);
            let w = wr * wa;
            let j = v.jet(&x);
            let v2 = dot(&j.value, &j.value);
            let g2 = j.grad_norm_sq();
            lap_sq += w * dot(&j.lap, &j.lap);
            grad_w2 += w * g2 / (r * r);
            val_w4 += w * v2 / r.powi(4);
            val_holder +=
                w * v2 * ((r / b).powf(2.0 * beta) + (a / r).powf(2.0 * beta)) / r.powi(4);
            let nw = neck.eval(r);
            grad_neck += w * g2 * nw;
            val_neck += w * v2 * nw;
        }
    }
    let rhs = grad_w2 + 2.0 * PI * PI / (l4 * l4) * val_w4 + c2b / 12.0 * val_holder;
    checks.push(
        LemmaCheck::le("neck_arithmetic_assembly", rhs, 0.75 * lap_sq, 1e-9)
            .with("c_2beta", c2b),
    );
    // full quadratic form bound with the recorded ensemble constant
    let q = second_variation(u, v, grid)?;
    let lambda0 = (1.0 / 12.0f64).min(PI * PI).min(c2b / 12.0);
    // smallness of the base map on the annulus
    let mut eps_u = 0.0f64;
    for (&r, &wr) in grid.radial_nodes.iter().zip(&grid.radial_weights) {
        for (node, &wa) in grid.angular.nodes.iter().zip(&grid.angular.weights) {
            let x = scale(node, r);
            let ju = u.jet(&x);
            eps_u += wr * wa * (ju.grad_norm_sq() * ju.grad_norm_sq() + dot(&ju.lap, &ju.lap));
        }
    }
    let lhs = lambda0 * (grad_neck + val_neck) - FITTED_NECK_LAMBDA1 * eps_u.sqrt() * val_neck;
    checks.push(
        LemmaCheck::le("neck_quadratic_form", lhs, q, 1e-9)
            .with("lambda0", lambda0)
            .with("eps_u", eps_u.sqrt()),
    );
    Ok(checks)
}
