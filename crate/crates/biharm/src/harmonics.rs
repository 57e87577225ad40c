//! Real spherical harmonics on `S^{d-1}`.
//!
//! Dimension counts and Laplace eigenvalues are available for every `d >= 3`;
//! pointwise bases (with exact sphere gradients and covariant Hessians) are
//! implemented for `d = 3` (associated Legendre times trigonometric) and
//! `d = 4` (Gegenbauer ladder over the `S^2` basis).
//!
//! Normalization: the sphere average of `(Y_n^k)^2` is 1, so that
//! `int_{S^{d-1}} Y_n^k Y_m^l = beta(d) delta delta`. Most references instead
//! use unit `L^2` norm; every formula in this crate assumes the average-one
//! convention.

use crate::linalg::{add_outer, add_sym_outer, Mat4, Vec4, ZERO_MAT, ZERO_VEC};
use crate::specfun::{gegenbauer, gegenbauer_deriv, gegenbauer_deriv2, sphere_area};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Index `(d, n, k)` of a spherical harmonic, `1 <= k <= N_d(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicIndex {
    pub d: u32,
    pub n: u32,
    pub k: u64,
}

impl HarmonicIndex {
    pub fn new(d: u32, n: u32, k: u64) -> Result<Self> {
        let dim = dim_harmonics(d, n)?;
        if k == 0 || k > dim {
            return Err(Error::Domain(format!(
                "harmonic index k={k} outside 1..={dim} for (d,n)=({d},{n})"
            )));
        }
        Ok(HarmonicIndex { d, n, k })
    }
}

fn binom_u128(a: u64, b: u64) -> Result<u128> {
    if b > a {
        return Ok(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc
            .checked_mul((a - i) as u128)
            .ok_or_else(|| Error::Numeric(format!("binomial({a},{b}) overflow")))?;
        acc /= (i + 1) as u128;
    }
    Ok(acc)
}

/// `N_d(n) = C(n+d-1, d-1) - C(n+d-3, d-1)`, the dimension of the space of
/// degree-`n` spherical harmonics on `S^{d-1}`.
pub fn dim_harmonics(d: u32, n: u32) -> Result<u64> {
    if d < 3 {
        return Err(Error::Domain(format!("dim_harmonics requires d >= 3, got {d}")));
    }
    if n as u64 + d as u64 > 200 {
        return Err(Error::Numeric(format!("dim_harmonics guarded up to n+d <= 200, got {}", n + d)));
    }
    let (d, n) = (d as u64, n as u64);
    let hi = binom_u128(n + d - 1, d - 1)?;
    let lo = if n >= 2 { binom_u128(n + d - 3, d - 1)? } else { 0 };
    u64::try_from(hi - lo).map_err(|_| Error::Numeric("dimension exceeds u64".into()))
}

/// Factored form `(n+d-3)! / ((d-2)! n!) * (2n+d-2) = C(n+d-3, d-3) (2n+d-2)/(d-2)`.
pub fn dim_harmonics_factored(d: u32, n: u32) -> Result<u64> {
    if d < 3 {
        return Err(Error::Domain(format!("requires d >= 3, got {d}")));
    }
    let (du, nu) = (d as u64, n as u64);
    let c = binom_u128(nu + du - 3, du - 3)?;
    let num = c
        .checked_mul((2 * nu + du - 2) as u128)
        .ok_or_else(|| Error::Numeric("factored dimension overflow".into()))?;
    u64::try_from(num / (du - 2) as u128).map_err(|_| Error::Numeric("dimension exceeds u64".into()))
}

/// Eigenvalue of `-Delta_{S^{d-1}}` on degree-`n` harmonics: `n(n+d-2)`.
pub fn laplace_eigenvalue(d: u32, n: u32) -> f64 {
    let n = n as f64;
    n * (n + d as f64 - 2.0)
}

/// Exact value of `int_{S^{d-1}} |Hess_omega Y_n^k|^2` for an average-one
/// normalized harmonic: `beta(d) n(n+d-2) (n^2 + (d-2)(n-1))`.
pub fn bochner_hessian_integral(d: u32, n: u32) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!("requires d >= 3, got {d}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let lam = laplace_eigenvalue(d, n);
    let nf = n as f64;
    Ok(sphere_area(d)? * lam * (nf * nf + (d as f64 - 2.0) * (nf - 1.0)))
}

// ---------------------------------------------------------------------------
// associated Legendre functions (no Condon-Shortley phase)
// ---------------------------------------------------------------------------

/// Returns `(P_n^m(t), d/dt P_n^m(t), d^2/dt^2 P_n^m(t))`.
fn legendre_assoc(n: u32, m: u32, t: f64) -> (f64, f64, f64) {
    debug_assert!(m <= n);
    let s2 = (1.0 - t * t).max(0.0);
    // P_m^m = (2m-1)!! (1-t^2)^{m/2}
    let mut pmm = 1.0;
    if m > 0 {
        let s = s2.sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= fact * s;
            fact += 2.0;
        }
    }
    let (p_prev, p_cur);
    if n == m {
        // P_{m-1}^m = 0 by convention, which keeps the derivative relation valid
        p_prev = 0.0;
        p_cur = pmm;
    } else {
        // P_{m+1}^m = t (2m+1) P_m^m, then upward recurrence
        let mut pa = pmm;
        let mut pb = t * (2 * m + 1) as f64 * pmm;
        for l in (m + 2)..=n {
            let lf = l as f64;
            let mf = m as f64;
            let pc = ((2.0 * lf - 1.0) * t * pb - (lf + mf - 1.0) * pa) / (lf - mf);
            pa = pb;
            pb = pc;
        }
        p_prev = pa;
        p_cur = pb;
    }
    // (1-t^2) dP_n^m/dt = (n+m) P_{n-1}^m - n t P_n^m
    let (nf, mf) = (n as f64, m as f64);
    let dp = if s2 < 1e-28 {
        0.0 // only reached at the poles, which quadrature nodes avoid
    } else if n == m {
        -nf * t * p_cur / s2
    } else {
        ((nf + mf) * p_prev - nf * t * p_cur) / s2
    };
    // Legendre ODE: (1-t^2) P'' = 2 t P' - [n(n+1) - m^2/(1-t^2)] P
    let d2p = if s2 < 1e-28 {
        0.0
    } else {
        (2.0 * t * dp - (nf * (nf + 1.0) - mf * mf / s2) * p_cur) / s2
    };
    (p_cur, dp, d2p)
}

// ---------------------------------------------------------------------------
// chart evaluations
// ---------------------------------------------------------------------------

/// Chart values of a basis function and its first and second derivatives.
/// For d=3 the angles are (theta, phi); psi-entries stay zero. For d=4 they
/// are (psi, theta, phi).
#[derive(Debug, Clone, Copy, Default)]
struct ChartJet {
    v: f64,
    d1: [f64; 3],      // [psi, theta, phi]
    d2: [[f64; 3]; 3], // symmetric
}

/// S^2 basis function indexed by k in 1..=2l+1, on angles (theta, phi),
/// normalized to sphere-average one on S^2.
fn y3_chart(l: u32, k: u64, ct: f64, st: f64, phi: f64) -> ChartJet {
    debug_assert!(k >= 1 && k <= (2 * l + 1) as u64);
    // k = 1 -> m = 0; k = 2m -> cos(m phi); k = 2m+1 -> sin(m phi)
    let (m, trig_cos) = if k == 1 { (0u32, true) } else { ((k / 2) as u32, k % 2 == 0) };
    let lf = l as f64;
    let mf = m as f64;
    // sphere-average-one normalization: sqrt((2l+1) (l-m)!/(l+m)!), times
    // sqrt(2) for the m > 0 trigonometric pair
    let mut c2 = 2.0 * lf + 1.0;
    for i in (l - m + 1)..=(l + m) {
        c2 /= i as f64;
    }
    let mut norm = c2.sqrt();
    if m > 0 {
        norm *= std::f64::consts::SQRT_2;
    }
    let (p, dp, d2p) = legendre_assoc(l, m, ct);
    // theta-derivatives: t = cos(theta), dt/dtheta = -sin(theta)
    let p_th = -st * dp;
    let p_thth = st * st * d2p - ct * dp;
    let (tr, dtr, d2tr) = if m == 0 {
        (1.0, 0.0, 0.0)
    } else if trig_cos {
        let a = (mf * phi).cos();
        (a, -mf * (mf * phi).sin(), -mf * mf * a)
    } else {
        let a = (mf * phi).sin();
        (a, mf * (mf * phi).cos(), -mf * mf * a)
    };
    let mut jet = ChartJet::default();
    jet.v = norm * p * tr;
    jet.d1[1] = norm * p_th * tr;
    jet.d1[2] = norm * p * dtr;
    jet.d2[1][1] = norm * p_thth * tr;
    jet.d2[1][2] = norm * p_th * dtr;
    jet.d2[2][1] = jet.d2[1][2];
    jet.d2[2][2] = norm * p * d2tr;
    jet
}

/// Map a flat d=4 index k in 1..=(n+1)^2 to the ladder pair (l, j) with
/// 0 <= l <= n and j in 1..=2l+1.
fn split_d4_index(n: u32, k: u64) -> (u32, u64) {
    debug_assert!(k >= 1 && k <= ((n + 1) as u64).pow(2));
    let mut l = 0u32;
    let mut base = 0u64;
    loop {
        let cnt = (2 * l + 1) as u64;
        if k <= base + cnt {
            return (l, k - base);
        }
        base += cnt;
        l += 1;
    }
}

/// Normalization `A_{nl}` making the d=4 ladder function average-one on S^3.
fn d4_ladder_norm(n: u32, l: u32) -> f64 {
    // h = pi 2^{-2l-1} (n+l+1)! / ((n-l)! (n+1) (l!)^2); A = sqrt(pi / (2h))
    let mut log_h = PI.ln() - (2.0 * l as f64 + 1.0) * 2f64.ln() - ((n + 1) as f64).ln();
    for i in (n - l + 1)..=(n + l + 1) {
        log_h += (i as f64).ln();
    }
    for i in 1..=l {
        log_h -= 2.0 * (i as f64).ln();
    }
    (PI.ln() - 2f64.ln() - log_h).exp().sqrt()
}

fn y4_chart(n: u32, k: u64, cp: f64, sp: f64, ct: f64, st: f64, phi: f64) -> ChartJet {
    let (l, j) = split_d4_index(n, k);
    let a_nl = d4_ladder_norm(n, l);
    // radial-in-psi factor s(psi) = sin^l(psi) C_{n-l}^{l+1}(cos psi)
    let deg = n - l;
    let ord = (l + 1) as f64;
    let c0 = gegenbauer(deg, ord, cp).expect("gegenbauer eval");
    let c1 = gegenbauer_deriv(deg, ord, cp).expect("gegenbauer deriv");
    let c2 = gegenbauer_deriv2(deg, ord, cp).expect("gegenbauer deriv2");
    let lf = l as f64;
    let spl = sp.powi(l as i32);
    let spl1 = if l >= 1 { sp.powi(l as i32 - 1) } else { 0.0 };
    let spl2 = if l >= 2 { sp.powi(l as i32 - 2) } else { 0.0 };
    let s_val = spl * c0;
    let s_d1 = lf * spl1 * cp * c0 - spl * sp * c1;
    let s_d2 = lf * (lf - 1.0) * spl2 * cp * cp * c0 - lf * spl * c0
        - (2.0 * lf + 1.0) * spl * cp * c1
        + spl * sp * sp * c2;
    let z = y3_chart(l, j, ct, st, phi);
    let mut jet = ChartJet::default();
    jet.v = a_nl * s_val * z.v;
    jet.d1[0] = a_nl * s_d1 * z.v;
    jet.d1[1] = a_nl * s_val * z.d1[1];
    jet.d1[2] = a_nl * s_val * z.d1[2];
    jet.d2[0][0] = a_nl * s_d2 * z.v;
    jet.d2[0][1] = a_nl * s_d1 * z.d1[1];
    jet.d2[0][2] = a_nl * s_d1 * z.d1[2];
    jet.d2[1][0] = jet.d2[0][1];
    jet.d2[2][0] = jet.d2[0][2];
    jet.d2[1][1] = a_nl * s_val * z.d2[1][1];
    jet.d2[1][2] = a_nl * s_val * z.d2[1][2];
    jet.d2[2][1] = jet.d2[1][2];
    jet.d2[2][2] = a_nl * s_val * z.d2[2][2];
    jet
}

// ---------------------------------------------------------------------------
// ambient evaluation: value, sphere gradient, covariant Hessian
// ---------------------------------------------------------------------------

/// Value, tangential gradient and covariant Hessian of `Y_n^k` at a unit
/// vector, all expressed in ambient coordinates.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicJet {
    pub value: f64,
    /// Tangential gradient `grad_S Y` (ambient components, orthogonal to omega).
    pub grad: Vec4,
    /// Covariant Hessian `Hess_S Y` (ambient components, tangential block).
    pub hess: Mat4,
}

fn check_unit(d: u32, omega: &[f64]) -> Result<()> {
    if omega.len() < d as usize {
        return Err(Error::Domain(format!("point has {} components, need {d}", omega.len())));
    }
    let norm2: f64 = omega.iter().take(d as usize).map(|x| x * x).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("point not on the unit sphere, |omega|^2 = {norm2}")));
    }
    Ok(())
}

/// Evaluate `Y_n^k(omega)` (value only) for `d` in `{3, 4}`.
pub fn eval_basis(idx: HarmonicIndex, omega: &[f64]) -> Result<f64> {
    Ok(eval_basis_jet(idx, omega)?.value)
}

/// Evaluate value, gradient and covariant Hessian of `Y_n^k` at `omega`.
pub fn eval_basis_jet(idx: HarmonicIndex, omega: &[f64]) -> Result<HarmonicJet> {
    check_unit(idx.d, omega)?;
    match idx.d {
        3 => Ok(jet_d3(idx.n, idx.k, omega)),
        4 => Ok(jet_d4(idx.n, idx.k, omega)),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn jet_d3(n: u32, k: u64, omega: &[f64]) -> HarmonicJet {
    // omega = (cos t, sin t cos p, sin t sin p)
    let ct = omega[0].clamp(-1.0, 1.0);
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    let phi = omega[2].atan2(omega[1]);
    let (cphi, sphi) = (phi.cos(), phi.sin());
    let jet = y3_chart(n, k, ct, st, phi);
    let e_t: Vec4 = [-st, ct * cphi, ct * sphi, 0.0];
    let e_p: Vec4 = [0.0, -sphi, cphi, 0.0];
    let mut grad = ZERO_VEC;
    crate::linalg::axpy(&mut grad, jet.d1[1], &e_t);
    crate::linalg::axpy(&mut grad, jet.d1[2] / st, &e_p);
    // covariant Hessian in the (e_t, e_p) frame
    let cot = ct / st;
    let h_tt = jet.d2[1][1];
    let h_tp = (jet.d2[1][2] - cot * jet.d1[2]) / st;
    let h_pp = jet.d2[2][2] / (st * st) + cot * jet.d1[1];
    let mut hess = ZERO_MAT;
    add_outer(&mut hess, h_tt, &e_t);
    add_sym_outer(&mut hess, h_tp, &e_t, &e_p);
    add_outer(&mut hess, h_pp, &e_p);
    HarmonicJet { value: jet.v, grad, hess }
}

fn jet_d4(n: u32, k: u64, omega: &[f64]) -> HarmonicJet {
    // omega = (cos s, sin s cos t, sin s sin t cos p, sin s sin t sin p)
    let cp = omega[0].clamp(-1.0, 1.0);
    let sp = (1.0 - cp * cp).max(0.0).sqrt();
    let rest = (omega[1] * omega[1] + omega[2] * omega[2] + omega[3] * omega[3]).sqrt();
    let ct = if rest > 0.0 { (omega[1] / rest).clamp(-1.0, 1.0) } else { 1.0 };
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    let phi = omega[3].atan2(omega[2]);
    let (cphi, sphi) = (phi.cos(), phi.sin());
    let jet = y4_chart(n, k, cp, sp, ct, st, phi);
    let e_s: Vec4 = [-sp, cp * ct, cp * st * cphi, cp * st * sphi];
    let e_t: Vec4 = [0.0, -st, ct * cphi, ct * sphi];
    let e_p: Vec4 = [0.0, 0.0, -sphi, cphi];
    let mut grad = ZERO_VEC;
    crate::linalg::axpy(&mut grad, jet.d1[0], &e_s);
    crate::linalg::axpy(&mut grad, jet.d1[1] / sp, &e_t);
    crate::linalg::axpy(&mut grad, jet.d1[2] / (sp * st), &e_p);
    let cot_s = cp / sp;
    let cot_t = ct / st;
    let h_ss = jet.d2[0][0];
    let h_st = (jet.d2[0][1] - cot_s * jet.d1[1]) / sp;
    let h_sp = (jet.d2[0][2] - cot_s * jet.d1[2]) / (sp * st);
    let h_tt = (jet.d2[1][1] + sp * cp * jet.d1[0]) / (sp * sp);
    let h_tp = (jet.d2[1][2] - cot_t * jet.d1[2]) / (sp * sp * st);
    let h_pp = (jet.d2[2][2] + sp * cp * st * st * jet.d1[0] + st * ct * jet.d1[1]) / (sp * sp * st * st);
    let mut hess = ZERO_MAT;
    add_outer(&mut hess, h_ss, &e_s);
    add_sym_outer(&mut hess, h_st, &e_s, &e_t);
    add_sym_outer(&mut hess, h_sp, &e_s, &e_p);
    add_outer(&mut hess, h_tt, &e_t);
    add_sym_outer(&mut hess, h_tp, &e_t, &e_p);
    add_outer(&mut hess, h_pp, &e_p);
    HarmonicJet { value: jet.v, grad, hess }
}

// ---------------------------------------------------------------------------
// angular quadrature
// ---------------------------------------------------------------------------

/// Gauss-Legendre rule on [-1, 1] (Newton iteration on Legendre polynomials).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Tensor-product quadrature on `S^{d-1}` for `d` in `{3, 4}`.
///
/// Level `L` integrates products of harmonics with total degree up to `2L`
/// exactly: Gauss-Legendre in `cos(theta)`, Gauss-Chebyshev (second kind) in
/// `cos(psi)` for d = 4, uniform in the azimuth.
#[derive(Debug, Clone)]
pub struct AngularQuadrature {
    pub d: u32,
    pub level: u32,
    pub nodes: Vec<Vec4>,
    pub weights: Vec<f64>,
}

impl AngularQuadrature {
    pub fn new(d: u32, level: u32) -> Result<Self> {
        match d {
            3 => Ok(Self::build_d3(level)),
            4 => Ok(Self::build_d4(level)),
            _ => Err(Error::UnsupportedDimension(d)),
        }
    }

    fn build_d3(level: u32) -> Self {
        let n_t = level as usize + 1;
        let n_phi = 2 * level as usize + 2;
        let (ts, ws) = gauss_legendre(n_t);
        let mut nodes = Vec::with_capacity(n_t * n_phi);
        let mut weights = Vec::with_capacity(n_t * n_phi);
        let wphi = 2.0 * PI / n_phi as f64;
        for (i, &t) in ts.iter().enumerate() {
            let st = (1.0 - t * t).max(0.0).sqrt();
            for p in 0..n_phi {
                let phi = wphi * (p as f64 + 0.5);
                nodes.push([t, st * phi.cos(), st * phi.sin(), 0.0]);
                weights.push(ws[i] * wphi);
            }
        }
        AngularQuadrature { d: 3, level, nodes, weights }
    }

    fn build_d4(level: u32) -> Self {
        // Gauss-Chebyshev second kind for the weight sqrt(1 - t^2)
        let m = level as usize + 2;
        let inner = Self::build_d3(level);
        let mut nodes = Vec::with_capacity(m * inner.nodes.len());
        let mut weights = Vec::with_capacity(m * inner.nodes.len());
        for j in 1..=m {
            let a = j as f64 * PI / (m as f64 + 1.0);
            let t = a.cos();
            let w = PI / (m as f64 + 1.0) * a.sin() * a.sin();
            let st = a.sin();
            for (node, &wi) in inner.nodes.iter().zip(&inner.weights) {
                nodes.push([t, st * node[0], st * node[1], st * node[2]]);
                weights.push(w * wi);
            }
        }
        AngularQuadrature { d: 4, level, nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a function of the ambient unit vector over the sphere.
    pub fn integrate<F: FnMut(&Vec4) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, &w)| w * f(x)).sum()
    }

    /// Values of all harmonics with degree `n <= n_max` at every node;
    /// rows are nodes, columns run over `(n, k)` in lexicographic order.
    pub fn basis_values(&self, n_max: u32) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut row = Vec::new();
            for n in 0..=n_max {
                let dim = dim_harmonics(self.d, n)?;
                for k in 1..=dim {
                    row.push(eval_basis(HarmonicIndex { d: self.d, n, k }, node)?);
                }
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Full jets (value, gradient, Hessian) of all harmonics with degree
    /// `n <= n_max` at every node, plus the flat mode index list.
    pub fn basis_jets(&self, n_max: u32) -> Result<(Vec<(u32, u64)>, Vec<Vec<HarmonicJet>>)> {
        let mut mode_index = Vec::new();
        for n in 0..=n_max {
            let dim = dim_harmonics(self.d, n)?;
            for k in 1..=dim {
                mode_index.push((n, k));
            }
        }
        let mut jets = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut row = Vec::with_capacity(mode_index.len());
            for &(n, k) in &mode_index {
                row.push(eval_basis_jet(HarmonicIndex { d: self.d, n, k }, node)?);
            }
            jets.push(row);
        }
        Ok((mode_index, jets))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, frobenius_sq, norm, sub, trace};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_unit(d: u32, rng: &mut impl Rng) -> Vec4 {
        loop {
            let mut v = ZERO_VEC;
            for x in v.iter_mut().take(d as usize) {
                *x = rng.gen_range(-1.0..1.0);
            }
            let n = norm(&v);
            if n > 1e-3 && n <= 1.0 {
                return crate::linalg::scale(&v, 1.0 / n);
            }
        }
    }

    #[test]
    fn dimension_formulas() {
        for n in 0..=50 {
            assert_eq!(dim_harmonics(3, n).unwrap(), (2 * n + 1) as u64);
            assert_eq!(dim_harmonics(4, n).unwrap(), ((n + 1) * (n + 1)) as u64);
        }
        assert_eq!(dim_harmonics(3, 5).unwrap(), 11);
        assert_eq!(dim_harmonics(4, 2).unwrap(), 9);
        assert_eq!(dim_harmonics(5, 1).unwrap(), 5);
        for d in 3..=10 {
            for n in 0..=30 {
                assert_eq!(dim_harmonics(d, n).unwrap(), dim_harmonics_factored(d, n).unwrap());
            }
        }
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(laplace_eigenvalue(4, 0), 0.0);
        assert_eq!(laplace_eigenvalue(4, 1), 3.0);
        assert_eq!(laplace_eigenvalue(3, 2), 6.0);
    }

    #[test]
    fn constant_harmonic_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [3u32, 4] {
            for _ in 0..5 {
                let w = random_unit(d, &mut rng);
                let idx = HarmonicIndex::new(d, 0, 1).unwrap();
                assert_relative_eq!(eval_basis(idx, &w).unwrap(), 1.0, max_relative = 1e-12);
            }
        }
        assert!(eval_basis(HarmonicIndex { d: 5, n: 0, k: 1 }, &[1.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn addition_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [3u32, 4] {
            for n in 0..=8u32 {
                let dim = dim_harmonics(d, n).unwrap();
                for _ in 0..100 {
                    let w = random_unit(d, &mut rng);
                    let mut s = 0.0;
                    for k in 1..=dim {
                        let y = eval_basis(HarmonicIndex { d, n, k }, &w).unwrap();
                        s += y * y;
                    }
                    assert_abs_diff_eq!(s, dim as f64, epsilon = 1e-9 * dim as f64);
                }
            }
        }
    }

    #[test]
    fn quadrature_orthonormality() {
        for d in [3u32, 4] {
            let level = 8;
            let quad = AngularQuadrature::new(d, level).unwrap();
            let beta = sphere_area(d).unwrap();
            assert_relative_eq!(quad.weights.iter().sum::<f64>(), beta, max_relative = 1e-12);
            let vals = quad.basis_values(4).unwrap();
            let ncols = vals[0].len();
            for a in 0..ncols {
                for b in a..ncols {
                    let mut s = 0.0;
                    for (row, &w) in vals.iter().zip(&quad.weights) {
                        s += w * row[a] * row[b];
                    }
                    let expect = if a == b { beta } else { 0.0 };
                    assert_abs_diff_eq!(s, expect, epsilon = 1e-10 * beta);
                }
            }
        }
    }

    #[test]
    fn orthogonality_cross_degree_example() {
        // quadrature of Y_2^1 Y_3^1 over S^3 vanishes
        let quad = AngularQuadrature::new(4, 8).unwrap();
        let y2 = HarmonicIndex::new(4, 2, 1).unwrap();
        let y3 = HarmonicIndex::new(4, 3, 1).unwrap();
        let s = quad.integrate(|w| eval_basis(y2, w).unwrap() * eval_basis(y3, w).unwrap());
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn degree_one_squares_sum_to_dimension() {
        // sum_k |Y_1^k(w)|^2 = 4 for d = 4 at any point
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = random_unit(4, &mut rng);
            let mut s = 0.0;
            for k in 1..=4 {
                let y = eval_basis(HarmonicIndex { d: 4, n: 1, k }, &w).unwrap();
                s += y * y;
            }
            assert_abs_diff_eq!(s, 4.0, epsilon = 1e-10);
        }
    }

    /// Laplace-Beltrami via Richardson-extrapolated central differences of the
    /// degree-zero homogeneous extension F(x) = Y(x/|x|).
    fn laplace_beltrami_fd(idx: HarmonicIndex, w: &Vec4) -> f64 {
        let d = idx.d as usize;
        let f = |x: &Vec4| {
            let n = norm(x);
            let mut u = *x;
            for c in u.iter_mut() {
                *c /= n;
            }
            eval_basis(idx, &u).unwrap()
        };
        let lap = |h: f64| {
            let mut s = 0.0;
            for i in 0..d {
                let mut xp = *w;
                let mut xm = *w;
                xp[i] += h;
                xm[i] -= h;
                s += f(&xp) - 2.0 * f(w) + f(&xm);
            }
            s / (h * h)
        };
        (4.0 * lap(5e-3) - lap(1e-2)) / 3.0
    }

    #[test]
    fn eigenfunction_property_under_fd_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [3u32, 4] {
            for n in [1u32, 2, 4, 6] {
                let dim = dim_harmonics(d, n).unwrap();
                let lam = laplace_eigenvalue(d, n);
                for _ in 0..4 {
                    let w = random_unit(d, &mut rng);
                    let k = rng.gen_range(1..=dim);
                    let idx = HarmonicIndex { d, n, k };
                    let y = eval_basis(idx, &w).unwrap();
                    let lap = laplace_beltrami_fd(idx, &w);
                    let scale = (lam * y.abs()).max(1.0);
                    assert!(
                        (lap + lam * y).abs() / scale < 1e-6,
                        "d={d} n={n} k={k}: residual {}",
                        (lap + lam * y).abs() / scale
                    );
                }
            }
        }
    }

    #[test]
    fn jet_consistency() {
        // trace of the covariant Hessian equals -lambda Y; gradient matches a
        // finite-difference tangential gradient; both are tangential.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [3u32, 4] {
            for n in [1u32, 3, 5] {
                let dim = dim_harmonics(d, n).unwrap();
                let lam = laplace_eigenvalue(d, n);
                for _ in 0..4 {
                    let w = random_unit(d, &mut rng);
                    let k = rng.gen_range(1..=dim);
                    let idx = HarmonicIndex { d, n, k };
                    let jet = eval_basis_jet(idx, &w).unwrap();
                    // tangency
                    assert_abs_diff_eq!(dot(&jet.grad, &w), 0.0, epsilon = 1e-9 * (1.0 + norm(&jet.grad)));
                    // trace identity
                    let scale = (lam * jet.value.abs()).max(1.0);
                    assert_abs_diff_eq!(trace(&jet.hess), -lam * jet.value, epsilon = 1e-9 * scale);
                    // FD gradient of the 0-homogeneous extension
                    let f = |x: &Vec4| {
                        let nn = norm(x);
                        let mut u = *x;
                        for c in u.iter_mut() {
                            *c /= nn;
                        }
                        eval_basis(idx, &u).unwrap()
                    };
                    let h = 1e-5;
                    let mut g = ZERO_VEC;
                    for i in 0..d as usize {
                        let mut xp = w;
                        let mut xm = w;
                        xp[i] += h;
                        xm[i] -= h;
                        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
                    }
                    let diff = norm(&sub(&g, &jet.grad));
                    assert!(diff < 1e-6 * (1.0 + norm(&jet.grad)), "grad mismatch {diff}");
                }
            }
        }
    }

    #[test]
    fn bochner_integral_closed_form_and_quadrature() {
        assert_eq!(bochner_hessian_integral(4, 0).unwrap(), 0.0);
        assert_eq!(bochner_hessian_integral(7, 0).unwrap(), 0.0);
        assert_relative_eq!(
            bochner_hessian_integral(4, 1).unwrap(),
            6.0 * PI * PI,
            max_relative = 1e-12
        );
        // beta(3) lambda_1 (1 + (d-2)(n-1)) = 4 pi * 2 * 1; the quadrature
        // oracle below confirms the same value
        assert_relative_eq!(
            bochner_hessian_integral(3, 1).unwrap(),
            8.0 * PI,
            max_relative = 1e-12
        );
        // quadrature oracle: integrate |Hess_S Y|^2 directly
        for (d, n) in [(3u32, 1u32), (3, 2), (4, 1), (4, 2), (4, 3)] {
            let quad = AngularQuadrature::new(d, 12).unwrap();
            let dim = dim_harmonics(d, n).unwrap();
            for k in [1u64, dim] {
                let idx = HarmonicIndex { d, n, k };
                let got = quad.integrate(|w| {
                    let jet = eval_basis_jet(idx, w).unwrap();
                    frobenius_sq(&jet.hess)
                });
                let expect = bochner_hessian_integral(d, n).unwrap();
                assert_relative_eq!(got, expect, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn empirical_gradient_bound_scales_linearly() {
        // fit Gamma on degrees 1..=4, then check degrees 5..=8 with the same
        // constant: sup |grad Y| <= Gamma n sqrt(N_d(n))
        for d in [3u32, 4] {
            let quad = AngularQuadrature::new(d, 10).unwrap();
            let sup_ratio = |n: u32| -> f64 {
                let dim = dim_harmonics(d, n).unwrap();
                let mut worst: f64 = 0.0;
                for k in 1..=dim {
                    let idx = HarmonicIndex { d, n, k };
                    for w in &quad.nodes {
                        let jet = eval_basis_jet(idx, w).unwrap();
                        worst = worst.max(norm(&jet.grad));
                    }
                }
                worst / (n as f64 * (dim as f64).sqrt())
            };
            let fitted = (1..=4).map(sup_ratio).fold(0.0f64, f64::max);
            for n in 5..=8 {
                let r = sup_ratio(n);
                assert!(
                    r <= fitted * 1.05,
                    "d={d}: gradient ratio at n={n} ({r}) exceeds fitted constant ({fitted})"
                );
            }
        }
    }
}
