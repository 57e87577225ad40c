//! Pointwise-evaluable fields built from radial profiles times spherical
//! harmonics, with exact ambient gradients, Hessians and Laplacians, plus
//! tensor-product volume quadrature on balls and annuli.
//!
//! Everything here is a carrier for the verification operations: fields are
//! immutable after construction and cheap to evaluate at arbitrary points.

use crate::harmonics::{dim_harmonics, eval_basis_jet, laplace_eigenvalue, AngularQuadrature, HarmonicIndex};
use crate::linalg::{add_outer, add_sym_outer, axpy, dot, mat_add, norm, scale, Mat4, Vec4, ZERO_MAT, ZERO_VEC};
use crate::Result;

// ---------------------------------------------------------------------------
// radial profiles with exact jets
// ---------------------------------------------------------------------------

/// A radial profile with derivatives up to third order.
#[derive(Debug, Clone)]
pub enum Radial {
    Zero,
    /// `ca r^pa + cb r^pb`
    PowerPair { ca: f64, pa: f64, cb: f64, pb: f64 },
    /// polynomial in r, low degree first
    Poly(Vec<f64>),
    /// C^3 bump supported on [lo, hi], equal to zero outside, with unit peak
    Bump { lo: f64, hi: f64 },
    /// plateau cutoff: 1 below `lo`, C^3 ramp down to 0 at `hi`
    RampDown { lo: f64, hi: f64 },
    Product(Box<Radial>, Box<Radial>),
    Sum(Vec<Radial>),
    Scaled(f64, Box<Radial>),
}

impl Radial {
    pub fn power(c: f64, p: f64) -> Radial {
        Radial::PowerPair { ca: c, pa: p, cb: 0.0, pb: 0.0 }
    }

    /// Harmonic pair `a r^n + b r^{-(n+d-2)}` for mode degree `n`.
    pub fn harmonic_pair(d: u32, n: u32, a: f64, b: f64) -> Radial {
        Radial::PowerPair { ca: a, pa: n as f64, cb: b, pb: -((n + d - 2) as f64) }
    }

    /// Value and first three derivatives at `r > 0`.
    pub fn jet(&self, r: f64) -> [f64; 4] {
        match self {
            Radial::Zero => [0.0; 4],
            Radial::PowerPair { ca, pa, cb, pb } => {
                let mut out = [0.0; 4];
                for (c, p) in [(*ca, *pa), (*cb, *pb)] {
                    if c == 0.0 {
                        continue;
                    }
                    let v = c * r.powf(p);
                    out[0] += v;
                    out[1] += v * p / r;
                    out[2] += v * p * (p - 1.0) / (r * r);
                    out[3] += v * p * (p - 1.0) * (p - 2.0) / (r * r * r);
                }
                out
            }
            Radial::Poly(c) => {
                let mut out = [0.0; 4];
                for (k, &ck) in c.iter().enumerate() {
                    let kf = k as f64;
                    let v = ck * r.powi(k as i32);
                    out[0] += v;
                    if k >= 1 {
                        out[1] += v * kf / r;
                    }
                    if k >= 2 {
                        out[2] += v * kf * (kf - 1.0) / (r * r);
                    }
                    if k >= 3 {
                        out[3] += v * kf * (kf - 1.0) * (kf - 2.0) / (r * r * r);
                    }
                }
                out
            }
            Radial::Bump { lo, hi } => bump_jet(r, *lo, *hi),
            Radial::RampDown { lo, hi } => ramp_down_jet(r, *lo, *hi),
            Radial::Product(f, g) => {
                let a = f.jet(r);
                let b = g.jet(r);
                [
                    a[0] * b[0],
                    a[1] * b[0] + a[0] * b[1],
                    a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
                    a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
                ]
            }
            Radial::Sum(terms) => {
                let mut out = [0.0; 4];
                for t in terms {
                    let j = t.jet(r);
                    for i in 0..4 {
                        out[i] += j[i];
                    }
                }
                out
            }
            Radial::Scaled(s, f) => {
                let mut j = f.jet(r);
                for v in j.iter_mut() {
                    *v *= s;
                }
                j
            }
        }
    }
}

/// `w(s) = 2^8 s^4 (1-s)^4` on [0,1] (unit peak at s = 1/2), C^3 across the
/// endpoints when extended by zero.
fn bump_jet(r: f64, lo: f64, hi: f64) -> [f64; 4] {
    if r <= lo || r >= hi {
        return [0.0; 4];
    }
    let w = hi - lo;
    let s = (r - lo) / w;
    let u = s * (1.0 - s);
    let du = 1.0 - 2.0 * s;
    let c = 256.0;
    let v = c * u.powi(4);
    let d1 = c * 4.0 * u.powi(3) * du;
    // d/ds of d1: 12 u^2 du^2 - 8 u^3; once more: 24 u du^3 - 24 u^2 du - 48 u^2 du
    let d2 = c * (12.0 * u * u * du * du - 8.0 * u.powi(3));
    let d3 = c * (24.0 * u * du.powi(3) - 72.0 * u * u * du);
    [v, d1 / w, d2 / (w * w), d3 / (w * w * w)]
}

/// Quintic smoothstep ramp from 1 at `lo` to 0 at `hi` (C^2 across the
/// endpoints). On the unit-width profile both |h'| and |h''| stay below 2
/// (their maxima are 15/8), the bound required of the cutoff eta.
fn ramp_down_jet(r: f64, lo: f64, hi: f64) -> [f64; 4] {
    if r <= lo {
        return [1.0, 0.0, 0.0, 0.0];
    }
    if r >= hi {
        return [0.0; 4];
    }
    let w = hi - lo;
    let s = (r - lo) / w;
    // h(s) = 1 - (10 s^3 - 15 s^4 + 6 s^5)
    let v = 1.0 - (10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5));
    let d1 = -(30.0 * s * s - 60.0 * s.powi(3) + 30.0 * s.powi(4));
    let d2 = -(60.0 * s - 180.0 * s * s + 120.0 * s.powi(3));
    let d3 = -(60.0 - 360.0 * s + 360.0 * s * s);
    [v, d1 / w, d2 / (w * w), d3 / (w * w * w)]
}

// ---------------------------------------------------------------------------
// scalar fields
// ---------------------------------------------------------------------------

/// A scalar field with exact first and second ambient derivatives.
pub trait ScalarField {
    fn dim(&self) -> u32;
    fn value(&self, x: &Vec4) -> f64;
    fn grad(&self, x: &Vec4) -> Vec4;
    fn hess(&self, x: &Vec4) -> Mat4;
    fn laplacian(&self, x: &Vec4) -> f64 {
        crate::linalg::trace(&self.hess(x))
    }
}

/// Finite sum of `f_{n,k}(r) Y_n^k(omega)` with exact derivatives.
pub struct ModalScalar {
    pub d: u32,
    pub modes: Vec<(HarmonicIndex, Radial)>,
}

impl ModalScalar {
    pub fn new(d: u32) -> Self {
        ModalScalar { d, modes: Vec::new() }
    }

    pub fn push(&mut self, n: u32, k: u64, radial: Radial) -> Result<()> {
        self.modes.push((HarmonicIndex::new(self.d, n, k)?, radial));
        Ok(())
    }

    /// Value, ambient gradient, ambient Hessian at `x != 0`.
    pub fn jet(&self, x: &Vec4) -> (f64, Vec4, Mat4) {
        let r = norm(x);
        let omega = scale(x, 1.0 / r);
        let mut value = 0.0;
        let mut grad = ZERO_VEC;
        let mut hess = ZERO_MAT;
        for (idx, radial) in &self.modes {
            let fj = radial.jet(r);
            let yj = eval_basis_jet(*idx, &omega).expect("basis eval");
            value += fj[0] * yj.value;
            // grad = f' Y omega + (f/r) grad_S Y
            axpy(&mut grad, fj[1] * yj.value, &omega);
            axpy(&mut grad, fj[0] / r, &yj.grad);
            // Hess = (f'' - f'/r) Y w w^t + (f'/r - f/r^2)(w g^t + g w^t)
            //      + (f'/r) Y Id + (f/r^2) Hess_S Y
            add_outer(&mut hess, (fj[2] - fj[1] / r) * yj.value, &omega);
            add_sym_outer(&mut hess, fj[1] / r - fj[0] / (r * r), &omega, &yj.grad);
            for i in 0..self.d as usize {
                hess[i][i] += fj[1] / r * yj.value;
            }
            mat_add(&mut hess, fj[0] / (r * r), &yj.hess);
        }
        (value, grad, hess)
    }

    /// Laplacian from the modal identity `(f'' + (d-1) f'/r - lambda f/r^2) Y`.
    pub fn laplacian_modal(&self, x: &Vec4) -> f64 {
        let r = norm(x);
        let omega = scale(x, 1.0 / r);
        let mut out = 0.0;
        for (idx, radial) in &self.modes {
            let fj = radial.jet(r);
            let y = crate::harmonics::eval_basis(*idx, &omega).expect("basis eval");
            let lam = laplace_eigenvalue(idx.d, idx.n);
            out += (fj[2] + (self.d as f64 - 1.0) * fj[1] / r - lam * fj[0] / (r * r)) * y;
        }
        out
    }
}

impl ScalarField for ModalScalar {
    fn dim(&self) -> u32 {
        self.d
    }
    fn value(&self, x: &Vec4) -> f64 {
        self.jet(x).0
    }
    fn grad(&self, x: &Vec4) -> Vec4 {
        self.jet(x).1
    }
    fn hess(&self, x: &Vec4) -> Mat4 {
        self.jet(x).2
    }
    fn laplacian(&self, x: &Vec4) -> f64 {
        self.laplacian_modal(x)
    }
}

// ---------------------------------------------------------------------------
// vector maps (for second variation and Pohozaev identities)
// ---------------------------------------------------------------------------

/// Value, Jacobian and componentwise Laplacian of a map into `R^m`, `m <= 4`.
#[derive(Debug, Clone, Copy)]
pub struct MapJet {
    pub value: Vec4,
    /// `jac[i][c] = d_i u_c`
    pub jac: Mat4,
    pub lap: Vec4,
}

impl MapJet {
    pub fn grad_norm_sq(&self) -> f64 {
        crate::linalg::frobenius_sq(&self.jac)
    }
}

pub trait MapField {
    fn dim(&self) -> u32;
    fn target_dim(&self) -> usize;
    fn jet(&self, x: &Vec4) -> MapJet;
}

/// The radial projection `u(x) = x/|x|`, a singular biharmonic map into
/// `S^{d-1}` for d = 4.
pub struct RadialProjection {
    pub d: u32,
}

impl MapField for RadialProjection {
    fn dim(&self) -> u32 {
        self.d
    }
    fn target_dim(&self) -> usize {
        self.d as usize
    }
    fn jet(&self, x: &Vec4) -> MapJet {
        let r = norm(x);
        let omega = scale(x, 1.0 / r);
        let mut jac = ZERO_MAT;
        for i in 0..self.d as usize {
            for c in 0..self.d as usize {
                let id = if i == c { 1.0 } else { 0.0 };
                jac[i][c] = (id - omega[i] * omega[c]) / r;
            }
        }
        let lap = scale(&omega, -(self.d as f64 - 1.0) / (r * r));
        MapJet { value: omega, jac, lap }
    }
}

/// A constant map into a point of the target.
pub struct ConstantMap {
    pub d: u32,
    pub point: Vec4,
}

impl MapField for ConstantMap {
    fn dim(&self) -> u32 {
        self.d
    }
    fn target_dim(&self) -> usize {
        4
    }
    fn jet(&self, _x: &Vec4) -> MapJet {
        MapJet { value: self.point, jac: ZERO_MAT, lap: ZERO_VEC }
    }
}

/// Componentwise modal map: each target component is a `ModalScalar`.
pub struct ModalVector {
    pub d: u32,
    pub components: Vec<ModalScalar>,
}

impl MapField for ModalVector {
    fn dim(&self) -> u32 {
        self.d
    }
    fn target_dim(&self) -> usize {
        self.components.len()
    }
    fn jet(&self, x: &Vec4) -> MapJet {
        let mut value = ZERO_VEC;
        let mut jac = ZERO_MAT;
        let mut lap = ZERO_VEC;
        for (c, comp) in self.components.iter().enumerate() {
            let (v, g, _) = comp.jet(x);
            value[c] = v;
            for i in 0..4 {
                jac[i][c] = g[i];
            }
            lap[c] = comp.laplacian_modal(x);
        }
        MapJet { value, jac, lap }
    }
}

/// Nearest-point projection of `u + t w` onto the unit sphere of the target,
/// with jets obtained by the chain rule for `y = v/|v|`.
pub struct ProjectedPerturbation<'a> {
    pub base: &'a dyn MapField,
    pub dir: &'a dyn MapField,
    pub t: f64,
}

impl MapField for ProjectedPerturbation<'_> {
    fn dim(&self) -> u32 {
        self.base.dim()
    }
    fn target_dim(&self) -> usize {
        self.base.target_dim()
    }
    fn jet(&self, x: &Vec4) -> MapJet {
        let a = self.base.jet(x);
        let b = self.dir.jet(x);
        let mut v = a.value;
        axpy(&mut v, self.t, &b.value);
        let mut jac = a.jac;
        mat_add(&mut jac, self.t, &b.jac);
        let mut lap = a.lap;
        axpy(&mut lap, self.t, &b.lap);

        let nv = norm(&v);
        let g = 1.0 / nv;
        // dg_i = -<v, d_i v>/|v|^3
        let mut dg = ZERO_VEC;
        let mut grad_sq = 0.0;
        let mut dot_sq = 0.0;
        for i in 0..4 {
            let di = [jac[i][0], jac[i][1], jac[i][2], jac[i][3]];
            let vd = dot(&v, &di);
            dg[i] = -vd / (nv * nv * nv);
            grad_sq += dot(&di, &di);
            dot_sq += vd * vd;
        }
        // lap g = -(|Dv|^2 + <v, lap v>)/|v|^3 + 3 sum_i <v, d_i v>^2/|v|^5
        let lap_g =
            -(grad_sq + dot(&v, &lap)) / (nv * nv * nv) + 3.0 * dot_sq / (nv * nv * nv * nv * nv);

        let mut out_jac = ZERO_MAT;
        for i in 0..4 {
            for c in 0..4 {
                out_jac[i][c] = jac[i][c] * g + v[c] * dg[i];
            }
        }
        let mut out_lap = scale(&lap, g);
        for i in 0..4 {
            let di = [jac[i][0], jac[i][1], jac[i][2], jac[i][3]];
            axpy(&mut out_lap, 2.0 * dg[i], &di);
        }
        axpy(&mut out_lap, lap_g, &v);
        MapJet { value: scale(&v, g), jac: out_jac, lap: out_lap }
    }
}

// ---------------------------------------------------------------------------
// volume quadrature
// ---------------------------------------------------------------------------

/// Tensor-product quadrature over a ball or annulus: a radial rule times an
/// angular rule, with radial weights carrying the `r^{d-1}` Jacobian.
pub struct VolumeGrid {
    pub d: u32,
    pub radial_nodes: Vec<f64>,
    /// weights including the `r^{d-1} dr` factor
    pub radial_weights: Vec<f64>,
    pub angular: AngularQuadrature,
}

impl VolumeGrid {
    /// Log-radial Gauss rule on the annulus `lo < |x| < hi`.
    pub fn annulus(d: u32, lo: f64, hi: f64, n_radial: usize, level: u32) -> Result<Self> {
        let (ts, ws) = crate::harmonics::gauss_legendre(n_radial);
        let (la, lb) = (lo.ln(), hi.ln());
        let mut radial_nodes = Vec::with_capacity(n_radial);
        let mut radial_weights = Vec::with_capacity(n_radial);
        for (&t, &w) in ts.iter().zip(&ws) {
            let u = 0.5 * (lb - la) * (t + 1.0) + la;
            let r = u.exp();
            radial_nodes.push(r);
            // dr = r du, so r^{d-1} dr = r^d du
            radial_weights.push(w * 0.5 * (lb - la) * r.powi(d as i32));
        }
        Ok(VolumeGrid { d, radial_nodes, radial_weights, angular: AngularQuadrature::new(d, level)? })
    }

    /// Linear-radial Gauss rule on the ball `|x| < hi`.
    pub fn ball(d: u32, hi: f64, n_radial: usize, level: u32) -> Result<Self> {
        let (ts, ws) = crate::harmonics::gauss_legendre(n_radial);
        let mut radial_nodes = Vec::with_capacity(n_radial);
        let mut radial_weights = Vec::with_capacity(n_radial);
        for (&t, &w) in ts.iter().zip(&ws) {
            let r = 0.5 * hi * (t + 1.0);
            radial_nodes.push(r);
            radial_weights.push(w * 0.5 * hi * r.powi(d as i32 - 1));
        }
        Ok(VolumeGrid { d, radial_nodes, radial_weights, angular: AngularQuadrature::new(d, level)? })
    }

    /// Integrate a pointwise function over the domain.
    pub fn integrate<F: FnMut(&Vec4) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for (&r, &wr) in self.radial_nodes.iter().zip(&self.radial_weights) {
            for (node, &wa) in self.angular.nodes.iter().zip(&self.angular.weights) {
                let x = scale(node, r);
                total += wr * wa * f(&x);
            }
        }
        total
    }

    /// Sample a pointwise function into (value, cell measure) pairs for
    /// empirical rearrangement.
    pub fn samples<F: FnMut(&Vec4) -> f64>(&self, mut f: F) -> (Vec<f64>, Vec<f64>) {
        let cap = self.radial_nodes.len() * self.angular.len();
        let mut values = Vec::with_capacity(cap);
        let mut measures = Vec::with_capacity(cap);
        for (&r, &wr) in self.radial_nodes.iter().zip(&self.radial_weights) {
            for (node, &wa) in self.angular.nodes.iter().zip(&self.angular.weights) {
                let x = scale(node, r);
                values.push(f(&x));
                measures.push(wr * wa);
            }
        }
        (values, measures)
    }
}

/// Random modal scalar with polynomial-times-bump radial profiles, compactly
/// supported in `lo < |x| < hi` (vanishes to third order at the boundary).
pub fn random_compact_field(
    d: u32,
    lo: f64,
    hi: f64,
    n_max: u32,
    rng: &mut impl rand::Rng,
) -> Result<ModalScalar> {
    let mut f = ModalScalar::new(d);
    for n in 0..=n_max {
        let dim = dim_harmonics(d, n)?;
        for k in 1..=dim {
            if rng.gen_bool(0.5) {
                continue;
            }
            let amp = rng.gen_range(-1.0..1.0f64);
            let radial = Radial::Product(
                Box::new(Radial::Bump { lo, hi }),
                Box::new(Radial::Poly(vec![amp, rng.gen_range(-0.5..0.5) * amp])),
            );
            f.push(n, k, radial)?;
        }
    }
    if f.modes.is_empty() {
        f.push(0, 1, Radial::Bump { lo, hi })?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radial_jets_match_finite_differences() {
        let cases = vec![
            Radial::PowerPair { ca: 1.3, pa: 2.0, cb: -0.4, pb: -3.0 },
            Radial::Poly(vec![0.5, -1.0, 0.25, 0.125]),
            Radial::Bump { lo: 0.5, hi: 1.5 },
            Radial::RampDown { lo: 0.5, hi: 1.5 },
            Radial::Product(
                Box::new(Radial::Bump { lo: 0.5, hi: 1.5 }),
                Box::new(Radial::Poly(vec![1.0, 2.0])),
            ),
        ];
        for f in &cases {
            for &r in &[0.7, 0.93, 1.21, 1.4] {
                let jet = f.jet(r);
                let h = 1e-4;
                let v = |r: f64| f.jet(r)[0];
                let d1 = (v(r + h) - v(r - h)) / (2.0 * h);
                let d2 = (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h);
                assert_relative_eq!(jet[1], d1, max_relative = 1e-6, epsilon = 1e-6);
                assert_relative_eq!(jet[2], d2, max_relative = 1e-4, epsilon = 1e-4);
                let d1f = |r: f64| f.jet(r)[1];
                let d3 = (d1f(r + h) - 2.0 * d1f(r) + d1f(r - h)) / (h * h);
                assert_relative_eq!(jet[3], d3, max_relative = 1e-4, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn modal_scalar_jet_matches_fd() {
        for d in [3u32, 4] {
            let mut f = ModalScalar::new(d);
            f.push(0, 1, Radial::Poly(vec![0.3, 0.1, -0.2])).unwrap();
            f.push(1, 1, Radial::harmonic_pair(d, 1, 0.7, -0.2)).unwrap();
            f.push(2, 2, Radial::Poly(vec![0.0, 0.5, 0.1])).unwrap();
            let x: Vec4 = if d == 3 { [0.8, -0.4, 0.5, 0.0] } else { [0.8, -0.4, 0.5, 0.3] };
            let (_, g, hess) = f.jet(&x);
            let h = 1e-4;
            for i in 0..d as usize {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                assert_relative_eq!(g[i], fd, max_relative = 1e-6, epsilon = 1e-7);
                let gp = f.grad(&xp);
                let gm = f.grad(&xm);
                for j in 0..d as usize {
                    let fd2 = (gp[j] - gm[j]) / (2.0 * h);
                    assert_relative_eq!(hess[i][j], fd2, max_relative = 1e-5, epsilon = 1e-5);
                }
            }
            assert_relative_eq!(
                f.laplacian_modal(&x),
                crate::linalg::trace(&hess),
                max_relative = 1e-10,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn volume_quadrature_exact_on_powers() {
        // integral of |x|^p over the annulus = beta(d) (hi^{p+d} - lo^{p+d})/(p+d)
        for d in [3u32, 4] {
            let grid = VolumeGrid::annulus(d, 0.5, 2.0, 32, 4).unwrap();
            let beta = crate::specfun::sphere_area(d).unwrap();
            for p in [-3.0, -1.0, 0.0, 2.0] {
                let got = grid.integrate(|x| norm(x).powf(p));
                let expect = if (p + d as f64).abs() < 1e-12 {
                    beta * (2.0f64 / 0.5).ln()
                } else {
                    beta * (2.0f64.powf(p + d as f64) - 0.5f64.powf(p + d as f64)) / (p + d as f64)
                };
                assert_relative_eq!(got, expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn radial_projection_laplacian() {
        let u = RadialProjection { d: 4 };
        let x: Vec4 = [0.6, -0.3, 0.2, 0.4];
        let jet = u.jet(&x);
        let r = norm(&x);
        for c in 0..4 {
            assert_relative_eq!(jet.lap[c], -3.0 * x[c] / (r * r * r), max_relative = 1e-12);
        }
        // |grad u|^2 = (d-1)/r^2
        assert_relative_eq!(jet.grad_norm_sq(), 3.0 / (r * r), max_relative = 1e-12);
    }

    #[test]
    fn projected_perturbation_stays_unit_and_matches_fd_laplacian() {
        let base = RadialProjection { d: 4 };
        let mut w = ModalVector { d: 4, components: Vec::new() };
        for c in 0..4usize {
            let mut comp = ModalScalar::new(4);
            comp.push(0, 1, Radial::Bump { lo: 0.5, hi: 1.5 }).unwrap();
            comp.push(1, (c as u64 + 1).min(4), Radial::Bump { lo: 0.6, hi: 1.4 }).unwrap();
            w.components.push(comp);
        }
        let pp = ProjectedPerturbation { base: &base, dir: &w, t: 0.05 };
        let x: Vec4 = [0.7, 0.4, -0.3, 0.2];
        let jet = pp.jet(&x);
        assert_relative_eq!(norm(&jet.value), 1.0, max_relative = 1e-12);
        // FD check of the composed Laplacian, component 0
        let h = 1e-4;
        let mut lap_fd = 0.0;
        for i in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            lap_fd += (pp.jet(&xp).value[0] - 2.0 * jet.value[0] + pp.jet(&xm).value[0]) / (h * h);
        }
        assert_relative_eq!(jet.lap[0], lap_fd, max_relative = 1e-4, epsilon = 1e-5);
    }
}
