//! Special functions behind every explicit constant: Gamma, sphere areas,
//! Gegenbauer polynomials, Bessel functions of the first kind and their first
//! positive zeros, and the principal branch of Lambert W.

use crate::{Error, Result};
use std::f64::consts::{E, PI};

/// Lanczos coefficients (g = 7, 9 terms); relative error below 1e-13 on the
/// argument range used here (0.5 to 30 and its reflection).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (poles excluded).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Surface measure of the unit sphere `S^{d-1}`: `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("sphere_area requires d >= 2, got {d}")));
    }
    Ok(2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0))
}

/// Gegenbauer (ultraspherical) polynomial `C_n^order(x)` by the three-term
/// recurrence `n C_n = 2 (n + a - 1) x C_{n-1} - (n + 2a - 2) C_{n-2}`.
pub fn gegenbauer(degree: u32, order: f64, x: f64) -> Result<f64> {
    if !(order > 0.0) {
        return Err(Error::Domain(format!("gegenbauer order must be > 0, got {order}")));
    }
    if x.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("gegenbauer argument |x| <= 1, got {x}")));
    }
    if degree == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * order * x;
    for n in 2..=degree as u64 {
        let nf = n as f64;
        let next = (2.0 * (nf + order - 1.0) * x * cur - (nf + 2.0 * order - 2.0) * prev) / nf;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Derivative via `d/dx C_n^a = 2a C_{n-1}^{a+1}`.
pub fn gegenbauer_deriv(degree: u32, order: f64, x: f64) -> Result<f64> {
    if degree == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * order * gegenbauer(degree - 1, order + 1.0, x)?)
}

/// Second derivative via `d^2/dx^2 C_n^a = 4a(a+1) C_{n-2}^{a+2}`.
pub fn gegenbauer_deriv2(degree: u32, order: f64, x: f64) -> Result<f64> {
    if degree < 2 {
        return Ok(0.0);
    }
    Ok(4.0 * order * (order + 1.0) * gegenbauer(degree - 2, order + 2.0, x)?)
}

/// Switch point between the power series and asymptotic continuation.
fn bessel_switch(order: f64) -> f64 {
    (2.0 * order).max(12.0)
}

fn bessel_series(order: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powf(order) / gamma(order + 1.0);
    let mut sum = term;
    let hsq = half * half;
    for m in 0..250u64 {
        let mf = m as f64;
        term *= -hsq / ((mf + 1.0) * (mf + 1.0 + order));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion; accurate for x >= 12 when order < 1 + 1/2.
fn bessel_hankel(order: f64, x: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut p = 1.0;
    let mut q = (mu - 1.0) / (8.0 * x);
    let mut term_p = p;
    let mut term_q = q;
    let mut prev = term_q.abs().max(1.0);
    for k in 1..30u64 {
        let kf = k as f64;
        term_p *= -((mu - (4.0 * kf - 3.0).powi(2)) * (mu - (4.0 * kf - 1.0).powi(2)))
            / ((2.0 * kf - 1.0) * (2.0 * kf) * (8.0 * x).powi(2));
        if term_p.abs() > prev {
            break;
        }
        p += term_p;
        prev = term_p.abs();
        term_q *= -((mu - (4.0 * kf - 1.0).powi(2)) * (mu - (4.0 * kf + 1.0).powi(2)))
            / ((2.0 * kf) * (2.0 * kf + 1.0) * (8.0 * x).powi(2));
        q += term_q;
    }
    let w = x - order * PI / 2.0 - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}

/// Bessel function of the first kind `J_order(x)` for `order >= 0`, `x >= 0`.
///
/// Power series up to `x = max(12, 2 order)`; beyond that, Hankel asymptotics
/// at the fractional order followed by stable upward recurrence.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    if order < 0.0 {
        return Err(Error::Domain(format!("bessel_j order must be >= 0, got {order}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("bessel_j argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= bessel_switch(order) {
        return Ok(bessel_series(order, x));
    }
    // continuation: orders nu0, nu0+1 by asymptotics, then upward recurrence
    let nu0 = order.fract();
    let mut jm = bessel_hankel(nu0, x);
    if order < nu0 + 0.5 {
        return Ok(jm);
    }
    let mut jc = bessel_hankel(nu0 + 1.0, x);
    let mut k = nu0 + 1.0;
    while k < order - 0.5 {
        let next = 2.0 * k / x * jc - jm;
        jm = jc;
        jc = next;
        k += 1.0;
    }
    Ok(jc)
}

/// `J_order'(x)` via `J' = (order/x) J_order - J_{order+1}`.
pub fn bessel_j_deriv(order: f64, x: f64) -> Result<f64> {
    Ok(order / x * bessel_j(order, x)? - bessel_j(order + 1.0, x)?)
}

/// Smallest positive zero of `J_order`, bracketed by a scan of step 0.25
/// starting at `x = order` and polished by bisection plus Newton steps.
pub fn bessel_first_zero(order: f64) -> Result<f64> {
    if order < 0.0 {
        return Err(Error::Domain(format!("bessel_first_zero order must be >= 0, got {order}")));
    }
    let step = 0.25;
    let mut lo = order.max(1e-3);
    let mut flo = bessel_j(order, lo)?;
    let mut hi = lo;
    let mut bracketed = false;
    while hi < order + 20.0 {
        hi = lo + step;
        let fhi = bessel_j(order, hi)?;
        if flo > 0.0 && fhi <= 0.0 {
            bracketed = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if !bracketed {
        return Err(Error::Numeric(format!(
            "no sign change of J_{order} in [{order}, {}]",
            order + 20.0
        )));
    }
    // bisection
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bessel_j(order, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    // Newton polish
    let mut z = 0.5 * (lo + hi);
    for _ in 0..4 {
        let f = bessel_j(order, z)?;
        let df = bessel_j_deriv(order, z)?;
        if df.abs() < 1e-300 {
            break;
        }
        z -= f / df;
    }
    Ok(z)
}

/// Principal branch of the Lambert W function, defined on `x >= -1/e`,
/// solved by Halley iteration from a logarithmic initial guess.
pub fn lambert_w(x: f64) -> Result<f64> {
    let min_x = -1.0 / E;
    if x < min_x - 1e-14 {
        return Err(Error::Domain(format!("lambert_w requires x >= -1/e, got {x}")));
    }
    if x <= min_x {
        return Ok(-1.0);
    }
    let mut w = if x > E {
        let l = x.ln();
        l - l.ln()
    } else if x < -0.25 {
        // expansion around the branch point
        let p = (2.0 * (E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0
    } else {
        x.ln_1p()
    };
    for _ in 0..40 {
        let ew = w.exp();
        let f = w * ew - x;
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let dw = f / denom;
        w -= dw;
        if f.abs() <= 1e-14 * x.abs().max(1.0) && dw.abs() <= 1e-14 * w.abs().max(1e-30) {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn sphere_areas_match_closed_forms() {
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-12);
        assert!(sphere_area(1).is_err());
    }

    #[test]
    fn gamma_half_integers() {
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(1.5), 0.5 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(15.0), 87_178_291_200.0, max_relative = 1e-12);
    }

    #[test]
    fn gegenbauer_recurrence_seeds() {
        assert_eq!(gegenbauer(0, 1.5, 0.3).unwrap(), 1.0);
        assert_relative_eq!(gegenbauer(1, 1.5, 0.3).unwrap(), 2.0 * 1.5 * 0.3);
        assert!(gegenbauer(3, 1.0, 1.5).is_err());
    }

    #[test]
    fn gegenbauer_derivative_matches_finite_difference() {
        // independent oracle: Richardson-extrapolated central difference
        let f = |x: f64| gegenbauer(3, 2.0, x).unwrap();
        let fd = |h: f64| (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        let oracle = (4.0 * fd(5e-4) - fd(1e-3)) / 3.0;
        let got = gegenbauer_deriv(3, 2.0, 0.3).unwrap();
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-8);
    }

    #[test]
    fn gegenbauer_ode_residual_small() {
        // (1-x^2) y'' - (2a+1) x y' + n(n+2a) y = 0
        for &(n, a) in &[(2u32, 1.0), (4, 1.5), (6, 2.0), (8, 3.0)] {
            for i in 0..19 {
                let x = -0.9 + 0.1 * i as f64;
                let y = gegenbauer(n, a, x).unwrap();
                let dy = gegenbauer_deriv(n, a, x).unwrap();
                let d2y = gegenbauer_deriv2(n, a, x).unwrap();
                let nf = n as f64;
                let res = (1.0 - x * x) * d2y - (2.0 * a + 1.0) * x * dy + nf * (nf + 2.0 * a) * y;
                let scale = y.abs().max(dy.abs()).max(1.0);
                assert!(res.abs() / scale < 1e-8, "n={n} a={a} x={x} res={res}");
            }
        }
    }

    #[test]
    fn bessel_half_order_closed_form() {
        // J_{1/2}(x) = sqrt(2/(pi x)) sin(x)
        let x = 1.0;
        let expect = (2.0 / (PI * x)).sqrt() * x.sin();
        assert_abs_diff_eq!(bessel_j(0.5, x).unwrap(), expect, epsilon = 1e-10);
        for &x in &[0.3, 2.5, 7.0, 13.0, 21.0] {
            let expect = (2.0 / (PI * x)).sqrt() * x.sin();
            assert_abs_diff_eq!(bessel_j(0.5, x).unwrap(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn bessel_at_origin_and_first_zeros() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(bessel_j(1.0, 3.8317).unwrap(), 0.0, epsilon = 1e-4);
        assert_abs_diff_eq!(bessel_first_zero(0.0).unwrap(), 2.4048, epsilon = 1e-3);
        assert_abs_diff_eq!(bessel_first_zero(0.5).unwrap(), PI, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_first_zero(1.0).unwrap(), 3.83170, epsilon = 1e-4);
    }

    #[test]
    fn bessel_ode_residual_small() {
        // J'' + J'/x + (1 - nu^2/x^2) J = 0, with J'' from a Richardson stencil
        for &nu in &[0.0, 0.5, 1.0, 2.0, 3.7] {
            for &x in &[0.8, 2.2, 5.9, 11.0, 16.0] {
                let j = |t: f64| bessel_j(nu, t).unwrap();
                let d2 = |h: f64| (j(x + h) - 2.0 * j(x) + j(x - h)) / (h * h);
                let jpp = (4.0 * d2(1e-2) - d2(2e-2)) / 3.0;
                let jp = bessel_j_deriv(nu, x).unwrap();
                let res = jpp + jp / x + (1.0 - nu * nu / (x * x)) * j(x);
                assert!(res.abs() < 1e-8, "nu={nu} x={x} res={res}");
            }
        }
    }

    #[test]
    fn bessel_first_zero_monotone_in_order() {
        let mut prev = 0.0;
        for i in 0..=20 {
            let order = 0.5 * i as f64;
            let z = bessel_first_zero(order).unwrap();
            assert!(z > prev, "zero not increasing at order {order}");
            prev = z;
        }
    }

    #[test]
    fn lambert_w_ledger() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lambert_w(E).unwrap(), 1.0, epsilon = 1e-13);
        let w32 = lambert_w(1.5).unwrap();
        assert_abs_diff_eq!(w32, 0.72586, epsilon = 1e-4);
        assert_abs_diff_eq!(w32.exp(), 2.06651, epsilon = 1e-4);
        assert_abs_diff_eq!(3.0 / (2.0 * w32), 2.06651, epsilon = 1e-4);
        let v = 2.0 * lambert_w(1.0 / (2.0 * 2f64.sqrt())).unwrap();
        assert_abs_diff_eq!(v, 0.5398, epsilon = 1e-3);
        let w94 = lambert_w(2.25).unwrap();
        assert_abs_diff_eq!(2.0 / (3.0 * w94), 0.7344, epsilon = 1e-3);
        let gap = 1.0 - 8.0 / (9.0 * w94);
        assert_abs_diff_eq!(gap, 0.020760, epsilon = 1e-5);
        assert!(gap > 1.0 / 50.0);
        // conformal-class thresholds expressed through W(1)
        let w1 = lambert_w(1.0).unwrap();
        let c3 = 1.0 / (2.0 * w1) * (4.0 * w1 * (w1 + 2.0) / 3.0).ln();
        assert_abs_diff_eq!(c3, 0.5848, epsilon = 1e-3);
        assert_abs_diff_eq!(c3.exp(), 1.7946, epsilon = 1e-3);
        assert!(lambert_w(-0.5).is_err());
    }

    proptest! {
        #[test]
        fn lambert_w_residual(x in -0.36f64..1e6) {
            let w = lambert_w(x).unwrap();
            let res = (w * w.exp() - x).abs();
            prop_assert!(res <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn gegenbauer_bounded_on_interval(n in 0u32..12, x in -1.0f64..1.0) {
            // |C_n^1(x)| <= n+1 (Chebyshev U_n bound)
            let v = gegenbauer(n, 1.0, x).unwrap();
            prop_assert!(v.abs() <= (n + 1) as f64 + 1e-9);
        }
    }
}
