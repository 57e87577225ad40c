//! Lorentz-space machinery: exact decreasing rearrangements and `L^{p,q}`
//! norms of simple functions, sampled (empirical) rearrangements of grid
//! data, power-weight norms, the sphere-averaging lemma, exponentiation
//! stability, duality pairing, dyadic-level norm bounds and the improved
//! Sobolev embedding.

use crate::check::LemmaCheck;
use crate::specfun::sphere_area;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Admissible Lorentz exponents `1 < p < infinity`, `1 <= q <= infinity`
/// (`q = f64::INFINITY` is allowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzExponents {
    pub p: f64,
    pub q: f64,
}

impl LorentzExponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0) || !(q >= 1.0) {
            return Err(Error::Domain(format!("inadmissible Lorentz exponents ({p},{q})")));
        }
        Ok(LorentzExponents { p, q })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `|f|_{p,q}` computed from `f_*`
    Seminorm,
    /// `||f||_{p,q}` computed from `f_**`
    Norm,
}

// ---------------------------------------------------------------------------
// decreasing step functions
// ---------------------------------------------------------------------------

/// Right-continuous decreasing step function on `(0, infinity)`:
/// value `vals[i]` on `[cum[i-1], cum[i])`, zero beyond `cum.last()`.
#[derive(Debug, Clone)]
pub struct StepFunction {
    /// strictly increasing cumulative measures
    pub cum: Vec<f64>,
    /// strictly decreasing positive values
    pub vals: Vec<f64>,
}

impl StepFunction {
    /// Build from unordered (value, measure) pairs, dropping zero entries.
    pub fn from_pairs(pairs: &mut Vec<(f64, f64)>) -> StepFunction {
        pairs.retain(|&(v, m)| v > 0.0 && m > 0.0);
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut cum = Vec::with_capacity(pairs.len());
        let mut vals: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut total = 0.0;
        for &(v, m) in pairs.iter() {
            total += m;
            if let Some(last) = vals.last() {
                if *last == v {
                    *cum.last_mut().unwrap() = total;
                    continue;
                }
            }
            cum.push(total);
            vals.push(v);
        }
        StepFunction { cum, vals }
    }

    pub fn total_measure(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// `f_*(t)` (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        for (i, &m) in self.cum.iter().enumerate() {
            if t < m {
                return self.vals[i];
            }
        }
        0.0
    }

    /// Distribution function `lambda(s) = |{f > s}|`.
    pub fn distribution(&self, s: f64) -> f64 {
        let mut last = 0.0;
        for (i, &v) in self.vals.iter().enumerate() {
            if v > s {
                last = self.cum[i];
            } else {
                break;
            }
        }
        last
    }

    /// Exact seminorm `|f|_{p,q}`.
    pub fn seminorm(&self, e: LorentzExponents) -> f64 {
        let (p, q) = (e.p, e.q);
        if self.vals.is_empty() {
            return 0.0;
        }
        if q.is_infinite() {
            let mut best: f64 = 0.0;
            for i in 0..self.vals.len() {
                best = best.max(self.cum[i].powf(1.0 / p) * self.vals[i]);
            }
            return best;
        }
        let mut acc = 0.0;
        let mut prev: f64 = 0.0;
        for i in 0..self.vals.len() {
            let m = self.cum[i];
            acc += self.vals[i].powf(q) * (p / q) * (m.powf(q / p) - prev.powf(q / p));
            prev = m;
        }
        acc.powf(1.0 / q)
    }

    /// Exact norm `||f||_{p,q}` via the maximal function `f_**`.
    ///
    /// `q = 1` uses the identity `||f||_{p,1} = p/(p-1) |f|_{p,1}`; `q = inf`
    /// takes suprema over breakpoints plus one interior critical point per
    /// segment; other `q` integrate `f_**` segment-wise by Gauss quadrature
    /// with an exact tail.
    pub fn norm(&self, e: LorentzExponents) -> f64 {
        let (p, q) = (e.p, e.q);
        if self.vals.is_empty() {
            return 0.0;
        }
        if q == 1.0 {
            return p / (p - 1.0) * self.seminorm(e);
        }
        // primitive M(t) = int_0^t f_*: on segment i it equals offs[i] + vals[i] t
        let n = self.vals.len();
        let mut offs = vec![0.0; n];
        let mut m_prev: f64 = 0.0;
        let mut t_prev = 0.0;
        for i in 0..n {
            offs[i] = m_prev - self.vals[i] * t_prev;
            m_prev += self.vals[i] * (self.cum[i] - t_prev);
            t_prev = self.cum[i];
        }
        let m_total = m_prev;
        let t_end = self.total_measure();
        if q.is_infinite() {
            let fss = |t: f64, i: usize| (offs[i] + self.vals[i] * t) / t;
            let mut best = m_total * t_end.powf(1.0 / p - 1.0); // tail supremum at t_end
            let mut lo: f64 = 0.0;
            for i in 0..n {
                let hi = self.cum[i];
                best = best.max(hi.powf(1.0 / p) * fss(hi, i));
                if lo > 0.0 {
                    best = best.max(lo.powf(1.0 / p) * fss(lo, i));
                }
                // interior critical point of t^{1/p-1}(off + v t)
                if self.vals[i] > 0.0 && offs[i] > 0.0 {
                    let tc = offs[i] * (p - 1.0) / self.vals[i];
                    if tc > lo && tc < hi {
                        best = best.max(tc.powf(1.0 / p) * fss(tc, i));
                    }
                }
                lo = hi;
            }
            return best;
        }
        // q < infinity: integrate t^{q/p - 1} f_**^q piecewise
        let (gx, gw) = crate::harmonics::gauss_legendre(48);
        let mut acc = 0.0;
        let mut lo: f64 = 0.0;
        for i in 0..n {
            let hi = self.cum[i];
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &w) in gx.iter().zip(&gw) {
                let t = mid + half * x;
                let fss = (offs[i] + self.vals[i] * t) / t;
                acc += w * half * t.powf(q / p - 1.0) * fss.powf(q);
            }
            lo = hi;
        }
        // tail: f_** = M_total / t for t >= t_end
        acc += m_total.powf(q) * t_end.powf(q / p - q) / (q - q / p);
        acc.powf(1.0 / q)
    }

    pub fn value(&self, e: LorentzExponents, flavor: Flavor) -> f64 {
        match flavor {
            Flavor::Seminorm => self.seminorm(e),
            Flavor::Norm => self.norm(e),
        }
    }
}

/// Sampled field data: values with cell measures, for empirical rearrangement.
pub struct WeightedSamples {
    pub values: Vec<f64>,
    pub measures: Vec<f64>,
}

impl WeightedSamples {
    pub fn new(values: Vec<f64>, measures: Vec<f64>) -> Self {
        WeightedSamples { values, measures }
    }

    pub fn rearrangement(&self) -> StepFunction {
        let mut pairs: Vec<(f64, f64)> =
            self.values.iter().zip(&self.measures).map(|(&v, &m)| (v.abs(), m)).collect();
        StepFunction::from_pairs(&mut pairs)
    }

    pub fn lorentz(&self, e: LorentzExponents, flavor: Flavor) -> f64 {
        self.rearrangement().value(e, flavor)
    }

    pub fn lp(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.measures)
            .map(|(&v, &m)| v.abs().powf(p) * m)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

// ---------------------------------------------------------------------------
// simple functions on annular cells
// ---------------------------------------------------------------------------

/// One cell: value `c >= 0` on the set `{r0 < |x| < r1}` intersected with a
/// solid-angle sector of fraction `omega`, placed at angular offset `u0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub c: f64,
    pub r0: f64,
    pub r1: f64,
    pub omega: f64,
    #[serde(skip)]
    pub(crate) u0: f64,
}

/// Finite nonnegative simple function supported on disjoint annular cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimpleFunction {
    pub d: u32,
    pub cells: Vec<Cell>,
}

impl SimpleFunction {
    /// Build from (value, r0, r1, omega) tuples. Cells whose radial intervals
    /// overlap are stacked in the angular coordinate; construction fails if a
    /// stack exceeds the full solid angle.
    pub fn new(d: u32, raw: &[(f64, f64, f64, f64)]) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("simple functions need d >= 2, got {d}")));
        }
        let mut cells: Vec<Cell> = Vec::with_capacity(raw.len());
        for &(c, r0, r1, omega) in raw {
            if c < 0.0 || r0 < 0.0 || r1 <= r0 || omega <= 0.0 || omega > 1.0 {
                return Err(Error::Domain(format!("invalid cell ({c},{r0},{r1},{omega})")));
            }
            let mut u0 = 0.0f64;
            for prev in &cells {
                if prev.r0 < r1 && r0 < prev.r1 {
                    u0 = u0.max(prev.u0 + prev.omega);
                }
            }
            if u0 + omega > 1.0 + 1e-12 {
                return Err(Error::Domain("cells exceed the full solid angle".into()));
            }
            cells.push(Cell { c, r0, r1, omega, u0 });
        }
        Ok(SimpleFunction { d, cells })
    }

    pub fn measure_of(&self, cell: &Cell) -> f64 {
        let beta = sphere_area(self.d).expect("sphere area");
        cell.omega * beta * (cell.r1.powi(self.d as i32) - cell.r0.powi(self.d as i32))
            / self.d as f64
    }

    /// Exact distribution function `|{f > t}|`.
    pub fn distribution(&self, t: f64) -> f64 {
        self.cells.iter().filter(|c| c.c > t).map(|c| self.measure_of(c)).sum()
    }

    /// Exact decreasing rearrangement.
    pub fn rearrangement(&self) -> StepFunction {
        let mut pairs: Vec<(f64, f64)> =
            self.cells.iter().map(|c| (c.c, self.measure_of(c))).collect();
        StepFunction::from_pairs(&mut pairs)
    }

    pub fn lorentz(&self, e: LorentzExponents, flavor: Flavor) -> f64 {
        self.rearrangement().value(e, flavor)
    }

    /// Exact `L^p` norm.
    pub fn lp(&self, p: f64) -> f64 {
        self.cells
            .iter()
            .map(|c| c.c.powf(p) * self.measure_of(c))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Pointwise power `|f|^alpha` (cells keep their geometry).
    pub fn powered(&self, alpha: f64) -> SimpleFunction {
        let mut out = self.clone();
        for c in out.cells.iter_mut() {
            c.c = c.c.powf(alpha);
        }
        out
    }

    /// Exact integral of `f g`; cells interact through the overlap of their
    /// radial intervals and angular sectors.
    pub fn pairing(&self, other: &SimpleFunction) -> f64 {
        let beta = sphere_area(self.d).expect("sphere area");
        let mut total = 0.0;
        for a in &self.cells {
            for b in &other.cells {
                let rlo = a.r0.max(b.r0);
                let rhi = a.r1.min(b.r1);
                if rhi <= rlo {
                    continue;
                }
                let ulo = a.u0.max(b.u0);
                let uhi = (a.u0 + a.omega).min(b.u0 + b.omega);
                if uhi <= ulo {
                    continue;
                }
                let meas = (uhi - ulo) * beta
                    * (rhi.powi(self.d as i32) - rlo.powi(self.d as i32))
                    / self.d as f64;
                total += a.c * b.c * meas;
            }
        }
        total
    }

    /// Closed form `4 sum_i (c_i - c_{i-1}) sqrt(sum_{j >= i} |A_j|)` of the
    /// `L^{2,1}` norm of a simple function (values sorted increasingly).
    pub fn l21_closed_form(&self) -> f64 {
        let mut pairs: Vec<(f64, f64)> =
            self.cells.iter().map(|c| (c.c, self.measure_of(c))).collect();
        pairs.retain(|&(v, m)| v > 0.0 && m > 0.0);
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut tail: Vec<f64> = vec![0.0; pairs.len() + 1];
        for i in (0..pairs.len()).rev() {
            tail[i] = tail[i + 1] + pairs[i].1;
        }
        let mut prev_c = 0.0;
        let mut acc = 0.0;
        for (i, &(c, _)) in pairs.iter().enumerate() {
            acc += (c - prev_c) * tail[i].sqrt();
            prev_c = c;
        }
        4.0 * acc
    }

    /// Wire format `{d, cells: [{c, r0, r1, omega}, ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "cells": self.cells.iter().map(|c| serde_json::json!({
                "c": c.c, "r0": c.r0, "r1": c.r1, "omega": c.omega
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let d = v["d"].as_u64().ok_or_else(|| Error::Domain("missing d".into()))? as u32;
        let cells = v["cells"].as_array().ok_or_else(|| Error::Domain("missing cells".into()))?;
        let raw: Vec<(f64, f64, f64, f64)> = cells
            .iter()
            .map(|c| {
                (
                    c["c"].as_f64().unwrap_or(0.0),
                    c["r0"].as_f64().unwrap_or(0.0),
                    c["r1"].as_f64().unwrap_or(0.0),
                    c["omega"].as_f64().unwrap_or(0.0),
                )
            })
            .collect();
        SimpleFunction::new(d, &raw)
    }
}

// ---------------------------------------------------------------------------
// power weights
// ---------------------------------------------------------------------------

/// The scale-invariant weight constant `(d/(d-alpha)) beta(d)^{alpha/d}`
/// declared for `|| |x|^{-alpha} ||_{d/alpha, infinity}(R^d)`.
///
/// This is the constant used throughout the inequality chains. The
/// measure-theoretic norm is smaller by the ball-volume factor
/// `d^{alpha/d}`, so every estimate quoted with this constant stays valid.
pub fn power_weight_constant(d: u32, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || alpha >= d as f64 {
        return Err(Error::Domain(format!("need 0 < alpha < d, got {alpha}")));
    }
    Ok(d as f64 / (d as f64 - alpha) * sphere_area(d)?.powf(alpha / d as f64))
}

/// Lorentz norms of the power weight `|x|^exponent` on an annulus, computed
/// from the exact distribution function (`q = 1` returns the norm, finite
/// `q > 1` the seminorm, `q = inf` the weak seminorm). On the full space only
/// the matching weak norm is finite; other combinations are rejected.
pub fn power_weight_norm(
    d: u32,
    exponent: f64,
    annulus: Option<(f64, f64)>,
    e: LorentzExponents,
) -> Result<f64> {
    let beta = sphere_area(d)?;
    let vol = beta / d as f64;
    let df = d as f64;
    match annulus {
        None => {
            if e.q.is_infinite() && exponent < 0.0 && (-exponent) < df {
                let alpha = -exponent;
                if (df / alpha - e.p).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "|x|^{exponent} lies in L^({},inf)(R^{d}) only",
                        df / alpha
                    )));
                }
                return power_weight_constant(d, alpha);
            }
            Err(Error::Domain(format!(
                "|x|^{exponent} has no finite L^({},{}) norm on R^{d}; the critical power \
                 |x|^(-d/2) in L^(2,1) grows like log(b/a) with the conformal class",
                e.p, e.q
            )))
        }
        Some((a, b)) => {
            if !(0.0 < a && a < b) {
                return Err(Error::Domain("need 0 < a < b".into()));
            }
            let lam = |t: f64| -> f64 {
                if exponent == 0.0 {
                    return if t < 1.0 { vol * (b.powf(df) - a.powf(df)) } else { 0.0 };
                }
                if exponent > 0.0 {
                    let n = exponent;
                    if t <= a.powf(n) {
                        vol * (b.powf(df) - a.powf(df))
                    } else if t < b.powf(n) {
                        vol * (b.powf(df) - t.powf(df / n))
                    } else {
                        0.0
                    }
                } else {
                    let m = -exponent;
                    if t <= b.powf(-m) {
                        vol * (b.powf(df) - a.powf(df))
                    } else if t < a.powf(-m) {
                        vol * (t.powf(-df / m) - a.powf(df))
                    } else {
                        0.0
                    }
                }
            };
            let t_max = if exponent >= 0.0 { b.powf(exponent) } else { a.powf(exponent) };
            if e.q.is_infinite() {
                let mut best: f64 = 0.0;
                let n = 20_000;
                for i in 0..=n {
                    let t = t_max * ((i as f64 / n as f64) * 30.0 - 30.0).exp();
                    best = best.max(t * lam(t).powf(1.0 / e.p));
                }
                return Ok(best);
            }
            let (gx, gw) = crate::harmonics::gauss_legendre(200);
            let mut acc = 0.0;
            let half = 0.5 * t_max;
            for (&x, &w) in gx.iter().zip(&gw) {
                let t = half * (x + 1.0);
                if e.q == 1.0 {
                    acc += w * half * lam(t).powf(1.0 / e.p);
                } else {
                    acc += w * half * e.p * t.powf(e.q - 1.0) * lam(t).powf(e.q / e.p);
                }
            }
            if e.q == 1.0 {
                // ||f||_{p,1} = p^2/(p-1) int lambda^{1/p} dt
                Ok(e.p * e.p / (e.p - 1.0) * acc)
            } else {
                Ok(acc.powf(1.0 / e.q))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// sphere averages
// ---------------------------------------------------------------------------

/// Piecewise representation of the sphere average
/// `fbar(r) = ||f||_{L^2(dB_r)} = sqrt(K_j) r^{(d-1)/2}` per segment.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub d: u32,
    /// (lo, hi, K) with `fbar(r)^2 = K r^{d-1}` on (lo, hi)
    pub segments: Vec<(f64, f64, f64)>,
}

impl RadialProfile {
    /// `int fbar^2 dr`, exactly (the co-area identity makes this `int f^2 dx`).
    pub fn integral_sq(&self) -> f64 {
        self.segments
            .iter()
            .map(|&(lo, hi, k)| {
                k * (hi.powi(self.d as i32) - lo.powi(self.d as i32)) / self.d as f64
            })
            .sum()
    }

    /// Distribution function of `fbar` (1-D Lebesgue measure in r).
    pub fn distribution(&self, t: f64) -> f64 {
        let dm1 = self.d as f64 - 1.0;
        let mut acc = 0.0;
        for &(lo, hi, k) in &self.segments {
            if k <= 0.0 {
                continue;
            }
            // fbar increases in r, so {fbar > t} = (max(lo, (t^2/K)^{1/(d-1)}), hi)
            let cross = (t * t / k).powf(1.0 / dm1);
            let lo_eff = lo.max(cross);
            if hi > lo_eff {
                acc += hi - lo_eff;
            }
        }
        acc
    }

    fn breakpoints(&self) -> Vec<f64> {
        let dm1 = self.d as f64 - 1.0;
        let mut ts: Vec<f64> = vec![0.0];
        for &(lo, hi, k) in &self.segments {
            if k > 0.0 {
                ts.push((k * lo.powf(dm1)).sqrt());
                ts.push((k * hi.powf(dm1)).sqrt());
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * b.abs().max(1e-300));
        ts
    }

    /// `||fbar||_{2,1}(I) = 4 int lambda^{1/2} dt` (piecewise-smooth integrand).
    pub fn l21_norm(&self) -> f64 {
        let ts = self.breakpoints();
        let (gx, gw) = crate::harmonics::gauss_legendre(32);
        let mut acc = 0.0;
        for w in ts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &wq) in gx.iter().zip(&gw) {
                acc += wq * half * self.distribution(mid + half * x).sqrt();
            }
        }
        4.0 * acc
    }

    /// Seminorm `|fbar|_{2,q}(I)` for finite q.
    pub fn l2q_seminorm(&self, q: f64) -> f64 {
        let ts = self.breakpoints();
        let (gx, gw) = crate::harmonics::gauss_legendre(32);
        let mut acc = 0.0;
        for w in ts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &wq) in gx.iter().zip(&gw) {
                let t = mid + half * x;
                acc += wq * half * 2.0 * t.powf(q - 1.0) * self.distribution(t).powf(q / 2.0);
            }
        }
        acc.powf(1.0 / q)
    }
}

/// Sphere-average profile of a simple function:
/// `fbar(r)^2 = sum c_i^2 omega_i beta(d) r^{d-1}` over the covering cells.
pub fn sphere_average_profile(f: &SimpleFunction) -> RadialProfile {
    let beta = sphere_area(f.d).expect("sphere area");
    let mut cuts: Vec<f64> = Vec::new();
    for c in &f.cells {
        cuts.push(c.r0);
        cuts.push(c.r1);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * b.abs().max(1e-300));
    let mut segments = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let k: f64 = f
            .cells
            .iter()
            .filter(|c| c.r0 <= mid && mid <= c.r1)
            .map(|c| c.c * c.c * c.omega * beta)
            .sum();
        if k > 0.0 {
            segments.push((lo, hi, k));
        }
    }
    RadialProfile { d: f.d, segments }
}

// ---------------------------------------------------------------------------
// lemma checks
// ---------------------------------------------------------------------------

/// Averaging lemma: `||fbar||_{2,1}(I) <= 2^{d/4} sqrt(beta(d)) ||f||_{2,1}`
/// for q = 1 (norms), and the seminorm form for finite q > 1.
pub fn verify_averaging_lemma(f: &SimpleFunction, q: f64) -> Result<LemmaCheck> {
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::Domain("averaging lemma implemented for 1 <= q < infinity".into()));
    }
    let constant = 2f64.powf(f.d as f64 / 4.0) * sphere_area(f.d)?.sqrt();
    let profile = sphere_average_profile(f);
    let (lhs, rhs_base) = if q == 1.0 {
        (profile.l21_norm(), f.lorentz(LorentzExponents::new(2.0, 1.0)?, Flavor::Norm))
    } else {
        (profile.l2q_seminorm(q), f.lorentz(LorentzExponents::new(2.0, q)?, Flavor::Seminorm))
    };
    Ok(LemmaCheck::le("averaging_l2q", lhs, constant * rhs_base, 1e-9)
        .with("q", q)
        .with("constant", constant)
        .with("d", f.d as f64))
}

/// The combinatorial core of the averaging lemma:
/// `sum_i (c_i - c_{i-1}) sqrt(sum_{j>=i} D_j) >= sqrt(sum_i c_i^2 D_i)`
/// for increasing `0 < c_1 < ... < c_n` and positive `D_i`. The check stores
/// the smaller side in `lhs`.
pub fn averaging_core_inequality(c: &[f64], dmeas: &[f64]) -> LemmaCheck {
    assert_eq!(c.len(), dmeas.len());
    let n = c.len();
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + dmeas[i];
    }
    let mut big = 0.0;
    let mut prev = 0.0;
    for i in 0..n {
        big += (c[i] - prev) * tail[i].sqrt();
        prev = c[i];
    }
    let small = c.iter().zip(dmeas).map(|(&ci, &di)| ci * ci * di).sum::<f64>().sqrt();
    LemmaCheck::le("ineq_fund", small, big, 1e-12)
}

/// Stability under powers: seminorm equality
/// `|f^alpha|_{p,q} = |f|^alpha_{alpha p, alpha q}` and the norm inequality
/// with constant `p/(p-1)`.
pub fn verify_power_stability(
    f: &SimpleFunction,
    alpha: f64,
    e: LorentzExponents,
) -> Result<LemmaCheck> {
    if !(alpha * e.p > 1.0) || !(alpha * e.q >= 1.0) {
        return Err(Error::Precondition(format!(
            "need alpha p > 1 and alpha q >= 1, got alpha={alpha}, p={}, q={}",
            e.p, e.q
        )));
    }
    let g = f.powered(alpha);
    let scaled = LorentzExponents::new(alpha * e.p, alpha * e.q)?;
    let semi_g = g.lorentz(e, Flavor::Seminorm);
    let semi_f = f.lorentz(scaled, Flavor::Seminorm).powf(alpha);
    let mut check = LemmaCheck::eq("lorentz_power_stability", semi_g, semi_f, 1e-10);
    let norm_g = g.lorentz(e, Flavor::Norm);
    let norm_f = f.lorentz(scaled, Flavor::Norm).powf(alpha);
    let norm_ok = norm_g <= e.p / (e.p - 1.0) * norm_f * (1.0 + 1e-9);
    if !norm_ok {
        check = check.failed();
    }
    Ok(check
        .with("alpha", alpha)
        .with("norm_lhs", norm_g)
        .with("norm_rhs", e.p / (e.p - 1.0) * norm_f))
}

/// Duality pairing `int |f g| <= |f|_{2,1} |g|_{2,infinity}` with constant 1.
pub fn duality_pairing_check(f: &SimpleFunction, g: &SimpleFunction) -> Result<LemmaCheck> {
    if f.d != g.d {
        return Err(Error::Precondition("pairing needs a common ambient space".into()));
    }
    let lhs = f.pairing(g);
    let rhs = f.lorentz(LorentzExponents::new(2.0, 1.0)?, Flavor::Seminorm)
        * g.lorentz(LorentzExponents::new(2.0, f64::INFINITY)?, Flavor::Seminorm);
    Ok(LemmaCheck::le("l21_l2inf_duality", lhs, rhs, 1e-9))
}

/// Dyadic-level norm bound:
/// `||f||_{p,q} <= p/(p-1) (p 2^{3q}/q)^{1/p} (sum_k ||f_k||_p^q)^{1/q}`
/// with `f_k` the restriction of `f` to `{2^k <= f < 2^{k+1}}`.
pub fn verify_dyadic_decomposition_norm(
    f: &SimpleFunction,
    e: LorentzExponents,
) -> Result<LemmaCheck> {
    if !(e.q <= e.p) || e.q.is_infinite() {
        return Err(Error::Precondition("the dyadic bound needs 1 <= q <= p".into()));
    }
    let lhs = f.lorentz(e, Flavor::Norm);
    use std::collections::BTreeMap;
    let mut levels: BTreeMap<i64, Vec<Cell>> = BTreeMap::new();
    for c in &f.cells {
        if c.c > 0.0 {
            let k = c.c.log2().floor() as i64;
            levels.entry(k).or_default().push(c.clone());
        }
    }
    let mut lq_sum = 0.0;
    for cells in levels.values() {
        let fk = SimpleFunction { d: f.d, cells: cells.clone() };
        lq_sum += fk.lp(e.p).powf(e.q);
    }
    let constant = e.p / (e.p - 1.0) * (e.p * 2f64.powf(3.0 * e.q) / e.q).powf(1.0 / e.p);
    let rhs = constant * lq_sum.powf(1.0 / e.q);
    Ok(LemmaCheck::le("dyadic_level_norm", lhs, rhs, 1e-9)
        .with("p", e.p)
        .with("q", e.q)
        .with("constant", constant))
}

/// Constant of the improved Sobolev embedding
/// `W^{1,p}(R^d) -> L^{p*, p}(R^d)`:
/// `p(d-1)/(d-p) * p*/(p*-1) * (p* 2^{3p}/p)^{1/p*}` with `p* = dp/(d-p)`.
pub fn improved_sobolev_constant(d: u32, p: f64) -> Result<f64> {
    let df = d as f64;
    if !(1.0 <= p && p < df) {
        return Err(Error::Domain(format!("need 1 <= p < d, got p={p}, d={d}")));
    }
    let pstar = df * p / (df - p);
    Ok(p * (df - 1.0) / (df - p)
        * (pstar / (pstar - 1.0))
        * (pstar * 2f64.powf(3.0 * p) / p).powf(1.0 / pstar))
}

/// Improved Sobolev check on sampled data:
/// `||u||_{p*,p} <= C(d,p) ||grad u||_p` with `C(4,2) = 14`.
pub fn improved_sobolev_check(
    d: u32,
    p: f64,
    field: &WeightedSamples,
    gradient: &WeightedSamples,
) -> Result<LemmaCheck> {
    let df = d as f64;
    let pstar = df * p / (df - p);
    let constant = if d == 4 && (p - 2.0).abs() < 1e-12 {
        14.0
    } else {
        improved_sobolev_constant(d, p)?
    };
    let lhs = field.lorentz(LorentzExponents::new(pstar, p)?, Flavor::Norm);
    let rhs = constant * gradient.lp(p);
    Ok(LemmaCheck::le("improved_sobolev", lhs, rhs, 1e-9)
        .with("p", p)
        .with("p_star", pstar)
        .with("constant", constant))
}

/// Random simple function: a random partition of `[a, b]` into radial slabs,
/// each carrying up to three angular sectors.
pub fn random_simple_function(
    d: u32,
    a: f64,
    b: f64,
    n_cells: usize,
    rng: &mut impl rand::Rng,
) -> SimpleFunction {
    let mut cuts: Vec<f64> = (0..n_cells).map(|_| rng.gen_range(a..b)).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut raw = Vec::new();
    for w in cuts.windows(2) {
        if w[1] - w[0] < 1e-9 {
            continue;
        }
        let sectors = rng.gen_range(1..=3usize);
        let mut used = 0.0;
        for _ in 0..sectors {
            let omega = rng.gen_range(0.05..(1.0 - used) * 0.8);
            raw.push((rng.gen_range(0.0..4.0f64), w[0], w[1], omega));
            used += omega;
            if used > 0.9 {
                break;
            }
        }
    }
    SimpleFunction::new(d, &raw).expect("random simple function")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn e(p: f64, q: f64) -> LorentzExponents {
        LorentzExponents::new(p, q).unwrap()
    }

    #[test]
    fn single_cell_rearrangement_and_l21_norm() {
        // f = c 1_A: f_* = c 1_[0,|A|), ||f||_{2,1} = 4 c sqrt(|A|)
        let f = SimpleFunction::new(4, &[(3.0, 0.5, 1.0, 0.5)]).unwrap();
        let m = f.measure_of(&f.cells[0]);
        let step = f.rearrangement();
        assert_eq!(step.vals, vec![3.0]);
        assert_relative_eq!(step.cum[0], m, max_relative = 1e-14);
        assert_relative_eq!(
            f.lorentz(e(2.0, 1.0), Flavor::Norm),
            4.0 * 3.0 * m.sqrt(),
            max_relative = 1e-12
        );
        let z = SimpleFunction::new(4, &[]).unwrap();
        assert_eq!(z.lorentz(e(2.0, 1.0), Flavor::Norm), 0.0);
    }

    #[test]
    fn rearrangement_sorts_by_value() {
        // cells {(1, M=1), (2, M=1)} -> steps 2 on [0,1), 1 on [1,2)
        let beta = sphere_area(3).unwrap();
        let r1 = (3.0 / beta + 1.0f64).powf(1.0 / 3.0);
        let r2 = (3.0 / beta + r1.powi(3)).powf(1.0 / 3.0);
        let f = SimpleFunction::new(3, &[(1.0, 1.0, r1, 1.0), (2.0, r1, r2, 1.0)]).unwrap();
        let step = f.rearrangement();
        assert_eq!(step.vals, vec![2.0, 1.0]);
        assert_relative_eq!(step.cum[0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(step.cum[1], 2.0, max_relative = 1e-10);
        for t in [0.5, 1.0, 1.5, 2.5] {
            assert_relative_eq!(step.distribution(t), f.distribution(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn lpp_equals_lp() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = random_simple_function(4, 0.5, 2.0, 6, &mut rng);
            for p in [2.0, 3.0] {
                assert_relative_eq!(
                    f.lorentz(e(p, p), Flavor::Seminorm),
                    f.lp(p),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn l21_closed_form_matches_integral_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let f = random_simple_function(4, 0.5, 2.0, 8, &mut rng);
            assert_relative_eq!(
                f.l21_closed_form(),
                f.lorentz(e(2.0, 1.0), Flavor::Norm),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn norm_seminorm_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let f = random_simple_function(3, 0.5, 2.0, 6, &mut rng);
            for &(p, q) in &[(2.0, 1.0), (2.0, 2.0), (4.0, 2.0), (2.0, f64::INFINITY)] {
                let s = f.lorentz(e(p, q), Flavor::Seminorm);
                let n = f.lorentz(e(p, q), Flavor::Norm);
                assert!(s <= n * (1.0 + 1e-9), "seminorm {s} > norm {n} at ({p},{q})");
                assert!(
                    n <= p / (p - 1.0) * s * (1.0 + 1e-9),
                    "norm {n} > p' seminorm {s} at ({p},{q})"
                );
            }
        }
    }

    #[test]
    fn embedding_between_secondary_exponents() {
        // ||f||_{p,r} <= (p/q)^{1/q - 1/r} ||f||_{p,q} for q < r
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let f = random_simple_function(4, 0.5, 2.0, 6, &mut rng);
            for &(p, q, r) in &[(2.0, 1.0, 2.0), (4.0, 2.0, 4.0)] {
                let lhs = f.lorentz(e(p, r), Flavor::Norm);
                let rhs = (p / q).powf(1.0 / q - 1.0 / r) * f.lorentz(e(p, q), Flavor::Norm);
                assert!(lhs <= rhs * (1.0 + 1e-9), "embedding failed: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn power_weight_formulas() {
        let c = power_weight_constant(4, 2.0).unwrap();
        assert_relative_eq!(c, 2.0 * PI * 2f64.sqrt(), max_relative = 1e-12);
        let c = power_weight_constant(4, 1.0).unwrap();
        assert_relative_eq!(c, 4.0 / 3.0 * (2.0 * PI * PI).powf(0.25), max_relative = 1e-12);
        assert!(power_weight_norm(4, -2.0, None, e(2.0, 1.0)).is_err());
        assert_relative_eq!(
            power_weight_norm(4, -2.0, None, e(2.0, f64::INFINITY)).unwrap(),
            2.0 * PI * 2f64.sqrt(),
            max_relative = 1e-12
        );
        // || |x|^n ||_{2,1}(annulus) <= 4 sqrt(beta) b^{n + d/2} at n=2, d=4, b=1
        let lhs = power_weight_norm(4, 2.0, Some((0.5, 1.0)), e(2.0, 1.0)).unwrap();
        let rhs = 4.0 * sphere_area(4).unwrap().sqrt();
        assert!(lhs <= rhs, "{lhs} > {rhs}");
    }

    #[test]
    fn sphere_average_coarea_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let f = random_simple_function(4, 0.5, 2.0, 6, &mut rng);
            let profile = sphere_average_profile(&f);
            let direct: f64 = f.cells.iter().map(|c| c.c * c.c * f.measure_of(c)).sum();
            assert_relative_eq!(profile.integral_sq(), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn sphere_average_single_cell_profile() {
        // full-sphere cell: fbar(r) = c sqrt(beta) r^{(d-1)/2} on the interval
        let f = SimpleFunction::new(3, &[(2.0, 1.0, 1.5, 1.0)]).unwrap();
        let profile = sphere_average_profile(&f);
        assert_eq!(profile.segments.len(), 1);
        let (lo, hi, k) = profile.segments[0];
        assert_eq!((lo, hi), (1.0, 1.5));
        assert_relative_eq!(k, 4.0 * sphere_area(3).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn averaging_lemma_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in [2u32, 3, 4] {
            for q in [1.0, 2.0] {
                for _ in 0..20 {
                    let f = random_simple_function(d, 0.5, 2.0, 10, &mut rng);
                    let check = verify_averaging_lemma(&f, q).unwrap();
                    assert!(check.pass, "averaging failed d={d} q={q}: {check:?}");
                }
            }
        }
    }

    #[test]
    fn averaging_core_spec_example() {
        // c = (1, 2), D = (1, 1): 1 sqrt(2) + 1 >= sqrt(5)
        let check = averaging_core_inequality(&[1.0, 2.0], &[1.0, 1.0]);
        assert!(check.pass);
        assert_abs_diff_eq!(check.rhs, 2.0f64.sqrt() + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(check.lhs, 5.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn power_stability_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let f = random_simple_function(4, 0.5, 2.0, 6, &mut rng);
            let check = verify_power_stability(&f, 2.0, e(2.0, 1.0)).unwrap();
            assert!(check.pass, "{check:?}");
        }
        let f = random_simple_function(4, 0.5, 2.0, 4, &mut rng);
        let check = verify_power_stability(&f, 1.0, e(2.0, 1.0)).unwrap();
        assert!(check.pass);
        assert!(verify_power_stability(&f, 0.2, e(2.0, 1.0)).is_err());
    }

    #[test]
    fn duality_pairing_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let f = random_simple_function(4, 0.5, 2.0, 5, &mut rng);
            let g = random_simple_function(4, 0.5, 2.0, 5, &mut rng);
            let check = duality_pairing_check(&f, &g).unwrap();
            assert!(check.pass, "{check:?}");
        }
        // disjoint supports pair to zero
        let f = SimpleFunction::new(4, &[(1.0, 0.5, 0.9, 0.5)]).unwrap();
        let g = SimpleFunction::new(4, &[(1.0, 1.0, 1.4, 0.5)]).unwrap();
        let check = duality_pairing_check(&f, &g).unwrap();
        assert_eq!(check.lhs, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn dyadic_decomposition_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let f = random_simple_function(4, 0.5, 2.0, 8, &mut rng);
            let check = verify_dyadic_decomposition_norm(&f, e(4.0, 2.0)).unwrap();
            assert!(check.pass, "{check:?}");
        }
        let z = SimpleFunction::new(4, &[]).unwrap();
        let check = verify_dyadic_decomposition_norm(&z, e(4.0, 2.0)).unwrap();
        assert_eq!(check.lhs, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn improved_sobolev_formula_value() {
        let c = improved_sobolev_constant(4, 2.0).unwrap();
        assert_relative_eq!(c, 8.0 * 2f64.powf(0.75), max_relative = 1e-12);
        assert!(c < 14.0);
    }

    #[test]
    fn simple_function_json_roundtrip() {
        let f = SimpleFunction::new(4, &[(1.5, 0.5, 1.0, 0.3), (2.5, 1.0, 2.0, 0.4)]).unwrap();
        let j = f.to_json();
        let g = SimpleFunction::from_json(&j).unwrap();
        assert_eq!(f.cells.len(), g.cells.len());
        assert_relative_eq!(
            f.lorentz(e(2.0, 1.0), Flavor::Norm),
            g.lorentz(e(2.0, 1.0), Flavor::Norm),
            max_relative = 1e-14
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rearrangement_scales_linearly(seed in 0u64..1000, c in 0.1f64..10.0) {
            // (c f)_* = c f_*
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_simple_function(4, 0.5, 2.0, 5, &mut rng);
            let mut g = f.clone();
            for cell in g.cells.iter_mut() { cell.c *= c; }
            let sf = f.rearrangement();
            let sg = g.rearrangement();
            prop_assert_eq!(sf.vals.len(), sg.vals.len());
            for i in 0..sf.vals.len() {
                prop_assert!((sg.vals[i] - c * sf.vals[i]).abs() <= 1e-12 * sg.vals[i].abs());
                prop_assert!((sg.cum[i] - sf.cum[i]).abs() <= 1e-12 * sf.cum[i].abs());
            }
        }

        #[test]
        fn averaging_core_random(n in 1usize..7, seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5.0)).collect();
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let d: Vec<f64> = (0..c.len()).map(|_| rng.gen_range(0.01..5.0)).collect();
            prop_assert!(averaging_core_inequality(&c, &d).pass);
        }
    }
}
