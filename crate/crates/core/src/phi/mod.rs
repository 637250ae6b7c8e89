//! The continuous exponent of the union-bound summands.
//!
//! Writing `k, l, r` and `s = c·m` as multiples of `m`, Stirling bounds
//! turn each summand into `exp(m·φ(c,k,l,r) + O(ln m))` with
//!
//! ```text
//! φ(c,k,l,r) = h(c,l) + h(6-c,k-l) + h(c-4,r) + h(8-c,k-r) + h(8k-r,6k-l) - h(36-c,6k-l)
//! ```
//!
//! This module evaluates φ, its finite-`m` counterpart ψ, the small-`k`
//! exponent `f(k,m)`, and the derivatives used to locate the maximum of
//! φ over its domain.

mod certified;
mod critical;
mod quintic;

use serde::Serialize;

use crate::combinatorics::{g_unchecked, h, h_unchecked};
use crate::error::{Error, Result};
use crate::interval::Interval;

pub use certified::{
    analytic_constants, certify_critical_value, lipschitz_guard, phi_enclosure,
    small_k_limit_constant, CertifiedCritical, ConstantCheck, LipschitzGuard,
};
pub use critical::{
    c_star, critical_point, critical_points, max_phi_k3, r_from_l, CStarReport, CriticalPoint,
    MaxPhiOptions, MaxPhiReport,
};
pub use quintic::{quintic, quintic_roots_in, QuinticPoly, RootOptions};

/// A point `(c, k, l, r)` inside the domain of φ:
/// `k + c - 6 <= l <= k` and `k + c - 8 <= r <= c - 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiPoint {
    pub c: f64,
    pub k: f64,
    pub l: f64,
    pub r: f64,
}

impl PhiPoint {
    pub fn new(c: f64, k: f64, l: f64, r: f64) -> Result<Self> {
        let p = Self { c, k, l, r };
        if !(k + c - 6.0 <= l && l <= k && k + c - 8.0 <= r && r <= c - 4.0) {
            return Err(Error::domain(format!(
                "({c}, {k}, {l}, {r}) violates k+c-6 <= l <= k, k+c-8 <= r <= c-4"
            )));
        }
        Ok(p)
    }
}

/// A point in the coordinates `x = k - l`, `y = (c - 4 - r)/(4 - k)`,
/// which map the domain onto `[0, 6-c] × [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubstitutedPoint {
    pub c: f64,
    pub k: f64,
    pub x: f64,
    pub y: f64,
}

impl SubstitutedPoint {
    pub fn new(c: f64, k: f64, x: f64, y: f64) -> Result<Self> {
        if !(0.0..=6.0 - c).contains(&x) || !(0.0..=1.0).contains(&y) || !(k < 4.0) {
            return Err(Error::domain(format!(
                "(x, y) = ({x}, {y}) outside [0, {}] × [0, 1] or k = {k} >= 4",
                6.0 - c
            )));
        }
        Ok(Self { c, k, x, y })
    }

    pub fn from_phi_point(p: &PhiPoint) -> Result<Self> {
        Self::new(p.c, p.k, p.k - p.l, (p.c - 4.0 - p.r) / (4.0 - p.k))
    }

    pub fn l(&self) -> f64 {
        self.k - self.x
    }

    pub fn r(&self) -> f64 {
        self.c - 4.0 - (4.0 - self.k) * self.y
    }
}

/// `f(k, m) = h(6m,k) + h(4m,k) + h(8k,5k) - h(30m,5k)`, for `0 < k <= 3m`.
pub fn f_small(k: f64, m: f64) -> Result<f64> {
    if !(k > 0.0 && k <= 3.0 * m) {
        return Err(Error::domain(format!(
            "f_small needs 0 < k <= 3m, got k={k}, m={m}"
        )));
    }
    Ok(h(6.0 * m, k)? + h(4.0 * m, k)? + h(8.0 * k, 5.0 * k)? - h(30.0 * m, 5.0 * k)?)
}

/// `∂²f/∂k² = 3/k + 4/(6m-k) - 1/(4m-k)`.
pub fn f_small_curvature(k: f64, m: f64) -> f64 {
    3.0 / k + 4.0 / (6.0 * m - k) - 1.0 / (4.0 * m - k)
}

fn phi_raw(c: f64, k: f64, l: f64, r: f64) -> Result<f64> {
    Ok(h(c, l)?
        + h(6.0 - c, k - l)?
        + h(c - 4.0, r)?
        + h(8.0 - c, k - r)?
        + h(8.0 * k - r, 6.0 * k - l)?
        - h(36.0 - c, 6.0 * k - l)?)
}

pub fn phi(p: &PhiPoint) -> Result<f64> {
    phi_raw(p.c, p.k, p.l, p.r)
}

/// φ in the substituted coordinates.
pub fn phi_substituted(p: &SubstitutedPoint) -> Result<f64> {
    phi_raw(p.c, p.k, p.l(), p.r())
}

/// Unchecked φ at `k = 3` for grid sweeps; callers stay inside the domain.
#[inline]
pub(crate) fn phi_k3(c: f64, l: f64, r: f64) -> f64 {
    h_unchecked(c, l)
        + h_unchecked(6.0 - c, 3.0 - l)
        + h_unchecked(c - 4.0, r)
        + h_unchecked(8.0 - c, 3.0 - r)
        + h_unchecked(24.0 - r, 18.0 - l)
        - h_unchecked(36.0 - c, 18.0 - l)
}

/// ψ(m, s, k, l, r), the finite-`m` exponent.
pub fn psi(m: f64, s: f64, k: f64, l: f64, r: f64) -> Result<f64> {
    Ok(h(s, l)?
        + h(6.0 * m - s, k - l)?
        + h(s - 4.0 * m, r)?
        + h(8.0 * m - s, k - r)?
        + h(8.0 * k - r, 6.0 * k - l)?
        - h(36.0 * m - s, 6.0 * k - l)?)
}

/// `30 √m exp(ψ)`, the per-term estimate derived from the Stirling bounds.
pub fn psi_term_bound(m: f64, psi_value: f64) -> f64 {
    30.0 * m.sqrt() * psi_value.exp()
}

fn g_interval(x: Interval) -> Result<Interval> {
    if x.lo() == 0.0 && x.hi() == 0.0 {
        return Ok(Interval::zero());
    }
    Ok(x * x.ln()?)
}

fn h_interval(x: f64, y: f64) -> Result<Interval> {
    if !(0.0 <= y && y <= x) {
        return Err(Error::domain(format!("h({x}, {y}) requires 0 <= y <= x")));
    }
    Ok(g_interval(Interval::point(x))?
        - g_interval(Interval::point(y))?
        - g_interval(Interval::point(x - y))?)
}

/// Outward-rounded enclosure of `ln(30 √m) + ψ(m, s, k, l, r)` for integer
/// arguments, whose differences are then exact in `f64`.
pub fn ln_psi_term_bound(m: u32, s: u32, k: u32, l: u32, r: u32) -> Result<Interval> {
    let (m, s, k, l, r) = (m as f64, s as f64, k as f64, l as f64, r as f64);
    let psi = h_interval(s, l)?
        + h_interval(6.0 * m - s, k - l)?
        + h_interval(s - 4.0 * m, r)?
        + h_interval(8.0 * m - s, k - r)?
        + h_interval(8.0 * k - r, 6.0 * k - l)?
        - h_interval(36.0 * m - s, 6.0 * k - l)?;
    let pre = Interval::point(30.0).ln()? + Interval::point(0.5) * Interval::point(m).ln()?;
    Ok(pre + psi)
}

/// `0.4 · 3² · 30 · m^{7/2} · e^{-δ₁ m}`, the tail estimate for the large-`k` layers.
pub fn tail_estimate(m: f64, delta1: f64) -> f64 {
    0.4 * 9.0 * 30.0 * m.powf(3.5) * (-delta1 * m).exp()
}

/// `-max ψ(m, ⌈5.7m⌉, k, l, r) / m` over integer indices with
/// `⌈2.6m⌉ < k <= 3m` at which every binomial is nonzero.
pub fn measured_delta1(m: u32) -> Option<f64> {
    let s = (57 * m).div_ceil(10) as i64;
    let mi = m as i64;
    let q = (13 * m).div_ceil(5) as i64;
    let mut best = f64::NEG_INFINITY;
    for k in q + 1..=3 * mi {
        for l in 0.max(k - (6 * mi - s))..=k.min(s) {
            for r in 0.max(k - (8 * mi - s))..=k.min(s - 4 * mi) {
                if 6 * k - l > 8 * k - r {
                    continue;
                }
                if let Ok(v) = psi(mi as f64, s as f64, k as f64, l as f64, r as f64) {
                    best = best.max(v);
                }
            }
        }
    }
    best.is_finite().then(|| -best / m as f64)
}

/// ∂φ/∂l at `k = 3`:
/// `ln[(c-l)(3-l)(18-c+l) / (l(3-c+l)(6-r+l))]`.
pub fn dphi_dl(c: f64, l: f64, r: f64) -> Result<f64> {
    let num = [c - l, 3.0 - l, 18.0 - c + l];
    let den = [l, 3.0 - c + l, 6.0 - r + l];
    log_ratio(&num, &den, "dphi_dl")
}

/// ∂φ/∂r at `k = 3`:
/// `ln[(c-4-r)(3-r)(6-r+l) / (r(5-c+r)(24-r))]`.
pub fn dphi_dr(c: f64, l: f64, r: f64) -> Result<f64> {
    let num = [c - 4.0 - r, 3.0 - r, 6.0 - r + l];
    let den = [r, 5.0 - c + r, 24.0 - r];
    log_ratio(&num, &den, "dphi_dr")
}

fn log_ratio(num: &[f64; 3], den: &[f64; 3], what: &str) -> Result<f64> {
    if num.iter().chain(den).any(|&v| !(v > 0.0)) {
        return Err(Error::domain(format!(
            "{what}: logarithm of a non-positive argument"
        )));
    }
    Ok(num.iter().map(|v| v.ln()).sum::<f64>() - den.iter().map(|v| v.ln()).sum::<f64>())
}

/// Second derivatives of φ at `k = 3`: `(φ_ll, φ_lr, φ_rr)`.
pub(crate) fn hessian_k3(c: f64, l: f64, r: f64) -> (f64, f64, f64) {
    let q = 1.0 / (6.0 - r + l);
    let ll =
        -1.0 / (c - l) - 1.0 / (3.0 - l) + 1.0 / (18.0 - c + l) - 1.0 / l - 1.0 / (3.0 - c + l) - q;
    let rr = -1.0 / (c - 4.0 - r) - 1.0 / (3.0 - r) - q - 1.0 / r - 1.0 / (5.0 - c + r)
        + 1.0 / (24.0 - r);
    (ll, q, rr)
}

/// The four summands of ∂φ/∂k at fixed `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub total: f64,
}

/// `∂φ(c,k,x,y)/∂k = D₁(c,k,x) + D₂(c,k,y) + D₃(c,k,y) + D₄(c,k,x,y)`.
pub fn dphi_dk_decomposition(p: &SubstitutedPoint) -> Result<Decomposition> {
    let SubstitutedPoint { c, k, x, y } = *p;
    let w = 4.0 - k;
    let args = [
        c - k + x,
        k - x,
        c - 4.0 - w * y,
        k * (1.0 - y) + 4.0 + 4.0 * y - c,
        (8.0 - y) * k + 4.0 + 4.0 * y - c,
        (3.0 - y) * k + 4.0 + 4.0 * y - c - x,
        36.0 - c - 5.0 * k - x,
    ];
    if args.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain(format!("decomposition undefined at {p:?}")));
    }
    let d1 = args[0].ln() - args[1].ln();
    // y ln((4-k)y) and (1-y) ln((4-k)(1-y)) extend continuously to 0 at y = 0, 1.
    let d2 = g_unchecked(w * y) / w - y * args[2].ln();
    let d3 = g_unchecked(w * (1.0 - y)) / w - (1.0 - y) * args[3].ln();
    let d4 = (8.0 - y) * args[4].ln() - (3.0 - y) * args[5].ln() - 5.0 * args[6].ln();
    Ok(Decomposition {
        d1,
        d2,
        d3,
        d4,
        total: d1 + d2 + d3 + d4,
    })
}

/// `S₁ = ln(1 - 5k/(8k+4-c+(4-k)y))`.
pub fn s1(c: f64, k: f64, y: f64) -> f64 {
    (1.0 - 5.0 * k / (8.0 * k + 4.0 - c + (4.0 - k) * y)).ln()
}

/// `S₂ = 5(4-k)(4-c+4y)`.
pub fn s2(c: f64, k: f64, y: f64) -> f64 {
    5.0 * (4.0 - k) * (4.0 - c + 4.0 * y)
}

/// `S₃ = (3k+4-c+(4-k)y)(8k+4-c+(4-k)y)`.
pub fn s3(c: f64, k: f64, y: f64) -> f64 {
    (3.0 * k + 4.0 - c + (4.0 - k) * y) * (8.0 * k + 4.0 - c + (4.0 - k) * y)
}

/// `∂D₄(c,k,0,y)/∂y = S₁ + S₂/S₃`.
pub fn dd4_dy(c: f64, k: f64, y: f64) -> f64 {
    s1(c, k, y) + s2(c, k, y) / s3(c, k, y)
}

/// `T₁ = 5 ln((7k+8-c)/(36-c-5k))`, equal to `D₄(c,k,0,1)` minus `T₂`.
pub fn t1(c: f64, k: f64) -> f64 {
    5.0 * ((7.0 * k + 8.0 - c) / (36.0 - c - 5.0 * k)).ln()
}

/// `T₂ = 2 ln(1 + 5k/(2k+8-c))`.
pub fn t2(c: f64, k: f64) -> f64 {
    2.0 * (1.0 + 5.0 * k / (2.0 * k + 8.0 - c)).ln()
}

#[cfg(test)]
mod tests;
