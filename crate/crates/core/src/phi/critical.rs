//! Critical points of `φ(c, 3, l, r)` and the threshold `c*` at which
//! the maximum crosses zero.

use serde::Serialize;

use super::quintic::{quintic_roots_in, RootOptions};
use super::{dphi_dl, dphi_dr, hessian_k3, phi_k3};
use crate::error::{Error, Result};

/// `r` as a function of `l` on the curve `∂φ/∂l = 0`.
pub fn r_from_l(c: f64, l: f64) -> Result<f64> {
    let den = l * (3.0 - c + l);
    if !(den > 0.0) {
        return Err(Error::domain(format!("r_from_l undefined at c={c}, l={l}")));
    }
    Ok(6.0 + l - (c - l) * (3.0 - l) * (18.0 - c + l) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub c: f64,
    pub l: f64,
    pub r: f64,
    pub value: f64,
    /// `∂φ/∂l` and `∂φ/∂r` at the reported point.
    pub residual_l: f64,
    pub residual_r: f64,
    /// Root of the quintic before the Newton polish.
    pub quintic_root: f64,
    /// `l = 3` branch at `c = 6`, where the `l`-range collapses.
    pub degenerate: bool,
}

fn in_box(c: f64, l: f64, r: f64) -> bool {
    l > c - 3.0 && l < 3.0 && r > (c - 5.0).max(0.0) && r < c - 4.0
}

fn polish(c: f64, mut l: f64, mut r: f64) -> (f64, f64) {
    for _ in 0..30 {
        let (Ok(fl), Ok(fr)) = (dphi_dl(c, l, r), dphi_dr(c, l, r)) else {
            break;
        };
        let (a, b, d) = hessian_k3(c, l, r);
        let det = a * d - b * b;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dl = (d * fl - b * fr) / det;
        let dr = (a * fr - b * fl) / det;
        let (nl, nr) = (l - dl, r - dr);
        if !in_box(c, nl, nr) {
            break;
        }
        l = nl;
        r = nr;
        if dl.abs().max(dr.abs()) < 1e-15 {
            break;
        }
    }
    (l, r)
}

/// Every interior critical point of `φ(c, 3, ·, ·)` for `5 < c < 6`,
/// ordered by `l`.
pub fn critical_points(c: f64, opts: &RootOptions) -> Result<Vec<CriticalPoint>> {
    if !(c > 5.0 && c < 6.0) {
        return Err(Error::domain(format!(
            "critical_points needs 5 < c < 6, got {c}"
        )));
    }
    let mut out = Vec::new();
    for root in quintic_roots_in(c, c - 3.0, 3.0, opts)? {
        let Ok(r0) = r_from_l(c, root) else { continue };
        if !in_box(c, root, r0) {
            continue;
        }
        let (l, r) = polish(c, root, r0);
        out.push(CriticalPoint {
            c,
            l,
            r,
            value: phi_k3(c, l, r),
            residual_l: dphi_dl(c, l, r)?,
            residual_r: dphi_dr(c, l, r)?,
            quintic_root: root,
            degenerate: false,
        });
    }
    Ok(out)
}

fn degenerate_point(c: f64) -> Result<CriticalPoint> {
    // ∂φ/∂r runs from +∞ at r = c-5 to -∞ at r = c-4.
    let (mut a, mut b) = (c - 5.0, c - 4.0);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if dphi_dr(c, 3.0, mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let r = 0.5 * (a + b);
    Ok(CriticalPoint {
        c,
        l: 3.0,
        r,
        value: phi_k3(c, 3.0, r),
        residual_l: f64::NAN,
        residual_r: dphi_dr(c, 3.0, r)?,
        quintic_root: f64::NAN,
        degenerate: true,
    })
}

/// The unique interior critical point for `5 < c < 6`, or the `l = 3`
/// branch at `c = 6`.
pub fn critical_point(c: f64) -> Result<CriticalPoint> {
    if c == 6.0 {
        return degenerate_point(c);
    }
    let pts = critical_points(c, &RootOptions::default())?;
    match pts.as_slice() {
        [p] => Ok(*p),
        [] => Err(Error::Solver(format!(
            "no critical point inside the box at c = {c}"
        ))),
        _ => Err(Error::Solver(format!(
            "{} critical points inside the box at c = {c}: {:?}",
            pts.len(),
            pts.iter().map(|p| (p.l, p.r)).collect::<Vec<_>>()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPhiOptions {
    pub grid_step: f64,
}

impl Default for MaxPhiOptions {
    fn default() -> Self {
        Self { grid_step: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPhiReport {
    pub c: f64,
    pub max_value: f64,
    pub witness: CriticalPoint,
    pub grid_max: f64,
    pub grid_argmax: (f64, f64),
    pub grid_points: u64,
    /// Critical value minus grid maximum.
    pub margin: f64,
}

/// `max φ(c, 3, l, r)` over `c-3 <= l <= 3`, `c-5 <= r <= c-4`, for `5 < c <= 6`.
///
/// The interior critical value is checked against a closed grid sweep;
/// a grid point above it means the maximum sits elsewhere and is an error.
pub fn max_phi_k3(c: f64, opts: &MaxPhiOptions) -> Result<MaxPhiReport> {
    if !(c > 5.0 && c <= 6.0) {
        return Err(Error::domain(format!(
            "max_phi_k3 needs 5 < c <= 6, got {c}"
        )));
    }
    if !(opts.grid_step > 0.0) {
        return Err(Error::invalid("grid step must be positive"));
    }
    let witness = critical_point(c)?;
    let (l0, l1) = (c - 3.0, 3.0);
    let (r0, r1) = ((c - 5.0).max(0.0), c - 4.0);
    let nl = ((l1 - l0) / opts.grid_step).ceil().max(1.0) as u64;
    let nr = ((r1 - r0) / opts.grid_step).ceil().max(1.0) as u64;
    let mut grid_max = f64::NEG_INFINITY;
    let mut arg = (l0, r0);
    for i in 0..=nl {
        let l = (l0 + (l1 - l0) * i as f64 / nl as f64).min(l1);
        for j in 0..=nr {
            let r = (r0 + (r1 - r0) * j as f64 / nr as f64).min(r1);
            let v = phi_k3(c, l, r);
            if v > grid_max {
                grid_max = v;
                arg = (l, r);
            }
        }
    }
    let grid_points = (nl + 1) * (nr + 1);
    let margin = witness.value - grid_max;
    if !witness.degenerate && margin < -1e-12 * (1.0 + witness.value.abs()) {
        return Err(Error::Solver(format!(
            "grid value {grid_max} at {arg:?} exceeds critical value {} at c = {c}",
            witness.value
        )));
    }
    Ok(MaxPhiReport {
        c,
        max_value: witness.value.max(grid_max),
        witness,
        grid_max,
        grid_argmax: arg,
        grid_points,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CStarReport {
    pub value: f64,
    pub bracket: (f64, f64),
    pub value_at_lo: f64,
    pub value_at_hi: f64,
    pub iterations: u32,
}

/// The root `c*` of `c ↦ max_{l,r} φ(c, 3, l, r)` by bisection on `[5.7, 6]`.
pub fn c_star(tol: f64) -> Result<CStarReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let f = |c: f64| -> Result<f64> {
        critical_point(c).map(|p| p.value).map_err(|e| {
            Error::Solver(format!("bisection lost the critical point at c = {c}: {e}"))
        })
    };
    let (mut lo, mut hi) = (5.7, 6.0);
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}]: values {flo}, {fhi}"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        iterations += 1;
    }
    Ok(CStarReport {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
        value_at_lo: flo,
        value_at_hi: fhi,
        iterations,
    })
}
