//! The quintic in `l` whose roots, at fixed `c`, locate the critical
//! points of `φ(c, 3, ·, ·)` after eliminating `r`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::combinatorics::Rational;
use crate::error::{Error, Result};

/// Coefficients `a₅, …, a₀` of `a₅l⁵ + … + a₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuinticPoly {
    pub c: f64,
    pub coeffs: [f64; 6],
}

fn coeffs_f64(c: f64) -> [f64; 6] {
    let c2 = c * c;
    let c3 = c2 * c;
    let c4 = c3 * c;
    [
        2.0 * c - 18.0,
        -2.0 * c2 - 69.0 * c + 846.0,
        -2.0 * c3 + 123.0 * c2 + 189.0 * c - 11448.0,
        2.0 * c4 + 12.0 * c3 - 2349.0 * c2 + 14256.0 * c + 95256.0,
        -48.0 * c4 + 1089.0 * c3 + 2916.0 * c2 - 125388.0 * c,
        126.0 * c4 - 4536.0 * c3 + 40824.0 * c2,
    ]
}

pub(crate) fn coeffs_exact(c: &Rational) -> [Rational; 6] {
    let i = |n: i64| Rational::from_integer(n.into());
    let c2 = c * c;
    let c3 = &c2 * c;
    let c4 = &c3 * c;
    [
        i(2) * c - i(18),
        -i(2) * &c2 - i(69) * c + i(846),
        -i(2) * &c3 + i(123) * &c2 + i(189) * c - i(11448),
        i(2) * &c4 + i(12) * &c3 - i(2349) * &c2 + i(14256) * c + i(95256),
        -i(48) * &c4 + i(1089) * &c3 + i(2916) * &c2 - i(125388) * c,
        i(126) * &c4 - i(4536) * &c3 + i(40824) * &c2,
    ]
}

pub(crate) fn eval_exact(a: &[Rational; 6], l: &Rational) -> Rational {
    a.iter().fold(Rational::zero(), |acc, ai| acc * l + ai)
}

pub fn quintic(c: f64) -> QuinticPoly {
    QuinticPoly {
        c,
        coeffs: coeffs_f64(c),
    }
}

impl QuinticPoly {
    pub fn eval(&self, l: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, a| acc * l + a)
    }

    /// Sign of the polynomial at `l` for the binary values of `c` and `l`.
    /// Falls back to rational evaluation when the float value is too small
    /// to trust.
    pub fn exact_sign(&self, l: f64) -> i8 {
        let v = self.eval(l);
        let scale = self
            .coeffs
            .iter()
            .fold(0.0, |acc: f64, a| acc * l.abs() + a.abs());
        if v.abs() > 1e-12 * scale {
            return if v > 0.0 { 1 } else { -1 };
        }
        let (Some(c), Some(l)) = (Rational::from_float(self.c), Rational::from_float(l)) else {
            return 0;
        };
        let v = eval_exact(&coeffs_exact(&c), &l);
        if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Initial number of grid cells.
    pub grid: usize,
    /// Bisection stops once the bracket is narrower than this.
    pub tolerance: f64,
    /// Refinement rounds allowed before a root cluster is declared unresolved.
    pub max_refinements: u32,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            grid: 1000,
            tolerance: 1e-10,
            max_refinements: 3,
        }
    }
}

fn sign_changes(q: &QuinticPoly, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let step = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut sa = q.exact_sign(a);
    for i in 1..=n {
        let b = if i == n { hi } else { lo + step * i as f64 };
        let sb = q.exact_sign(b);
        if sa != 0 && sb != 0 && sa != sb {
            out.push((a, b));
        } else if sb == 0 && i < n {
            // An exact grid root: bracket it with its neighbours.
            out.push((a, lo + step * (i + 1) as f64));
        }
        a = b;
        sa = sb;
    }
    out.dedup_by(|x, y| x.0 <= y.1);
    out
}

/// Real roots of the quintic in the open interval `(lo, hi)`.
///
/// Sign changes are located on a grid and bisected on exact signs. The
/// count must agree with a grid ten times finer; otherwise the grid is
/// refined, and after `max_refinements` rounds the call fails.
pub fn quintic_roots_in(c: f64, lo: f64, hi: f64, opts: &RootOptions) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("empty root interval ({lo}, {hi})")));
    }
    let q = quintic(c);
    let mut n = opts.grid.max(2);
    let mut cells = sign_changes(&q, lo, hi, n);
    for round in 0..=opts.max_refinements {
        let finer = sign_changes(&q, lo, hi, n * 10);
        if finer.len() == cells.len() {
            cells = finer;
            break;
        }
        if round == opts.max_refinements {
            return Err(Error::Solver(format!(
                "unresolved root cluster for c = {c} in ({lo}, {hi}): {} vs {} sign changes",
                cells.len(),
                finer.len()
            )));
        }
        n *= 10;
        cells = finer;
    }
    Ok(cells
        .into_iter()
        .map(|(mut a, mut b)| {
            let sa = q.exact_sign(a);
            while b - a > opts.tolerance {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let sm = q.exact_sign(mid);
                if sm == 0 {
                    return mid;
                }
                if sm == sa {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect())
}

/// Bisects the quintic at rational `c` on exact rationals, from a bracket
/// with a sign change, until its width is below `2^-bits`.
pub(crate) fn isolate_exact(
    c: &Rational,
    lo: f64,
    hi: f64,
    bits: u32,
) -> Result<(Rational, Rational)> {
    let a5 = coeffs_exact(c);
    let mut a = Rational::from_float(lo).ok_or_else(|| Error::domain("non-finite bracket"))?;
    let mut b = Rational::from_float(hi).ok_or_else(|| Error::domain("non-finite bracket"))?;
    let sa = eval_exact(&a5, &a).signum();
    let sb = eval_exact(&a5, &b).signum();
    if sa.is_zero() {
        return Ok((a.clone(), a));
    }
    if sb.is_zero() {
        return Ok((b.clone(), b));
    }
    if sa == sb {
        return Err(Error::Solver(format!(
            "no sign change of the quintic on [{lo}, {hi}]"
        )));
    }
    let eps = Rational::new(1.into(), num_bigint::BigInt::from(1) << bits);
    let two = Rational::from_integer(2.into());
    while &b - &a > eps {
        let mid = (&a + &b) / &two;
        let sm = eval_exact(&a5, &mid).signum();
        if sm.is_zero() {
            return Ok((mid.clone(), mid));
        }
        if sm == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}
