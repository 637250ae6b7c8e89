//! Outward-rounded `f64` intervals.
//!
//! Every operation rounds the lower endpoint down and the upper endpoint
//! up by at least one ulp, so the exact real result of the operation on
//! any points of the operands lies inside the result. `ln` and `exp`
//! widen by two ulps on each side since the platform libm is only
//! faithful, not correctly rounded.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Outcome of comparing an enclosure against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Undecided,
}

#[inline]
fn down(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x.next_down()
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x.next_up()
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "interval point must not be NaN");
        Self { lo: x, hi: x }
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    /// Encloses an exact rational.
    pub fn from_rational(q: &Rational) -> Self {
        let x = q.to_f64().unwrap_or(f64::NAN);
        if x.is_nan() {
            return Self {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            };
        }
        Self {
            lo: down(x),
            hi: up(x),
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        up(self.hi - self.lo)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        // from_float is exact for finite values; infinite endpoints are unbounded.
        let lo_ok = self.lo == f64::NEG_INFINITY
            || Rational::from_float(self.lo).is_some_and(|lo| &lo <= q);
        let hi_ok =
            self.hi == f64::INFINITY || Rational::from_float(self.hi).is_some_and(|hi| q <= &hi);
        lo_ok && hi_ok
    }

    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Is the whole enclosure strictly below `t`?
    pub fn compare_lt(&self, t: f64) -> Verdict {
        if self.hi < t {
            Verdict::Certified
        } else if self.lo >= t {
            Verdict::Refuted
        } else {
            Verdict::Undecided
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(Error::domain(format!(
                "division by an interval containing zero [{}, {}]",
                rhs.lo, rhs.hi
            )));
        }
        let c = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        Ok(Self::from_candidates(c))
    }

    pub fn ln(self) -> Result<Interval> {
        if !(self.lo > 0.0) {
            return Err(Error::domain(format!(
                "ln of interval [{}, {}] not strictly positive",
                self.lo, self.hi
            )));
        }
        Ok(Interval {
            lo: down(down(self.lo.ln())),
            hi: up(up(self.hi.ln())),
        })
    }

    pub fn exp(self) -> Interval {
        Interval {
            lo: down(down(self.lo.exp())).max(0.0),
            hi: up(up(self.hi.exp())),
        }
    }

    pub fn powi(self, n: u32) -> Interval {
        if n == 0 {
            return Interval::point(1.0);
        }
        let mut acc = self;
        for _ in 1..n {
            acc = acc * self;
        }
        if n.is_multiple_of(2) && acc.lo < 0.0 {
            // Dependent product of an interval straddling zero.
            acc.lo = 0.0;
        }
        acc
    }

    fn from_candidates(c: [f64; 4]) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in c {
            if v.is_nan() {
                return Interval {
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                };
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Interval {
            lo: down(lo),
            hi: up(hi),
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: down(self.lo + rhs.lo),
            hi: up(self.hi + rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: down(self.lo - rhs.hi),
            hi: up(self.hi - rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::from_candidates([
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ])
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}
