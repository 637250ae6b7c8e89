//! Extended-precision rigorous enclosures.
//!
//! A [`Precise`] value is a dyadic interval `[lo / 2^b, hi / 2^b]` with
//! big-integer endpoints. Arithmetic rounds outward, and `ln`/`exp` are
//! evaluated by series with explicit truncation bounds, so the enclosure
//! always contains the exact real result. This backs every certifying
//! comparison in [`crate::phi`] and [`crate::certify`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::Rational;
use crate::error::{Error, Result};

/// Guard bits added on top of the requested decimal precision.
const GUARD_BITS: u32 = 32;

/// Working precision, in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 16;

    pub fn digits(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::invalid(format!(
                "precision must be at least {} digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        Ok(Self { digits })
    }

    pub fn decimal_digits(&self) -> u32 {
        self.digits
    }

    /// Fractional bits used for endpoints.
    pub fn bits(&self) -> u32 {
        // log2(10) < 3.33
        self.digits * 333 / 100 + 1 + GUARD_BITS
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self { digits: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precise {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

fn floor_shr(x: &BigInt, s: u32) -> BigInt {
    x.div_floor(&(BigInt::one() << s))
}

fn ceil_shr(x: &BigInt, s: u32) -> BigInt {
    x.div_ceil(&(BigInt::one() << s))
}

/// `atanh(z)` for `0 <= z <= 1/3`, where `z` is given as `z_fixed / 2^w`
/// rounded down by less than one unit. Returns the value and an error
/// bound, both in units of `2^-w`.
fn atanh_fixed(z_fixed: &BigInt, w: u32) -> (BigInt, BigInt) {
    let z2 = floor_shr(&(z_fixed * z_fixed), w);
    let mut power = z_fixed.clone();
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * i + 1);
        power = floor_shr(&(&power * &z2), w);
        i += 1;
    }
    // Per-term truncation (at most i + 2 units for term i), the input
    // rounding (derivative <= 9/8, so < 2 units) and the geometric tail
    // once the computed power underflows (< 2(i + 1) units).
    let n = BigInt::from(i);
    let err = (&n + 3u32) * (&n + 3u32) + 4u32;
    (sum, err)
}

/// Enclosure of `ln 2` at `w` fractional bits.
fn ln2_fixed(w: u32) -> (BigInt, BigInt) {
    let third = (BigInt::one() << w) / BigInt::from(3);
    let (s, err) = atanh_fixed(&third, w);
    (s * 2u32, err * 2u32 + 1u32)
}

impl Precise {
    fn raw(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi, bits }
    }

    pub fn from_rational(q: &Rational, prec: Precision) -> Self {
        Self::from_rational_bits(q, prec.bits())
    }

    fn from_rational_bits(q: &Rational, bits: u32) -> Self {
        let scaled = q.numer() << bits;
        let lo = scaled.div_floor(q.denom());
        let hi = scaled.div_ceil(q.denom());
        Self::raw(lo, hi, bits)
    }

    pub fn from_integer(n: i64, prec: Precision) -> Self {
        let v = BigInt::from(n) << prec.bits();
        Self::raw(v.clone(), v, prec.bits())
    }

    /// Exact enclosure of a finite `f64`.
    pub fn from_f64(x: f64, prec: Precision) -> Result<Self> {
        let q = Rational::from_float(x)
            .ok_or_else(|| Error::domain(format!("cannot enclose non-finite {x}")))?;
        Ok(Self::from_rational(&q, prec))
    }

    /// Hull of two rationals.
    pub fn between(a: &Rational, b: &Rational, prec: Precision) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let lo = Self::from_rational(a, prec).lo;
        let hi = Self::from_rational(b, prec).hi;
        Self::raw(lo, hi, prec.bits())
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits
    }

    pub fn lower(&self) -> Rational {
        Rational::new(self.lo.clone(), BigInt::one() << self.bits)
    }

    pub fn upper(&self) -> Rational {
        Rational::new(self.hi.clone(), BigInt::one() << self.bits)
    }

    /// Lower endpoint rounded down to `f64`.
    pub fn lower_f64(&self) -> f64 {
        self.lower()
            .to_f64()
            .unwrap_or(f64::NEG_INFINITY)
            .next_down()
    }

    /// Upper endpoint rounded up to `f64`.
    pub fn upper_f64(&self) -> f64 {
        self.upper().to_f64().unwrap_or(f64::INFINITY).next_up()
    }

    pub fn midpoint_f64(&self) -> f64 {
        let mid = Rational::new(&self.lo + &self.hi, BigInt::one() << (self.bits + 1));
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Width as an `f64` upper bound.
    pub fn width_f64(&self) -> f64 {
        let w = Rational::new(&self.hi - &self.lo, BigInt::one() << self.bits);
        w.to_f64().unwrap_or(f64::INFINITY).next_up()
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        &self.lower() <= q && q <= &self.upper()
    }

    /// Certainly `< 0`.
    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Certainly `> 0`.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Certainly below `other` (every point of `self` below every point of `other`).
    pub fn certainly_lt(&self, other: &Precise) -> bool {
        let (a, b) = Self::align(self, other);
        a.hi < b.lo
    }

    fn rescale(&self, bits: u32) -> Precise {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = bits - self.bits;
                Self::raw(&self.lo << s, &self.hi << s, bits)
            }
            Ordering::Less => {
                let s = self.bits - bits;
                Self::raw(floor_shr(&self.lo, s), ceil_shr(&self.hi, s), bits)
            }
        }
    }

    fn align(a: &Precise, b: &Precise) -> (Precise, Precise) {
        let bits = a.bits.max(b.bits);
        (a.rescale(bits), b.rescale(bits))
    }

    pub fn hull(&self, other: &Precise) -> Precise {
        let (a, b) = Self::align(self, other);
        Self::raw(a.lo.min(b.lo), a.hi.max(b.hi), a.bits)
    }

    pub fn abs_upper(&self) -> Rational {
        let m = self.lo.abs().max(self.hi.abs());
        Rational::new(m, BigInt::one() << self.bits)
    }

    pub fn checked_div(&self, rhs: &Precise) -> Result<Precise> {
        let (a, b) = Self::align(self, rhs);
        if b.lo.sign() != Sign::Plus && b.hi.sign() != Sign::Minus {
            return Err(Error::domain("division by an enclosure containing zero"));
        }
        let bits = a.bits;
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for x in [&a.lo, &a.hi] {
            for y in [&b.lo, &b.hi] {
                let num = x << bits;
                let f = num.div_floor(y);
                let c = num.div_ceil(y);
                lo = Some(lo.map_or(f.clone(), |l| l.min(f)));
                hi = Some(hi.map_or(c.clone(), |h| h.max(c)));
            }
        }
        Ok(Self::raw(
            lo.expect("four candidates"),
            hi.expect("four candidates"),
            bits,
        ))
    }

    /// Natural logarithm; the enclosure must be strictly positive.
    pub fn ln(&self) -> Result<Precise> {
        if !self.lo.is_positive() {
            return Err(Error::domain(
                "ln of an enclosure that is not strictly positive",
            ));
        }
        let lo = ln_point(&self.lo, self.bits, false);
        let hi = ln_point(&self.hi, self.bits, true);
        Ok(Self::raw(lo, hi, self.bits))
    }

    pub fn exp(&self) -> Precise {
        let lo = exp_point(&self.lo, self.bits, false);
        let hi = exp_point(&self.hi, self.bits, true);
        Self::raw(lo, hi, self.bits)
    }

    /// `x ln x` with `g(0) = 0`; requires `x > 0` unless `x` is exactly zero.
    pub fn g(&self) -> Result<Precise> {
        if self.lo.is_zero() && self.hi.is_zero() {
            return Ok(self.clone());
        }
        Ok(self * &self.ln()?)
    }

    /// `h(x, y) = g(x) - g(y) - g(x - y)`.
    pub fn h(x: &Precise, y: &Precise) -> Result<Precise> {
        let d = x - y;
        Ok(&(&x.g()? - &y.g()?) - &d.g()?)
    }

    /// Euler's number.
    pub fn e(prec: Precision) -> Precise {
        Precise::from_integer(1, prec).exp()
    }
}

/// Bound on `ln(n / 2^b)` (lower if `!upper`), as an integer over `2^b`.
fn ln_point(n: &BigInt, b: u32, upper: bool) -> BigInt {
    let w = b + 64;
    let e = (n.bits() - 1) as i64;
    let pow = BigInt::one() << e as u32;
    let z = ((n - &pow) << w) / (n + &pow);
    let (s, serr) = atanh_fixed(&z, w);
    let (l2, l2err) = ln2_fixed(w);
    let k = BigInt::from(e - b as i64);
    let mid = &k * &l2 + &s * 2u32;
    let err = k.abs() * &l2err + &serr * 2u32 + 1u32;
    if upper {
        ceil_shr(&(mid + err), 64)
    } else {
        floor_shr(&(mid - err), 64)
    }
}

/// Bound on `exp(n / 2^b)` (lower if `!upper`), as an integer over `2^b`.
fn exp_point(n: &BigInt, b: u32, upper: bool) -> BigInt {
    if n.is_negative() {
        let inv = exp_point(&-n, b, !upper);
        // exp(-x) = 1 / exp(x); inv > 0 always.
        let one = BigInt::one() << (2 * b);
        return if upper {
            one.div_ceil(&inv)
        } else {
            one.div_floor(&inv)
        };
    }
    let int_bits = (n.bits() as i64 - b as i64).max(0) as u32;
    let j = int_bits + 10;
    let w = b + 64 + j + int_bits * 2;
    // r = x / 2^j, rounded down at w bits.
    let r = {
        let total = b + j;
        if w >= total {
            n << (w - total)
        } else {
            floor_shr(n, total - w)
        }
    };
    let one = BigInt::one() << w;
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut i: u64 = 1;
    loop {
        term = floor_shr(&(&term * &r), w) / BigInt::from(i);
        if term.is_zero() {
            break;
        }
        sum += &term;
        i += 1;
    }
    // Truncation in the terms, the rounding of r (derivative of exp(r)
    // below 2 here) and the geometric tail.
    let ib = BigInt::from(i);
    let err = &ib * &ib + &ib * 4u32 + 8u32;
    let mut acc = Precise::raw(&sum - &err, &sum + &err, w);
    for _ in 0..j {
        acc = &acc * &acc;
    }
    let acc = acc.rescale(b);
    if upper {
        acc.hi
    } else {
        acc.lo.max(BigInt::zero())
    }
}

impl Add for &Precise {
    type Output = Precise;
    fn add(self, rhs: &Precise) -> Precise {
        let (a, b) = Precise::align(self, rhs);
        Precise::raw(&a.lo + &b.lo, &a.hi + &b.hi, a.bits)
    }
}

impl Sub for &Precise {
    type Output = Precise;
    fn sub(self, rhs: &Precise) -> Precise {
        let (a, b) = Precise::align(self, rhs);
        Precise::raw(&a.lo - &b.hi, &a.hi - &b.lo, a.bits)
    }
}

impl Neg for &Precise {
    type Output = Precise;
    fn neg(self) -> Precise {
        Precise::raw(-&self.hi, -&self.lo, self.bits)
    }
}

impl Mul for &Precise {
    type Output = Precise;
    fn mul(self, rhs: &Precise) -> Precise {
        let (a, b) = Precise::align(self, rhs);
        let products = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let min = products.iter().min().expect("nonempty");
        let max = products.iter().max().expect("nonempty");
        Precise::raw(floor_shr(min, a.bits), ceil_shr(max, a.bits), a.bits)
    }
}

impl Add for Precise {
    type Output = Precise;
    fn add(self, rhs: Precise) -> Precise {
        &self + &rhs
    }
}

impl Sub for Precise {
    type Output = Precise;
    fn sub(self, rhs: Precise) -> Precise {
        &self - &rhs
    }
}

impl Mul for Precise {
    type Output = Precise;
    fn mul(self, rhs: Precise) -> Precise {
        &self * &rhs
    }
}

impl fmt::Display for Precise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lower_f64(), self.upper_f64())
    }
}
