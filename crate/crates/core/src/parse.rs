//! Text parsers for exact rational inputs.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::Rational;
use crate::error::{Error, Result};

/// Largest accepted decimal exponent magnitude.
pub const MAX_EXPONENT: i64 = 4096;

/// Parses an exact rational from `"5"`, `"-5.05"`, `"1.5e-3"` or `"101/20"`.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::parse(1, 1, "empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_integer(num.trim(), 1)?;
        let d = parse_integer(den.trim(), num.len() + 2)?;
        if d.is_zero() {
            return Err(Error::parse(1, num.len() + 2, "zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_integer(s: &str, column: usize) -> Result<BigInt> {
    let (neg, digits) = split_sign(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(1, column, format!("invalid integer {s:?}")));
    }
    let v: BigInt = digits
        .parse()
        .map_err(|_| Error::parse(1, column, format!("invalid integer {s:?}")))?;
    Ok(if neg { -v } else { v })
}

fn split_sign(s: &str) -> (bool, &str) {
    match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    }
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let (neg, rest) = split_sign(s);
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => (&rest[..i], Some(&rest[i + 1..])),
        None => (rest, None),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::parse(1, 1, format!("invalid number {s:?}")));
    }
    for (i, b) in int_part.bytes().chain(frac_part.bytes()).enumerate() {
        if !b.is_ascii_digit() {
            return Err(Error::parse(1, i + 1, format!("invalid digit in {s:?}")));
        }
    }
    let mut exp10: i64 = match exponent {
        Some(e) => {
            let (eneg, edigits) = split_sign(e);
            if edigits.is_empty()
                || edigits.len() > 6
                || !edigits.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(Error::parse(
                    1,
                    mantissa.len() + 2,
                    format!("invalid exponent in {s:?}"),
                ));
            }
            let v: i64 = edigits.parse().expect("validated digits");
            if eneg {
                -v
            } else {
                v
            }
        }
        None => 0,
    };
    exp10 -= frac_part.len() as i64;
    if exp10.abs() > MAX_EXPONENT {
        return Err(Error::parse(
            1,
            1,
            format!("exponent out of range in {s:?}"),
        ));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().expect("validated digits")
    };
    if neg {
        n = -n;
    }
    let ten_pow = num_traits::pow(BigInt::from(10), exp10.unsigned_abs() as usize);
    Ok(if exp10 >= 0 {
        Rational::from_integer(n * ten_pow)
    } else {
        Rational::new(n, ten_pow)
    })
}

/// Formats a rational as a finite decimal when its denominator allows,
/// otherwise as `num/den`.
pub fn format_rational(q: &Rational) -> String {
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() || twos.max(fives) > 64 {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let int = scaled.to_integer();
    if places == 0 {
        return int.to_string();
    }
    let neg = int < BigInt::zero();
    let digits = if neg {
        (-&int).to_string()
    } else {
        int.to_string()
    };
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (a, b) = padded.split_at(padded.len() - places);
    format!("{}{a}.{b}", if neg { "-" } else { "" })
}
