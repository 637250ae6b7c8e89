//! Exact binomial coefficients and the entropy functions `g` and `h`.
//!
//! Binomial coefficients follow the totalized convention `C(n, m) = 0`
//! whenever `m < 0` or `m > n`. A negative `n` is accepted and yields 0
//! for every `m`, since `m >= 0 > n` or `m < 0` always holds; the union
//! bound uses this when `s < 4m`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Exact binomial coefficient with the out-of-range convention.
pub fn binom(n: i64, m: i64) -> BigUint {
    if n < 0 || m < 0 || m > n {
        return BigUint::zero();
    }
    let m = m.min(n - m) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 1..=m {
        acc *= n - m + i;
        acc /= i;
    }
    acc
}

/// Row cache of binomial coefficients.
///
/// Rows are built once with the multiplicative recurrence and never
/// mutated afterwards, so readers only contend on the map lock.
#[derive(Debug, Default)]
pub struct BinomialTable {
    rows: RwLock<HashMap<u64, Arc<Vec<BigUint>>>>,
}

impl BinomialTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Full row `C(n, 0..=n)`, built on first use.
    pub fn row(&self, n: u64) -> Arc<Vec<BigUint>> {
        if let Some(row) = self.rows.read().expect("binomial table poisoned").get(&n) {
            return Arc::clone(row);
        }
        let mut row = Vec::with_capacity(n as usize + 1);
        let mut cur = BigUint::one();
        for j in 0..=n {
            row.push(cur.clone());
            if j < n {
                cur *= n - j;
                cur /= j + 1;
            }
        }
        let row = Arc::new(row);
        self.rows
            .write()
            .expect("binomial table poisoned")
            .entry(n)
            .or_insert_with(|| Arc::clone(&row))
            .clone()
    }

    /// `C(n, m)` with the out-of-range convention.
    pub fn get(&self, n: i64, m: i64) -> BigUint {
        if n < 0 || m < 0 || m > n {
            return BigUint::zero();
        }
        self.row(n as u64)[m as usize].clone()
    }

    /// Indices of rows currently cached, sorted.
    pub fn cached_rows(&self) -> Vec<u64> {
        let mut rows: Vec<u64> = self
            .rows
            .read()
            .expect("binomial table poisoned")
            .keys()
            .copied()
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Checks Pascal's rule against the previous row wherever both rows
    /// are cached, plus the unit boundary entries of every row.
    pub fn check_pascal(&self) -> bool {
        let rows = self.rows.read().expect("binomial table poisoned");
        rows.iter().all(|(&n, row)| {
            if !row[0].is_one() || !row[n as usize].is_one() {
                return false;
            }
            match n.checked_sub(1).and_then(|p| rows.get(&p)) {
                Some(prev) => (1..n as usize).all(|m| row[m] == &prev[m - 1] + &prev[m]),
                None => true,
            }
        })
    }
}

/// `x ln x`, extended by continuity with `g(0) = 0`.
pub fn g(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("g({x}) requires a finite x >= 0")));
    }
    Ok(g_unchecked(x))
}

#[inline]
pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `h(x, y) = g(x) - g(y) - g(x - y)`, defined for `0 <= y <= x`.
pub fn h(x: f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !(x >= y) || !x.is_finite() {
        return Err(Error::domain(format!("h({x}, {y}) requires 0 <= y <= x")));
    }
    Ok(h_unchecked(x, y))
}

#[inline]
pub(crate) fn h_unchecked(x: f64, y: f64) -> f64 {
    g_unchecked(x) - g_unchecked(y) - g_unchecked((x - y).max(0.0))
}

/// `t ln t`; its minimum over `(0, 1]` is `-1/e` at `t = 1/e`.
pub fn t_ln_t(t: f64) -> Result<f64> {
    g(t)
}

/// Natural logarithm of a big unsigned integer (`-inf` for zero).
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return num_traits::ToPrimitive::to_f64(x)
            .expect("bits checked")
            .ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let top = num_traits::ToPrimitive::to_f64(&top).expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Result of the Stirling sandwich check.
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingSandwich {
    pub lower: f64,
    pub upper: f64,
    pub binom_value: Rational,
}

/// `exp(h(n,m)) / (5 sqrt n) <= C(n,m) <= exp(h(n,m))`.
///
/// The comparison is done in log space so it stays meaningful when the
/// coefficient overflows `f64`; the returned bounds may then be infinite.
pub fn stirling_sandwich(n: u64, m: u64) -> Result<StirlingSandwich> {
    if n == 0 || m > n {
        return Err(Error::domain(format!(
            "stirling_sandwich({n}, {m}) requires 1 <= n and 0 <= m <= n"
        )));
    }
    let value = binom(n as i64, m as i64);
    let ln_upper = h_unchecked(n as f64, m as f64);
    let ln_lower = ln_upper - (5.0 * (n as f64).sqrt()).ln();
    let ln_value = ln_biguint(&value);
    if !(ln_lower <= ln_value && ln_value <= ln_upper) {
        return Err(Error::Solver(format!(
            "Stirling sandwich violated at C({n},{m}): ln C = {ln_value}, bounds [{ln_lower}, {ln_upper}]"
        )));
    }
    Ok(StirlingSandwich {
        lower: ln_lower.exp(),
        upper: ln_upper.exp(),
        binom_value: Rational::from_integer(value.into()),
    })
}

/// Checks the sandwich for every `0 <= m <= n`, stepping along row `n`.
/// Returns the number of pairs checked.
pub fn stirling_sandwich_row(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("stirling_sandwich_row requires n >= 1"));
    }
    let slack = (5.0 * (n as f64).sqrt()).ln();
    let mut value = BigUint::one();
    for m in 0..=n {
        if m > 0 {
            value = value * BigUint::from(n - m + 1) / BigUint::from(m);
        }
        let ln_upper = h_unchecked(n as f64, m as f64);
        let ln_value = ln_biguint(&value);
        if !(ln_upper - slack <= ln_value && ln_value <= ln_upper) {
            return Err(Error::Solver(format!(
                "Stirling sandwich violated at C({n},{m}): ln C = {ln_value}, upper {ln_upper}"
            )));
        }
    }
    Ok(n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Pascal-triangle oracle, independent of the multiplicative formula.
    fn pascal(n: usize) -> Vec<Vec<BigUint>> {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![BigUint::one(); i + 1];
            for j in 1..i {
                row[j] = &prev[j - 1] + &prev[j];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn small_binomials() {
        assert_eq!(binom(6, 3), BigUint::from(20u32));
        assert_eq!(binom(5, -1), BigUint::zero());
        assert_eq!(binom(5, 6), BigUint::zero());
        assert_eq!(binom(-2, 0), BigUint::zero());
        assert_eq!(binom(0, 0), BigUint::one());
    }

    #[test]
    fn binom_matches_pascal_oracle() {
        let tri = pascal(120);
        assert_eq!(binom(36, 13), tri[36][13]);
        // C(36,13) = 2310789600
        assert_eq!(binom(36, 13), BigUint::from(2_310_789_600u64));
        for (n, row) in tri.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                assert_eq!(&binom(n as i64, m as i64), v, "C({n},{m})");
            }
        }
    }

    #[test]
    fn table_rows_satisfy_pascal() {
        let t = BinomialTable::new();
        for n in 0..60 {
            t.row(n);
        }
        t.row(200);
        assert!(t.check_pascal());
        assert_eq!(t.get(30, 5), binom(30, 5));
        assert_eq!(t.get(30, 31), BigUint::zero());
        assert_eq!(t.get(-1, 0), BigUint::zero());
        assert_eq!(t.cached_rows().len(), 61);
    }

    #[test]
    fn g_and_h_values() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert_eq!(g(1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((g(e).unwrap() - e).abs() < 1e-15);
        assert!(g(-1e-9).is_err());
        assert!(g(f64::NAN).is_err());
        assert_eq!(h(3.5, 3.5).unwrap(), 0.0);
        assert_eq!(h(0.0, 0.0).unwrap(), 0.0);
        assert!((h(2.0, 1.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!(h(1.0, 2.0).is_err());
        assert!(h(1.0, -0.5).is_err());
        let base = h(5.0, 2.0).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let scaled = h(5.0 * lambda, 2.0 * lambda).unwrap();
            assert!((scaled - lambda * base).abs() < 1e-12, "lambda = {lambda}");
        }
    }

    #[test]
    fn sandwich_examples() {
        let s = stirling_sandwich(1, 0).unwrap();
        assert!((s.lower - 0.2).abs() < 1e-15);
        assert_eq!(s.upper, 1.0);
        assert_eq!(s.binom_value, Rational::one());
        stirling_sandwich(100, 50).unwrap();
        stirling_sandwich(1000, 337).unwrap();
        assert!(stirling_sandwich(0, 0).is_err());
        assert!(stirling_sandwich(4, 5).is_err());
    }

    #[test]
    fn ln_of_huge_integers() {
        let big = binom(5000, 2500);
        let via_h = h_unchecked(5000.0, 2500.0) - 0.5 * (std::f64::consts::PI * 2500.0).ln();
        assert!((ln_biguint(&big) - via_h).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn homogeneity(lambda in 0.01f64..50.0, x in 0.0f64..40.0, frac in 0.0f64..=1.0) {
            let y = x * frac;
            let lhs = h(lambda * x, lambda * y).unwrap();
            let rhs = lambda * h(x, y).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lambda) * (1.0 + x));
        }

        #[test]
        fn symmetry(x in 0.0f64..100.0, frac in 0.0f64..=1.0) {
            let y = x * frac;
            let a = h(x, y).unwrap();
            let b = h(x, x - y).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + x.abs() * x.ln().abs()));
        }

        #[test]
        fn t_ln_t_lower_bound(t in 1e-300f64..=1.0) {
            prop_assert!(t_ln_t(t).unwrap() >= -1.0 / std::f64::consts::E - 1e-16);
        }
    }
}
