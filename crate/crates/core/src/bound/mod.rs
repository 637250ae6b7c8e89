//! The union bound on the probability that a random permutation graph
//! fails to be a concentrator.
//!
//! For `m` and `s` the bound is the triple sum over `k in 1..=3m`,
//! `l, r in 0..=k` of
//!
//! ```text
//! a(m,s,k,l,r) = C(s,l) C(6m-s,k-l) C(s-4m,r) C(8m-s,k-r) C(8k-r,6k-l) / C(36m-s,6k-l)
//! ```
//!
//! evaluated either exactly or as an outward-rounded enclosure. The
//! shape of the sum is captured by a [`Profile`] of degree classes so the
//! same engine also evaluates the bound for the regular `s < 4m` graphs,
//! where the literal formula degenerates to zero.

mod engine;
mod report;
mod scan;
mod small_k;

use std::time::Duration;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom, Rational};
use crate::error::{Error, Result};
use crate::interval::Interval;

pub use engine::{lhs_sum, union_bound};
pub use report::{SumReport, SumTotal};
pub use scan::{s_max, ScanKind, ScanOptions, SmaxOutcome, SmaxReport};
pub use small_k::{check_identities, small_k_bound, small_k_cutoff, IdentityCheck, SmallKBound};

/// Arithmetic backend for sum evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Interval,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "interval" => Ok(Mode::Interval),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// Summation index `(k, l, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SumTermIndex {
    pub k: u32,
    pub l: u32,
    pub r: u32,
}

impl SumTermIndex {
    pub fn new(k: u32, l: u32, r: u32) -> Self {
        Self { k, l, r }
    }
}

/// A class of vertices sharing one degree. Negative counts are allowed
/// and contribute zero through the binomial convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeClass {
    pub degree: i64,
    pub count: i64,
}

/// Degree classes of the permutation graph family, two per side with
/// degrees differing by one. `l` counts low-degree inputs in `A` and `r`
/// low-degree outputs in `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub m: u32,
    pub s: u32,
    pub edges: i64,
    pub k_max: u32,
    pub input_low: DegreeClass,
    pub input_high: DegreeClass,
    pub output_low: DegreeClass,
    pub output_high: DegreeClass,
}

fn check_ms(m: u32, s: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("m must be positive"));
    }
    if s as u64 > 6 * m as u64 {
        return Err(Error::domain(format!(
            "s = {s} outside [0, 6m] = [0, {}]",
            6 * m
        )));
    }
    Ok(())
}

impl Profile {
    /// The literal summand of the bound: degree-7 outputs number `s - 4m`
    /// even when that is negative.
    pub fn main_sum(m: u32, s: u32) -> Result<Self> {
        check_ms(m, s)?;
        let (m6, m4, si) = (6 * m as i64, 4 * m as i64, s as i64);
        Ok(Self {
            m,
            s,
            edges: 36 * m as i64 - si,
            k_max: 3 * m,
            input_low: DegreeClass {
                degree: 5,
                count: si,
            },
            input_high: DegreeClass {
                degree: 6,
                count: m6 - si,
            },
            output_low: DegreeClass {
                degree: 7,
                count: si - m4,
            },
            output_high: DegreeClass {
                degree: 8,
                count: 2 * m4 - si,
            },
        })
    }

    /// Degree classes of the graph `G(π)` actually built for `(m, s)`.
    /// Agrees with [`Profile::main_sum`] for `4m <= s <= 6m`; for smaller
    /// `s` the outputs have degrees 8 and 9.
    pub fn graph(m: u32, s: u32) -> Result<Self> {
        let mut p = Self::main_sum(m, s)?;
        let (m4, si) = (4 * m as i64, s as i64);
        if si < m4 {
            p.output_low = DegreeClass {
                degree: 8,
                count: si,
            };
            p.output_high = DegreeClass {
                degree: 9,
                count: m4 - si,
            };
        }
        Ok(p)
    }

    pub(crate) fn check_index(&self, idx: SumTermIndex) -> Result<()> {
        if idx.k == 0 || idx.k > self.k_max || idx.l > idx.k || idx.r > idx.k {
            return Err(Error::domain(format!(
                "index (k={}, l={}, r={}) outside 1 <= k <= {}, 0 <= l, r <= k",
                idx.k, idx.l, idx.r, self.k_max
            )));
        }
        Ok(())
    }

    /// Size of the element set `𝒜` of an input set with `k` vertices, `l` of low degree.
    pub fn input_elements(&self, k: i64, l: i64) -> i64 {
        self.input_high.degree * k - (self.input_high.degree - self.input_low.degree) * l
    }

    /// Size of the element set `ℬ` of an output set with `k` vertices, `r` of low degree.
    pub fn output_elements(&self, k: i64, r: i64) -> i64 {
        self.output_high.degree * k - (self.output_high.degree - self.output_low.degree) * r
    }

    /// Admissible `l` for which the input-side binomials are nonzero.
    pub(crate) fn l_range(&self, k: i64) -> Option<(i64, i64)> {
        let lo = 0.max(k - self.input_high.count);
        let hi = k.min(self.input_low.count);
        (lo <= hi).then_some((lo, hi))
    }

    /// Admissible `r` for which the output-side binomials are nonzero.
    pub(crate) fn r_range(&self, k: i64) -> Option<(i64, i64)> {
        let lo = 0.max(k - self.output_high.count);
        let hi = k.min(self.output_low.count);
        (lo <= hi).then_some((lo, hi))
    }

    /// Terms visited by the pruned enumeration.
    pub fn planned_terms(&self, k: i64) -> u64 {
        match (self.l_range(k), self.r_range(k)) {
            (Some((a, b)), Some((c, d))) => ((b - a + 1) * (d - c + 1)) as u64,
            _ => 0,
        }
    }
}

/// Value of a single summand.
#[derive(Debug, Clone, PartialEq)]
pub enum TermValue {
    Exact(Rational),
    Interval(Interval),
}

impl TermValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            TermValue::Exact(q) => num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN),
            TermValue::Interval(i) => i.midpoint(),
        }
    }
}

fn ratio(num: BigUint, den: BigUint) -> Rational {
    Rational::new(num.into(), den.into())
}

fn exact_term(p: &Profile, idx: SumTermIndex) -> Rational {
    let (k, l, r) = (idx.k as i64, idx.l as i64, idx.r as i64);
    let a = p.input_elements(k, l);
    let b = p.output_elements(k, r);
    let num = binom(p.input_low.count, l)
        * binom(p.input_high.count, k - l)
        * binom(p.output_low.count, r)
        * binom(p.output_high.count, k - r)
        * binom(b, a);
    if num.is_zero() {
        return Rational::zero();
    }
    ratio(num, binom(p.edges, a))
}

/// One summand `a(m, s, k, l, r)`.
pub fn term(m: u32, s: u32, idx: SumTermIndex, mode: Mode) -> Result<TermValue> {
    let p = Profile::main_sum(m, s)?;
    p.check_index(idx)?;
    Ok(match mode {
        Mode::Exact => TermValue::Exact(exact_term(&p, idx)),
        Mode::Interval => {
            let lnf = engine::LnFactorials::new(p.edges.max(0) as usize + 8 * p.k_max as usize);
            TermValue::Interval(lnf.term(&p, idx))
        }
    })
}

/// Probability that a uniform permutation maps the `6k - l` elements of
/// an input set into the `8k - r` elements of an output set.
///
/// Computed as `C(8k-r, 6k-l) / C(36m-s, 6k-l)` and checked against the
/// falling-factorial form `(8k-r)_(6k-l) / (36m-s)_(6k-l)`.
pub fn probability_factor(m: u32, s: u32, idx: SumTermIndex) -> Result<Rational> {
    let p = Profile::main_sum(m, s)?;
    p.check_index(idx)?;
    let (k, l, r) = (idx.k as i64, idx.l as i64, idx.r as i64);
    let a = p.input_elements(k, l);
    let b = p.output_elements(k, r);
    element_probability(a, b, p.edges).ok_or_else(|| {
        Error::Solver(format!(
            "probability factor forms disagree at m={m}, s={s}, {idx:?}"
        ))
    })
}

/// `C(b, a) / C(n, a)`, or `None` if it differs from the falling-factorial
/// ratio `b(b-1)...(b-a+1) / n(n-1)...(n-a+1)`. Requires `0 <= a <= n`.
pub(crate) fn element_probability(a: i64, b: i64, n: i64) -> Option<Rational> {
    debug_assert!(0 <= a && a <= n);
    let binomial_form = ratio(binom(b, a), binom(n, a));
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..a {
        num *= (b - i).max(0) as u64;
        den *= (n - i) as u64;
    }
    (binomial_form == ratio(num, den)).then_some(binomial_form)
}

/// Resource caps for a sum evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Budget {
    pub max_terms: Option<u64>,
    pub max_time: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumOptions {
    pub mode: Mode,
    /// Worker threads for the per-`k` fan-out; 1 runs inline.
    pub workers: usize,
    pub budget: Budget,
}

impl SumOptions {
    pub fn exact() -> Self {
        Self {
            mode: Mode::Exact,
            workers: 1,
            budget: Budget::default(),
        }
    }

    pub fn interval() -> Self {
        Self {
            mode: Mode::Interval,
            ..Self::exact()
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }
}
