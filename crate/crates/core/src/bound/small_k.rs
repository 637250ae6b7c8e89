//! The small-`k` part of the bound and the identities that collapse it.
//!
//! Summing the input factors over `l` and the output factors over `r`
//! (Vandermonde) and dominating the probability factor by
//! `C(8k, 5k) / C(30m, 5k)` bounds the first `⌈2.6m⌉` layers of the sum by
//! a single sum over `k`.

use std::time::Instant;

use num_traits::Zero;

use super::engine::{assemble, evaluate_ks};
use super::report::SumTotal;
use super::{element_probability, Profile, SumOptions, SumTermIndex};
use crate::combinatorics::{binom, Rational};
use crate::error::{Error, Result};

/// `⌈2.6m⌉`.
pub fn small_k_cutoff(m: u32) -> u32 {
    (13 * m).div_ceil(5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallKBound {
    pub cutoff: u32,
    pub collapsed_sum: Rational,
    pub original_small_k_sum: Rational,
}

/// `Σ_{k=1}^{⌈2.6m⌉} C(6m,k) C(4m,k) C(8k,5k) / C(30m,5k)` together with
/// the corresponding partial sum of the bound, checking `original <= collapsed`.
pub fn small_k_bound(m: u32, s: u32) -> Result<SmallKBound> {
    if s == 0 {
        return Err(Error::domain("small_k_bound requires 1 <= s <= 6m"));
    }
    let profile = Profile::main_sum(m, s)?;
    let q = small_k_cutoff(m);
    let mi = m as i64;
    let mut collapsed = Rational::zero();
    for k in 1..=q as i64 {
        let num = binom(6 * mi, k) * binom(4 * mi, k) * binom(8 * k, 5 * k);
        collapsed += Rational::new(num.into(), binom(30 * mi, 5 * k).into());
    }
    let ks: Vec<u32> = (1..=q).collect();
    let started = Instant::now();
    let (partials, _) = evaluate_ks(&profile, &ks, &SumOptions::exact(), started)?;
    let report = assemble(
        &profile,
        super::Mode::Exact,
        partials,
        true,
        started.elapsed(),
    );
    let SumTotal::Exact(original) = report.total else {
        unreachable!("exact mode")
    };
    if original > collapsed {
        return Err(Error::Solver(format!(
            "small-k partial sum exceeds its collapsed bound at m={m}, s={s}"
        )));
    }
    Ok(SmallKBound {
        cutoff: q,
        collapsed_sum: collapsed,
        original_small_k_sum: original,
    })
}

/// Counts from an exhaustive identity check at one `(m, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IdentityCheck {
    pub vandermonde_checked: u64,
    pub factor_forms_checked: u64,
    pub domination_checked: u64,
}

/// Verifies exactly, for every `k` and every index:
/// `Σ_l C(s,l) C(6m-s,k-l) = C(6m,k)`, `Σ_r C(s-4m,r) C(8m-s,k-r) = C(4m,k)`,
/// agreement of the two probability-factor forms, and the domination
/// `C(8k-r,6k-l)/C(36m-s,6k-l) <= C(8k,5k)/C(30m,5k)`.
pub fn check_identities(m: u32, s: u32) -> Result<IdentityCheck> {
    let p = Profile::main_sum(m, s)?;
    let (mi, si) = (m as i64, s as i64);
    let mut out = IdentityCheck::default();
    for k in 1..=p.k_max as i64 {
        let left: num_bigint::BigUint = (0..=k)
            .map(|l| binom(si, l) * binom(6 * mi - si, k - l))
            .sum();
        if left != binom(6 * mi, k) {
            return Err(Error::Solver(format!(
                "input Vandermonde fails at m={m} s={s} k={k}"
            )));
        }
        let right: num_bigint::BigUint = (0..=k)
            .map(|r| binom(si - 4 * mi, r) * binom(8 * mi - si, k - r))
            .sum();
        if si >= 4 * mi && right != binom(4 * mi, k) {
            return Err(Error::Solver(format!(
                "output Vandermonde fails at m={m} s={s} k={k}"
            )));
        }
        out.vandermonde_checked += 2;
        let cap = Rational::new(binom(8 * k, 5 * k).into(), binom(30 * mi, 5 * k).into());
        for l in 0..=k {
            for r in 0..=k {
                let idx = SumTermIndex::new(k as u32, l as u32, r as u32);
                let a = p.input_elements(k, l);
                let b = p.output_elements(k, r);
                let factor = element_probability(a, b, p.edges).ok_or_else(|| {
                    Error::Solver(format!("probability factor forms disagree at {idx:?}"))
                })?;
                out.factor_forms_checked += 1;
                if factor > cap {
                    return Err(Error::Solver(format!(
                        "domination fails at m={m} s={s} {idx:?}"
                    )));
                }
                out.domination_checked += 1;
            }
        }
    }
    Ok(out)
}
