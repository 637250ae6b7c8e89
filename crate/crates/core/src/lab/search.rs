use num_traits::ToPrimitive;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{build_graph, verify_concentrator, Permutation, DEFAULT_SUBSET_BUDGET};
use crate::bound::{union_bound, SumOptions, SumTotal};
use crate::combinatorics::Rational;
use crate::error::{Error, Result};

/// ChaCha8 keyed by the 64-bit search seed, on stream `trial`, so every
/// trial is reproducible on its own.
pub struct TrialRng(ChaCha8Rng);

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `0..n` by widening multiply with rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = self.next_u64() as u128 * n as u128;
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

/// Fisher-Yates shuffle of `0..n`.
pub fn sample_permutation(n: usize, rng: &mut TrialRng) -> Permutation {
    let mut v: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        v.swap(i, j);
    }
    Permutation::new(v).expect("a shuffle is a permutation")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub q: Option<u32>,
    pub workers: usize,
    pub subset_budget: u64,
    pub max_m: u32,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            q: None,
            workers: 1,
            subset_budget: DEFAULT_SUBSET_BUDGET,
            max_m: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub m: u32,
    pub s: u32,
    pub q: u32,
    pub seed: u64,
    pub trials: u64,
    pub good_count: u64,
    /// Smallest trial index whose graph passed verification.
    pub first_good_trial: Option<u64>,
    pub first_good_permutation: Option<Permutation>,
    pub empirical_bad_rate: f64,
    /// Standard error of the bad rate.
    pub sigma: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub ci_half_width: f64,
    /// Exact union bound over `k <= 3m`; absent when `q > 3m`.
    pub union_bound: Option<Rational>,
}

impl SearchReport {
    pub fn union_bound_f64(&self) -> Option<f64> {
        self.union_bound.as_ref().and_then(|u| u.to_f64())
    }

    /// `bad rate <= union bound + 3σ`.
    pub fn consistent_with_bound(&self) -> Option<bool> {
        self.union_bound_f64()
            .map(|u| self.empirical_bad_rate <= u + 3.0 * self.sigma)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "s": self.s,
            "q": self.q,
            "seed": self.seed,
            "trials": self.trials,
            "good_count": self.good_count,
            "first_good_trial": self.first_good_trial,
            "first_good_permutation": self.first_good_permutation.as_ref().map(|p| p.mapping()),
            "empirical_bad_rate": self.empirical_bad_rate,
            "sigma": self.sigma,
            "ci_half_width": self.ci_half_width,
            "union_bound": self.union_bound.as_ref().map(|u| SumTotal::Exact(u.clone()).to_json()),
            "consistent_with_bound": self.consistent_with_bound(),
        })
    }
}

/// Samples `trials` uniform permutations, builds `G(π)` for each and
/// verifies it exhaustively with `q = 3m` unless overridden.
pub fn random_search(
    m: u32,
    s: u32,
    trials: u64,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    if m > opts.max_m {
        return Err(Error::domain(format!(
            "m = {m} above the exhaustive-verification cap {}",
            opts.max_m
        )));
    }
    let q = opts.q.unwrap_or(3 * m);
    let n = (36 * m)
        .checked_sub(s)
        .filter(|_| s <= 6 * m)
        .ok_or_else(|| Error::domain(format!("s = {s} outside [0, 6m]")))? as usize;
    // Fail fast on q and the budget before sampling.
    verify_concentrator(
        &build_graph(m, s, &Permutation::identity(n))?,
        q,
        opts.subset_budget,
    )?;

    let trial = |t: u64| -> Result<(u64, bool)> {
        let perm = sample_permutation(n, &mut TrialRng::new(seed, t));
        let g = build_graph(m, s, &perm)?;
        Ok((
            t,
            verify_concentrator(&g, q, opts.subset_budget)?.is_concentrator,
        ))
    };
    let outcomes: Vec<(u64, bool)> = if opts.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(trial)
                .collect::<Result<_>>()
        })?
    } else {
        (0..trials).map(trial).collect::<Result<_>>()?
    };
    let good_count = outcomes.iter().filter(|o| o.1).count() as u64;
    let first_good_trial = outcomes.iter().filter(|o| o.1).map(|o| o.0).min();
    let first_good_permutation =
        first_good_trial.map(|t| sample_permutation(n, &mut TrialRng::new(seed, t)));
    let p = if trials == 0 {
        0.0
    } else {
        (trials - good_count) as f64 / trials as f64
    };
    let sigma = if trials == 0 {
        0.0
    } else {
        (p * (1.0 - p) / trials as f64).sqrt()
    };
    let union_bound = if q <= 3 * m {
        match union_bound(m, s, &SumOptions::exact())?.total {
            SumTotal::Exact(u) => Some(u),
            SumTotal::Interval(_) => None,
        }
    } else {
        None
    };
    Ok(SearchReport {
        m,
        s,
        q,
        seed,
        trials,
        good_count,
        first_good_trial,
        first_good_permutation,
        empirical_bad_rate: p,
        sigma,
        ci_half_width: 1.96 * sigma,
        union_bound,
    })
}
