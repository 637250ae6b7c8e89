use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::report::{SumReport, SumTotal};
use super::{Mode, Profile, SumOptions, SumTermIndex};
use crate::combinatorics::{binom, Rational};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// Outward-rounded `ln n!` table.
pub(crate) struct LnFactorials {
    table: Vec<Interval>,
}

impl LnFactorials {
    pub(crate) fn new(n_max: usize) -> Self {
        let mut table = Vec::with_capacity(n_max + 1);
        let mut acc = Interval::zero();
        table.push(acc);
        for i in 1..=n_max {
            acc = acc + Interval::point(i as f64).ln().expect("i >= 1");
            table.push(acc);
        }
        Self { table }
    }

    /// `ln C(n, k)`, or `None` when the coefficient vanishes.
    pub(crate) fn ln_binom(&self, n: i64, k: i64) -> Option<Interval> {
        if n < 0 || k < 0 || k > n {
            return None;
        }
        let (n, k) = (n as usize, k as usize);
        Some(self.table[n] - self.table[k] - self.table[n - k])
    }

    pub(crate) fn term(&self, p: &Profile, idx: SumTermIndex) -> Interval {
        let (k, l, r) = (idx.k as i64, idx.l as i64, idx.r as i64);
        let a = p.input_elements(k, l);
        let b = p.output_elements(k, r);
        let parts = [
            self.ln_binom(p.input_low.count, l),
            self.ln_binom(p.input_high.count, k - l),
            self.ln_binom(p.output_low.count, r),
            self.ln_binom(p.output_high.count, k - r),
            self.ln_binom(b, a),
        ];
        let mut acc = Interval::zero();
        for part in parts {
            match part {
                Some(v) => acc = acc + v,
                None => return Interval::zero(),
            }
        }
        let den = self.ln_binom(p.edges, a).expect("6k - l <= 36m - s");
        (acc - den).exp()
    }
}

/// Per-`k` contribution. Exact numerators share the denominator `N!`.
#[derive(Debug, Clone)]
pub(crate) enum KValue {
    Exact(BigUint),
    Interval(Interval),
}

pub(crate) struct KPartial {
    pub(crate) k: u32,
    pub(crate) value: KValue,
    pub(crate) terms: u64,
    pub(crate) max: Option<(SumTermIndex, KValue)>,
}

fn class_row(count: i64, len: usize) -> Vec<BigUint> {
    (0..len as i64).map(|j| binom(count, j)).collect()
}

/// Quantities shared by every `k` of an exact evaluation.
struct ExactContext {
    /// `W_j = j! (N - j)!`, so that `1 / C(N, j) = W_j / N!`.
    weights: Vec<BigUint>,
    in_low: Vec<BigUint>,
    in_high: Vec<BigUint>,
    out_low: Vec<BigUint>,
    out_high: Vec<BigUint>,
}

impl ExactContext {
    fn new(p: &Profile) -> Self {
        let n = p.edges as u64;
        let j_max = p.input_elements(p.k_max as i64, 0).max(0) as u64;
        let mut weights = Vec::with_capacity(j_max as usize + 1);
        let mut w = Self::factorial(n);
        for j in 0..=j_max.min(n) {
            weights.push(w.clone());
            if j < n {
                w *= j + 1;
                w /= n - j;
            }
        }
        let len = p.k_max as usize + 1;
        Self {
            weights,
            in_low: class_row(p.input_low.count, len),
            in_high: class_row(p.input_high.count, len),
            out_low: class_row(p.output_low.count, len),
            out_high: class_row(p.output_high.count, len),
        }
    }
}

fn exact_k(p: &Profile, ctx: &ExactContext, k: i64) -> KPartial {
    let empty = KPartial {
        k: k as u32,
        value: KValue::Exact(BigUint::zero()),
        terms: 0,
        max: None,
    };
    let (Some((l_lo, l_hi)), Some((r_lo, r_hi))) = (p.l_range(k), p.r_range(k)) else {
        return empty;
    };
    let j_lo = p.input_elements(k, l_hi);
    let j_hi = p.input_elements(k, l_lo);
    let width = (j_hi - j_lo + 1) as usize;
    let mut inner = vec![BigUint::zero(); width];
    let mut best: Vec<Option<(BigUint, i64)>> = vec![None; width];

    let n_first = p.output_elements(k, r_lo);
    let mut col = binom(n_first, j_lo);
    for r in r_lo..=r_hi {
        let n = p.output_elements(k, r);
        let b_r = &ctx.out_low[r as usize] * &ctx.out_high[(k - r) as usize];
        let mut cur = col.clone();
        for j in j_lo..=j_hi {
            if cur.is_zero() {
                break;
            }
            let prod = &b_r * &cur;
            let slot = (j - j_lo) as usize;
            if best[slot].as_ref().is_none_or(|(v, _)| &prod > v) {
                best[slot] = Some((prod.clone(), r));
            }
            inner[slot] += prod;
            if j < j_hi {
                cur *= (n - j) as u64;
                cur /= (j + 1) as u64;
            }
        }
        if r < r_hi && !col.is_zero() {
            // C(n - 1, j_lo) = C(n, j_lo) (n - j_lo) / n
            col *= (n - j_lo).max(0) as u64;
            col /= n as u64;
        }
    }

    let mut total = BigUint::zero();
    let mut max: Option<(SumTermIndex, BigUint)> = None;
    for (slot, acc) in inner.iter().enumerate() {
        if acc.is_zero() {
            continue;
        }
        let j = j_lo + slot as i64;
        let l = p.input_high.degree * k - j;
        let a_l = &ctx.in_low[l as usize] * &ctx.in_high[(k - l) as usize];
        let scale = &a_l * &ctx.weights[j as usize];
        total += &scale * acc;
        if let Some((v, r)) = &best[slot] {
            let cand = &scale * v;
            if max.as_ref().is_none_or(|(_, m)| &cand > m) {
                max = Some((SumTermIndex::new(k as u32, l as u32, *r as u32), cand));
            }
        }
    }
    KPartial {
        k: k as u32,
        value: KValue::Exact(total),
        terms: p.planned_terms(k),
        max: max.map(|(i, v)| (i, KValue::Exact(v))),
    }
}

fn interval_k(p: &Profile, lnf: &LnFactorials, k: i64) -> KPartial {
    let empty = KPartial {
        k: k as u32,
        value: KValue::Interval(Interval::zero()),
        terms: 0,
        max: None,
    };
    let (Some((l_lo, l_hi)), Some((r_lo, r_hi))) = (p.l_range(k), p.r_range(k)) else {
        return empty;
    };
    let ln_a: Vec<(i64, i64, Interval)> = (l_lo..=l_hi)
        .filter_map(|l| {
            let a = p.input_elements(k, l);
            let v = lnf.ln_binom(p.input_low.count, l)?
                + lnf.ln_binom(p.input_high.count, k - l)?
                - lnf.ln_binom(p.edges, a)?;
            Some((l, a, v))
        })
        .collect();
    let mut total = Interval::zero();
    let mut max: Option<(SumTermIndex, Interval)> = None;
    for r in r_lo..=r_hi {
        let Some(ln_b) = lnf
            .ln_binom(p.output_low.count, r)
            .zip(lnf.ln_binom(p.output_high.count, k - r))
            .map(|(x, y)| x + y)
        else {
            continue;
        };
        let n = p.output_elements(k, r);
        for &(l, a, ln_al) in &ln_a {
            let Some(ln_c) = lnf.ln_binom(n, a) else {
                continue;
            };
            let t = (ln_al + ln_b + ln_c).exp();
            total = total + t;
            if max.as_ref().is_none_or(|(_, m)| t.hi() > m.hi()) {
                max = Some((SumTermIndex::new(k as u32, l as u32, r as u32), t));
            }
        }
    }
    KPartial {
        k: k as u32,
        value: KValue::Interval(total),
        terms: p.planned_terms(k),
        max: max.map(|(i, v)| (i, KValue::Interval(v))),
    }
}

/// Evaluates the selected `k` values of a profile, respecting the budget.
/// Returns the partials that were computed, in increasing `k`, and whether
/// every requested `k` was evaluated.
pub(crate) fn evaluate_ks(
    p: &Profile,
    ks: &[u32],
    opts: &SumOptions,
    started: Instant,
) -> Result<(Vec<KPartial>, bool)> {
    if p.edges < p.input_elements(p.k_max as i64, 0) {
        return Err(Error::domain(
            "profile has fewer elements than an input set",
        ));
    }
    let mut admitted: Vec<u32> = Vec::with_capacity(ks.len());
    let mut planned = 0u64;
    for &k in ks {
        planned += p.planned_terms(k as i64);
        if opts.budget.max_terms.is_some_and(|cap| planned > cap) {
            break;
        }
        admitted.push(k);
    }
    let mut complete = admitted.len() == ks.len();

    let timed_out = AtomicBool::new(false);
    let deadline = opts.budget.max_time;
    let over_time = || {
        deadline.is_some_and(|d| started.elapsed() > d) && {
            timed_out.store(true, Ordering::Relaxed);
            true
        }
    };

    let partials: Vec<Option<KPartial>> = match opts.mode {
        Mode::Exact => {
            let ctx = ExactContext::new(p);
            run(opts.workers, &admitted, |k| {
                (!over_time()).then(|| exact_k(p, &ctx, k as i64))
            })?
        }
        Mode::Interval => {
            let lnf = LnFactorials::new(p.edges as usize + 8 * p.k_max as usize);
            run(opts.workers, &admitted, |k| {
                (!over_time()).then(|| interval_k(p, &lnf, k as i64))
            })?
        }
    };
    if timed_out.load(Ordering::Relaxed) {
        complete = false;
    }
    Ok((partials.into_iter().flatten().collect(), complete))
}

fn run<F>(workers: usize, ks: &[u32], f: F) -> Result<Vec<Option<KPartial>>>
where
    F: Fn(u32) -> Option<KPartial> + Sync,
{
    if workers <= 1 {
        return Ok(ks.iter().map(|&k| f(k)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    // Heavy ks come last; reverse so large tasks start first.
    let mut out: Vec<Option<KPartial>> =
        pool.install(|| ks.par_iter().rev().map(|&k| f(k)).collect());
    out.reverse();
    Ok(out)
}

pub(crate) fn assemble(
    p: &Profile,
    mode: Mode,
    partials: Vec<KPartial>,
    complete: bool,
    wall_time: Duration,
) -> SumReport {
    let term_count = partials.iter().map(|kp| kp.terms).sum();
    match mode {
        Mode::Exact => {
            let den = ExactContext::factorial(p.edges as u64);
            let mut num = BigUint::zero();
            let mut per_k = Vec::with_capacity(partials.len());
            let mut max: Option<(SumTermIndex, BigUint)> = None;
            for kp in partials {
                let KValue::Exact(v) = kp.value else {
                    unreachable!("exact partials")
                };
                num += &v;
                per_k.push((
                    kp.k,
                    SumTotal::Exact(Rational::new(v.into(), den.clone().into())),
                ));
                if let Some((idx, KValue::Exact(t))) = kp.max {
                    if max.as_ref().is_none_or(|(_, m)| &t > m) {
                        max = Some((idx, t));
                    }
                }
            }
            SumReport {
                m: p.m,
                s: p.s,
                mode,
                total: SumTotal::Exact(Rational::new(num.into(), den.clone().into())),
                per_k,
                max_term: max
                    .map(|(i, t)| (i, SumTotal::Exact(Rational::new(t.into(), den.into())))),
                term_count,
                wall_time,
                complete,
            }
        }
        Mode::Interval => {
            let mut total = Interval::zero();
            let mut per_k = Vec::with_capacity(partials.len());
            let mut max: Option<(SumTermIndex, Interval)> = None;
            for kp in partials {
                let KValue::Interval(v) = kp.value else {
                    unreachable!("interval partials")
                };
                total = total + v;
                per_k.push((kp.k, SumTotal::Interval(v)));
                if let Some((idx, KValue::Interval(t))) = kp.max {
                    if max.as_ref().is_none_or(|(_, m)| t.hi() > m.hi()) {
                        max = Some((idx, t));
                    }
                }
            }
            SumReport {
                m: p.m,
                s: p.s,
                mode,
                total: SumTotal::Interval(total),
                per_k,
                max_term: max.map(|(i, t)| (i, SumTotal::Interval(t))),
                term_count,
                wall_time,
                complete,
            }
        }
    }
}

impl ExactContext {
    fn factorial(n: u64) -> BigUint {
        (2..=n).fold(BigUint::one(), |acc, i| acc * i)
    }
}

pub(crate) fn evaluate_profile(p: &Profile, opts: &SumOptions) -> Result<SumReport> {
    let started = Instant::now();
    let ks: Vec<u32> = (1..=p.k_max).collect();
    let (partials, complete) = evaluate_ks(p, &ks, opts, started)?;
    Ok(assemble(
        p,
        opts.mode,
        partials,
        complete,
        started.elapsed(),
    ))
}

/// Full triple sum for `(m, s)`.
pub fn lhs_sum(m: u32, s: u32, opts: &SumOptions) -> Result<SumReport> {
    evaluate_profile(&Profile::main_sum(m, s)?, opts)
}

/// Union bound for the graphs actually built for `(m, s)`; equal to
/// [`lhs_sum`] when `4m <= s <= 6m`.
pub fn union_bound(m: u32, s: u32, opts: &SumOptions) -> Result<SumReport> {
    evaluate_profile(&Profile::graph(m, s)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::Budget;
    use crate::interval::Verdict;
    use num_traits::ToPrimitive;

    /// Independent oracle: a plain triple loop over every index, one
    /// reduced rational per term.
    fn naive(p: &Profile) -> Rational {
        let mut acc = Rational::zero();
        for k in 1..=p.k_max as i64 {
            for l in 0..=k {
                for r in 0..=k {
                    let num = binom(p.input_low.count, l)
                        * binom(p.input_high.count, k - l)
                        * binom(p.output_low.count, r)
                        * binom(p.output_high.count, k - r)
                        * binom(p.output_elements(k, r), p.input_elements(k, l));
                    let den = binom(p.edges, p.input_elements(k, l));
                    acc += Rational::new(num.into(), den.into());
                }
            }
        }
        acc
    }

    fn exact_total(r: &SumReport) -> Rational {
        match &r.total {
            SumTotal::Exact(q) => q.clone(),
            SumTotal::Interval(_) => panic!("expected exact"),
        }
    }

    #[test]
    fn matches_naive_oracle() {
        for m in 1..=3 {
            for s in 0..=6 * m {
                for profile in [
                    Profile::main_sum(m, s).unwrap(),
                    Profile::graph(m, s).unwrap(),
                ] {
                    let rep = evaluate_profile(&profile, &SumOptions::exact()).unwrap();
                    assert_eq!(exact_total(&rep), naive(&profile), "m={m} s={s}");
                }
            }
        }
    }

    #[test]
    fn m1_s6_is_below_one() {
        let rep = lhs_sum(1, 6, &SumOptions::exact()).unwrap();
        let total = exact_total(&rep);
        assert!(total > Rational::zero() && total < Rational::one());
        assert_eq!(rep.verdict(), Verdict::Certified);
        assert!((total.to_f64().unwrap() - 0.187_393_482_745_806_6).abs() < 1e-15);
        let per_k: Rational = rep
            .per_k
            .iter()
            .map(|(_, v)| match v {
                SumTotal::Exact(q) => q.clone(),
                _ => unreachable!(),
            })
            .sum();
        assert_eq!(per_k, total);
        let (_, max) = rep.max_term.clone().unwrap();
        assert!(max.upper_f64() <= total.to_f64().unwrap());
    }

    #[test]
    fn interval_encloses_exact() {
        for m in 1..=8 {
            for s in [4 * m, 5 * m + 1, 6 * m] {
                let e = exact_total(&lhs_sum(m, s, &SumOptions::exact()).unwrap());
                let i = lhs_sum(m, s, &SumOptions::interval()).unwrap();
                let SumTotal::Interval(iv) = i.total else {
                    panic!()
                };
                assert!(iv.contains_rational(&e), "m={m} s={s} {iv}");
                assert!(iv.width() < 1e-9);
            }
        }
    }

    #[test]
    fn independent_of_worker_count() {
        let a = lhs_sum(6, 35, &SumOptions::exact()).unwrap();
        let b = lhs_sum(6, 35, &SumOptions::exact().with_workers(3)).unwrap();
        assert_eq!(exact_total(&a), exact_total(&b));
        assert_eq!(a.max_term.map(|t| t.0), b.max_term.map(|t| t.0));
    }

    #[test]
    fn max_term_is_the_largest_summand() {
        let p = Profile::main_sum(2, 11).unwrap();
        let rep = evaluate_profile(&p, &SumOptions::exact()).unwrap();
        let (idx, SumTotal::Exact(v)) = rep.max_term.clone().unwrap() else {
            panic!()
        };
        let mut best = Rational::zero();
        for k in 1..=6 {
            for l in 0..=k {
                for r in 0..=k {
                    let t = super::super::exact_term(&p, SumTermIndex::new(k, l, r));
                    assert!(t >= Rational::zero());
                    if t > best {
                        best = t;
                    }
                }
            }
        }
        assert_eq!(v, best);
        assert_eq!(super::super::exact_term(&p, idx), best);
    }

    #[test]
    fn term_budget_yields_incomplete_report() {
        let opts = SumOptions::exact().with_budget(Budget {
            max_terms: Some(10),
            max_time: None,
        });
        let rep = lhs_sum(3, 16, &opts).unwrap();
        assert!(!rep.complete);
        assert!(rep.term_count <= 10);
        assert_eq!(rep.verdict(), Verdict::Undecided);
        let opts = SumOptions::interval().with_budget(Budget {
            max_terms: None,
            max_time: Some(Duration::ZERO),
        });
        let rep = lhs_sum(3, 16, &opts).unwrap();
        assert!(!rep.complete);
    }

    #[test]
    fn pippenger_case_is_small() {
        // Literal sum vanishes below s = 4m; the graph profile does not.
        assert_eq!(
            exact_total(&lhs_sum(2, 0, &SumOptions::exact()).unwrap()),
            Rational::zero()
        );
        for m in 1..=4 {
            let rep = union_bound(m, 0, &SumOptions::exact()).unwrap();
            let v = exact_total(&rep);
            assert!(v > Rational::zero() && v < Rational::one(), "m={m}");
        }
    }
}
