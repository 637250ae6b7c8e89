//! The end-to-end certification checks, one per acceptance criterion.

use std::time::{Duration, Instant};

use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bound::{check_identities, lhs_sum, s_max, Mode, ScanOptions, SumOptions, SumTotal};
use crate::combinatorics::{stirling_sandwich_row, Rational};
use crate::constants::constants;
use crate::error::Result;
use crate::lab::{random_search, SearchOptions, TrialRng};
use crate::parse::parse_rational;
use crate::phi::{
    analytic_constants, c_star, certify_critical_value, critical_point, dphi_dk_decomposition,
    dphi_dl, dphi_dr, phi_substituted, small_k_limit_constant, SubstitutedPoint,
};
use crate::precise::Precision;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    pub limit_s: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_s
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub workers: usize,
    pub precision: Precision,
    /// Include the `m <= 150` / `m = 151` range.
    pub stretch: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            precision: Precision::default(),
            stretch: true,
        }
    }
}

fn timed(
    id: &str,
    name: &str,
    limit: Option<Duration>,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let started = Instant::now();
    let outcome = f();
    let elapsed = started.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; exceeded {:.0}s limit", limit.as_secs_f64());
        }
    }
    CriterionResult {
        id: id.into(),
        name: name.into(),
        passed,
        detail,
        elapsed_s: elapsed.as_secs_f64(),
        limit_s: limit.map(|d| d.as_secs_f64()),
    }
}

fn q(s: &str) -> Rational {
    parse_rational(s).expect("literal rational")
}

pub fn smax_small_range(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "1",
        "s_max(m)/m >= 6 for m <= 30, exact",
        Some(Duration::from_secs(600)),
        || {
            let mut scan = ScanOptions::new(Mode::Exact);
            scan.workers = opts.workers;
            for m in 1..=30 {
                let rep = s_max(m, &scan)?;
                if rep.s_max() != Some(6 * m) {
                    return Ok((false, format!("m = {m}: s_max = {:?}", rep.s_max())));
                }
            }
            Ok((true, "s_max(m) = 6m for every m in 1..=30".into()))
        },
    )
}

pub fn smax_full_range(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "1+",
        "s_max(m)/m >= 6 for 31 <= m <= 150, < 6 at m = 151, interval",
        Some(Duration::from_secs(7200)),
        || {
            let mut scan = ScanOptions::new(Mode::Interval);
            scan.workers = opts.workers;
            for m in 31..=150 {
                let rep = s_max(m, &scan)?;
                if rep.s_max() != Some(6 * m) {
                    return Ok((false, format!("m = {m}: s_max = {:?}", rep.s_max())));
                }
            }
            let rep = s_max(151, &scan)?;
            match rep.s_max() {
                Some(s) if s < 906 => {
                    Ok((true, format!("m <= 150 reach 6m; s_max(151) = {s} < 906")))
                }
                other => Ok((false, format!("s_max(151) = {other:?}"))),
            }
        },
    )
}

pub fn spot_check(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "2",
        "lhs_sum(m, ceil(5.7m)) < 1 for m in {20, 30, 40}, exact",
        None,
        || {
            let mut parts = Vec::new();
            for m in [20u32, 30, 40] {
                let s = (57 * m).div_ceil(10);
                let rep = lhs_sum(m, s, &SumOptions::exact().with_workers(opts.workers))?;
                let SumTotal::Exact(v) = &rep.total else {
                    unreachable!("exact mode")
                };
                if !(rep.complete && v < &Rational::one()) {
                    return Ok((
                        false,
                        format!("m = {m}, s = {s}: sum = {}", rep.total.approx()),
                    ));
                }
                parts.push(format!("m={m}: {:.6e}", rep.total.approx()));
            }
            Ok((true, parts.join(", ")))
        },
    )
}

pub fn critical_point_check(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "3",
        "critical point at c = 5.7",
        Some(Duration::from_secs(1)),
        || {
            let p = critical_point(5.7)?;
            let cert = certify_critical_value(&q("5.7"), opts.precision)?;
            let ok = (p.quintic_root - 2.8959102).abs() < 1e-6
                && (p.r - 1.078108).abs() < 1e-6
                && cert.phi.1 < -0.004 + 2e-6
                && cert.negative;
            Ok((
                ok,
                format!(
                    "l* = {:.10}, r* = {:.10}, phi in [{:.12}, {:.12}]",
                    p.quintic_root, p.r, cert.phi.0, cert.phi.1
                ),
            ))
        },
    )
}

pub fn c_star_check(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "4",
        "c* in (5.724889, 5.72489)",
        Some(Duration::from_secs(10)),
        || {
            let rep = c_star(1e-7)?;
            let lo = certify_critical_value(&q("5.724889"), opts.precision)?;
            let hi = certify_critical_value(&q("5.72489"), opts.precision)?;
            let ok = rep.value > 5.724889 && rep.value < 5.72489 && lo.negative && hi.positive;
            Ok((
                ok,
                format!(
                    "c* = {:.10}; phi(5.724889) <= {:.3e}, phi(5.72489) >= {:.3e}",
                    rep.value, lo.phi.1, hi.phi.0
                ),
            ))
        },
    )
}

pub fn analytic_constants_check(opts: &CertifyOptions) -> CriterionResult {
    timed("5", "large-k constants with margin >= 1e-3", None, || {
        let checks = analytic_constants(opts.precision)?;
        let ok = checks.iter().all(|c| c.holds);
        let detail = checks
            .iter()
            .map(|c| format!("{}: margin {:.6}", c.expression, c.margin))
            .collect::<Vec<_>>()
            .join("; ");
        Ok((ok, detail))
    })
}

pub fn small_k_limit_check(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "6",
        "small-k limit constant < -0.07 with margin >= 1e-4",
        None,
        || {
            let c = small_k_limit_constant(opts.precision)?;
            Ok((
                c.holds,
                format!(
                    "value in [{:.8}, {:.8}], margin {:.6}",
                    c.lower, c.upper, c.margin
                ),
            ))
        },
    )
}

pub fn stirling_check(_: &CertifyOptions) -> CriterionResult {
    timed(
        "7",
        "Stirling sandwich for 1 <= n <= 1000",
        Some(Duration::from_secs(30)),
        || {
            let mut pairs = 0;
            for n in 1..=1000 {
                pairs += stirling_sandwich_row(n)?;
            }
            Ok((true, format!("{pairs} pairs")))
        },
    )
}

pub fn identities_check(_: &CertifyOptions) -> CriterionResult {
    timed(
        "8",
        "Vandermonde and probability-factor identities, m <= 4",
        None,
        || {
            let mut total = 0;
            for m in 1..=4 {
                for s in 4 * m..=6 * m {
                    let c = check_identities(m, s)?;
                    total += c.vandermonde_checked + c.factor_forms_checked + c.domination_checked;
                }
            }
            Ok((true, format!("{total} exact checks")))
        },
    )
}

pub fn search_check(opts: &CertifyOptions) -> CriterionResult {
    timed(
        "9",
        "seeded search at m = 1, s in {0, 6}",
        Some(Duration::from_secs(60)),
        || {
            let sopts = SearchOptions {
                workers: opts.workers,
                ..SearchOptions::default()
            };
            let mut parts = Vec::new();
            let mut ok = true;
            for s in [0u32, 6] {
                let rep = random_search(1, s, 1000, 42, &sopts)?;
                let consistent = rep.consistent_with_bound() == Some(true);
                ok &= rep.good_count > 0 && consistent;
                parts.push(format!(
                    "s={s}: {} good, bad rate {:.4} vs bound {:.4}",
                    rep.good_count,
                    rep.empirical_bad_rate,
                    rep.union_bound_f64().unwrap_or(f64::NAN)
                ));
            }
            Ok((ok, parts.join("; ")))
        },
    )
}

fn central(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    let h = 1e-6;
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

fn agrees(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= 1e-5 * analytic.abs().max(1.0)
}

pub fn gradient_check(_: &CertifyOptions) -> CriterionResult {
    timed(
        "10",
        "analytic derivatives vs central differences, 1000 points",
        None,
        || {
            let mut rng = TrialRng::new(0x5eed, 0);
            let mut u = || (rng.below(1 << 53) as f64 / (1u64 << 53) as f64) * 0.9 + 0.05;
            let mut worst = 0.0f64;
            for i in 0..1000 {
                let c = 5.2 + 0.75 * u();
                let l = (c - 3.0) + u() * (6.0 - c);
                let r = (c - 5.0) + u();
                let dl = dphi_dl(c, l, r)?;
                let dr = dphi_dr(c, l, r)?;
                let nl = central(
                    |t| crate::phi::phi(&crate::phi::PhiPoint { c, k: 3.0, l: t, r }),
                    l,
                )?;
                let nr = central(
                    |t| crate::phi::phi(&crate::phi::PhiPoint { c, k: 3.0, l, r: t }),
                    r,
                )?;
                let k = 2.6 + 0.4 * u();
                let p = SubstitutedPoint::new(c, k, u() * (6.0 - c), u())?;
                let d = dphi_dk_decomposition(&p)?;
                let nk = central(|t| phi_substituted(&SubstitutedPoint { k: t, ..p }), k)?;
                for (a, n) in [(dl, nl), (dr, nr), (d.total, nk)] {
                    worst = worst.max((a - n).abs() / a.abs().max(1.0));
                    if !agrees(a, n) {
                        return Ok((false, format!("point {i}: analytic {a} vs numeric {n}")));
                    }
                }
            }
            Ok((true, format!("worst relative deviation {worst:.2e}")))
        },
    )
}

pub fn constants_check(_: &CertifyOptions) -> CriterionResult {
    timed(
        "11",
        "K, K~, w2 at gamma = 5.05 and K at gamma = 6",
        None,
        || {
            let a = constants(&q("5.05"))?;
            let b = constants(&q("6"))?;
            let ok =
                a.k == q("38.8") && a.k_tilde == q("35.8") && a.w2 == q("72.6") && b.k == q("44.5");
            Ok((
                ok,
                format!(
                    "K = {}, K~ = {}, w2 = {}; K(6) = {}",
                    a.k, a.k_tilde, a.w2, b.k
                ),
            ))
        },
    )
}

/// Runs every check in order.
pub fn run_all(opts: &CertifyOptions) -> Vec<CriterionResult> {
    let mut out = vec![smax_small_range(opts)];
    if opts.stretch {
        out.push(smax_full_range(opts));
    }
    out.extend([
        spot_check(opts),
        critical_point_check(opts),
        c_star_check(opts),
        analytic_constants_check(opts),
        small_k_limit_check(opts),
        stirling_check(opts),
        identities_check(opts),
        search_check(opts),
        gradient_check(opts),
        constants_check(opts),
    ]);
    out
}

pub fn summary_json(results: &[CriterionResult], deterministic: bool) -> Value {
    let items: Vec<Value> = results
        .iter()
        .map(|r| {
            let mut v = json!({
                "id": r.id,
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
                "limit_s": r.limit_s,
            });
            if !deterministic {
                v["elapsed_s"] = json!(r.elapsed_s);
            }
            v
        })
        .collect();
    json!({
        "passed": results.iter().all(|r| r.passed),
        "criteria": items,
    })
}
