//! Search for `s(m)`, the largest `s` keeping the bound below one.
//!
//! The bound is not known to be monotone in `s`, so a descending scan
//! that stops at the first certified `s` is a heuristic; the full scan
//! evaluates every `s` in `[0, 6m]` and takes the true maximum.

use serde_json::{json, Value};

use super::engine::evaluate_profile;
use super::{Budget, Mode, Profile, SumOptions, SumReport};
use crate::error::Result;
use crate::interval::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Descending,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub mode: Mode,
    pub kind: ScanKind,
    pub workers: usize,
    pub budget: Budget,
    /// Re-evaluate exactly any `s` whose enclosure straddles one.
    pub escalate: bool,
}

impl ScanOptions {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            kind: ScanKind::Descending,
            workers: 1,
            budget: Budget::default(),
            escalate: true,
        }
    }

    pub fn full(mut self) -> Self {
        self.kind = ScanKind::Full;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmaxOutcome {
    /// Largest certified `s`.
    Found(u32),
    /// The scan met an `s` it could neither certify nor refute.
    Undecided { at: u32 },
}

#[derive(Debug, Clone)]
pub struct SmaxReport {
    pub m: u32,
    pub outcome: SmaxOutcome,
    /// Every evaluation performed, escalations included, in scan order.
    pub reports: Vec<SumReport>,
}

impl SmaxReport {
    pub fn s_max(&self) -> Option<u32> {
        match self.outcome {
            SmaxOutcome::Found(s) => Some(s),
            SmaxOutcome::Undecided { .. } => None,
        }
    }

    /// `s_max / m`, when decided.
    pub fn ratio(&self) -> Option<f64> {
        self.s_max().map(|s| s as f64 / self.m as f64)
    }

    pub fn to_json(&self, deterministic: bool) -> Value {
        let evaluations: Vec<Value> = self
            .reports
            .iter()
            .map(|r| {
                let mut o = json!({
                    "s": r.s,
                    "mode": r.mode,
                    "total": r.total.to_json(),
                    "verdict": r.verdict(),
                    "complete": r.complete,
                });
                if !deterministic {
                    o["wall_time_s"] = json!(r.wall_time.as_secs_f64());
                }
                o
            })
            .collect();
        let (s_max, undecided_at) = match self.outcome {
            SmaxOutcome::Found(s) => (Some(s), None),
            SmaxOutcome::Undecided { at } => (None, Some(at)),
        };
        json!({
            "m": self.m,
            "s_max": s_max,
            "ratio": self.ratio(),
            "undecided_at": undecided_at,
            "evaluations": evaluations,
        })
    }
}

fn decide(m: u32, s: u32, opts: &ScanOptions, log: &mut Vec<SumReport>) -> Result<Verdict> {
    let profile = Profile::main_sum(m, s)?;
    let sum_opts = SumOptions {
        mode: opts.mode,
        workers: opts.workers,
        budget: opts.budget,
    };
    let rep = evaluate_profile(&profile, &sum_opts)?;
    let mut verdict = rep.verdict();
    let straddles = verdict == Verdict::Undecided && rep.complete;
    log.push(rep);
    if straddles && opts.mode == Mode::Interval && opts.escalate {
        let exact = evaluate_profile(
            &profile,
            &SumOptions {
                mode: Mode::Exact,
                ..sum_opts
            },
        )?;
        verdict = exact.verdict();
        log.push(exact);
    }
    Ok(verdict)
}

/// Largest `s` in `[0, 6m]` with the bound certified below one.
pub fn s_max(m: u32, opts: &ScanOptions) -> Result<SmaxReport> {
    Profile::main_sum(m, 0)?;
    let mut reports = Vec::new();
    let outcome = match opts.kind {
        ScanKind::Descending => {
            let mut outcome = None;
            for s in (0..=6 * m).rev() {
                match decide(m, s, opts, &mut reports)? {
                    Verdict::Certified => {
                        outcome = Some(SmaxOutcome::Found(s));
                        break;
                    }
                    Verdict::Refuted => {}
                    Verdict::Undecided => {
                        outcome = Some(SmaxOutcome::Undecided { at: s });
                        break;
                    }
                }
            }
            // s = 0 makes every output binomial vanish, so the loop always ends.
            outcome.unwrap_or(SmaxOutcome::Found(0))
        }
        ScanKind::Full => {
            let mut best: Option<u32> = None;
            let mut undecided: Option<u32> = None;
            for s in 0..=6 * m {
                match decide(m, s, opts, &mut reports)? {
                    Verdict::Certified => best = Some(s),
                    Verdict::Refuted => {}
                    Verdict::Undecided => undecided = Some(s),
                }
            }
            match (best, undecided) {
                (_, Some(u)) if best.is_none_or(|b| u > b) => SmaxOutcome::Undecided { at: u },
                (Some(b), _) => SmaxOutcome::Found(b),
                (None, _) => SmaxOutcome::Found(0),
            }
        }
    };
    Ok(SmaxReport {
        m,
        outcome,
        reports,
    })
}
