use std::fmt::Write as _;
use std::time::Duration;

use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use super::{Mode, SumTermIndex};
use crate::combinatorics::Rational;
use crate::interval::{Interval, Verdict};

/// A sum or partial sum in either backend.
#[derive(Debug, Clone, PartialEq)]
pub enum SumTotal {
    Exact(Rational),
    Interval(Interval),
}

impl SumTotal {
    /// Upper bound rounded to `f64`.
    pub fn upper_f64(&self) -> f64 {
        match self {
            SumTotal::Exact(q) => q.to_f64().unwrap_or(f64::INFINITY),
            SumTotal::Interval(i) => i.hi(),
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            SumTotal::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            SumTotal::Interval(i) => i.midpoint(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SumTotal::Exact(q) => json!({
                "num": q.numer().to_string(),
                "den": q.denom().to_string(),
                "approx": self.approx(),
            }),
            SumTotal::Interval(i) => json!({ "lo": i.lo(), "hi": i.hi() }),
        }
    }
}

/// Result of one evaluation of the bound.
#[derive(Debug, Clone)]
pub struct SumReport {
    pub m: u32,
    pub s: u32,
    pub mode: Mode,
    pub total: SumTotal,
    pub per_k: Vec<(u32, SumTotal)>,
    pub max_term: Option<(SumTermIndex, SumTotal)>,
    pub term_count: u64,
    pub wall_time: Duration,
    /// `false` when a budget cut the evaluation short; `total` is then a
    /// partial sum and hence a lower bound.
    pub complete: bool,
}

impl SumReport {
    /// Is the bound certified to be strictly below one?
    pub fn verdict(&self) -> Verdict {
        let v = match &self.total {
            SumTotal::Exact(q) => {
                if q < &Rational::one() {
                    Verdict::Certified
                } else {
                    Verdict::Refuted
                }
            }
            SumTotal::Interval(i) => i.compare_lt(1.0),
        };
        match (self.complete, v) {
            (true, v) => v,
            // Summands are nonnegative, so a partial sum already >= 1 refutes.
            (false, Verdict::Refuted) => Verdict::Refuted,
            (false, _) => Verdict::Undecided,
        }
    }

    /// Enclosure width (zero in exact mode).
    pub fn width(&self) -> f64 {
        match &self.total {
            SumTotal::Exact(_) => 0.0,
            SumTotal::Interval(i) => i.width(),
        }
    }

    pub fn to_json(&self, deterministic: bool) -> Value {
        let per_k: Vec<Value> = self
            .per_k
            .iter()
            .map(|(k, v)| {
                let mut o = v.to_json();
                o["k"] = json!(k);
                o
            })
            .collect();
        let max_term = self
            .max_term
            .as_ref()
            .map(|(idx, v)| json!({ "k": idx.k, "l": idx.l, "r": idx.r, "value": v.to_json() }));
        let mut out = json!({
            "m": self.m,
            "s": self.s,
            "mode": self.mode,
            "total": self.total.to_json(),
            "per_k": per_k,
            "max_term": max_term,
            "term_count": self.term_count,
            "complete": self.complete,
            "verdict": self.verdict(),
            "width": self.width(),
        });
        if !deterministic {
            out["wall_time_s"] = json!(self.wall_time.as_secs_f64());
        }
        out
    }

    /// Per-`k` partials as CSV.
    pub fn per_k_csv(&self) -> String {
        let mut out = String::from("k,approx,lo,hi,num,den\n");
        for (k, v) in &self.per_k {
            match v {
                SumTotal::Exact(q) => {
                    let a = v.approx();
                    let _ = writeln!(out, "{k},{a:e},{a:e},{a:e},{},{}", q.numer(), q.denom());
                }
                SumTotal::Interval(i) => {
                    let _ = writeln!(out, "{k},{:e},{:e},{:e},,", i.midpoint(), i.lo(), i.hi());
                }
            }
        }
        out
    }
}
