use std::collections::BTreeMap;

use serde::Serialize;

use super::{BipartiteGraph, DEFAULT_SUBSET_BUDGET};
use crate::bound::Profile;
use crate::combinatorics::binom;
use crate::error::{Error, Result};

/// An input set `A` whose neighbourhood `B = N(A)` is smaller than `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadEvent {
    pub k: u32,
    /// Low-degree inputs in `A`.
    pub l: u32,
    /// Low-degree outputs in `B`.
    pub r: u32,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

struct Classes {
    masks: Vec<u64>,
    low_inputs: u64,
    low_outputs: u64,
}

fn classes(g: &BipartiteGraph) -> Result<Classes> {
    let s =
        g.s.ok_or_else(|| Error::invalid("census needs the s the graph was built for"))?;
    let p = Profile::graph(g.m, s)?;
    let masks = g.neighbour_masks()?;
    let mut low_inputs = 0u64;
    for (i, d) in g.input_degrees().into_iter().enumerate() {
        if d as i64 == p.input_low.degree {
            low_inputs |= 1 << i;
        }
    }
    let mut low_outputs = 0u64;
    for (j, d) in g.output_degrees().into_iter().enumerate() {
        if d as i64 == p.output_low.degree {
            low_outputs |= 1 << j;
        }
    }
    Ok(Classes {
        masks,
        low_inputs,
        low_outputs,
    })
}

fn check_budget(g: &BipartiteGraph, budget: u64, max_m: u32) -> Result<()> {
    if g.m > max_m {
        return Err(Error::domain(format!("census is limited to m <= {max_m}")));
    }
    if (1u64 << g.num_inputs()) > budget.saturating_add(1) {
        return Err(Error::Budget(format!(
            "{} input subsets exceed the budget {budget}",
            (1u64 << g.num_inputs()) - 1
        )));
    }
    Ok(())
}

fn set_bits(mask: u64) -> Vec<u32> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Every input set with `|A| <= 3m` violating Hall's condition, ordered by
/// size and then lexicographically.
pub fn bad_event_census(g: &BipartiteGraph, budget: Option<u64>) -> Result<Vec<BadEvent>> {
    check_budget(g, budget.unwrap_or(DEFAULT_SUBSET_BUDGET), 2)?;
    let c = classes(g)?;
    let n = g.num_inputs();
    let q = 3 * g.m;
    let mut out = Vec::new();
    for a in 1u64..(1 << n) {
        let k = a.count_ones();
        if k > q {
            continue;
        }
        let nb = union(&c.masks, a);
        if nb.count_ones() < k {
            out.push(BadEvent {
                k,
                l: (a & c.low_inputs).count_ones(),
                r: (nb & c.low_outputs).count_ones(),
                a: set_bits(a),
                b: set_bits(nb),
            });
        }
    }
    out.sort_by(|x, y| (x.k, &x.a).cmp(&(y.k, &y.a)));
    Ok(out)
}

fn union(masks: &[u64], set: u64) -> u64 {
    let mut acc = 0;
    let mut rest = set;
    while rest != 0 {
        let i = rest.trailing_zeros();
        acc |= masks[i as usize];
        rest &= rest - 1;
    }
    acc
}

/// Number of pairs `(A, B)` with `|A| = |B| = k <= 3m` and `N(A) ⊆ B`,
/// by shape `(k, l, r)`. Averaged over `π` this is the summand of the
/// union bound for the graph's degree profile.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PairCounts {
    pub counts: BTreeMap<(u32, u32, u32), u128>,
}

impl PairCounts {
    pub fn total(&self) -> u128 {
        self.counts.values().sum()
    }

    pub fn per_k(&self, k: u32) -> u128 {
        self.counts
            .iter()
            .filter(|(key, _)| key.0 == k)
            .map(|(_, v)| v)
            .sum()
    }
}

pub fn pair_counts(g: &BipartiteGraph, budget: Option<u64>) -> Result<PairCounts> {
    check_budget(g, budget.unwrap_or(DEFAULT_SUBSET_BUDGET), 2)?;
    let c = classes(g)?;
    let n = g.num_inputs();
    let outputs = g.num_outputs();
    let total_low = c.low_outputs.count_ones() as i64;
    let total_high = outputs as i64 - total_low;
    let mut out = PairCounts::default();
    for a in 1u64..(1 << n) {
        let k = a.count_ones();
        if k > 3 * g.m {
            continue;
        }
        let nb = union(&c.masks, a);
        let j = nb.count_ones();
        if j > k {
            continue;
        }
        let l = (a & c.low_inputs).count_ones();
        let r0 = (nb & c.low_outputs).count_ones() as i64;
        let (free_low, free_high) = (total_low - r0, total_high - (j as i64 - r0));
        let extra = (k - j) as i64;
        for add_low in 0..=extra {
            let ways = binom(free_low, add_low) * binom(free_high, extra - add_low);
            let ways: u128 = ways.try_into().unwrap_or(u128::MAX);
            if ways > 0 {
                *out.counts.entry((k, l, (r0 + add_low) as u32)).or_default() += ways;
            }
        }
    }
    Ok(out)
}
