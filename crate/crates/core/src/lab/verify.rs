use serde::Serialize;

use super::BipartiteGraph;
use crate::combinatorics::binom;
use crate::error::{Error, Result};

pub const DEFAULT_SUBSET_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationResult {
    pub is_concentrator: bool,
    /// A smallest input set `A` with `|N(A)| < |A|`.
    pub counterexample: Option<Vec<u32>>,
    pub neighbours: Option<Vec<u32>>,
    pub subsets_checked: u64,
}

fn bits(mask: u64) -> Vec<u32> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn check_q(g: &BipartiteGraph, q: u32) -> Result<()> {
    if q > g.num_inputs().min(g.num_outputs()) {
        return Err(Error::domain(format!(
            "q = {q} exceeds min(inputs, outputs) = {}",
            g.num_inputs().min(g.num_outputs())
        )));
    }
    Ok(())
}

/// Number of nonempty subsets of size at most `q` among `n`.
fn subsets_up_to(n: u32, q: u32) -> u64 {
    (1..=q as i64)
        .map(|k| binom(n as i64, k))
        .sum::<num_bigint::BigUint>()
        .try_into()
        .unwrap_or(u64::MAX)
}

/// Visits the `k`-subsets of `0..n` in lexicographic order with the union
/// of their masks; stops when `visit` returns `true`.
fn for_each_subset(masks: &[u64], k: usize, visit: &mut impl FnMut(&[usize], u64) -> bool) -> bool {
    fn rec(
        masks: &[u64],
        k: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        acc: u64,
        visit: &mut impl FnMut(&[usize], u64) -> bool,
    ) -> bool {
        if chosen.len() == k {
            return visit(chosen, acc);
        }
        let need = k - chosen.len();
        for i in start..=masks.len() - need {
            chosen.push(i);
            let stop = rec(masks, k, i + 1, chosen, acc | masks[i], visit);
            chosen.pop();
            if stop {
                return true;
            }
        }
        false
    }
    if k > masks.len() {
        return false;
    }
    rec(masks, k, 0, &mut Vec::with_capacity(k), 0, visit)
}

/// Hall's condition `|N(A)| >= |A|` for every input set with `|A| <= q`,
/// checked by size. Refuses when more than `budget` subsets would be needed.
pub fn verify_concentrator(g: &BipartiteGraph, q: u32, budget: u64) -> Result<VerificationResult> {
    check_q(g, q)?;
    let masks = g.neighbour_masks()?;
    let needed = subsets_up_to(g.num_inputs(), q);
    if needed > budget {
        return Err(Error::Budget(format!(
            "{needed} subsets needed for q = {q}, budget is {budget}"
        )));
    }
    let mut checked = 0u64;
    for k in 1..=q as usize {
        let mut found = None;
        for_each_subset(&masks, k, &mut |set, nb| {
            checked += 1;
            if (nb.count_ones() as usize) < set.len() {
                found = Some((set.iter().map(|&i| i as u32).collect::<Vec<_>>(), nb));
                return true;
            }
            false
        });
        if let Some((a, nb)) = found {
            return Ok(VerificationResult {
                is_concentrator: false,
                counterexample: Some(a),
                neighbours: Some(bits(nb)),
                subsets_checked: checked,
            });
        }
    }
    Ok(VerificationResult {
        is_concentrator: true,
        counterexample: None,
        neighbours: None,
        subsets_checked: checked,
    })
}

/// Kuhn's augmenting-path matching: does `set` have a matching saturating it?
pub fn has_saturating_matching(g: &BipartiteGraph, set: &[u32]) -> bool {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); g.num_inputs() as usize];
    for &(a, b) in g.edges() {
        if !adj[a as usize].contains(&b) {
            adj[a as usize].push(b);
        }
    }
    let mut owner: Vec<Option<u32>> = vec![None; g.num_outputs() as usize];
    fn augment(u: u32, adj: &[Vec<u32>], owner: &mut [Option<u32>], seen: &mut [bool]) -> bool {
        for &v in &adj[u as usize] {
            if seen[v as usize] {
                continue;
            }
            seen[v as usize] = true;
            match owner[v as usize] {
                None => {
                    owner[v as usize] = Some(u);
                    return true;
                }
                Some(w) => {
                    if augment(w, adj, owner, seen) {
                        owner[v as usize] = Some(u);
                        return true;
                    }
                }
            }
        }
        false
    }
    set.iter().all(|&u| {
        let mut seen = vec![false; g.num_outputs() as usize];
        augment(u, &adj, &mut owner, &mut seen)
    })
}

/// Concentrator verdict from matchings: every `q`-set of inputs is saturable.
pub fn matching_verdict(g: &BipartiteGraph, q: u32) -> Result<bool> {
    check_q(g, q)?;
    if q == 0 {
        return Ok(true);
    }
    let masks = vec![0u64; g.num_inputs() as usize];
    let mut ok = true;
    for_each_subset(&masks, q as usize, &mut |set, _| {
        let set: Vec<u32> = set.iter().map(|&i| i as u32).collect();
        if !has_saturating_matching(g, &set) {
            ok = false;
            return true;
        }
        false
    });
    Ok(ok)
}
