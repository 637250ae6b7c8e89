//! The permutation graphs `G(π)` at desk scale: construction, exhaustive
//! Hall verification, seeded random search and bad-event census.

mod census;
mod io;
mod search;
mod verify;

use serde::Serialize;

use crate::bound::Profile;
use crate::error::{Error, Result};

pub use census::{bad_event_census, pair_counts, BadEvent, PairCounts};
pub use io::{parse_edge_list, parse_graph_json, parse_permutation_json};
pub use search::{random_search, sample_permutation, SearchOptions, SearchReport, TrialRng};
pub use verify::{
    has_saturating_matching, matching_verdict, verify_concentrator, VerificationResult,
    DEFAULT_SUBSET_BUDGET,
};

/// Largest side supported by the bitset verifier.
pub const MAX_SIDE: u32 = 64;

/// A permutation of `{0, …, N-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Permutation {
    mapping: Vec<u32>,
}

impl Permutation {
    pub fn new(mapping: Vec<u32>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for (i, &v) in mapping.iter().enumerate() {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::invalid(format!(
                    "not a permutation: value {v} at position {i} repeated or out of range"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[u32] {
        &self.mapping
    }

    pub fn apply(&self, x: usize) -> u32 {
        self.mapping[x]
    }
}

/// Bipartite multigraph with `6m` inputs and `4m` outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BipartiteGraph {
    pub m: u32,
    /// The `s` the graph was built for, if any.
    pub s: Option<u32>,
    edges: Vec<(u32, u32)>,
}

impl BipartiteGraph {
    pub fn new(m: u32, s: Option<u32>, edges: Vec<(u32, u32)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("m must be positive"));
        }
        if let Some(s) = s {
            if s > 6 * m {
                return Err(Error::domain(format!("s = {s} outside [0, 6m]")));
            }
        }
        let (ni, no) = (6 * m as u64, 4 * m as u64);
        if let Some(&(a, b)) = edges
            .iter()
            .find(|&&(a, b)| a as u64 >= ni || b as u64 >= no)
        {
            return Err(Error::invalid(format!(
                "edge ({a}, {b}) outside {ni} inputs × {no} outputs"
            )));
        }
        Ok(Self { m, s, edges })
    }

    pub fn complete(m: u32) -> Self {
        let edges = (0..6 * m)
            .flat_map(|i| (0..4 * m).map(move |j| (i, j)))
            .collect();
        Self { m, s: None, edges }
    }

    pub fn num_inputs(&self) -> u32 {
        6 * self.m
    }

    pub fn num_outputs(&self) -> u32 {
        4 * self.m
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn add_edge(&mut self, input: u32, output: u32) -> Result<()> {
        if input >= self.num_inputs() || output >= self.num_outputs() {
            return Err(Error::invalid(format!(
                "edge ({input}, {output}) out of range"
            )));
        }
        self.edges.push((input, output));
        Ok(())
    }

    /// Degrees with multiplicity.
    pub fn input_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.num_inputs() as usize];
        for &(a, _) in &self.edges {
            d[a as usize] += 1;
        }
        d
    }

    pub fn output_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.num_outputs() as usize];
        for &(_, b) in &self.edges {
            d[b as usize] += 1;
        }
        d
    }

    /// Neighbour sets as output bitmasks; needs at most 64 outputs.
    pub fn neighbour_masks(&self) -> Result<Vec<u64>> {
        if self.num_outputs() > MAX_SIDE || self.num_inputs() > MAX_SIDE {
            return Err(Error::domain(format!(
                "bitset routines support at most {MAX_SIDE} vertices per side"
            )));
        }
        let mut masks = vec![0u64; self.num_inputs() as usize];
        for &(a, b) in &self.edges {
            masks[a as usize] |= 1 << b;
        }
        Ok(masks)
    }

    /// Checks the degree counts of [`Profile::graph`] for the given `s`.
    pub fn check_profile(&self, s: u32) -> Result<()> {
        let p = Profile::graph(self.m, s)?;
        let count = |d: &[u32], deg: i64| d.iter().filter(|&&x| x as i64 == deg).count() as i64;
        let (di, dout) = (self.input_degrees(), self.output_degrees());
        let ok = self.edges.len() as i64 == p.edges
            && count(&di, p.input_low.degree) == p.input_low.count
            && count(&di, p.input_high.degree) == p.input_high.count
            && count(&dout, p.output_low.degree) == p.output_low.count.max(0)
            && count(&dout, p.output_high.degree) == p.output_high.count;
        if !ok {
            return Err(Error::Solver(format!(
                "degree profile mismatch for m={}, s={s}",
                self.m
            )));
        }
        Ok(())
    }
}

/// `G(π)`: element `x` joins input `x mod 6m` to output `π(x) mod 4m`.
pub fn build_graph(m: u32, s: u32, perm: &Permutation) -> Result<BipartiteGraph> {
    let p = Profile::graph(m, s)?;
    if perm.len() as i64 != p.edges {
        return Err(Error::invalid(format!(
            "permutation has length {}, expected 36m - s = {}",
            perm.len(),
            p.edges
        )));
    }
    let (mi, mo) = (6 * m, 4 * m);
    let edges = (0..perm.len())
        .map(|x| (x as u32 % mi, perm.apply(x) % mo))
        .collect();
    BipartiteGraph::new(m, Some(s), edges)
}

#[cfg(test)]
mod tests;
