//! Verified computation for random bipartite concentrators.
//!
//! The crate evaluates the union bound on the failure probability of a
//! permutation-generated `(6m, 4m, 3m, ·)` concentrator exactly or with
//! certified enclosures, analyses the continuous exponent that governs
//! the bound for large `m`, builds and verifies the graphs themselves at
//! desk scale, and turns the resulting degree into approximation
//! constants.
//!
//! Modules:
//! - [`combinatorics`]: binomials, `g`, `h`, Stirling bounds.
//! - [`interval`] and [`precise`]: fast `f64` and extended-precision
//!   rigorous enclosures.
//! - [`bound`]: the union-bound sum, the `s(m)` scan, small-`k` identities.
//! - [`phi`]: the limiting exponent, its critical points and `c*`.
//! - [`lab`]: graph construction, Hall verification and random search.
//! - [`constants`]: `K`, `K̃` and the Whitney constant.
//! - [`certify`]: the end-to-end certification checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod certify;
pub mod combinatorics;
pub mod constants;
pub mod error;
pub mod interval;
pub mod lab;
pub mod parse;
pub mod phi;
pub mod precise;

pub use combinatorics::{
    binom, g, h, stirling_sandwich, stirling_sandwich_row, BinomialTable, Rational,
};
pub use error::{Error, Result};
pub use interval::{Interval, Verdict};
pub use precise::{Precise, Precision};
