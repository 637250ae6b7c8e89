//! Approximation constants driven by the concentrator degree `γ`.
//!
//! `K(γ) = (7 + 4γ - 4/3) / (2/3)` bounds the distance from a nearly
//! additive set function to an additive one, `K̃(γ) = (5 + 4γ - 4/3) / (2/3)`
//! is the same bound under the modular deviation hypothesis, and the
//! Whitney constant for linear approximation on the cube is
//! `w₂ = 2K̃ + 1` once the second-difference modulus is normalized to 1/2.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::combinatorics::Rational;
use crate::error::{Error, Result};
use crate::parse::format_rational;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub gamma: Rational,
    pub k: Rational,
    pub k_tilde: Rational,
    pub w2: Rational,
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn k_constant(gamma: &Rational) -> Rational {
    (r(7, 1) + r(4, 1) * gamma - r(4, 3)) / r(2, 3)
}

pub fn k_tilde_constant(gamma: &Rational) -> Rational {
    (r(5, 1) + r(4, 1) * gamma - r(4, 3)) / r(2, 3)
}

pub fn whitney_constant(k_tilde: &Rational) -> Rational {
    r(2, 1) * k_tilde + r(1, 1)
}

/// Exact constants for concentrator degree `gamma` (meaningful for `γ >= 5`).
pub fn constants(gamma: &Rational) -> Result<ConstantsReport> {
    if gamma < &r(5, 1) {
        return Err(Error::domain(format!(
            "gamma = {} is below 5, outside the meaningful range",
            format_rational(gamma)
        )));
    }
    let k = k_constant(gamma);
    let k_tilde = k_tilde_constant(gamma);
    let w2 = whitney_constant(&k_tilde);
    Ok(ConstantsReport {
        gamma: gamma.clone(),
        k,
        k_tilde,
        w2,
    })
}

/// JSON view of a [`ConstantsReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsJson {
    pub gamma: String,
    #[serde(rename = "K")]
    pub k: String,
    #[serde(rename = "K_tilde")]
    pub k_tilde: String,
    pub w2: String,
    #[serde(rename = "K_f64")]
    pub k_f64: f64,
    #[serde(rename = "K_tilde_f64")]
    pub k_tilde_f64: f64,
    pub w2_f64: f64,
    /// `w₂` from `K̃` rounded up to the next integer.
    pub w2_from_rounded_k_tilde: String,
}

impl From<&ConstantsReport> for ConstantsJson {
    fn from(c: &ConstantsReport) -> Self {
        let rounded = Rational::from_integer(c.k_tilde.ceil().to_integer());
        Self {
            gamma: format_rational(&c.gamma),
            k: format_rational(&c.k),
            k_tilde: format_rational(&c.k_tilde),
            w2: format_rational(&c.w2),
            k_f64: c.k.to_f64().unwrap_or(f64::NAN),
            k_tilde_f64: c.k_tilde.to_f64().unwrap_or(f64::NAN),
            w2_f64: c.w2.to_f64().unwrap_or(f64::NAN),
            w2_from_rounded_k_tilde: format_rational(&whitney_constant(&rounded)),
        }
    }
}
