//! Rigorous enclosures of the constants and critical values of φ.

use serde::Serialize;

use num_traits::ToPrimitive;

use super::critical_point;
use super::quintic::isolate_exact;
use crate::combinatorics::Rational;
use crate::error::{Error, Result};
use crate::parse::parse_rational;
use crate::precise::{Precise, Precision};

/// One certified inequality `value < threshold` or `value > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantCheck {
    pub name: String,
    pub expression: String,
    pub lower: f64,
    pub upper: f64,
    pub threshold: f64,
    /// `true` for `value < threshold`.
    pub below: bool,
    /// Certified lower bound on the distance to the threshold.
    pub margin: f64,
    pub required_margin: f64,
    pub holds: bool,
}

fn q(s: &str) -> Rational {
    parse_rational(s).expect("literal rational")
}

fn p(s: &str, prec: Precision) -> Precise {
    Precise::from_rational(&q(s), prec)
}

fn check(
    name: &str,
    expression: &str,
    value: Precise,
    threshold: &str,
    below: bool,
    required: &str,
    prec: Precision,
) -> ConstantCheck {
    let t = p(threshold, prec);
    let gap = if below { &t - &value } else { &value - &t };
    let required_q = q(required);
    ConstantCheck {
        name: name.into(),
        expression: expression.into(),
        lower: value.lower_f64(),
        upper: value.upper_f64(),
        threshold: t.midpoint_f64(),
        below,
        margin: gap.lower_f64(),
        required_margin: required_q.to_f64().unwrap_or(f64::NAN),
        holds: gap.lower() >= required_q,
    }
}

fn ln_ratio(a: &str, b: &str, prec: Precision) -> Result<Precise> {
    p(a, prec).checked_div(&p(b, prec))?.ln()
}

/// The three constants closing the large-`k` argument at `c = 5.7`, `k = 2.6`.
pub fn analytic_constants(prec: Precision) -> Result<Vec<ConstantCheck>> {
    let first = &ln_ratio("15", "41", prec)? + &p("16.1", prec).checked_div(&p("116.51", prec))?;
    let second = &(&p("5", prec) * &ln_ratio("20.5", "17.3", prec)?)
        + &(&p("2", prec) * &ln_ratio("20.5", "7.5", prec)?);
    let four_over_e = p("4", prec).checked_div(&Precise::e(prec))?;
    let third = &(&ln_ratio("2.7", "3", prec)? - &four_over_e) + &p("2", prec);
    Ok(vec![
        check(
            "slope_at_y0",
            "ln(15/41) + 16.1/116.51",
            first,
            "0",
            true,
            "0.001",
            prec,
        ),
        check(
            "endpoint_y1",
            "5 ln(20.5/17.3) + 2 ln(20.5/7.5)",
            second,
            "2",
            false,
            "0.001",
            prec,
        ),
        check(
            "x0_floor",
            "ln(2.7/3) - 4/e + 2",
            third,
            "0",
            false,
            "0.001",
            prec,
        ),
    ])
}

/// `h(6,2.6) + h(4,2.6) + h(20.8,13) - h(30,13) < -0.07`.
pub fn small_k_limit_constant(prec: Precision) -> Result<ConstantCheck> {
    let h = |x: &str, y: &str| Precise::h(&p(x, prec), &p(y, prec));
    let v = &(&(&h("6", "2.6")? + &h("4", "2.6")?) + &h("20.8", "13")?) - &h("30", "13")?;
    Ok(check(
        "small_k_limit",
        "h(6,2.6) + h(4,2.6) + h(20.8,13) - h(30,13)",
        v,
        "-0.07",
        true,
        "0.0001",
        prec,
    ))
}

/// Enclosure of `φ(c, k, l, r)` over boxes.
pub fn phi_enclosure(
    c: &Precise,
    k: &Precise,
    l: &Precise,
    r: &Precise,
    prec: Precision,
) -> Result<Precise> {
    let six = Precise::from_integer(6, prec);
    let eight = Precise::from_integer(8, prec);
    let four = Precise::from_integer(4, prec);
    let thirty_six = Precise::from_integer(36, prec);
    let six_k = &six * k;
    let eight_k = &eight * k;
    let terms = [
        Precise::h(c, l)?,
        Precise::h(&(&six - c), &(k - l))?,
        Precise::h(&(c - &four), r)?,
        Precise::h(&(&eight - c), &(k - r))?,
        Precise::h(&(&eight_k - r), &(&six_k - l))?,
    ];
    let last = Precise::h(&(&thirty_six - c), &(&six_k - l))?;
    let mut acc = terms[0].clone();
    for t in &terms[1..] {
        acc = &acc + t;
    }
    Ok(&acc - &last)
}

fn r_from_l_enclosure(c: &Precise, l: &Precise, prec: Precision) -> Result<Precise> {
    let i = |n: i64| Precise::from_integer(n, prec);
    let num = &(&(c - l) * &(&i(3) - l)) * &(&(&i(18) - c) + l);
    let den = l * &(&(&i(3) - c) + l);
    Ok(&(&i(6) + l) - &num.checked_div(&den)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedCritical {
    pub c: String,
    pub l: (f64, f64),
    pub r: (f64, f64),
    pub phi: (f64, f64),
    pub negative: bool,
    pub positive: bool,
}

/// Encloses the critical value of `φ(c, 3, ·, ·)` at rational `c`: the
/// quintic root is isolated on exact rationals, `r` follows from the
/// `∂φ/∂l = 0` curve, and φ is enclosed over the resulting box.
pub fn certify_critical_value(c: &Rational, prec: Precision) -> Result<CertifiedCritical> {
    let cf = c.to_f64().unwrap_or(f64::NAN);
    let approx = critical_point(cf)?;
    let mut half = 1e-9;
    let bracket = loop {
        match isolate_exact(
            c,
            approx.quintic_root - half,
            approx.quintic_root + half,
            prec.bits(),
        ) {
            Ok(b) => break b,
            Err(_) if half < 1e-3 => half *= 10.0,
            Err(e) => return Err(e),
        }
    };
    let l = Precise::between(&bracket.0, &bracket.1, prec);
    let cp = Precise::from_rational(c, prec);
    let r = r_from_l_enclosure(&cp, &l, prec)?;
    let box_ok = l.lower() > &cp.lower() - Rational::from_integer(3.into())
        && l.upper() < Rational::from_integer(3.into())
        && r.lower() > &cp.upper() - Rational::from_integer(5.into())
        && r.upper() < &cp.lower() - Rational::from_integer(4.into());
    if !box_ok {
        return Err(Error::Solver(format!(
            "certified critical point leaves the box at c = {c}"
        )));
    }
    let three = Precise::from_integer(3, prec);
    let v = phi_enclosure(&cp, &three, &l, &r, prec)?;
    Ok(CertifiedCritical {
        c: crate::parse::format_rational(c),
        l: (l.lower_f64(), l.upper_f64()),
        r: (r.lower_f64(), r.upper_f64()),
        phi: (v.lower_f64(), v.upper_f64()),
        negative: v.is_negative(),
        positive: v.is_positive(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzGuard {
    pub c: String,
    pub l_box: (f64, f64),
    pub r_box: (f64, f64),
    /// Certified bounds on `|∂φ/∂l|` and `|∂φ/∂r|` over the box.
    pub dl_bound: f64,
    pub dr_bound: f64,
    pub limit: f64,
    pub holds: bool,
}

/// Bounds both partial derivatives of `φ(c, 3, ·, ·)` over a box.
pub fn lipschitz_guard(
    c: &Rational,
    l_box: (&Rational, &Rational),
    r_box: (&Rational, &Rational),
    limit: f64,
    prec: Precision,
) -> Result<LipschitzGuard> {
    let i = |n: i64| Precise::from_integer(n, prec);
    let cp = Precise::from_rational(c, prec);
    let l = Precise::between(l_box.0, l_box.1, prec);
    let r = Precise::between(r_box.0, r_box.1, prec);
    let ln_prod = |xs: [Precise; 3]| -> Result<Precise> {
        let mut acc = xs[0].ln()?;
        for x in &xs[1..] {
            acc = &acc + &x.ln()?;
        }
        Ok(acc)
    };
    let q = &(&i(6) - &r) + &l;
    let dl = &ln_prod([&cp - &l, &i(3) - &l, &(&i(18) - &cp) + &l])?
        - &ln_prod([l.clone(), &(&i(3) - &cp) + &l, q.clone()])?;
    let dr = &ln_prod([&(&cp - &i(4)) - &r, &i(3) - &r, q])?
        - &ln_prod([r.clone(), &(&i(5) - &cp) + &r, &i(24) - &r])?;
    let to_f64 = |x: Rational| x.to_f64().unwrap_or(f64::INFINITY);
    let limit_q = Rational::from_float(limit).ok_or_else(|| Error::invalid("non-finite limit"))?;
    let holds = dl.abs_upper() < limit_q && dr.abs_upper() < limit_q;
    Ok(LipschitzGuard {
        c: crate::parse::format_rational(c),
        l_box: (to_f64(l_box.0.clone()), to_f64(l_box.1.clone())),
        r_box: (to_f64(r_box.0.clone()), to_f64(r_box.1.clone())),
        dl_bound: to_f64(dl.abs_upper()),
        dr_bound: to_f64(dr.abs_upper()),
        limit,
        holds,
    })
}
