use proptest::prelude::*;

use super::critical::r_from_l;
use super::*;
use crate::parse::parse_rational;
use crate::precise::Precision;

const L_STAR: f64 = 2.89591019913737;
const R_STAR: f64 = 1.07810801202267;

fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = 1e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn phi_domain_checks() {
    assert!(PhiPoint::new(5.7, 3.0, 2.9, 1.1).is_ok());
    assert!(PhiPoint::new(5.7, 3.0, 2.6, 1.1).is_err());
    assert!(PhiPoint::new(5.7, 3.0, 2.9, 1.8).is_err());
    assert!(SubstitutedPoint::new(5.7, 3.0, 0.5, 0.5).is_err());
    assert!(f_small(0.0, 1.0).is_err());
}

#[test]
fn homogeneity_links_psi_and_phi() {
    for m in [10.0, 100.0, 1000.0] {
        let v = psi(m, 5.7 * m, 3.0 * m, 2.9 * m, 1.1 * m).unwrap() / m;
        let p = phi(&PhiPoint::new(5.7, 3.0, 2.9, 1.1).unwrap()).unwrap();
        assert!((v - p).abs() < 1e-12);
    }
}

#[test]
fn psi_over_m_converges_with_rounded_s() {
    let p = phi(&PhiPoint::new(5.7, 3.0, 2.9, 1.1).unwrap()).unwrap();
    let mut last = f64::INFINITY;
    for m in [7.0f64, 77.0, 777.0, 7777.0] {
        let s = (5.7 * m).ceil();
        let d = (psi(m, s, 3.0 * m, 2.9 * m, 1.1 * m).unwrap() / m - p).abs();
        assert!(d < last);
        last = d;
    }
    assert!(last < 1e-3);
}

#[test]
fn small_k_exponent_cubic_decay() {
    let v: Vec<f64> = [1e3, 1e4, 1e5]
        .iter()
        .map(|&m: &f64| m.powi(3) * f_small(1.0, m).unwrap().exp())
        .collect();
    assert!((v[1] - v[2]).abs() < (v[0] - v[1]).abs());
    assert!((v[1] / v[2] - 1.0).abs() < 1e-3);
}

#[test]
fn small_k_curvature_matches_fd() {
    let m = 2.0;
    for k in [0.5, 1.0, 3.0, 5.0] {
        let second = (f_small(k + 1e-4, m).unwrap() - 2.0 * f_small(k, m).unwrap()
            + f_small(k - 1e-4, m).unwrap())
            / 1e-8;
        assert!((second - f_small_curvature(k, m)).abs() < 1e-4 * (1.0 + second.abs()));
        assert!(f_small_curvature(k, m) > 0.0);
    }
}

#[test]
fn derivatives_match_finite_differences() {
    for &(c, l, r) in &[
        (5.7, 2.9, 1.1),
        (5.6, 2.7, 1.3),
        (5.9, 2.95, 1.5),
        (5.2, 2.5, 0.8),
    ] {
        let dl = fd(|t| phi_k3(c, t, r), l);
        let dr = fd(|t| phi_k3(c, l, t), r);
        assert!((dphi_dl(c, l, r).unwrap() - dl).abs() < 1e-6);
        assert!((dphi_dr(c, l, r).unwrap() - dr).abs() < 1e-6);
        let (ll, lr, rr) = hessian_k3(c, l, r);
        assert!((ll - fd(|t| dphi_dl(c, t, r).unwrap(), l)).abs() < 1e-5);
        assert!((lr - fd(|t| dphi_dl(c, l, t).unwrap(), r)).abs() < 1e-5);
        assert!((rr - fd(|t| dphi_dr(c, l, t).unwrap(), r)).abs() < 1e-5);
    }
}

#[test]
fn decomposition_matches_dk() {
    for &(c, k, x, y) in &[
        (5.7, 2.8, 0.1, 0.3),
        (5.7, 3.0, 0.2, 0.9),
        (5.5, 2.7, 0.4, 0.5),
    ] {
        let p = SubstitutedPoint::new(c, k, x, y).unwrap();
        let d = dphi_dk_decomposition(&p).unwrap();
        let num = fd(
            |t| phi_substituted(&SubstitutedPoint { k: t, ..p }).unwrap(),
            k,
        );
        assert!((d.total - num).abs() < 1e-6, "{d:?} vs {num}");
        assert!((d.d1 + d.d2 + d.d3 + d.d4 - d.total).abs() < 1e-15);
    }
}

#[test]
fn decomposition_positive_on_grid() {
    let c = 5.7;
    let n = 50;
    for i in 0..n {
        let k = 2.6 + 0.4 * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let x = (6.0 - c) * j as f64 / (n - 1) as f64;
            for t in 0..n {
                let y = t as f64 / (n - 1) as f64;
                let d = dphi_dk_decomposition(&SubstitutedPoint::new(c, k, x, y).unwrap()).unwrap();
                assert!(d.total > 0.0, "k={k} x={x} y={y}: {d:?}");
                let w = 4.0 - k;
                assert!(d.d2 >= -(c - 4.0) / (std::f64::consts::E * w) - 1e-12);
                assert!(d.d3 >= -(8.0 - c) / (std::f64::consts::E * w) - 1e-12);
            }
        }
    }
}

#[test]
fn k_three_dominates() {
    let c = 5.7;
    for i in 0..=20 {
        let k = 2.6 + 0.4 * i as f64 / 20.0;
        for j in 0..=10 {
            let x = (6.0 - c) * j as f64 / 10.0;
            for t in 0..=10 {
                let y = t as f64 / 10.0;
                let a = phi_substituted(&SubstitutedPoint::new(c, k, x, y).unwrap()).unwrap();
                let b = phi_substituted(&SubstitutedPoint::new(c, 3.0, x, y).unwrap()).unwrap();
                assert!(a <= b + 1e-12);
            }
        }
    }
}

#[test]
fn published_constants_follow_from_formulas() {
    assert!((s1(5.7, 2.6, 1.0) - (15.0f64 / 41.0).ln()).abs() < 1e-14);
    assert!((s2(5.7, 2.6, 1.0) - 16.1).abs() < 1e-12);
    assert!((s3(5.7, 2.6, 0.0) - 116.51).abs() < 1e-12);
    assert!((t1(5.7, 2.6) - 5.0 * (20.5f64 / 17.3).ln()).abs() < 1e-13);
    assert!((t2(5.7, 2.6) - 2.0 * (20.5f64 / 7.5).ln()).abs() < 1e-13);
    let d = dphi_dk_decomposition(&SubstitutedPoint::new(5.7, 3.0, 0.0, 0.5).unwrap()).unwrap();
    assert!((d.d1 - (2.7f64 / 3.0).ln()).abs() < 1e-14);
    let p = SubstitutedPoint::new(5.7, 2.6, 0.0, 1.0).unwrap();
    let d4 = dphi_dk_decomposition(&p).unwrap().d4;
    assert!((d4 - t1(5.7, 2.6) - t2(5.7, 2.6)).abs() < 1e-12);
    let y = 0.4;
    let num = fd(
        |t| {
            dphi_dk_decomposition(&SubstitutedPoint::new(5.7, 2.6, 0.0, t).unwrap())
                .unwrap()
                .d4
        },
        y,
    );
    assert!((dd4_dy(5.7, 2.6, y) - num).abs() < 1e-6);
}

#[test]
fn quintic_roots_at_5_7() {
    let roots = quintic_roots_in(5.7, 2.7, 3.0, &RootOptions::default()).unwrap();
    assert_eq!(roots.len(), 2);
    assert!((roots[0] - 2.86299144).abs() < 1e-7);
    assert!((roots[1] - L_STAR).abs() < 1e-9);
    let r_other = r_from_l(5.7, roots[0]).unwrap();
    assert!(r_other < 0.0);
    let q = quintic(5.7);
    for &l in &roots {
        assert!(q.eval(l).abs() < 1e-4);
    }
    let finer = RootOptions {
        grid: 10_000,
        ..Default::default()
    };
    assert_eq!(quintic_roots_in(5.7, 2.7, 3.0, &finer).unwrap().len(), 2);
    assert!(quintic_roots_in(5.7, 3.0, 2.7, &RootOptions::default()).is_err());
}

#[test]
fn quintic_vanishes_on_critical_curve() {
    // r_from_l zeroes ∂φ/∂l; the quintic must then pick out ∂φ/∂r = 0.
    let p = critical_point(5.7).unwrap();
    assert!(
        dphi_dl(5.7, p.l, r_from_l(5.7, p.l).unwrap())
            .unwrap()
            .abs()
            < 1e-12
    );
    assert!(p.residual_l.abs() < 1e-12 && p.residual_r.abs() < 1e-12);
}

#[test]
fn critical_point_at_5_7() {
    let p = critical_point(5.7).unwrap();
    assert!((p.l - L_STAR).abs() < 1e-9);
    assert!((p.r - R_STAR).abs() < 1e-9);
    assert!((p.value - (-0.00429532177204694)).abs() < 1e-12);
    assert!((p.quintic_root - p.l).abs() < 1e-9);
}

#[test]
fn critical_point_tracks_to_six() {
    let mut last_l = 0.0;
    for c in [5.7, 5.8, 5.9, 5.99, 5.999] {
        let p = critical_point(c).unwrap();
        assert!(p.l > last_l);
        last_l = p.l;
    }
    assert!(last_l > 2.99);
    let d = critical_point(6.0).unwrap();
    assert!(d.degenerate);
    assert!((d.value - 0.0444).abs() < 1e-3);
    assert!(critical_point(6.5).is_err());
}

#[test]
fn max_phi_matches_grid() {
    let rep = max_phi_k3(5.7, &MaxPhiOptions::default()).unwrap();
    assert!(rep.margin >= 0.0 && rep.margin < 1e-5);
    assert!((rep.max_value + 0.00429532177204694).abs() < 1e-12);
    let six = max_phi_k3(6.0, &MaxPhiOptions::default()).unwrap();
    assert!(six.max_value > 0.0);
    assert!(max_phi_k3(5.0, &MaxPhiOptions::default()).is_err());
}

#[test]
fn max_phi_brackets_c_star() {
    let opts = MaxPhiOptions { grid_step: 5e-3 };
    assert!(max_phi_k3(5.724889, &opts).unwrap().max_value < 0.0);
    assert!(max_phi_k3(5.72489, &opts).unwrap().max_value > 0.0);
}

#[test]
fn c_star_value() {
    let rep = c_star(1e-9).unwrap();
    assert!(rep.value > 5.724889 && rep.value < 5.72489);
    assert!(rep.bracket.1 - rep.bracket.0 <= 1e-9);
    assert!(rep.value_at_lo < 0.0 && rep.value_at_hi > 0.0);
    assert!(c_star(0.0).is_err());
}

#[test]
fn certified_constants_hold() {
    let prec = Precision::default();
    for c in analytic_constants(prec).unwrap() {
        assert!(c.holds, "{c:?}");
        assert!(c.upper - c.lower < 1e-14);
    }
    let s = small_k_limit_constant(prec).unwrap();
    assert!(s.holds && (s.lower + 0.07126).abs() < 1e-4);
}

#[test]
fn certified_critical_value() {
    let prec = Precision::default();
    let c = parse_rational("5.7").unwrap();
    let cert = certify_critical_value(&c, prec).unwrap();
    assert!(cert.negative);
    assert!(cert.phi.1 < -0.004 + 2e-6);
    assert!(cert.l.0 <= L_STAR + 1e-12 && L_STAR - 1e-12 <= cert.l.1);
    assert!(cert.phi.1 - cert.phi.0 < 1e-15);
    let lo = certify_critical_value(&parse_rational("5.724889").unwrap(), prec).unwrap();
    let hi = certify_critical_value(&parse_rational("5.72489").unwrap(), prec).unwrap();
    assert!(lo.negative && hi.positive);
}

#[test]
fn lipschitz_guard_box() {
    let q = |s: &str| parse_rational(s).unwrap();
    let g = lipschitz_guard(
        &q("5.7"),
        (&q("2.89"), &q("2.9")),
        (&q("1.07"), &q("1.08")),
        10.0,
        Precision::default(),
    )
    .unwrap();
    assert!(g.holds && g.dl_bound < 10.0 && g.dr_bound < 10.0);
}

#[test]
fn term_bounded_by_psi_estimate() {
    use crate::bound::{term, Mode, SumTermIndex, TermValue};
    use num_traits::Zero;
    for m in 1..=4u32 {
        for s in 4 * m..=6 * m {
            for k in 1..=3 * m {
                for l in 0..=k {
                    for r in 0..=k {
                        let TermValue::Exact(t) =
                            term(m, s, SumTermIndex::new(k, l, r), Mode::Exact).unwrap()
                        else {
                            unreachable!()
                        };
                        if t.is_zero() {
                            continue;
                        }
                        let b = ln_psi_term_bound(m, s, k, l, r).unwrap();
                        let lt = crate::interval::Interval::from_rational(&t).ln().unwrap();
                        assert!(lt.hi() < b.lo(), "m={m} s={s} ({k},{l},{r})");
                    }
                }
            }
        }
    }
}

#[test]
fn tail_estimate_vanishes() {
    let d = measured_delta1(40).unwrap();
    assert!(d > 0.0);
    let a = tail_estimate(1e5, d);
    let b = tail_estimate(2e5, d);
    assert!(b < a);
    assert!(tail_estimate(1e7, d) < 1e-100);
}

proptest! {
    #[test]
    fn gradient_matches_fd(c in 5.2f64..5.95, u in 0.05f64..0.95, v in 0.05f64..0.95) {
        let l = (c - 3.0) + u * (6.0 - c);
        let r = (c - 5.0) + v;
        let a = dphi_dl(c, l, r).unwrap();
        let n = fd(|t| phi_k3(c, t, r), l);
        prop_assert!((a - n).abs() <= 1e-5 * a.abs().max(1.0));
        let a = dphi_dr(c, l, r).unwrap();
        let n = fd(|t| phi_k3(c, l, t), r);
        prop_assert!((a - n).abs() <= 1e-5 * a.abs().max(1.0));
    }
}
