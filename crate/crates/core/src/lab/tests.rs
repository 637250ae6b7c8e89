use std::collections::HashMap;

use num_traits::ToPrimitive;
use proptest::prelude::*;

use super::*;
use crate::bound::{term, union_bound, Mode, SumOptions, SumTermIndex, TermValue};

#[test]
fn identity_graph_m1() {
    let g = build_graph(1, 6, &Permutation::identity(30)).unwrap();
    assert_eq!(g.edges().len(), 30);
    assert!(g.input_degrees().iter().all(|&d| d == 5));
    let mut out = g.output_degrees();
    out.sort();
    assert_eq!(out, vec![7, 7, 8, 8]);
    assert_eq!(g.edges()[7], (1, 3));
    g.check_profile(6).unwrap();
}

#[test]
fn profiles_for_all_s() {
    for m in 1..=3u32 {
        for s in 0..=6 * m {
            let n = (36 * m - s) as usize;
            let mut rng = TrialRng::new(7, s as u64);
            let g = build_graph(m, s, &sample_permutation(n, &mut rng)).unwrap();
            g.check_profile(s).unwrap();
            let avg = n as f64 / (6 * m) as f64;
            if s == (57 * m).div_ceil(10) {
                assert!(avg <= 5.05 + 1e-12);
            }
        }
    }
    let g = build_graph(2, 12, &sample_permutation(60, &mut TrialRng::new(1, 0))).unwrap();
    let count = |d: &[u32], v| d.iter().filter(|&&x| x == v).count();
    assert_eq!(count(&g.input_degrees(), 6), 0);
    assert_eq!(count(&g.input_degrees(), 5), 12);
    assert_eq!(count(&g.output_degrees(), 7), 4);
    assert_eq!(count(&g.output_degrees(), 8), 4);
}

#[test]
fn build_errors() {
    assert!(build_graph(1, 6, &Permutation::identity(29)).is_err());
    assert!(build_graph(1, 7, &Permutation::identity(29)).is_err());
    assert!(Permutation::new(vec![0, 0]).is_err());
    assert!(Permutation::new(vec![1, 2]).is_err());
}

#[test]
fn isolated_input_is_counterexample() {
    let edges = (1..6).map(|i| (i, i % 4)).collect();
    let g = BipartiteGraph::new(1, None, edges).unwrap();
    let v = verify_concentrator(&g, 3, DEFAULT_SUBSET_BUDGET).unwrap();
    assert!(!v.is_concentrator);
    assert_eq!(v.counterexample, Some(vec![0]));
    assert_eq!(v.neighbours, Some(vec![]));
}

#[test]
fn complete_graph_concentrates() {
    let v = verify_concentrator(&BipartiteGraph::complete(1), 3, DEFAULT_SUBSET_BUDGET).unwrap();
    assert!(v.is_concentrator);
    assert_eq!(v.subsets_checked, 6 + 15 + 20);
    assert!(verify_concentrator(&BipartiteGraph::complete(1), 5, DEFAULT_SUBSET_BUDGET).is_err());
}

#[test]
fn budget_refusal() {
    let g = BipartiteGraph::complete(3);
    match verify_concentrator(&g, 9, 1000) {
        Err(crate::Error::Budget(_)) => {}
        other => panic!("expected refusal, got {other:?}"),
    }
}

fn random_graph(rng: &mut TrialRng, m: u32, edges: usize) -> BipartiteGraph {
    let e = (0..edges)
        .map(|_| {
            (
                rng.below(6 * m as u64) as u32,
                rng.below(4 * m as u64) as u32,
            )
        })
        .collect();
    BipartiteGraph::new(m, None, e).unwrap()
}

#[test]
fn hall_agrees_with_matching_oracle() {
    let mut rng = TrialRng::new(2024, 0);
    let mut seen = [0; 2];
    for i in 0..200 {
        let m = 1 + (i % 2) as u32;
        let e = 8 + rng.below(20 * m as u64) as usize;
        let g = random_graph(&mut rng, m, e);
        let q = 3 * m;
        let v = verify_concentrator(&g, q, DEFAULT_SUBSET_BUDGET).unwrap();
        assert_eq!(v.is_concentrator, matching_verdict(&g, q).unwrap());
        seen[v.is_concentrator as usize] += 1;
        if let (Some(a), Some(b)) = (&v.counterexample, &v.neighbours) {
            assert!(b.len() < a.len());
            assert!(!has_saturating_matching(&g, a));
        }
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn adding_edges_is_monotone() {
    let mut rng = TrialRng::new(99, 0);
    for _ in 0..100 {
        let mut g = random_graph(&mut rng, 1, 18);
        let before = verify_concentrator(&g, 3, DEFAULT_SUBSET_BUDGET)
            .unwrap()
            .is_concentrator;
        for _ in 0..4 {
            let (a, b) = (rng.below(6) as u32, rng.below(4) as u32);
            g.add_edge(a, b).unwrap();
        }
        let after = verify_concentrator(&g, 3, DEFAULT_SUBSET_BUDGET)
            .unwrap()
            .is_concentrator;
        assert!(!before || after);
    }
}

#[test]
fn shuffle_uniform_chi_square() {
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    let samples = 100_000u64;
    let mut rng = TrialRng::new(12345, 0);
    for _ in 0..samples {
        *counts
            .entry(sample_permutation(4, &mut rng).mapping().to_vec())
            .or_default() += 1;
    }
    assert_eq!(counts.len(), 24);
    let expected = samples as f64 / 24.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 0.999 quantile of chi-square with 23 degrees of freedom.
    assert!(chi2 < 49.728, "chi2 = {chi2}");
}

#[test]
fn below_is_in_range() {
    let mut rng = TrialRng::new(0, 0);
    for n in 1..100u64 {
        assert!(rng.below(n) < n);
    }
    let a: Vec<u64> = (0..5).map(|_| TrialRng::new(1, 2).next_u64()).collect();
    assert!(a.windows(2).all(|w| w[0] == w[1]));
    assert_ne!(
        TrialRng::new(1, 2).next_u64(),
        TrialRng::new(1, 3).next_u64()
    );
}

#[test]
fn search_deterministic_and_worker_independent() {
    let opts = SearchOptions::default();
    let a = random_search(1, 6, 200, 42, &opts).unwrap();
    let b = random_search(1, 6, 200, 42, &opts).unwrap();
    let c = random_search(1, 6, 200, 42, &SearchOptions { workers: 3, ..opts }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.to_json().to_string(), c.to_json().to_string());
    assert_ne!(a, random_search(1, 6, 200, 43, &opts).unwrap());
}

#[test]
fn search_finds_good_graphs_m1() {
    for s in [0, 6] {
        let rep = random_search(1, s, 1000, 42, &SearchOptions::default()).unwrap();
        assert!(rep.good_count > 0);
        let t = rep.first_good_trial.unwrap();
        let perm = rep.first_good_permutation.clone().unwrap();
        let g = build_graph(1, s, &perm).unwrap();
        assert!(
            verify_concentrator(&g, 3, DEFAULT_SUBSET_BUDGET)
                .unwrap()
                .is_concentrator
        );
        assert_eq!(
            perm,
            sample_permutation(perm.len(), &mut TrialRng::new(42, t))
        );
        assert_eq!(rep.consistent_with_bound(), Some(true), "{rep:?}");
        assert!((0.0..=1.0).contains(&rep.empirical_bad_rate));
    }
    assert!(random_search(4, 24, 1, 0, &SearchOptions::default()).is_err());
}

#[test]
fn census_consistent_with_verification() {
    let mut good = 0;
    let mut bad = 0;
    let mut rng = TrialRng::new(5, 0);
    for t in 0..200 {
        let g = if t % 2 == 0 {
            build_graph(1, 6, &sample_permutation(30, &mut rng)).unwrap()
        } else {
            let e = 6 + rng.below(10) as usize;
            let sparse = random_graph(&mut rng, 1, e);
            BipartiteGraph::new(1, Some(6), sparse.edges().to_vec()).unwrap()
        };
        let v = verify_concentrator(&g, 3, DEFAULT_SUBSET_BUDGET).unwrap();
        let events = bad_event_census(&g, None).unwrap();
        assert_eq!(events.is_empty(), v.is_concentrator);
        if let Some(first) = events.first() {
            bad += 1;
            assert_eq!(Some(first.a.clone()), v.counterexample);
            let masks = g.neighbour_masks().unwrap();
            for &i in &first.a {
                for o in 0..4 {
                    if masks[i as usize] >> o & 1 == 1 {
                        assert!(first.b.contains(&o));
                    }
                }
            }
            assert!(first.b.len() < first.a.len());
        } else {
            good += 1;
        }
    }
    assert!(good > 0 && bad > 0);
    assert!(bad_event_census(&BipartiteGraph::complete(1), None).is_err());
}

#[test]
fn pair_counts_average_to_terms() {
    let trials = 4000u64;
    for s in [6u32, 0] {
        let n = (36 - s) as usize;
        let mut sums: HashMap<(u32, u32, u32), f64> = HashMap::new();
        for t in 0..trials {
            let g = build_graph(1, s, &sample_permutation(n, &mut TrialRng::new(77, t))).unwrap();
            for (key, v) in pair_counts(&g, None).unwrap().counts {
                *sums.entry(key).or_default() += v as f64;
            }
        }
        let ub = union_bound(1, s, &SumOptions::exact()).unwrap();
        for (k, partial) in &ub.per_k {
            let expected = partial.approx();
            let mean: f64 = sums
                .iter()
                .filter(|(key, _)| key.0 == *k)
                .map(|(_, v)| v)
                .sum::<f64>()
                / trials as f64;
            assert!(
                (mean - expected).abs() <= 0.15 * expected + 0.01,
                "s={s} k={k}: {mean} vs {expected}"
            );
        }
        if s == 6 {
            for (&(k, l, r), v) in &sums {
                let TermValue::Exact(e) =
                    term(1, 6, SumTermIndex::new(k, l, r), Mode::Exact).unwrap()
                else {
                    unreachable!()
                };
                let e = e.to_f64().unwrap();
                if e > 0.05 {
                    assert!((v / trials as f64 - e).abs() < 0.2 * e, "({k},{l},{r})");
                }
            }
        }
    }
}

#[test]
fn json_round_trip() {
    let g = build_graph(1, 6, &sample_permutation(30, &mut TrialRng::new(3, 3))).unwrap();
    let back = parse_graph_json(&g.to_json().to_string()).unwrap();
    assert_eq!(back, g);
    let el = parse_edge_list(&g.to_edge_list()).unwrap();
    assert_eq!(el.edges(), g.edges());
    assert_eq!(el.s, None);
}

#[test]
fn parse_errors_have_positions() {
    match parse_graph_json("{\"m\": 1,\n \"edges\": [[0, 9]]}") {
        Err(crate::Error::Invalid(_)) => {}
        other => panic!("{other:?}"),
    }
    match parse_graph_json("{\"m\": 1,\n \"edges\": [[0, x]]}") {
        Err(crate::Error::Parse { line: 2, .. }) => {}
        other => panic!("{other:?}"),
    }
    match parse_edge_list("p conc 6 4 2\n0 1\n0 z\n") {
        Err(crate::Error::Parse {
            line: 3, column: 3, ..
        }) => {}
        other => panic!("{other:?}"),
    }
    assert!(parse_edge_list("p conc 6 4 3\n0 1\n").is_err());
    assert!(parse_edge_list("p conc 7 4 0\n").is_err());
    assert!(parse_edge_list("").is_err());
    assert!(parse_edge_list("c comment\n\np conc 6 4 1\n5 3\n").is_ok());
    assert_eq!(
        parse_permutation_json("[1,0,2]").unwrap().mapping(),
        &[1, 0, 2]
    );
    assert_eq!(
        parse_permutation_json("{\"mapping\":[0]}").unwrap().len(),
        1
    );
    assert!(parse_permutation_json("[1,1]").is_err());
}

proptest! {
    #[test]
    fn parsers_never_panic(s in ".{0,200}") {
        let _ = parse_edge_list(&s);
        let _ = parse_graph_json(&s);
        let _ = parse_permutation_json(&s);
    }
}
