mod common;

use coalition_core::graph::{Coalition, WeightedGraph};
use coalition_core::netgraph::generate_synthetic_graph;
use coalition_core::qubo::{
    add_proper_split_penalty, build_split_qubo, default_penalty, with_consistent_or_chain,
    Assignment,
};
use proptest::prelude::*;

fn all_assignments(n: usize) -> impl Iterator<Item = Assignment> {
    (0u64..1 << n).map(move |m| {
        let bits: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
        Assignment::from_bits(&bits)
    })
}

fn graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (
        2..=max_n,
        prop::sample::select(vec![0.0, 0.5, 1.0]),
        any::<u64>(),
    )
        .prop_map(|(n, s, seed)| generate_synthetic_graph(n, s, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_cut_weight(g in graph(10), fix: bool) {
        let c = g.grand_coalition().unwrap();
        let (q, vm) = build_split_qubo(&g, &c, fix).unwrap();
        for x in all_assignments(q.num_vars()) {
            let (_, side_b) = vm.decode(&x);
            let cut = common::brute_cut(&g, &c, &side_b);
            prop_assert!((q.energy(&x).unwrap() - cut).abs() < 1e-9);
        }
    }

    #[test]
    fn minimum_matches_brute_force_and_symmetry(g in graph(12)) {
        let c = g.grand_coalition().unwrap();
        let oracle = common::brute_min_cut(&g, &c, false);
        let (free, _) = build_split_qubo(&g, &c, false).unwrap();
        let (fixed, _) = build_split_qubo(&g, &c, true).unwrap();
        let n = free.num_vars();
        let min_free = all_assignments(n).map(|x| free.energy(&x).unwrap()).fold(f64::INFINITY, f64::min);
        let min_fixed = all_assignments(n - 1).map(|x| fixed.energy(&x).unwrap()).fold(f64::INFINITY, f64::min);
        prop_assert!((min_free - oracle).abs() < 1e-9);
        prop_assert!((min_fixed - oracle).abs() < 1e-9);
        if n <= 9 {
            for x in all_assignments(n) {
                let comp = Assignment::from_bits(&x.iter().map(|b| !b).collect::<Vec<_>>());
                prop_assert!((free.energy(&x).unwrap() - free.energy(&comp).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn penalty_algebra(g in graph(8), lambda in 0.1f64..10.0) {
        let c = g.grand_coalition().unwrap();
        let (q, _) = build_split_qubo(&g, &c, true).unwrap();
        let p = add_proper_split_penalty(&q, lambda).unwrap();
        let k = q.num_vars();
        for x in all_assignments(k) {
            let base = q.energy(&x).unwrap();
            let consistent = p.energy(&with_consistent_or_chain(&x)).unwrap();
            let expected = if x.count_ones() == 0 { base + lambda } else { base };
            prop_assert!((consistent - expected).abs() < 1e-9);
            // the best auxiliary setting is the consistent one
            let aux = p.num_vars() - k;
            let best = all_assignments(aux)
                .map(|a| p.energy(&x.concat(&a)).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!((best - expected).abs() < 1e-9);
            // output OR forced to 0 while some x is set
            if x.count_ones() > 0 && aux > 0 {
                for a in all_assignments(aux).filter(|a| !a.get(aux - 1)) {
                    prop_assert!(p.energy(&x.concat(&a)).unwrap() >= base + lambda - 1e-9);
                }
            }
        }
    }
}

/// With lambda above the total absolute weight, the penalized minimum is
/// always a proper split, and it is the cheapest one.
#[test]
fn penalty_guarantees_proper_minimizer() {
    for seed in 0..40u64 {
        for n in 2..=10usize {
            let g = generate_synthetic_graph(n, [0.0, 0.5, 1.0][seed as usize % 3], seed).unwrap();
            let c = g.grand_coalition().unwrap();
            let (q, _) = build_split_qubo(&g, &c, true).unwrap();
            let lambda = default_penalty(&g, &c).unwrap();
            assert!(lambda > g.total_abs_weight());
            let p = add_proper_split_penalty(&q, lambda).unwrap();
            let total = p.num_vars();
            if total > 18 {
                continue;
            }
            let (best_x, best_e) = all_assignments(total)
                .map(|x| {
                    let e = p.energy(&x).unwrap();
                    (x, e)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(
                best_x.prefix(q.num_vars()).count_ones() > 0,
                "n={n} seed={seed}"
            );
            let proper = common::brute_min_cut(&g, &c, true);
            assert!((best_e - proper).abs() < 1e-9);
        }
    }
}

#[test]
fn sub_coalition_qubo_ignores_outside_edges() {
    let g = WeightedGraph::from_edges(4, [(0, 1, -1.0), (1, 2, 5.0), (2, 3, -2.0), (0, 3, 4.0)])
        .unwrap();
    let c = Coalition::new([0usize, 1, 3]).unwrap();
    let (q, vm) = build_split_qubo(&g, &c, true).unwrap();
    assert_eq!(q.num_vars(), 2);
    for x in all_assignments(2) {
        let (_, b) = vm.decode(&x);
        assert!((q.energy(&x).unwrap() - common::brute_cut(&g, &c, &b)).abs() < 1e-12);
    }
}
