//! Randomized laws over small arbitrary graphs. Counting identities and core
//! semantics are checked against the enumeration oracles in `common`; the
//! round-trip and nesting properties are internal consistency laws.

mod common;

use bicore::bloom::BloomEdgeIndex;
use bicore::graph::{BipartiteGraph, LoadedGraph};
use bicore::peel::online_core;
use bicore::{butterfly, hash};
use proptest::collection::hash_set;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_graph(max_side: u32, max_edges: usize) -> impl Strategy<Value = BipartiteGraph> {
    (2..=max_side, 2..=max_side).prop_flat_map(move |(nu, nl)| {
        let cap = max_edges.min((nu * nl) as usize);
        hash_set((0..nu, 0..nl), 1..=cap).prop_map(move |set| {
            BipartiteGraph::from_edges(nu, nl, set.into_iter().collect()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_sum_is_four_butterflies(g in arb_graph(10, 45)) {
        let total: u64 = butterfly::edge_supports(&g).iter().map(|&s| s as u64).sum();
        prop_assert_eq!(total, 4 * butterfly::count_butterflies_total(&g));
    }

    #[test]
    fn supports_match_pair_enumeration(g in arb_graph(8, 30)) {
        prop_assert_eq!(butterfly::edge_supports(&g), common::brute_supports(&g));
    }

    #[test]
    fn caterpillars_match_path_enumeration(g in arb_graph(8, 30)) {
        prop_assert_eq!(butterfly::count_caterpillars(&g), common::brute_caterpillars(&g));
    }

    #[test]
    fn online_core_is_the_recompute_fixpoint(
        g in arb_graph(7, 26),
        alpha in 1u32..4,
        beta in 1u32..4,
        tau in 0u32..4,
    ) {
        prop_assert_eq!(online_core(&g, alpha, beta, tau), common::naive_core(&g, alpha, beta, tau));
    }

    #[test]
    fn cores_nest_as_parameters_tighten(
        g in arb_graph(8, 32),
        alpha in 1u32..4,
        beta in 1u32..4,
        tau in 0u32..3,
    ) {
        let base = online_core(&g, alpha, beta, tau);
        for (a2, b2, t2) in [
            (alpha + 1, beta, tau),
            (alpha, beta + 1, tau),
            (alpha, beta, tau + 1),
        ] {
            let tighter = online_core(&g, a2, b2, t2);
            prop_assert!(
                common::is_subcore(&tighter, &base),
                "core at ({a2},{b2})_{t2} escapes the one at ({alpha},{beta})_{tau}"
            );
        }
    }

    #[test]
    fn incremental_supports_track_deletions(g in arb_graph(7, 24), seed in any::<u64>()) {
        let mut idx = BloomEdgeIndex::new(&g);
        let mut alive = vec![true; g.edge_count() as usize];
        let mut order: Vec<u32> = (0..g.edge_count()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        // Delete the first half in random order, then compare every live edge.
        for &e in &order[..order.len() / 2] {
            idx.delete_edge(e).unwrap();
            alive[e as usize] = false;
        }
        let want = common::brute_supports_alive(&g, &alive);
        for e in 0..g.edge_count() {
            if alive[e as usize] {
                prop_assert_eq!(idx.supports()[e as usize], want[e as usize]);
            }
        }
    }

    #[test]
    fn edge_list_round_trips(pairs in hash_set((0u64..500, 0u64..500), 1..50)) {
        let pairs: Vec<(u64, u64)> = pairs.into_iter().collect();
        let lg = LoadedGraph::from_pairs(&pairs).unwrap();
        let mut text = Vec::new();
        lg.write_edge_list(&mut text).unwrap();
        let back = LoadedGraph::load_edge_list(text.as_slice()).unwrap();
        let ext = |l: &LoadedGraph| {
            let mut v: Vec<(u64, u64)> = (0..l.graph.edge_count()).map(|e| l.external_edge(e)).collect();
            v.sort_unstable();
            v
        };
        prop_assert_eq!(ext(&lg), ext(&back));
        prop_assert_eq!(
            hash::fnv1a_64(text.iter().copied()),
            {
                let mut again = Vec::new();
                back.write_edge_list(&mut again).unwrap();
                hash::fnv1a_64(again.iter().copied())
            }
        );
    }
}
