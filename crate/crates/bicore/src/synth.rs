use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::BipartiteGraph;

/// The 13-vertex, 18-edge graph used throughout the guide and the worked-example
/// tests. Two dense blocks ({u1,u2,u3} x {v2,v3} and {u4,u5} x {v4,v5,v6}) are
/// bridged by the edges (u3,v4) and (u4,v3), and a sparse quad {u0,u1} x {v0,v1}
/// hangs off the left block. Every edge lies in at least one butterfly, but the
/// quad and bridge edges are weakly supported, which is what makes the
/// strength-level behavior of this graph interesting.
pub fn demo_graph() -> BipartiteGraph {
    let edges = vec![
        (0, 0),
        (0, 1),
        (1, 0),
        (1, 1),
        (1, 2),
        (1, 3),
        (2, 2),
        (2, 3),
        (3, 2),
        (3, 3),
        (3, 4),
        (4, 3),
        (4, 4),
        (4, 5),
        (4, 6),
        (5, 4),
        (5, 5),
        (5, 6),
    ];
    BipartiteGraph::from_edges(6, 7, edges).unwrap()
}

/// Complete biclique K_{a,b}.
pub fn complete_bipartite(a: u32, b: u32) -> BipartiteGraph {
    let mut edges = Vec::with_capacity((a * b) as usize);
    for u in 0..a {
        for v in 0..b {
            edges.push((u, v));
        }
    }
    BipartiteGraph::from_edges(a, b, edges).unwrap()
}

/// Path with `k` edges, alternating u0, v0, u1, v1, ...
pub fn path_graph(k: u32) -> BipartiteGraph {
    let mut edges = Vec::with_capacity(k as usize);
    for i in 0..k {
        if i % 2 == 0 {
            edges.push((i / 2, i / 2));
        } else {
            edges.push((i.div_ceil(2), (i - 1) / 2));
        }
    }
    let uc = edges.iter().map(|e| e.0).max().map_or(0, |x| x + 1);
    let lc = edges.iter().map(|e| e.1).max().map_or(0, |x| x + 1);
    BipartiteGraph::from_edges(uc, lc, edges).unwrap()
}

/// One upper vertex connected to `leaves` lower vertices.
pub fn star(leaves: u32) -> BipartiteGraph {
    let edges = (0..leaves).map(|v| (0, v)).collect();
    BipartiteGraph::from_edges(1, leaves.max(1), edges).unwrap()
}

/// Uniform random bipartite graph with exactly `m` distinct edges.
pub fn random_bipartite(n_upper: u32, n_lower: u32, m: u32, seed: u64) -> BipartiteGraph {
    assert!(m <= n_upper * n_lower, "more edges than pairs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(m as usize);
    while edges.len() < m as usize {
        let u = rng.gen_range(0..n_upper);
        let v = rng.gen_range(0..n_lower);
        if seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    BipartiteGraph::from_edges(n_upper, n_lower, edges).unwrap()
}

/// Planted-community graph: `n_communities` disjoint complete bicliques with
/// per-side sizes drawn from `min_size..=max_size`, plus `noise_edges` random
/// cross edges over the whole vertex range. The bicliques give the graph real
/// butterfly density; the noise keeps engagement profiles irregular.
pub fn community_graph(
    n_communities: u32,
    min_size: u32,
    max_size: u32,
    noise_edges: u32,
    seed: u64,
) -> BipartiteGraph {
    assert!(min_size >= 1 && min_size <= max_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut u_base = 0u32;
    let mut v_base = 0u32;
    for _ in 0..n_communities {
        let su = rng.gen_range(min_size..=max_size);
        let sv = rng.gen_range(min_size..=max_size);
        for u in 0..su {
            for v in 0..sv {
                edges.push((u_base + u, v_base + v));
            }
        }
        u_base += su;
        v_base += sv;
    }
    for _ in 0..noise_edges {
        let u = rng.gen_range(0..u_base);
        let v = rng.gen_range(0..v_base);
        edges.push((u, v));
    }
    BipartiteGraph::from_edges(u_base, v_base, edges).unwrap()
}
