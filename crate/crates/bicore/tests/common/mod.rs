//! Reference implementations the integration tests compare against. These
//! deliberately avoid the library's counting and peeling machinery: supports
//! come from quadratic pair enumeration, cores from a recompute-everything
//! fixpoint loop. Slow, but hard to get wrong.

// Shared by several test targets; not every target calls every helper.
#![allow(dead_code)]

use bicore::{BipartiteGraph, Core};

/// Per-edge butterfly counts by trying every (upper pair, lower pair).
pub fn brute_supports(g: &BipartiteGraph) -> Vec<u32> {
    let mut sup = vec![0u32; g.edge_count() as usize];
    for_each_butterfly(g, |es| {
        for e in es {
            sup[e as usize] += 1;
        }
    });
    sup
}

pub fn brute_butterflies(g: &BipartiteGraph) -> u64 {
    let mut n = 0u64;
    for_each_butterfly(g, |_| n += 1);
    n
}

fn for_each_butterfly(g: &BipartiteGraph, mut f: impl FnMut([u32; 4])) {
    let nu = g.upper_count();
    let nl = g.lower_count();
    for u1 in 0..nu {
        for u2 in u1 + 1..nu {
            for v1 in 0..nl {
                for v2 in v1 + 1..nl {
                    let quad = [
                        g.find_edge(u1, v1),
                        g.find_edge(u1, v2),
                        g.find_edge(u2, v1),
                        g.find_edge(u2, v2),
                    ];
                    if let [Some(a), Some(b), Some(c), Some(d)] = quad {
                        f([a, b, c, d]);
                    }
                }
            }
        }
    }
}

/// Three-edge paths, each counted once from its upper endpoint: walk
/// u1 - v1 - u2 - v2 with distinct interior vertices.
pub fn brute_caterpillars(g: &BipartiteGraph) -> u64 {
    let mut n = 0u64;
    for u1 in 0..g.upper_count() {
        for &(v1, _) in g.adj_upper(u1) {
            for &(u2, _) in g.adj_lower(v1) {
                if u2 == u1 {
                    continue;
                }
                for &(v2, _) in g.adj_upper(u2) {
                    if v2 != v1 {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

/// Butterfly counts restricted to alive edges, for checking maintained
/// supports mid-deletion. Dead edges report 0.
pub fn brute_supports_alive(g: &BipartiteGraph, alive: &[bool]) -> Vec<u32> {
    let mut sup = vec![0u32; g.edge_count() as usize];
    for_each_butterfly(g, |es| {
        if es.iter().all(|&e| alive[e as usize]) {
            for e in es {
                sup[e as usize] += 1;
            }
        }
    });
    sup
}

/// The unique maximal subgraph where every upper vertex has at least `alpha`
/// edges of support >= tau and every lower vertex at least `beta`, found by
/// deleting all violators and recounting from scratch until stable.
pub fn naive_core(g: &BipartiteGraph, alpha: u32, beta: u32, tau: u32) -> Core {
    let mut up_alive = vec![true; g.upper_count() as usize];
    let mut low_alive = vec![true; g.lower_count() as usize];
    loop {
        let upper: Vec<u32> = (0..g.upper_count())
            .filter(|&u| up_alive[u as usize])
            .collect();
        let lower: Vec<u32> = (0..g.lower_count())
            .filter(|&v| low_alive[v as usize])
            .collect();
        if upper.is_empty() || lower.is_empty() {
            return Core::empty();
        }
        let core = Core::induced(g, upper, lower);
        let sub = core.subgraph(g);
        let sup = brute_supports(&sub);
        let mut eng_u = vec![0u32; sub.upper_count() as usize];
        let mut eng_l = vec![0u32; sub.lower_count() as usize];
        for e in 0..sub.edge_count() {
            if sup[e as usize] >= tau {
                let (u, v) = sub.edge(e);
                eng_u[u as usize] += 1;
                eng_l[v as usize] += 1;
            }
        }
        let mut changed = false;
        for (i, &u) in core.upper.iter().enumerate() {
            if eng_u[i] < alpha {
                up_alive[u as usize] = false;
                changed = true;
            }
        }
        for (i, &v) in core.lower.iter().enumerate() {
            if eng_l[i] < beta {
                low_alive[v as usize] = false;
                changed = true;
            }
        }
        if !changed {
            return core;
        }
    }
}

/// Every constraint the core definition imposes, checked directly on the
/// returned subgraph: membership consistency, induced edges, and per-vertex
/// strong-tie counts.
pub fn assert_core_fixpoint(g: &BipartiteGraph, core: &Core, alpha: u32, beta: u32, tau: u32) {
    if core.is_empty() {
        assert!(core.edges.is_empty());
        return;
    }
    let induced = Core::induced(g, core.upper.clone(), core.lower.clone());
    assert_eq!(
        core.edges, induced.edges,
        "core must keep all induced edges"
    );
    let sub = core.subgraph(g);
    let sup = brute_supports(&sub);
    let mut eng_u = vec![0u32; sub.upper_count() as usize];
    let mut eng_l = vec![0u32; sub.lower_count() as usize];
    for e in 0..sub.edge_count() {
        if sup[e as usize] >= tau {
            let (u, v) = sub.edge(e);
            eng_u[u as usize] += 1;
            eng_l[v as usize] += 1;
        }
    }
    assert!(
        eng_u.iter().all(|&d| d >= alpha),
        "an upper vertex has fewer than {alpha} strong ties"
    );
    assert!(
        eng_l.iter().all(|&d| d >= beta),
        "a lower vertex has fewer than {beta} strong ties"
    );
}

/// a is contained in b, on all three components.
pub fn is_subcore(a: &Core, b: &Core) -> bool {
    let within = |xs: &[u32], ys: &[u32]| xs.iter().all(|x| ys.binary_search(x).is_ok());
    within(&a.upper, &b.upper) && within(&a.lower, &b.lower) && within(&a.edges, &b.edges)
}
