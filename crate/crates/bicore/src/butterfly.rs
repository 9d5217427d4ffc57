use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// A 2x2 biclique, with each layer's pair sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Butterfly {
    pub uppers: (u32, u32),
    pub lowers: (u32, u32),
}

impl Butterfly {
    fn new(u1: u32, u2: u32, v1: u32, v2: u32) -> Self {
        Self {
            uppers: (u1.min(u2), u1.max(u2)),
            lowers: (v1.min(v2), v1.max(v2)),
        }
    }
}

/// Total number of butterflies: for every same-layer pair with c common
/// neighbors, C(c, 2) butterflies. Wedges are enumerated through the layer
/// with the smaller sum of squared degrees, so the work matches the cheaper
/// orientation.
pub fn count_butterflies_total(g: &BipartiteGraph) -> u64 {
    let sq = |d: u64| d * d;
    let cost_lower_centers: u64 = (0..g.lower_count())
        .map(|v| sq(g.deg_lower(v) as u64))
        .sum();
    let cost_upper_centers: u64 = (0..g.upper_count())
        .map(|u| sq(g.deg_upper(u) as u64))
        .sum();

    let mut total = 0u64;
    if cost_lower_centers <= cost_upper_centers {
        // Pairs of upper vertices, wedges through lower centers.
        let mut cnt = vec![0u32; g.upper_count() as usize];
        let mut touched = Vec::new();
        for u in 0..g.upper_count() {
            for &(c, _) in g.adj_upper(u) {
                for &(w, _) in g.adj_lower(c) {
                    if w > u {
                        if cnt[w as usize] == 0 {
                            touched.push(w);
                        }
                        cnt[w as usize] += 1;
                    }
                }
            }
            for &w in &touched {
                let c = cnt[w as usize] as u64;
                total += c * (c - 1) / 2;
                cnt[w as usize] = 0;
            }
            touched.clear();
        }
    } else {
        let mut cnt = vec![0u32; g.lower_count() as usize];
        let mut touched = Vec::new();
        for v in 0..g.lower_count() {
            for &(c, _) in g.adj_lower(v) {
                for &(w, _) in g.adj_upper(c) {
                    if w > v {
                        if cnt[w as usize] == 0 {
                            touched.push(w);
                        }
                        cnt[w as usize] += 1;
                    }
                }
            }
            for &w in &touched {
                let c = cnt[w as usize] as u64;
                total += c * (c - 1) / 2;
                cnt[w as usize] = 0;
            }
            touched.clear();
        }
    }
    total
}

/// Per-edge butterfly counts. For edge (u,v): sum over other uppers w adjacent
/// to v of (|N(u) ∩ N(w)| - 1). Computed with the same two-phase wedge scan as
/// the total count, one anchor vertex at a time.
pub fn edge_supports(g: &BipartiteGraph) -> Vec<u32> {
    let mut sup = vec![0u32; g.edge_count() as usize];
    let mut cnt = vec![0u32; g.upper_count() as usize];
    let mut touched = Vec::new();
    for u in 0..g.upper_count() {
        for &(c, _) in g.adj_upper(u) {
            for &(w, _) in g.adj_lower(c) {
                if w != u {
                    if cnt[w as usize] == 0 {
                        touched.push(w);
                    }
                    cnt[w as usize] += 1;
                }
            }
        }
        for &(c, eid) in g.adj_upper(u) {
            let mut s = 0u32;
            for &(w, _) in g.adj_lower(c) {
                if w != u {
                    s += cnt[w as usize] - 1;
                }
            }
            sup[eid as usize] = s;
        }
        for &w in &touched {
            cnt[w as usize] = 0;
        }
        touched.clear();
    }
    sup
}

/// All butterflies containing edge `e`, found by intersecting the sorted
/// neighbor lists of `u` with each other upper vertex adjacent to `v`.
pub fn enumerate_butterflies_containing(g: &BipartiteGraph, e: u32) -> Result<Vec<Butterfly>> {
    if e >= g.edge_count() {
        return Err(Error::InvalidEdge {
            upper: 0,
            lower: 0,
            msg: format!("edge id {e} out of range"),
        });
    }
    let (u, v) = g.edge(e);
    let mut out = Vec::new();
    for &(w, _) in g.adj_lower(v) {
        if w == u {
            continue;
        }
        // Merge-intersect N(u) and N(w), skipping v itself.
        let a = g.adj_upper(u);
        let b = g.adj_upper(w);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let (x, _) = a[i];
            let (y, _) = b[j];
            if x == y {
                if x != v {
                    out.push(Butterfly::new(u, w, v, x));
                }
                i += 1;
                j += 1;
            } else if x < y {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    Ok(out)
}

/// Number of 3-edge paths. Each such path is its middle edge (u,v) plus one
/// extra edge at each endpoint: (deg(u)-1)(deg(v)-1) choices, distinct by
/// bipartiteness.
pub fn count_caterpillars(g: &BipartiteGraph) -> u64 {
    g.edges()
        .iter()
        .map(|&(u, v)| (g.deg_upper(u) as u64 - 1) * (g.deg_lower(v) as u64 - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn totals_on_small_graphs() {
        assert_eq!(count_butterflies_total(&synth::complete_bipartite(2, 2)), 1);
        assert_eq!(count_butterflies_total(&synth::complete_bipartite(3, 3)), 9);
        assert_eq!(count_butterflies_total(&synth::path_graph(2)), 0);
        assert_eq!(count_butterflies_total(&synth::star(4)), 0);
        assert_eq!(count_butterflies_total(&synth::demo_graph()), 8);
    }

    #[test]
    fn supports_on_small_graphs() {
        let g = synth::complete_bipartite(2, 2);
        assert!(edge_supports(&g).iter().all(|&s| s == 1));
        let g = synth::complete_bipartite(3, 3);
        assert!(edge_supports(&g).iter().all(|&s| s == 4));
    }

    #[test]
    fn supports_on_demo_graph() {
        let g = synth::demo_graph();
        let sup = edge_supports(&g);
        let s = |u: u32, v: u32| sup[g.find_edge(u, v).unwrap() as usize];
        // The quad edges lie in exactly one butterfly each.
        assert_eq!(s(0, 0), 1);
        assert_eq!(s(0, 1), 1);
        assert_eq!(s(1, 0), 1);
        assert_eq!(s(1, 1), 1);
        // The bridge edges each lie in one butterfly (the cross square
        // {u3,u4} x {v3,v4}).
        assert_eq!(s(3, 4), 1);
        assert_eq!(s(4, 3), 1);
        // Block edges are better supported; (u3,v3) sits in both blocks'
        // butterflies plus the cross square, beating (u1,v2).
        assert_eq!(s(1, 2), 2);
        assert_eq!(s(3, 3), 3);
        assert!(s(1, 2) < s(3, 3));
        assert_eq!(s(4, 4), 3);
        // Consistency: supports sum to 4 times the butterfly count.
        let total: u64 = sup.iter().map(|&s| s as u64).sum();
        assert_eq!(total, 4 * count_butterflies_total(&g));
        assert_eq!(total, 32);
    }

    #[test]
    fn enumeration_matches_support() {
        let g = synth::complete_bipartite(3, 3);
        let sup = edge_supports(&g);
        for e in 0..g.edge_count() {
            let list = enumerate_butterflies_containing(&g, e).unwrap();
            assert_eq!(list.len() as u32, sup[e as usize]);
            let (u, v) = g.edge(e);
            for b in &list {
                assert!(b.uppers.0 == u || b.uppers.1 == u);
                assert!(b.lowers.0 == v || b.lowers.1 == v);
            }
            // No duplicates.
            let mut sorted = list.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), list.len());
        }
        assert_eq!(
            enumerate_butterflies_containing(&synth::complete_bipartite(2, 2), 0)
                .unwrap()
                .len(),
            1
        );
        for e in 0..4 {
            assert!(enumerate_butterflies_containing(&synth::star(4), e)
                .unwrap()
                .is_empty());
        }
        assert!(enumerate_butterflies_containing(&synth::star(4), 99).is_err());
    }

    #[test]
    fn caterpillar_counts() {
        assert_eq!(count_caterpillars(&synth::complete_bipartite(2, 2)), 4);
        assert_eq!(count_caterpillars(&synth::path_graph(1)), 0);
        assert_eq!(count_caterpillars(&synth::path_graph(3)), 1);
        assert_eq!(count_caterpillars(&synth::complete_bipartite(3, 3)), 36);
    }
}
