use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// Immutable structure of the bloom index: which same-layer pairs witness
/// blooms, which (edge, edge) twin pairs form their member slots, and the
/// reverse mapping from edges to slots. Edge ids are the host graph's.
///
/// A bloom is a 2 x k biclique holding k(k-1)/2 butterflies; an edge in a
/// bloom of size k lies in k-1 of them. Each vertex gets a priority
/// (degree, layer, id) compared lexicographically (upper beats lower on full
/// ties so the order is total); a bloom keyed by the same-layer pair (a, b)
/// admits a common neighbor y as a member only when y's priority is below
/// max(p(a), p(b)). Every butterfly then lives in exactly one bloom: the one
/// keyed on the layer of its priority-maximal vertex.
#[derive(Debug, Clone)]
pub struct BloomTopology {
    /// Global slot arena: (edge via a, edge via b) per member.
    slots: Vec<(u32, u32)>,
    /// Per bloom: (offset, len) into `slots`.
    bloom_slots: Vec<(u32, u32)>,
    /// Per edge: (bloom id, global slot index) pairs.
    edge_to_blooms: Vec<Vec<(u32, u32)>>,
}

/// Mutable part of the index, cheap to snapshot: per-bloom alive member count,
/// per-slot alive flag, per-edge alive flag and current support.
#[derive(Debug, Clone)]
pub struct BloomState {
    k: Vec<u32>,
    slot_alive: Vec<bool>,
    edge_alive: Vec<bool>,
    sup: Vec<u32>,
}

/// Reusable buffers for [`BloomState::delete_edge`]; keeping them outside the
/// state keeps snapshots small and avoids per-deletion allocation.
#[derive(Debug, Clone)]
pub struct DeltaBuf {
    delta: Vec<u32>,
    touched: Vec<u32>,
    /// After a deletion: (edge id, new support) for every alive edge whose
    /// support changed, sorted by edge id.
    pub changed: Vec<(u32, u32)>,
}

impl DeltaBuf {
    pub fn new(edge_count: u32) -> Self {
        Self {
            delta: vec![0; edge_count as usize],
            touched: Vec::new(),
            changed: Vec::new(),
        }
    }
}

impl BloomTopology {
    /// Build over the alive part of `g`. Priorities use alive degrees.
    pub fn build(g: &BipartiteGraph, alive_edge: &[bool]) -> (BloomTopology, BloomState) {
        assert_eq!(alive_edge.len(), g.edge_count() as usize);
        let deg_u: Vec<u32> = (0..g.upper_count())
            .map(|u| {
                g.adj_upper(u)
                    .iter()
                    .filter(|&&(_, e)| alive_edge[e as usize])
                    .count() as u32
            })
            .collect();
        let deg_l: Vec<u32> = (0..g.lower_count())
            .map(|v| {
                g.adj_lower(v)
                    .iter()
                    .filter(|&&(_, e)| alive_edge[e as usize])
                    .count() as u32
            })
            .collect();
        // Total priority order: (degree, layer, id); upper layer ranks above
        // lower so cross-layer degree ties stay decided.
        let pu = |u: u32| (deg_u[u as usize], 1u8, u);
        let pl = |v: u32| (deg_l[v as usize], 0u8, v);

        // (pair a, pair b, member edge via a, member edge via b), keyed a < b.
        let mut upper_pairs: Vec<(u32, u32, u32, u32)> = Vec::new();
        for y in 0..g.lower_count() {
            let nbrs: Vec<(u32, u32)> = g
                .adj_lower(y)
                .iter()
                .copied()
                .filter(|&(_, e)| alive_edge[e as usize])
                .collect();
            for i in 0..nbrs.len() {
                for j in i + 1..nbrs.len() {
                    let (a, ea) = nbrs[i];
                    let (b, eb) = nbrs[j];
                    if pl(y) < pu(a).max(pu(b)) {
                        upper_pairs.push((a, b, ea, eb));
                    }
                }
            }
        }
        let mut lower_pairs: Vec<(u32, u32, u32, u32)> = Vec::new();
        for y in 0..g.upper_count() {
            let nbrs: Vec<(u32, u32)> = g
                .adj_upper(y)
                .iter()
                .copied()
                .filter(|&(_, e)| alive_edge[e as usize])
                .collect();
            for i in 0..nbrs.len() {
                for j in i + 1..nbrs.len() {
                    let (a, ea) = nbrs[i];
                    let (b, eb) = nbrs[j];
                    if pu(y) < pl(a).max(pl(b)) {
                        lower_pairs.push((a, b, ea, eb));
                    }
                }
            }
        }

        let mut slots = Vec::new();
        let mut bloom_slots = Vec::new();
        let mut edge_to_blooms = vec![Vec::new(); g.edge_count() as usize];
        let mut k = Vec::new();
        for pairs in [&mut upper_pairs, &mut lower_pairs] {
            pairs.sort_unstable();
            let mut i = 0;
            while i < pairs.len() {
                let (a, b, _, _) = pairs[i];
                let mut j = i;
                while j < pairs.len() && pairs[j].0 == a && pairs[j].1 == b {
                    j += 1;
                }
                // A pair with a single admitted member holds no butterfly.
                if j - i >= 2 {
                    let bloom_id = bloom_slots.len() as u32;
                    let offset = slots.len() as u32;
                    for &(_, _, ea, eb) in &pairs[i..j] {
                        let slot_idx = slots.len() as u32;
                        slots.push((ea, eb));
                        edge_to_blooms[ea as usize].push((bloom_id, slot_idx));
                        edge_to_blooms[eb as usize].push((bloom_id, slot_idx));
                    }
                    bloom_slots.push((offset, (j - i) as u32));
                    k.push((j - i) as u32);
                }
                i = j;
            }
        }

        let mut sup = vec![0u32; g.edge_count() as usize];
        for (bloom_id, &(off, len)) in bloom_slots.iter().enumerate() {
            let _ = bloom_id;
            for &(ea, eb) in &slots[off as usize..(off + len) as usize] {
                sup[ea as usize] += len - 1;
                sup[eb as usize] += len - 1;
            }
        }

        let topo = BloomTopology {
            slots,
            bloom_slots,
            edge_to_blooms,
        };
        let state = BloomState {
            k,
            slot_alive: vec![true; topo.slots.len()],
            edge_alive: alive_edge.to_vec(),
            sup,
        };
        (topo, state)
    }

    pub fn bloom_count(&self) -> usize {
        self.bloom_slots.len()
    }

    /// Member sizes of all blooms at build time.
    pub fn bloom_sizes(&self) -> Vec<u32> {
        self.bloom_slots.iter().map(|&(_, len)| len).collect()
    }
}

impl BloomState {
    pub fn sup(&self, e: u32) -> u32 {
        self.sup[e as usize]
    }

    pub fn supports(&self) -> &[u32] {
        &self.sup
    }

    pub fn is_alive(&self, e: u32) -> bool {
        self.edge_alive[e as usize]
    }

    /// Delete edge `e`, updating the supports of every edge that shared a
    /// butterfly with it. `buf.changed` afterwards lists (edge, new support)
    /// for exactly the alive edges whose support changed. Work is proportional
    /// to sup(e) plus the number of blooms holding `e`.
    pub fn delete_edge(&mut self, topo: &BloomTopology, e: u32, buf: &mut DeltaBuf) -> Result<()> {
        if !self.edge_alive[e as usize] {
            return Err(Error::AlreadyDeleted { edge: e });
        }
        buf.changed.clear();
        for &(bloom, slot) in &topo.edge_to_blooms[e as usize] {
            if !self.slot_alive[slot as usize] {
                continue;
            }
            let (ea, eb) = topo.slots[slot as usize];
            let twin = if ea == e { eb } else { ea };
            let kb = self.k[bloom as usize];
            // Every butterfly of this bloom through `e` pairs its member with
            // another alive member: the twin sits in all kb-1 of them, the
            // other members' edge pairs in one each.
            if kb > 1 {
                Self::bump(&mut buf.delta, &mut buf.touched, twin, kb - 1);
                let (off, len) = topo.bloom_slots[bloom as usize];
                for s in off..off + len {
                    if s != slot && self.slot_alive[s as usize] {
                        let (fa, fb) = topo.slots[s as usize];
                        Self::bump(&mut buf.delta, &mut buf.touched, fa, 1);
                        Self::bump(&mut buf.delta, &mut buf.touched, fb, 1);
                    }
                }
            }
            self.k[bloom as usize] = kb - 1;
            self.slot_alive[slot as usize] = false;
        }
        self.edge_alive[e as usize] = false;
        self.sup[e as usize] = 0;
        buf.touched.sort_unstable();
        for &f in &buf.touched {
            let d = buf.delta[f as usize];
            buf.delta[f as usize] = 0;
            if self.edge_alive[f as usize] {
                self.sup[f as usize] -= d;
                buf.changed.push((f, self.sup[f as usize]));
            }
        }
        buf.touched.clear();
        Ok(())
    }

    fn bump(delta: &mut [u32], touched: &mut Vec<u32>, e: u32, by: u32) {
        if delta[e as usize] == 0 {
            touched.push(e);
        }
        delta[e as usize] += by;
    }
}

/// Convenience wrapper owning both halves, for callers that do not snapshot.
#[derive(Debug, Clone)]
pub struct BloomEdgeIndex {
    pub topo: BloomTopology,
    pub state: BloomState,
    buf: DeltaBuf,
}

impl BloomEdgeIndex {
    pub fn new(g: &BipartiteGraph) -> Self {
        let alive = vec![true; g.edge_count() as usize];
        let (topo, state) = BloomTopology::build(g, &alive);
        Self {
            topo,
            state,
            buf: DeltaBuf::new(g.edge_count()),
        }
    }

    pub fn supports(&self) -> &[u32] {
        self.state.supports()
    }

    /// Delete `e` and return (edge, new support) for the edges affected.
    pub fn delete_edge(&mut self, e: u32) -> Result<Vec<(u32, u32)>> {
        self.state.delete_edge(&self.topo, e, &mut self.buf)?;
        Ok(self.buf.changed.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::butterfly::edge_supports;
    use crate::synth;

    #[test]
    fn k22_single_bloom() {
        let g = synth::complete_bipartite(2, 2);
        let idx = BloomEdgeIndex::new(&g);
        assert_eq!(idx.topo.bloom_count(), 1);
        assert_eq!(idx.topo.bloom_sizes(), vec![2]);
        assert_eq!(idx.supports(), &[1, 1, 1, 1]);
    }

    #[test]
    fn k33_three_blooms_of_size_three() {
        let g = synth::complete_bipartite(3, 3);
        let idx = BloomEdgeIndex::new(&g);
        assert_eq!(idx.topo.bloom_count(), 3);
        assert_eq!(idx.topo.bloom_sizes(), vec![3, 3, 3]);
        assert!(idx.supports().iter().all(|&s| s == 4));
    }

    #[test]
    fn butterfly_free_graph_has_no_blooms() {
        let g = synth::path_graph(5);
        let idx = BloomEdgeIndex::new(&g);
        assert_eq!(idx.topo.bloom_count(), 0);
        assert!(idx.supports().iter().all(|&s| s == 0));
    }

    #[test]
    fn build_matches_direct_supports() {
        for seed in 0..5 {
            let g = synth::random_bipartite(8, 9, 30, seed);
            let idx = BloomEdgeIndex::new(&g);
            assert_eq!(idx.supports(), &edge_supports(&g)[..], "seed {seed}");
        }
        let g = synth::demo_graph();
        assert_eq!(BloomEdgeIndex::new(&g).supports(), &edge_supports(&g)[..]);
    }

    #[test]
    fn k22_deletion_kills_the_butterfly() {
        let g = synth::complete_bipartite(2, 2);
        let mut idx = BloomEdgeIndex::new(&g);
        let e = g.find_edge(0, 0).unwrap();
        let changed = idx.delete_edge(e).unwrap();
        assert_eq!(changed.len(), 3);
        assert!(changed.iter().all(|&(_, s)| s == 0));
        // Deleting further edges changes nothing: the bloom is down to one
        // member, and a lone member supports no butterfly.
        let e2 = g.find_edge(1, 1).unwrap();
        let changed = idx.delete_edge(e2).unwrap();
        assert!(changed.is_empty());
        assert!(idx.delete_edge(e).is_err());
    }

    #[test]
    fn k33_deletion_matches_recount() {
        let g = synth::complete_bipartite(3, 3);
        let mut idx = BloomEdgeIndex::new(&g);
        let e = g.find_edge(0, 0).unwrap();
        idx.delete_edge(e).unwrap();
        // Rebuild the residual graph without that edge and recount.
        let residual: Vec<(u32, u32)> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i as u32 != e)
            .map(|(_, &p)| p)
            .collect();
        let rg = crate::graph::BipartiteGraph::from_edges(3, 3, residual).unwrap();
        let rsup = edge_supports(&rg);
        for f in 0..g.edge_count() {
            if f == e {
                continue;
            }
            let (u, v) = g.edge(f);
            let rf = rg.find_edge(u, v).unwrap();
            assert_eq!(idx.state.sup(f), rsup[rf as usize], "edge ({u},{v})");
        }
    }
}
