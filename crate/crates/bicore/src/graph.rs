use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Which side of the bipartition a vertex lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Upper,
    Lower,
}

/// Immutable two-layer graph. Upper and lower vertices have disjoint dense id
/// spaces `0..upper_count` and `0..lower_count`; edges are stored sorted
/// lexicographically and the edge id is the position in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    upper_count: u32,
    lower_count: u32,
    edges: Vec<(u32, u32)>,
    adj_upper: Vec<Vec<(u32, u32)>>,
    adj_lower: Vec<Vec<(u32, u32)>>,
}

impl BipartiteGraph {
    /// Build a graph from (upper, lower) pairs. Duplicates are collapsed,
    /// out-of-range endpoints are rejected.
    pub fn from_edges(
        upper_count: u32,
        lower_count: u32,
        mut edges: Vec<(u32, u32)>,
    ) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= upper_count || v >= lower_count {
                return Err(Error::InvalidEdge {
                    upper: u,
                    lower: v,
                    msg: format!(
                        "endpoint out of range for layer sizes ({upper_count}, {lower_count})"
                    ),
                });
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adj_upper = vec![Vec::new(); upper_count as usize];
        let mut adj_lower = vec![Vec::new(); lower_count as usize];
        for (eid, &(u, v)) in edges.iter().enumerate() {
            adj_upper[u as usize].push((v, eid as u32));
            adj_lower[v as usize].push((u, eid as u32));
        }
        // Edges are sorted by (u, v), so adj_upper lists are already sorted by
        // neighbor; adj_lower lists need it.
        for list in &mut adj_lower {
            list.sort_unstable();
        }
        Ok(Self {
            upper_count,
            lower_count,
            edges,
            adj_upper,
            adj_lower,
        })
    }

    pub fn upper_count(&self) -> u32 {
        self.upper_count
    }

    pub fn lower_count(&self) -> u32 {
        self.lower_count
    }

    pub fn vertex_count(&self) -> u32 {
        self.upper_count + self.lower_count
    }

    pub fn edge_count(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Endpoints of edge `e` as (upper, lower).
    pub fn edge(&self, e: u32) -> (u32, u32) {
        self.edges[e as usize]
    }

    /// Neighbors of upper vertex `u` as (lower id, edge id), sorted by neighbor.
    pub fn adj_upper(&self, u: u32) -> &[(u32, u32)] {
        &self.adj_upper[u as usize]
    }

    /// Neighbors of lower vertex `v` as (upper id, edge id), sorted by neighbor.
    pub fn adj_lower(&self, v: u32) -> &[(u32, u32)] {
        &self.adj_lower[v as usize]
    }

    pub fn deg_upper(&self, u: u32) -> u32 {
        self.adj_upper[u as usize].len() as u32
    }

    pub fn deg_lower(&self, v: u32) -> u32 {
        self.adj_lower[v as usize].len() as u32
    }

    /// Edge id of (u, v) if present.
    pub fn find_edge(&self, u: u32, v: u32) -> Option<u32> {
        let list = &self.adj_upper[u as usize];
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| list[i].1)
    }

    /// Flattened vertex id: upper vertices keep their id, lower vertices are
    /// offset by `upper_count`. Used wherever both layers share one id space
    /// (decomposition tables, index blocks).
    pub fn flat_upper(&self, u: u32) -> u32 {
        debug_assert!(u < self.upper_count);
        u
    }

    pub fn flat_lower(&self, v: u32) -> u32 {
        debug_assert!(v < self.lower_count);
        self.upper_count + v
    }

    pub fn split_flat(&self, x: u32) -> (Layer, u32) {
        if x < self.upper_count {
            (Layer::Upper, x)
        } else {
            (Layer::Lower, x - self.upper_count)
        }
    }
}

/// Vertex and edge set of a subgraph of some `BipartiteGraph`, in internal ids.
/// All three lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Core {
    pub upper: Vec<u32>,
    pub lower: Vec<u32>,
    pub edges: Vec<u32>,
}

impl Core {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty() && self.lower.is_empty()
    }

    /// Induced subgraph on the given sorted vertex lists: keeps every edge of
    /// `g` with both endpoints inside. Edge recovery scans the adjacency of the
    /// smaller side against a membership bitmap of the other side.
    pub fn induced(g: &BipartiteGraph, upper: Vec<u32>, lower: Vec<u32>) -> Self {
        debug_assert!(upper.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(lower.windows(2).all(|w| w[0] < w[1]));
        let mut edges = Vec::new();
        if upper.len() <= lower.len() {
            let mut in_lower = vec![false; g.lower_count() as usize];
            for &v in &lower {
                in_lower[v as usize] = true;
            }
            for &u in &upper {
                for &(v, eid) in g.adj_upper(u) {
                    if in_lower[v as usize] {
                        edges.push(eid);
                    }
                }
            }
        } else {
            let mut in_upper = vec![false; g.upper_count() as usize];
            for &u in &upper {
                in_upper[u as usize] = true;
            }
            for &v in &lower {
                for &(u, eid) in g.adj_lower(v) {
                    if in_upper[u as usize] {
                        edges.push(eid);
                    }
                }
            }
        }
        edges.sort_unstable();
        Self {
            upper,
            lower,
            edges,
        }
    }

    /// Standalone graph over this core's vertices, ids compacted to
    /// 0..upper.len() and 0..lower.len() in sorted order.
    pub fn subgraph(&self, g: &BipartiteGraph) -> BipartiteGraph {
        let mut up_map = vec![u32::MAX; g.upper_count() as usize];
        for (i, &u) in self.upper.iter().enumerate() {
            up_map[u as usize] = i as u32;
        }
        let mut lo_map = vec![u32::MAX; g.lower_count() as usize];
        for (i, &v) in self.lower.iter().enumerate() {
            lo_map[v as usize] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .map(|&e| {
                let (u, v) = g.edge(e);
                (up_map[u as usize], lo_map[v as usize])
            })
            .collect();
        BipartiteGraph::from_edges(self.upper.len() as u32, self.lower.len() as u32, edges)
            .expect("core edges reference core vertices")
    }

    /// Hash of the edge set in external ids, independent of how the core was
    /// computed: 64-bit FNV-1a over the externally-sorted (u64, u64) pairs.
    pub fn result_hash(&self, lg: &LoadedGraph) -> u64 {
        let mut pairs: Vec<(u64, u64)> = self.edges.iter().map(|&e| lg.external_edge(e)).collect();
        pairs.sort_unstable();
        crate::hash::fnv1a_64(
            pairs
                .iter()
                .flat_map(|&(a, b)| a.to_le_bytes().into_iter().chain(b.to_le_bytes())),
        )
    }
}

/// A graph together with the external ids it was loaded with.
/// `upper_ext[internal]` / `lower_ext[internal]` recover the input ids.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: BipartiteGraph,
    pub upper_ext: Vec<u64>,
    pub lower_ext: Vec<u64>,
}

impl LoadedGraph {
    /// Parse an edge list: two integer tokens per line, `%`/`#` lines are
    /// comments, blank lines skipped. External ids are compacted to dense
    /// 0-based ranges per layer (sorted ascending).
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs: Vec<(u64, u64)> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
                continue;
            }
            let mut tok = t.split_whitespace();
            let a = tok.next();
            let b = tok.next();
            let rest = tok.next();
            match (a, b, rest) {
                (Some(a), Some(b), None) => {
                    let u: u64 = a.parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("not an integer: {a:?}"),
                    })?;
                    let v: u64 = b.parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("not an integer: {b:?}"),
                    })?;
                    pairs.push((u, v));
                }
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected two integer tokens, got {t:?}"),
                    })
                }
            }
        }
        Self::from_pairs(&pairs)
    }

    /// Build from external (upper, lower) pairs, deduplicating and compacting.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self> {
        let mut upper_ext: Vec<u64> = pairs.iter().map(|p| p.0).collect();
        let mut lower_ext: Vec<u64> = pairs.iter().map(|p| p.1).collect();
        upper_ext.sort_unstable();
        upper_ext.dedup();
        lower_ext.sort_unstable();
        lower_ext.dedup();
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .map(|&(u, v)| {
                let iu = upper_ext.binary_search(&u).unwrap() as u32;
                let iv = lower_ext.binary_search(&v).unwrap() as u32;
                (iu, iv)
            })
            .collect();
        let graph =
            BipartiteGraph::from_edges(upper_ext.len() as u32, lower_ext.len() as u32, edges)?;
        Ok(Self {
            graph,
            upper_ext,
            lower_ext,
        })
    }

    /// Internal edge id to external (upper, lower) pair.
    pub fn external_edge(&self, e: u32) -> (u64, u64) {
        let (u, v) = self.graph.edge(e);
        (self.upper_ext[u as usize], self.lower_ext[v as usize])
    }

    /// Write the graph back out as an edge list in external ids.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for e in 0..self.graph.edge_count() {
            let (u, v) = self.external_edge(e);
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    /// Wrap a graph that already uses dense ids (external = internal).
    pub fn from_internal(graph: BipartiteGraph) -> Self {
        let upper_ext = (0..graph.upper_count() as u64).collect();
        let lower_ext = (0..graph.lower_count() as u64).collect();
        Self {
            graph,
            upper_ext,
            lower_ext,
        }
    }
}

/// Global structural statistics of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub n: u32,
    pub m: u32,
    pub d_max_upper: u32,
    pub d_max_lower: u32,
    /// Largest k with a nonempty k-core when layers are ignored.
    pub degeneracy: u32,
    pub alpha_max: u32,
    pub beta_max: u32,
    pub tau_max: u32,
}

/// Compute [`GraphStats`]. `alpha_max`/`beta_max`/`tau_max` are the largest
/// parameters with a nonempty (a,1) / (1,b) / (1,1) core at strength level 1;
/// on butterfly-free graphs (where every level-1 core is empty) `alpha_max`
/// and `beta_max` fall back to the degree-only (strength level 0) cores.
pub fn stats(g: &BipartiteGraph) -> GraphStats {
    let n = g.vertex_count();
    let m = g.edge_count();
    let d_max_upper = (0..g.upper_count())
        .map(|u| g.deg_upper(u))
        .max()
        .unwrap_or(0);
    let d_max_lower = (0..g.lower_count())
        .map(|v| g.deg_lower(v))
        .max()
        .unwrap_or(0);
    if m == 0 {
        return GraphStats {
            n,
            m,
            d_max_upper,
            d_max_lower,
            degeneracy: 0,
            alpha_max: 0,
            beta_max: 0,
            tau_max: 0,
        };
    }
    let degeneracy = degeneracy(g);
    let tau_max = crate::peel::max_strength_level(g);
    let (alpha_max, beta_max) = if tau_max == 0 {
        (crate::peel::max_alpha(g, 0), crate::peel::max_beta(g, 0))
    } else {
        (crate::peel::max_alpha(g, 1), crate::peel::max_beta(g, 1))
    };
    GraphStats {
        n,
        m,
        d_max_upper,
        d_max_lower,
        degeneracy,
        alpha_max,
        beta_max,
        tau_max,
    }
}

/// Standard min-degree peel over the graph with layers ignored: the largest
/// minimum degree seen when vertices are removed in nondecreasing degree order.
fn degeneracy(g: &BipartiteGraph) -> u32 {
    let n = g.vertex_count() as usize;
    if g.edge_count() == 0 {
        return 0;
    }
    let mut deg: Vec<u32> = (0..g.upper_count())
        .map(|u| g.deg_upper(u))
        .chain((0..g.lower_count()).map(|v| g.deg_lower(v)))
        .collect();
    let max_deg = *deg.iter().max().unwrap() as usize;
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
    for (x, &d) in deg.iter().enumerate() {
        buckets[d as usize].push(x as u32);
    }
    let mut alive = vec![true; n];
    let mut removed = 0usize;
    let mut cur = 0usize;
    let mut delta = 0u32;
    while removed < n {
        // Lazy buckets: entries are stale when the vertex moved down since.
        while cur <= max_deg && buckets[cur].is_empty() {
            cur += 1;
        }
        let x = match buckets[cur].pop() {
            Some(x) => x,
            None => break,
        };
        if !alive[x as usize] || deg[x as usize] as usize != cur {
            continue;
        }
        alive[x as usize] = false;
        removed += 1;
        delta = delta.max(cur as u32);
        let (layer, id) = g.split_flat(x);
        let nbrs: Vec<u32> = match layer {
            Layer::Upper => g
                .adj_upper(id)
                .iter()
                .map(|&(v, _)| g.flat_lower(v))
                .collect(),
            Layer::Lower => g
                .adj_lower(id)
                .iter()
                .map(|&(u, _)| g.flat_upper(u))
                .collect(),
        };
        for y in nbrs {
            if alive[y as usize] {
                deg[y as usize] -= 1;
                let d = deg[y as usize] as usize;
                buckets[d].push(y);
                if d < cur {
                    cur = d;
                }
            }
        }
    }
    delta
}
