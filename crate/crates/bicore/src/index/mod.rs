//! Precomputed query structures over the decomposition table.
//!
//! The total index answers any (alpha, beta, tau) vertex-set query by a
//! single pointer walk; the 2D variants trade build time and space for a
//! peel at query time. [`ser`] gives every kind one on-disk format.

pub mod ser;
pub mod twod;

use crate::decomp::{decompose_optimized, DecompResult};
use crate::graph::{BipartiteGraph, Core, Layer};
use crate::peel::degree_core;

pub use ser::{load_index, load_index_expecting, save_index, IndexKind, StoredIndex};
pub use twod::{build_2d_index, query_via_2d, TwoDIndex, TwoDKind};

/// One link of a per-(alpha, beta) chain: the vertices whose maximum
/// strength is exactly `tau`, and the next block up the strength order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexBlock {
    pub tau: u32,
    pub verts: Vec<u32>,
    pub next: Option<u32>,
}

/// Four-level lookup structure: alpha -> beta -> tau -> block chain. The
/// entry for (a, b, t) references the block with the smallest tau' >= t, so
/// a query is a bounds check plus a chain walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalIndex {
    table: DecompResult,
    blocks: Vec<VertexBlock>,
    /// entries[a-1][b-1][t-1] -> block id; the array length per (a, b) is
    /// the largest strength present there.
    entries: Vec<Vec<Vec<u32>>>,
}

/// Wire the table's runs into block chains. Linear in the table size.
pub fn build_total_index(table: DecompResult) -> TotalIndex {
    let mut blocks: Vec<VertexBlock> = Vec::new();
    let mut entries: Vec<Vec<Vec<u32>>> = Vec::with_capacity(table.runs.len());
    for per_beta in &table.runs {
        let mut beta_entries = Vec::with_capacity(per_beta.len());
        for runs in per_beta {
            let first = blocks.len() as u32;
            for (i, run) in runs.iter().enumerate() {
                let next = if i + 1 < runs.len() {
                    Some(first + i as u32 + 1)
                } else {
                    None
                };
                blocks.push(VertexBlock {
                    tau: run.tau,
                    verts: run.verts.clone(),
                    next,
                });
            }
            let tau_top = runs.last().map(|r| r.tau).unwrap_or(0);
            let mut entry = Vec::with_capacity(tau_top as usize);
            let mut at = 0usize;
            for t in 1..=tau_top {
                while runs[at].tau < t {
                    at += 1;
                }
                entry.push(first + at as u32);
            }
            beta_entries.push(entry);
        }
        entries.push(beta_entries);
    }
    TotalIndex {
        table,
        blocks,
        entries,
    }
}

impl TotalIndex {
    pub fn build(g: &BipartiteGraph) -> Self {
        build_total_index(decompose_optimized(g))
    }

    pub fn table(&self) -> &DecompResult {
        &self.table
    }

    pub fn alpha_max(&self) -> u32 {
        self.table.alpha_max
    }

    pub fn beta_max(&self, alpha: u32) -> u32 {
        self.table.beta_max(alpha)
    }

    /// Largest strength level stored for (alpha, beta); 0 when out of range.
    pub fn tau_top(&self, alpha: u32, beta: u32) -> u32 {
        self.entries
            .get(alpha as usize - 1)
            .and_then(|pb| pb.get(beta as usize - 1))
            .map(|e| e.len() as u32)
            .unwrap_or(0)
    }

    /// Chain walk: collect every vertex from the entry block to the end of
    /// the chain, then restore the induced edges from the graph.
    pub fn query(&self, g: &BipartiteGraph, alpha: u32, beta: u32, tau: u32) -> Core {
        assert!(alpha >= 1 && beta >= 1 && tau >= 1);
        let entry = match self
            .entries
            .get(alpha as usize - 1)
            .and_then(|pb| pb.get(beta as usize - 1))
        {
            Some(e) => e,
            None => return Core::empty(),
        };
        if tau as usize > entry.len() {
            return Core::empty();
        }
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        let mut ptr = Some(entry[tau as usize - 1]);
        while let Some(b) = ptr {
            let block = &self.blocks[b as usize];
            for &x in &block.verts {
                match g.split_flat(x) {
                    (Layer::Upper, u) => upper.push(u),
                    (Layer::Lower, v) => lower.push(v),
                }
            }
            ptr = block.next;
        }
        upper.sort_unstable();
        lower.sort_unstable();
        Core::induced(g, upper, lower)
    }
}

/// Query dispatch shared by the CLI and the router: strength level 0 has no
/// block chains (the strength-1 core can be a strict subgraph of the plain
/// degree core), so those queries run the degree peel directly. The AB kind
/// answers level 0 from its own tables instead.
pub fn query_stored(
    idx: &StoredIndex,
    g: &BipartiteGraph,
    alpha: u32,
    beta: u32,
    tau: u32,
) -> Core {
    match idx {
        StoredIndex::Total(t) => {
            if tau == 0 {
                degree_core(g, None, alpha, beta)
            } else {
                t.query(g, alpha, beta, tau)
            }
        }
        StoredIndex::TwoD(t) => {
            if tau == 0 && t.kind() != TwoDKind::Ab {
                degree_core(g, None, alpha, beta)
            } else {
                query_via_2d(t, g, alpha, beta, tau)
            }
        }
    }
}
