//! Two-parameter index variants. Each stores one axis of the full table and
//! recovers the third parameter at query time with a seeded peel: fetch the
//! stored core, restore its edges, then peel it under the full constraints.
//!
//! * BT keys (beta, tau) with alpha fixed to 1.
//! * AT keys (alpha, tau) with beta fixed to 1.
//! * AB keys (alpha, beta) at strength level 0 via two degree ladders: per
//!   upper vertex the largest beta it survives at each alpha, and the
//!   transpose for lower vertices. Level-0 queries read the answer off the
//!   ladders directly.

use crate::decomp::{decompose_table, DecompResult, TableMode};
use crate::graph::{BipartiteGraph, Core, Layer};
use crate::peel::{core_from_seed, degree_core};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoDKind {
    Ab,
    Bt,
    At,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoDIndex {
    kind: TwoDKind,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// Strength table with the other parameter fixed to 1.
    Axis(DecompResult),
    Ab {
        /// upper[a-1][b-1]: upper vertices whose largest surviving beta at
        /// alpha = a is exactly b.
        upper: Vec<Vec<Vec<u32>>>,
        /// lower[b-1][a-1]: the transpose for lower vertices.
        lower: Vec<Vec<Vec<u32>>>,
    },
}

impl TwoDIndex {
    pub fn kind(&self) -> TwoDKind {
        self.kind
    }

    pub(crate) fn axis_table(&self) -> Option<&DecompResult> {
        match &self.repr {
            Repr::Axis(t) => Some(t),
            Repr::Ab { .. } => None,
        }
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn ab_tables(&self) -> Option<(&[Vec<Vec<u32>>], &[Vec<Vec<u32>>])> {
        match &self.repr {
            Repr::Ab { upper, lower } => Some((upper, lower)),
            Repr::Axis(_) => None,
        }
    }

    pub(crate) fn from_axis(kind: TwoDKind, table: DecompResult) -> Self {
        debug_assert!(kind != TwoDKind::Ab);
        Self {
            kind,
            repr: Repr::Axis(table),
        }
    }

    pub(crate) fn from_ab(upper: Vec<Vec<Vec<u32>>>, lower: Vec<Vec<Vec<u32>>>) -> Self {
        Self {
            kind: TwoDKind::Ab,
            repr: Repr::Ab { upper, lower },
        }
    }
}

pub fn build_2d_index(g: &BipartiteGraph, kind: TwoDKind) -> TwoDIndex {
    match kind {
        TwoDKind::Bt => TwoDIndex::from_axis(kind, decompose_table(g, TableMode::FixAlpha1)),
        TwoDKind::At => TwoDIndex::from_axis(kind, decompose_table(g, TableMode::FixBeta1)),
        TwoDKind::Ab => {
            let upper = degree_ladder(g, Layer::Upper);
            let lower = degree_ladder(g, Layer::Lower);
            TwoDIndex::from_ab(upper, lower)
        }
    }
}

/// For the primary layer: out[p-1][q-1] holds its vertices whose largest
/// surviving secondary threshold at primary threshold p is exactly q.
/// Primary = alpha for the upper layer, beta for the lower layer.
fn degree_ladder(g: &BipartiteGraph, layer: Layer) -> Vec<Vec<Vec<u32>>> {
    let own_count = match layer {
        Layer::Upper => g.upper_count(),
        Layer::Lower => g.lower_count(),
    };
    let mut out = Vec::new();
    let mut primary_seed: Option<Core> = None;
    let mut p = 1u32;
    loop {
        let (alpha, beta) = match layer {
            Layer::Upper => (p, 1),
            Layer::Lower => (1, p),
        };
        let base = degree_core(g, primary_seed.as_ref(), alpha, beta);
        if base.is_empty() {
            break;
        }
        let mut max_q = vec![0u32; own_count as usize];
        let mut cur = base.clone();
        let mut q = 1u32;
        while !cur.is_empty() {
            let own = match layer {
                Layer::Upper => &cur.upper,
                Layer::Lower => &cur.lower,
            };
            for &x in own {
                max_q[x as usize] = q;
            }
            q += 1;
            let (alpha, beta) = match layer {
                Layer::Upper => (p, q),
                Layer::Lower => (q, p),
            };
            cur = degree_core(g, Some(&cur), alpha, beta);
        }
        let mut row = vec![Vec::new(); q as usize - 1];
        for x in 0..own_count {
            let m = max_q[x as usize];
            if m > 0 {
                row[m as usize - 1].push(x);
            }
        }
        out.push(row);
        primary_seed = Some(base);
        p += 1;
    }
    out
}

/// Vertex set of the (alpha, beta) degree core straight off the ladders.
fn ab_core(
    g: &BipartiteGraph,
    upper: &[Vec<Vec<u32>>],
    lower: &[Vec<Vec<u32>>],
    alpha: u32,
    beta: u32,
) -> Core {
    let urow = match upper.get(alpha as usize - 1) {
        Some(r) => r,
        None => return Core::empty(),
    };
    let lrow = match lower.get(beta as usize - 1) {
        Some(r) => r,
        None => return Core::empty(),
    };
    if beta as usize > urow.len() || alpha as usize > lrow.len() {
        return Core::empty();
    }
    let mut us: Vec<u32> = urow[beta as usize - 1..]
        .iter()
        .flat_map(|b| b.iter().copied())
        .collect();
    let mut vs: Vec<u32> = lrow[alpha as usize - 1..]
        .iter()
        .flat_map(|b| b.iter().copied())
        .collect();
    us.sort_unstable();
    vs.sort_unstable();
    Core::induced(g, us, vs)
}

/// Seed core from one axis of the strength table: all vertices of the slice
/// with strength >= tau, with induced edges.
fn axis_seed(g: &BipartiteGraph, table: &DecompResult, alpha: u32, beta: u32, tau: u32) -> Core {
    let slice = match table.slice(alpha, beta) {
        Some(s) => s,
        None => return Core::empty(),
    };
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for run in slice.iter().filter(|r| r.tau >= tau) {
        for &x in &run.verts {
            match g.split_flat(x) {
                (Layer::Upper, u) => upper.push(u),
                (Layer::Lower, v) => lower.push(v),
            }
        }
    }
    if upper.is_empty() && lower.is_empty() {
        return Core::empty();
    }
    upper.sort_unstable();
    lower.sort_unstable();
    Core::induced(g, upper, lower)
}

pub fn query_via_2d(idx: &TwoDIndex, g: &BipartiteGraph, alpha: u32, beta: u32, tau: u32) -> Core {
    assert!(alpha >= 1 && beta >= 1);
    assert!(tau >= 1 || idx.kind == TwoDKind::Ab);
    match &idx.repr {
        Repr::Ab { upper, lower } => {
            let seed = ab_core(g, upper, lower, alpha, beta);
            if tau == 0 {
                seed
            } else {
                core_from_seed(g, &seed, alpha, beta, tau)
            }
        }
        Repr::Axis(table) => {
            let seed = match idx.kind {
                TwoDKind::Bt => axis_seed(g, table, 1, beta, tau),
                TwoDKind::At => axis_seed(g, table, alpha, 1, tau),
                TwoDKind::Ab => unreachable!(),
            };
            core_from_seed(g, &seed, alpha, beta, tau)
        }
    }
}
