//! Full decomposition: for every reachable (alpha, beta) pair, the maximum
//! strength level at which each vertex still belongs to the core.
//!
//! The driver climbs alpha in an outer loop, beta in a middle loop, and for
//! each (alpha, beta) base runs a tau ladder: record the level, demote the
//! edges whose support equals the level, re-peel, repeat until nothing is
//! left. A vertex dropped at the tau -> tau+1 transition has strength
//! exactly tau for that base.
//!
//! The optimized variant shares work across parameters:
//!
//! * while laddering it tracks `beta_min[tau]`, the minimum lower-side
//!   engagement of the level-tau core. A vertex dropped at level tau keeps
//!   strength tau for every beta' up to `beta_min[tau]`, because the level-tau
//!   cores for those beta' coincide with the base's (a core whose minimum
//!   engagement already meets a raised threshold is itself the core for the
//!   raised threshold) and the level-(tau+1) cores only shrink. So one ladder
//!   writes a run of table entries per removal.
//! * after a base finishes, beta jumps to `min(beta_min) + 1`: every beta' at
//!   or below the minimum has an identical ladder, and the run writes above
//!   already produced its entries.
//! * alpha skips symmetrically using the minimum upper-side engagement seen
//!   across every core visited at the current alpha; the whole per-beta slice
//!   is copied for the skipped alpha values.
//! * edge deletions go through the bloom structure instead of butterfly
//!   re-enumeration.
//!
//! Run writes from different bases can overlap; overlapping entries always
//! agree (a vertex has one strength per (alpha, beta)), so normalization
//! dedups them and debug-asserts the agreement.

use crate::bloom::BloomTopology;
use crate::graph::{BipartiteGraph, Layer};
use crate::peel::{PeelCtx, PeelOrder, PeelState};

/// Vertices (flat ids, sorted) sharing one strength value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauRun {
    pub tau: u32,
    pub verts: Vec<u32>,
}

/// The decomposition table. `runs[a-1][b-1]` lists, in ascending tau order,
/// the vertices of the (a, b) strength-1 core grouped by their maximum
/// strength level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompResult {
    pub alpha_max: u32,
    /// Largest beta with a nonempty core, per alpha (index `alpha - 1`).
    pub beta_max_of: Vec<u32>,
    pub runs: Vec<Vec<Vec<TauRun>>>,
}

impl DecompResult {
    pub fn slice(&self, alpha: u32, beta: u32) -> Option<&[TauRun]> {
        self.runs
            .get(alpha as usize - 1)
            .and_then(|per_beta| per_beta.get(beta as usize - 1))
            .map(|r| r.as_slice())
    }

    /// Maximum strength level of `flat` in the (alpha, beta) core ladder, or
    /// None if the vertex never makes it into the strength-1 core.
    pub fn tau_max(&self, alpha: u32, beta: u32, flat: u32) -> Option<u32> {
        let slice = self.slice(alpha, beta)?;
        for run in slice {
            if run.verts.binary_search(&flat).is_ok() {
                return Some(run.tau);
            }
        }
        None
    }

    pub fn beta_max(&self, alpha: u32) -> u32 {
        self.beta_max_of
            .get(alpha as usize - 1)
            .copied()
            .unwrap_or(0)
    }
}

/// What the optimized driver did beyond plain iteration. Only emitted on
/// request; used to check that skipping decisions match the expected
/// engagement evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// Per-level minimum lower engagement observed while laddering a base.
    BetaMinArray {
        alpha: u32,
        base_beta: u32,
        beta_min: Vec<u32>,
    },
    /// The beta loop jumped from `base_beta` straight to `next_beta`,
    /// skipping everything in between.
    BetaSkip {
        alpha: u32,
        base_beta: u32,
        next_beta: u32,
    },
    /// The per-beta slice of `base_alpha` was reused verbatim for `to_alpha`.
    AlphaCopy { base_alpha: u32, to_alpha: u32 },
}

/// Which part of the table to build. The 2D indexes only need one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TableMode {
    Full,
    FixAlpha1,
    FixBeta1,
}

/// Baseline construction: no skipping, butterfly recount on every deletion.
pub fn decompose(g: &BipartiteGraph) -> DecompResult {
    drive(g, TableMode::Full, false, None)
}

/// Same table as [`decompose`], with run writes, beta/alpha jumps, and
/// bloom-routed deletions.
pub fn decompose_optimized(g: &BipartiteGraph) -> DecompResult {
    drive(g, TableMode::Full, true, None)
}

/// Optimized construction that also reports its skipping decisions.
pub fn decompose_optimized_with_trace(g: &BipartiteGraph) -> (DecompResult, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let table = drive(g, TableMode::Full, true, Some(&mut events));
    (table, events)
}

/// Restricted table for the 2D index builds.
pub(crate) fn decompose_table(g: &BipartiteGraph, mode: TableMode) -> DecompResult {
    drive(g, mode, true, None)
}

fn drive(
    g: &BipartiteGraph,
    mode: TableMode,
    optimized: bool,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> DecompResult {
    let mut runs: Vec<Vec<Vec<TauRun>>> = Vec::new();
    let mut beta_max_of: Vec<u32> = Vec::new();
    if g.edge_count() == 0 {
        return DecompResult {
            alpha_max: 0,
            beta_max_of,
            runs,
        };
    }

    let alpha_cap = match mode {
        TableMode::FixAlpha1 => 1,
        _ => u32::MAX,
    };
    let beta_cap = match mode {
        TableMode::FixBeta1 => 1,
        _ => u32::MAX,
    };

    // Climbs (alpha, 1) cores destructively across the outer loop.
    let mut master = PeelState::new(g, 1);
    let mut cur_topo: Option<BloomTopology> = None;
    let mut alpha = 1u32;
    let alpha_max = loop {
        master.peel(
            PeelCtx {
                g,
                topo: cur_topo.as_ref(),
                alpha,
                beta: 1,
            },
            PeelOrder::Deterministic,
            None,
            None,
        );
        if master.is_empty() {
            break alpha - 1;
        }
        if optimized {
            // Fresh bloom structure on the residual; stale weak-tie supports
            // in `master` are replaced by exact ones.
            let (topo, state) = BloomTopology::build(g, master.alive_edges());
            master.adopt_bloom(state);
            cur_topo = Some(topo);
        }

        // Entry accumulator for this alpha: acc[b-1] collects (flat, tau)
        // pairs, possibly with duplicates from overlapping run writes.
        let mut acc: Vec<Vec<(u32, u32)>> = Vec::new();
        let mut min_upper_eng = u32::MAX;
        let mut covered_beta = 0u32;

        // Climbs (alpha, beta) cores destructively across the middle loop.
        let mut beta_state = master.clone();
        let mut beta = 1u32;
        while beta <= beta_cap {
            beta_state.peel(
                PeelCtx {
                    g,
                    topo: cur_topo.as_ref(),
                    alpha,
                    beta,
                },
                PeelOrder::Deterministic,
                None,
                None,
            );
            if beta_state.is_empty() {
                break;
            }

            let mut ladder = beta_state.clone();
            let mut beta_min: Vec<u32> = Vec::new();
            let mut dropped: Vec<(u32, Vec<u32>)> = Vec::new();
            let mut tau_level = 1u32;
            loop {
                beta_min.push(ladder.min_eng(Layer::Lower).unwrap());
                if optimized {
                    min_upper_eng = min_upper_eng.min(ladder.min_eng(Layer::Upper).unwrap());
                }
                let hint = ladder.advance_tau(g);
                let mut removed = Vec::new();
                ladder.peel(
                    PeelCtx {
                        g,
                        topo: cur_topo.as_ref(),
                        alpha,
                        beta,
                    },
                    PeelOrder::Deterministic,
                    Some(&hint),
                    Some(&mut removed),
                );
                dropped.push((tau_level, removed));
                if ladder.is_empty() {
                    break;
                }
                tau_level += 1;
            }

            for (tau, verts) in &dropped {
                let hi = if optimized {
                    beta_min[*tau as usize - 1].min(beta_cap)
                } else {
                    beta
                };
                for b in beta..=hi {
                    if acc.len() < b as usize {
                        acc.resize(b as usize, Vec::new());
                    }
                    let slot = &mut acc[b as usize - 1];
                    for &x in verts {
                        slot.push((x, *tau));
                    }
                }
            }

            let beta_star = if optimized {
                *beta_min.iter().min().unwrap()
            } else {
                beta
            };
            debug_assert!(beta_star >= beta);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEvent::BetaMinArray {
                    alpha,
                    base_beta: beta,
                    beta_min: beta_min.clone(),
                });
                if beta_star > beta {
                    tr.push(TraceEvent::BetaSkip {
                        alpha,
                        base_beta: beta,
                        next_beta: beta_star + 1,
                    });
                }
            }
            covered_beta = beta_star.min(beta_cap);
            beta = beta_star + 1;
        }

        let beta_max = covered_beta;
        debug_assert_eq!(acc.len() as u32, beta_max);
        let mut slices: Vec<Vec<TauRun>> = Vec::with_capacity(beta_max as usize);
        for slot in &mut acc {
            let mut entries = std::mem::take(slot);
            entries.sort_unstable();
            entries.dedup();
            debug_assert!(
                entries.windows(2).all(|w| w[0].0 != w[1].0),
                "run writes disagree on a vertex strength"
            );
            entries.sort_unstable_by_key(|&(x, t)| (t, x));
            let mut per_beta: Vec<TauRun> = Vec::new();
            for (x, t) in entries {
                match per_beta.last_mut() {
                    Some(run) if run.tau == t => run.verts.push(x),
                    _ => per_beta.push(TauRun {
                        tau: t,
                        verts: vec![x],
                    }),
                }
            }
            slices.push(per_beta);
        }

        let alpha_star = if optimized {
            debug_assert!(min_upper_eng >= alpha);
            min_upper_eng.min(alpha_cap)
        } else {
            alpha
        };
        runs.push(slices);
        beta_max_of.push(beta_max);
        for a2 in alpha + 1..=alpha_star {
            let copy = runs[alpha as usize - 1].clone();
            runs.push(copy);
            beta_max_of.push(beta_max);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEvent::AlphaCopy {
                    base_alpha: alpha,
                    to_alpha: a2,
                });
            }
        }
        alpha = alpha_star + 1;
        if alpha > alpha_cap {
            break runs.len() as u32;
        }
    };

    debug_assert_eq!(runs.len() as u32, alpha_max);
    DecompResult {
        alpha_max,
        beta_max_of,
        runs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peel::online_core;
    use crate::synth;

    fn flats(g: &BipartiteGraph, uppers: &[u32], lowers: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = uppers.iter().map(|&u| g.flat_upper(u)).collect();
        out.extend(lowers.iter().map(|&v| g.flat_lower(v)));
        out.sort_unstable();
        out
    }

    #[test]
    fn complete_graph_table() {
        let g = synth::complete_bipartite(2, 2);
        let t = decompose(&g);
        assert_eq!(t.alpha_max, 2);
        assert_eq!(t.beta_max_of, vec![2, 2]);
        let all = flats(&g, &[0, 1], &[0, 1]);
        for a in 1..=2 {
            for b in 1..=2 {
                assert_eq!(
                    t.slice(a, b).unwrap(),
                    &[TauRun {
                        tau: 1,
                        verts: all.clone()
                    }]
                );
            }
        }
    }

    #[test]
    fn demo_graph_strengths() {
        let g = synth::demo_graph();
        let t = decompose_optimized(&g);
        assert_eq!(t.alpha_max, 3);
        assert_eq!(t.beta_max_of, vec![3, 3, 2]);

        // At alpha=1 the left trio drops one level early; everything else
        // survives to level 2. Identical for beta=1 and beta=2.
        let trio = flats(&g, &[0], &[0, 1]);
        let rest = flats(&g, &[1, 2, 3, 4, 5], &[2, 3, 4, 5, 6]);
        for b in 1..=2 {
            assert_eq!(
                t.slice(1, b).unwrap(),
                &[
                    TauRun {
                        tau: 1,
                        verts: trio.clone()
                    },
                    TauRun {
                        tau: 2,
                        verts: rest.clone()
                    }
                ]
            );
        }
        // At (1,3) only the tight square block remains and it holds to 2.
        let block = flats(&g, &[1, 2, 3], &[2, 3]);
        assert_eq!(
            t.slice(1, 3).unwrap(),
            &[TauRun {
                tau: 2,
                verts: block
            }]
        );
        // alpha=2 is a copy of alpha=1.
        assert_eq!(t.runs[1], t.runs[0]);
        // alpha=3 keeps only the right block, strength 2 throughout.
        let right = flats(&g, &[4, 5], &[4, 5, 6]);
        for b in 1..=2 {
            assert_eq!(
                t.slice(3, b).unwrap(),
                &[TauRun {
                    tau: 2,
                    verts: right.clone()
                }]
            );
        }
        assert_eq!(t.tau_max(1, 1, g.flat_upper(0)), Some(1));
        assert_eq!(t.tau_max(1, 3, g.flat_upper(0)), None);
        assert_eq!(t.tau_max(3, 2, g.flat_lower(6)), Some(2));
    }

    #[test]
    fn demo_graph_trace() {
        let g = synth::demo_graph();
        let (t, events) = decompose_optimized_with_trace(&g);
        assert_eq!(t, decompose(&g));
        assert!(events.contains(&TraceEvent::BetaMinArray {
            alpha: 1,
            base_beta: 1,
            beta_min: vec![2, 2],
        }));
        assert!(events.contains(&TraceEvent::BetaSkip {
            alpha: 1,
            base_beta: 1,
            next_beta: 3,
        }));
        assert!(events.contains(&TraceEvent::AlphaCopy {
            base_alpha: 1,
            to_alpha: 2,
        }));
        // beta=2 must not appear as a base anywhere at alpha=1.
        assert!(!events.iter().any(|e| matches!(
            e,
            TraceEvent::BetaMinArray {
                alpha: 1,
                base_beta: 2,
                ..
            }
        )));
    }

    #[test]
    fn optimized_matches_baseline() {
        let cases = [
            synth::demo_graph(),
            synth::complete_bipartite(3, 3),
            synth::complete_bipartite(2, 4),
            synth::path_graph(7),
            synth::star(5),
            synth::random_bipartite(12, 10, 40, 7),
            synth::random_bipartite(15, 15, 70, 99),
            synth::random_bipartite(8, 20, 50, 3),
        ];
        for (i, g) in cases.iter().enumerate() {
            let naive = decompose(g);
            let opt = decompose_optimized(g);
            assert_eq!(naive, opt, "case {i}");
        }
    }

    #[test]
    fn table_agrees_with_online_cores() {
        // The strength-t survivors of each (a, b) slice must be exactly the
        // vertex set of the online (a, b)_t core.
        let g = synth::random_bipartite(10, 10, 45, 21);
        let t = decompose_optimized(&g);
        for a in 1..=t.alpha_max {
            for b in 1..=t.beta_max(a) {
                let slice = t.slice(a, b).unwrap();
                let tau_top = slice.last().map(|r| r.tau).unwrap_or(0);
                for tau in 1..=tau_top {
                    let mut verts: Vec<u32> = slice
                        .iter()
                        .filter(|r| r.tau >= tau)
                        .flat_map(|r| r.verts.iter().copied())
                        .collect();
                    verts.sort_unstable();
                    let core = online_core(&g, a, b, tau);
                    let expect = flats(&g, &core.upper, &core.lower);
                    assert_eq!(verts, expect, "a={a} b={b} tau={tau}");
                }
            }
        }
    }

    #[test]
    fn restricted_modes_match_full_axes() {
        let g = synth::demo_graph();
        let full = decompose_table(&g, TableMode::Full);
        let bt = decompose_table(&g, TableMode::FixAlpha1);
        assert_eq!(bt.alpha_max, 1);
        assert_eq!(bt.runs[0], full.runs[0]);
        assert_eq!(bt.beta_max_of, vec![full.beta_max_of[0]]);
        let at = decompose_table(&g, TableMode::FixBeta1);
        assert_eq!(at.alpha_max, full.alpha_max);
        for a in 1..=full.alpha_max {
            assert_eq!(at.beta_max(a), 1);
            assert_eq!(at.slice(a, 1).unwrap(), full.slice(a, 1).unwrap());
        }
    }

    #[test]
    fn empty_graph() {
        let g = BipartiteGraph::from_edges(3, 3, Vec::new()).unwrap();
        let t = decompose_optimized(&g);
        assert_eq!(t.alpha_max, 0);
        assert!(t.runs.is_empty());
        assert_eq!(t.tau_max(1, 1, 0), None);
    }
}
