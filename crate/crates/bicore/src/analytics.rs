//! Cohesiveness metrics and parameter sweeps over cores.

use std::io::Write;

use crate::butterfly::{count_butterflies_total, count_caterpillars};
use crate::error::Result;
use crate::graph::{BipartiteGraph, Core};
use crate::peel::online_core;

/// Fraction of present edges over all possible ones, |E| / (|U| * |L|).
/// Zero when either layer is empty.
pub fn density(upper: usize, lower: usize, edges: usize) -> f64 {
    if upper == 0 || lower == 0 {
        return 0.0;
    }
    edges as f64 / (upper as f64 * lower as f64)
}

pub fn graph_density(g: &BipartiteGraph) -> f64 {
    density(
        g.upper_count() as usize,
        g.lower_count() as usize,
        g.edge_count() as usize,
    )
}

/// 4 times the butterfly count over the caterpillar (3-edge path) count.
/// Zero when there are no caterpillars.
pub fn clustering_coefficient(g: &BipartiteGraph) -> f64 {
    let cats = count_caterpillars(g);
    if cats == 0 {
        return 0.0;
    }
    4.0 * count_butterflies_total(g) as f64 / cats as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreProfileRow {
    pub alpha: u32,
    pub beta: u32,
    pub tau: u32,
    pub upper: usize,
    pub lower: usize,
    pub edges: usize,
    pub density: f64,
    pub clustering: f64,
}

fn row_for(g: &BipartiteGraph, alpha: u32, beta: u32, tau: u32, core: &Core) -> CoreProfileRow {
    let sub = core.subgraph(g);
    CoreProfileRow {
        alpha,
        beta,
        tau,
        upper: core.upper.len(),
        lower: core.lower.len(),
        edges: core.edges.len(),
        density: density(core.upper.len(), core.lower.len(), core.edges.len()),
        clustering: clustering_coefficient(&sub),
    }
}

/// Metric rows for every (alpha, beta) up to the graph's extremes, with tau
/// swept over 0 and geometrically spaced levels up to the strongest
/// nonempty one. Empty cores produce no row; output is capped at
/// `max_rows` rows (pass 10_000 for the default).
pub fn profile_cores(g: &BipartiteGraph, max_rows: usize) -> Vec<CoreProfileRow> {
    let st = crate::graph::stats(g);
    let mut taus = vec![0u32];
    let mut t = 1u32;
    while t <= st.tau_max {
        taus.push(t);
        t = (t * 2).max(t + 1);
    }
    if *taus.last().unwrap() < st.tau_max && st.tau_max >= 1 {
        taus.push(st.tau_max);
    }
    let mut rows = Vec::new();
    'outer: for alpha in 1..=st.alpha_max.max(1) {
        for beta in 1..=st.beta_max.max(1) {
            for &tau in &taus {
                if rows.len() >= max_rows {
                    break 'outer;
                }
                let core = online_core(g, alpha, beta, tau);
                if core.is_empty() {
                    continue;
                }
                rows.push(row_for(g, alpha, beta, tau, &core));
            }
        }
    }
    rows
}

/// Fixed (alpha, beta), every tau from 0 upward until the core dies. Used
/// for strength-sweep reporting.
pub fn tau_sweep(g: &BipartiteGraph, alpha: u32, beta: u32) -> Vec<CoreProfileRow> {
    let mut rows = Vec::new();
    let mut tau = 0u32;
    loop {
        let core = online_core(g, alpha, beta, tau);
        if core.is_empty() {
            break;
        }
        rows.push(row_for(g, alpha, beta, tau, &core));
        tau += 1;
    }
    rows
}

pub fn write_profile_csv<W: Write>(mut w: W, rows: &[CoreProfileRow]) -> Result<()> {
    writeln!(w, "alpha,beta,tau,upper,lower,edges,density,clustering")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.6},{:.6}",
            r.alpha, r.beta, r.tau, r.upper, r.lower, r.edges, r.density, r.clustering
        )?;
    }
    Ok(())
}
