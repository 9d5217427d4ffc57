use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bloom::{BloomState, BloomTopology, DeltaBuf};
use crate::butterfly;
use crate::graph::{BipartiteGraph, Core, Layer};

/// Which violating vertex to remove first. The result is the same either way;
/// `Random` exists so tests can assert that.
#[derive(Debug, Clone, Copy)]
pub enum PeelOrder {
    /// Lowest engagement first, ties upper layer first, then lowest id.
    Deterministic,
    /// Uniformly among the current violators, seeded.
    Random(u64),
}

/// Residual graph plus the support/engagement bookkeeping a peel needs.
/// Supports of weak ties are allowed to go stale: once an edge's tracked
/// support falls below the strength level it is never read for anything but
/// "still weak", and thresholds only rise.
#[derive(Debug, Clone)]
pub(crate) struct PeelState {
    pub tau: u32,
    alive_u: Vec<bool>,
    alive_l: Vec<bool>,
    alive_e: Vec<bool>,
    n_alive: u32,
    pub eng_u: Vec<u32>,
    pub eng_l: Vec<u32>,
    pub sup: Vec<u32>,
    /// Lazy buckets keyed by support value; an edge is pushed whenever its
    /// support lands on a value, entries are validated when drained.
    sup_buckets: Vec<Vec<u32>>,
    /// When set, edge deletions route through the bloom index and supports of
    /// all affected edges stay exact.
    bloom: Option<BloomState>,
    delta_buf: DeltaBuf,
}

/// Everything a peel needs besides the mutable state: the graph, the optional
/// bloom routing for edge deletions, and the engagement thresholds.
#[derive(Clone, Copy)]
pub(crate) struct PeelCtx<'a> {
    pub g: &'a BipartiteGraph,
    pub topo: Option<&'a BloomTopology>,
    pub alpha: u32,
    pub beta: u32,
}

enum Agenda {
    Heap(BinaryHeap<Reverse<(u32, u8, u32)>>),
    Pool(Vec<(u8, u32)>, Box<ChaCha8Rng>),
}

impl Agenda {
    fn push(&mut self, eng: u32, layer: u8, id: u32) {
        match self {
            Agenda::Heap(h) => h.push(Reverse((eng, layer, id))),
            Agenda::Pool(pool, _) => pool.push((layer, id)),
        }
    }

    fn pop(&mut self) -> Option<(u8, u32)> {
        match self {
            Agenda::Heap(h) => h.pop().map(|Reverse((_, layer, id))| (layer, id)),
            Agenda::Pool(pool, rng) => {
                if pool.is_empty() {
                    None
                } else {
                    let i = rng.gen_range(0..pool.len());
                    Some(pool.swap_remove(i))
                }
            }
        }
    }
}

impl PeelState {
    /// Whole-graph state at strength level `tau >= 1`, supports computed from
    /// scratch.
    pub fn new(g: &BipartiteGraph, tau: u32) -> Self {
        assert!(tau >= 1, "use degree_core for strength level 0");
        let sup = butterfly::edge_supports(g);
        Self::from_parts(
            g,
            vec![true; g.upper_count() as usize],
            vec![true; g.lower_count() as usize],
            vec![true; g.edge_count() as usize],
            sup,
            tau,
        )
    }

    /// State restricted to a seed subgraph; supports are counted within the
    /// seed only.
    pub fn from_seed(g: &BipartiteGraph, seed: &Core, tau: u32) -> Self {
        assert!(tau >= 1, "use degree_core for strength level 0");
        let mut alive_u = vec![false; g.upper_count() as usize];
        let mut alive_l = vec![false; g.lower_count() as usize];
        let mut alive_e = vec![false; g.edge_count() as usize];
        for &u in &seed.upper {
            alive_u[u as usize] = true;
        }
        for &v in &seed.lower {
            alive_l[v as usize] = true;
        }
        for &e in &seed.edges {
            alive_e[e as usize] = true;
        }
        let sup = masked_supports(g, &alive_e);
        Self::from_parts(g, alive_u, alive_l, alive_e, sup, tau)
    }

    fn from_parts(
        g: &BipartiteGraph,
        alive_u: Vec<bool>,
        alive_l: Vec<bool>,
        alive_e: Vec<bool>,
        sup: Vec<u32>,
        tau: u32,
    ) -> Self {
        let mut eng_u = vec![0u32; g.upper_count() as usize];
        let mut eng_l = vec![0u32; g.lower_count() as usize];
        for e in 0..g.edge_count() {
            if alive_e[e as usize] && sup[e as usize] >= tau {
                let (u, v) = g.edge(e);
                eng_u[u as usize] += 1;
                eng_l[v as usize] += 1;
            }
        }
        let max_sup = sup
            .iter()
            .zip(&alive_e)
            .filter(|&(_, &a)| a)
            .map(|(&s, _)| s)
            .max()
            .unwrap_or(0);
        let mut sup_buckets = vec![Vec::new(); max_sup as usize + 1];
        for e in 0..g.edge_count() {
            if alive_e[e as usize] {
                sup_buckets[sup[e as usize] as usize].push(e);
            }
        }
        let n_alive = alive_u.iter().filter(|&&a| a).count() as u32
            + alive_l.iter().filter(|&&a| a).count() as u32;
        Self {
            tau,
            alive_u,
            alive_l,
            alive_e,
            n_alive,
            eng_u,
            eng_l,
            sup,
            sup_buckets,
            bloom: None,
            delta_buf: DeltaBuf::new(g.edge_count()),
        }
    }

    /// Switch edge deletions to the bloom route. The bloom state must have
    /// been built on exactly the current alive edge set; its supports are
    /// exact, so they replace the tracked (possibly stale) values and the
    /// buckets are rebuilt. Engagement does not change: a stale tracked value
    /// is only ever an overestimate of an already-weak edge's support.
    pub fn adopt_bloom(&mut self, state: BloomState) {
        let exact = state.supports();
        let max_sup = self
            .alive_e
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a)
            .map(|(e, _)| exact[e])
            .max()
            .unwrap_or(0);
        for b in &mut self.sup_buckets {
            b.clear();
        }
        if self.sup_buckets.len() < max_sup as usize + 1 {
            self.sup_buckets.resize(max_sup as usize + 1, Vec::new());
        }
        for (e, &s) in exact.iter().enumerate() {
            if self.alive_e[e] {
                debug_assert!(
                    (self.sup[e] >= self.tau && s == self.sup[e])
                        || (self.sup[e] < self.tau && s <= self.sup[e]),
                    "tracked support must be exact for strong ties"
                );
                self.sup[e] = s;
                self.sup_buckets[s as usize].push(e as u32);
            }
        }
        self.bloom = Some(state);
    }

    pub fn is_empty(&self) -> bool {
        self.n_alive == 0
    }

    pub fn alive_edges(&self) -> &[bool] {
        &self.alive_e
    }

    /// Minimum engagement over alive vertices of one layer, if any are alive.
    pub fn min_eng(&self, layer: Layer) -> Option<u32> {
        match layer {
            Layer::Upper => self
                .alive_u
                .iter()
                .zip(&self.eng_u)
                .filter(|&(&a, _)| a)
                .map(|(_, &e)| e)
                .min(),
            Layer::Lower => self
                .alive_l
                .iter()
                .zip(&self.eng_l)
                .filter(|&(&a, _)| a)
                .map(|(_, &e)| e)
                .min(),
        }
    }

    /// Remove vertices until every alive upper vertex has engagement >=
    /// `ctx.alpha` and every alive lower vertex >= `ctx.beta`. `hint` may list
    /// the only flat vertex ids whose engagement changed since the last
    /// fixpoint (skipping the full violator scan); `removed` collects removed
    /// flat ids in order.
    pub fn peel(
        &mut self,
        ctx: PeelCtx,
        order: PeelOrder,
        hint: Option<&[u32]>,
        mut removed: Option<&mut Vec<u32>>,
    ) {
        let PeelCtx { g, alpha, beta, .. } = ctx;
        let mut agenda = match order {
            PeelOrder::Deterministic => Agenda::Heap(BinaryHeap::new()),
            PeelOrder::Random(seed) => {
                Agenda::Pool(Vec::new(), Box::new(ChaCha8Rng::seed_from_u64(seed)))
            }
        };
        match hint {
            Some(hs) => {
                for &x in hs {
                    let (layer, id) = g.split_flat(x);
                    match layer {
                        Layer::Upper => {
                            if self.alive_u[id as usize] && self.eng_u[id as usize] < alpha {
                                agenda.push(self.eng_u[id as usize], 0, id);
                            }
                        }
                        Layer::Lower => {
                            if self.alive_l[id as usize] && self.eng_l[id as usize] < beta {
                                agenda.push(self.eng_l[id as usize], 1, id);
                            }
                        }
                    }
                }
            }
            None => {
                for u in 0..g.upper_count() {
                    if self.alive_u[u as usize] && self.eng_u[u as usize] < alpha {
                        agenda.push(self.eng_u[u as usize], 0, u);
                    }
                }
                for v in 0..g.lower_count() {
                    if self.alive_l[v as usize] && self.eng_l[v as usize] < beta {
                        agenda.push(self.eng_l[v as usize], 1, v);
                    }
                }
            }
        }
        while let Some((layer, id)) = agenda.pop() {
            let (alive, eng, req) = if layer == 0 {
                (self.alive_u[id as usize], self.eng_u[id as usize], alpha)
            } else {
                (self.alive_l[id as usize], self.eng_l[id as usize], beta)
            };
            if !alive || eng >= req {
                continue;
            }
            self.remove_vertex(ctx, layer, id, &mut agenda);
            if let Some(sink) = removed.as_deref_mut() {
                sink.push(if layer == 0 { id } else { g.flat_lower(id) });
            }
        }
    }

    fn remove_vertex(&mut self, ctx: PeelCtx, layer: u8, id: u32, agenda: &mut Agenda) {
        let incident: Vec<u32> = if layer == 0 {
            ctx.g
                .adj_upper(id)
                .iter()
                .filter(|&&(_, e)| self.alive_e[e as usize])
                .map(|&(_, e)| e)
                .collect()
        } else {
            ctx.g
                .adj_lower(id)
                .iter()
                .filter(|&&(_, e)| self.alive_e[e as usize])
                .map(|&(_, e)| e)
                .collect()
        };
        for e in incident {
            self.delete_edge(ctx, e, Some((layer, id)), agenda);
        }
        if layer == 0 {
            self.alive_u[id as usize] = false;
        } else {
            self.alive_l[id as usize] = false;
        }
        self.n_alive -= 1;
    }

    /// Delete one edge and propagate support/engagement updates. `dying`
    /// marks an endpoint that is being removed (its own engagement no longer
    /// matters).
    fn delete_edge(&mut self, ctx: PeelCtx, e: u32, dying: Option<(u8, u32)>, agenda: &mut Agenda) {
        let PeelCtx { g, alpha, beta, .. } = ctx;
        let (u, v) = g.edge(e);
        // The edge itself: if it is a strong tie, its endpoints lose one
        // engagement each (skipping the endpoint being removed).
        if self.sup[e as usize] >= self.tau {
            if dying != Some((0, u)) {
                self.eng_u[u as usize] -= 1;
                if self.alive_u[u as usize] && self.eng_u[u as usize] < alpha {
                    agenda.push(self.eng_u[u as usize], 0, u);
                }
            }
            if dying != Some((1, v)) {
                self.eng_l[v as usize] -= 1;
                if self.alive_l[v as usize] && self.eng_l[v as usize] < beta {
                    agenda.push(self.eng_l[v as usize], 1, v);
                }
            }
        }
        match (&mut self.bloom, ctx.topo) {
            (Some(state), Some(topo)) => {
                state
                    .delete_edge(topo, e, &mut self.delta_buf)
                    .expect("bloom route deleting a live edge");
                self.alive_e[e as usize] = false;
                for i in 0..self.delta_buf.changed.len() {
                    let (f, new_sup) = self.delta_buf.changed[i];
                    let old = self.sup[f as usize];
                    self.sup[f as usize] = new_sup;
                    self.sup_buckets[new_sup as usize].push(f);
                    // Bloom deletions can drop a support by k-1 at once, so
                    // detect the strong->weak crossing rather than a landing
                    // on tau-1.
                    if old >= self.tau && new_sup < self.tau {
                        self.edge_went_weak(ctx, f, agenda);
                    }
                }
            }
            _ => {
                self.alive_e[e as usize] = false;
                // Every butterfly through e dies; the three other edges of
                // each lose one support. Only strong ties are maintained.
                for &(w, ew) in g.adj_lower(v) {
                    if w == u || !self.alive_e[ew as usize] {
                        continue;
                    }
                    let a = g.adj_upper(u);
                    let b = g.adj_upper(w);
                    let (mut i, mut j) = (0, 0);
                    while i < a.len() && j < b.len() {
                        let (x, ex) = a[i];
                        let (y, ey) = b[j];
                        if x == y {
                            if x != v && self.alive_e[ex as usize] && self.alive_e[ey as usize] {
                                for f in [ex, ew, ey] {
                                    self.weaken_strong_tie(ctx, f, agenda);
                                }
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
            }
        }
    }

    fn weaken_strong_tie(&mut self, ctx: PeelCtx, f: u32, agenda: &mut Agenda) {
        if self.sup[f as usize] < self.tau {
            return;
        }
        self.sup[f as usize] -= 1;
        let s = self.sup[f as usize];
        self.sup_buckets[s as usize].push(f);
        if s == self.tau - 1 {
            self.edge_went_weak(ctx, f, agenda);
        }
    }

    fn edge_went_weak(&mut self, ctx: PeelCtx, f: u32, agenda: &mut Agenda) {
        let (u, v) = ctx.g.edge(f);
        self.eng_u[u as usize] -= 1;
        if self.alive_u[u as usize] && self.eng_u[u as usize] < ctx.alpha {
            agenda.push(self.eng_u[u as usize], 0, u);
        }
        self.eng_l[v as usize] -= 1;
        if self.alive_l[v as usize] && self.eng_l[v as usize] < ctx.beta {
            agenda.push(self.eng_l[v as usize], 1, v);
        }
    }

    /// Move from strength level tau to tau+1: every alive edge whose support
    /// is exactly tau stops being a strong tie, costing both endpoints one
    /// engagement. Returns the flat ids of the affected vertices (a peel hint).
    pub fn advance_tau(&mut self, g: &BipartiteGraph) -> Vec<u32> {
        let mut affected = Vec::new();
        let t = self.tau as usize;
        if t < self.sup_buckets.len() {
            let entries = std::mem::take(&mut self.sup_buckets[t]);
            for e in entries {
                if !self.alive_e[e as usize] || self.sup[e as usize] != self.tau {
                    continue;
                }
                let (u, v) = g.edge(e);
                self.eng_u[u as usize] -= 1;
                self.eng_l[v as usize] -= 1;
                affected.push(g.flat_upper(u));
                affected.push(g.flat_lower(v));
            }
        }
        self.tau += 1;
        affected.sort_unstable();
        affected.dedup();
        affected
    }

    pub fn extract_core(&self, g: &BipartiteGraph) -> Core {
        let upper: Vec<u32> = (0..g.upper_count())
            .filter(|&u| self.alive_u[u as usize])
            .collect();
        let lower: Vec<u32> = (0..g.lower_count())
            .filter(|&v| self.alive_l[v as usize])
            .collect();
        let edges: Vec<u32> = (0..g.edge_count())
            .filter(|&e| self.alive_e[e as usize])
            .collect();
        Core {
            upper,
            lower,
            edges,
        }
    }
}

/// Per-edge butterfly counts restricted to the alive edge set.
fn masked_supports(g: &BipartiteGraph, alive_e: &[bool]) -> Vec<u32> {
    let mut sup = vec![0u32; g.edge_count() as usize];
    let mut cnt = vec![0u32; g.upper_count() as usize];
    let mut touched = Vec::new();
    for u in 0..g.upper_count() {
        let mut any = false;
        for &(c, ec) in g.adj_upper(u) {
            if !alive_e[ec as usize] {
                continue;
            }
            any = true;
            for &(w, ew) in g.adj_lower(c) {
                if w != u && alive_e[ew as usize] {
                    if cnt[w as usize] == 0 {
                        touched.push(w);
                    }
                    cnt[w as usize] += 1;
                }
            }
        }
        if !any {
            continue;
        }
        for &(c, ec) in g.adj_upper(u) {
            if !alive_e[ec as usize] {
                continue;
            }
            let mut s = 0u32;
            for &(w, ew) in g.adj_lower(c) {
                if w != u && alive_e[ew as usize] {
                    s += cnt[w as usize] - 1;
                }
            }
            sup[ec as usize] = s;
        }
        for &w in &touched {
            cnt[w as usize] = 0;
        }
        touched.clear();
    }
    sup
}

/// The (alpha, beta)-core at strength level 0: plain degree constraints.
/// `seed` restricts the peel to a subgraph.
pub fn degree_core(g: &BipartiteGraph, seed: Option<&Core>, alpha: u32, beta: u32) -> Core {
    let mut alive_u = vec![seed.is_none(); g.upper_count() as usize];
    let mut alive_l = vec![seed.is_none(); g.lower_count() as usize];
    let mut alive_e = vec![seed.is_none(); g.edge_count() as usize];
    if let Some(s) = seed {
        for &u in &s.upper {
            alive_u[u as usize] = true;
        }
        for &v in &s.lower {
            alive_l[v as usize] = true;
        }
        for &e in &s.edges {
            alive_e[e as usize] = true;
        }
    }
    let mut deg_u = vec![0u32; g.upper_count() as usize];
    let mut deg_l = vec![0u32; g.lower_count() as usize];
    for e in 0..g.edge_count() {
        if alive_e[e as usize] {
            let (u, v) = g.edge(e);
            deg_u[u as usize] += 1;
            deg_l[v as usize] += 1;
        }
    }
    let mut queue: Vec<(u8, u32)> = Vec::new();
    for u in 0..g.upper_count() {
        if alive_u[u as usize] && deg_u[u as usize] < alpha {
            queue.push((0, u));
        }
    }
    for v in 0..g.lower_count() {
        if alive_l[v as usize] && deg_l[v as usize] < beta {
            queue.push((1, v));
        }
    }
    while let Some((layer, id)) = queue.pop() {
        let alive = if layer == 0 {
            std::mem::replace(&mut alive_u[id as usize], false)
        } else {
            std::mem::replace(&mut alive_l[id as usize], false)
        };
        if !alive {
            continue;
        }
        if layer == 0 {
            for &(v, e) in g.adj_upper(id) {
                if alive_e[e as usize] {
                    alive_e[e as usize] = false;
                    deg_l[v as usize] -= 1;
                    if alive_l[v as usize] && deg_l[v as usize] < beta {
                        queue.push((1, v));
                    }
                }
            }
        } else {
            for &(u, e) in g.adj_lower(id) {
                if alive_e[e as usize] {
                    alive_e[e as usize] = false;
                    deg_u[u as usize] -= 1;
                    if alive_u[u as usize] && deg_u[u as usize] < alpha {
                        queue.push((0, u));
                    }
                }
            }
        }
    }
    let upper = (0..g.upper_count())
        .filter(|&u| alive_u[u as usize])
        .collect();
    let lower = (0..g.lower_count())
        .filter(|&v| alive_l[v as usize])
        .collect();
    let edges = (0..g.edge_count())
        .filter(|&e| alive_e[e as usize])
        .collect();
    Core {
        upper,
        lower,
        edges,
    }
}

/// The maximal subgraph in which every upper vertex has at least `alpha`
/// strong ties and every lower vertex at least `beta`, at strength level
/// `tau`. Strength level 0 degenerates to degree constraints.
pub fn online_core(g: &BipartiteGraph, alpha: u32, beta: u32, tau: u32) -> Core {
    online_core_with_order(g, alpha, beta, tau, PeelOrder::Deterministic)
}

pub fn online_core_with_order(
    g: &BipartiteGraph,
    alpha: u32,
    beta: u32,
    tau: u32,
    order: PeelOrder,
) -> Core {
    assert!(alpha >= 1 && beta >= 1);
    if tau == 0 {
        return degree_core(g, None, alpha, beta);
    }
    let mut st = PeelState::new(g, tau);
    st.peel(
        PeelCtx {
            g,
            topo: None,
            alpha,
            beta,
        },
        order,
        None,
        None,
    );
    st.extract_core(g)
}

/// Peel a seed subgraph down to its (alpha, beta) core at strength level tau,
/// recounting supports inside the seed. Used by the 2D index query paths.
pub fn core_from_seed(g: &BipartiteGraph, seed: &Core, alpha: u32, beta: u32, tau: u32) -> Core {
    if seed.is_empty() {
        return Core::empty();
    }
    if tau == 0 {
        return degree_core(g, Some(seed), alpha, beta);
    }
    let mut st = PeelState::from_seed(g, seed, tau);
    st.peel(
        PeelCtx {
            g,
            topo: None,
            alpha,
            beta,
        },
        PeelOrder::Deterministic,
        None,
        None,
    );
    st.extract_core(g)
}

/// Largest tau with a nonempty (1,1) core at that strength level; 0 when the
/// graph has no butterflies at all.
pub fn max_strength_level(g: &BipartiteGraph) -> u32 {
    if g.edge_count() == 0 {
        return 0;
    }
    let mut st = PeelState::new(g, 1);
    st.peel(
        PeelCtx {
            g,
            topo: None,
            alpha: 1,
            beta: 1,
        },
        PeelOrder::Deterministic,
        None,
        None,
    );
    if st.is_empty() {
        return 0;
    }
    let mut level = 1;
    loop {
        let hint = st.advance_tau(g);
        st.peel(
            PeelCtx {
                g,
                topo: None,
                alpha: 1,
                beta: 1,
            },
            PeelOrder::Deterministic,
            Some(&hint),
            None,
        );
        if st.is_empty() {
            return level;
        }
        level += 1;
    }
}

/// Largest alpha with a nonempty (alpha, 1) core at strength level `tau`
/// (0 or 1), found by climbing alpha on one destructive state.
pub fn max_alpha(g: &BipartiteGraph, tau: u32) -> u32 {
    if g.edge_count() == 0 {
        return 0;
    }
    if tau == 0 {
        let mut core = degree_core(g, None, 1, 1);
        let mut alpha = 1;
        while !core.is_empty() {
            alpha += 1;
            core = degree_core(g, Some(&core), alpha, 1);
        }
        return alpha - 1;
    }
    let mut st = PeelState::new(g, tau);
    let mut alpha = 1;
    loop {
        st.peel(
            PeelCtx {
                g,
                topo: None,
                alpha,
                beta: 1,
            },
            PeelOrder::Deterministic,
            None,
            None,
        );
        if st.is_empty() {
            return alpha - 1;
        }
        alpha += 1;
    }
}

pub fn max_beta(g: &BipartiteGraph, tau: u32) -> u32 {
    if g.edge_count() == 0 {
        return 0;
    }
    if tau == 0 {
        let mut core = degree_core(g, None, 1, 1);
        let mut beta = 1;
        while !core.is_empty() {
            beta += 1;
            core = degree_core(g, Some(&core), 1, beta);
        }
        return beta - 1;
    }
    let mut st = PeelState::new(g, tau);
    let mut beta = 1;
    loop {
        st.peel(
            PeelCtx {
                g,
                topo: None,
                alpha: 1,
                beta,
            },
            PeelOrder::Deterministic,
            None,
            None,
        );
        if st.is_empty() {
            return beta - 1;
        }
        beta += 1;
    }
}

/// Engagement of every vertex given per-edge supports: the number of incident
/// edges with support >= tau. Returns (upper, lower) vectors.
pub fn vertex_engagements(g: &BipartiteGraph, sup: &[u32], tau: u32) -> (Vec<u32>, Vec<u32>) {
    let mut eng_u = vec![0u32; g.upper_count() as usize];
    let mut eng_l = vec![0u32; g.lower_count() as usize];
    for e in 0..g.edge_count() {
        if sup[e as usize] >= tau {
            let (u, v) = g.edge(e);
            eng_u[u as usize] += 1;
            eng_l[v as usize] += 1;
        }
    }
    (eng_u, eng_l)
}
