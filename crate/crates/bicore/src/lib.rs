//! Strength-aware (alpha, beta)-core mining on bipartite graphs.
//!
//! An (alpha, beta) core asks every upper vertex for at least `alpha`
//! neighbors and every lower vertex for at least `beta`. This crate works
//! with the strengthened variant: only *strong ties* count, where an edge is
//! strong at level `tau` when it participates in at least `tau` butterflies
//! (2x2 bicliques). Raising `tau` filters out incidental connections and
//! leaves subgraphs that are dense both in degree and in shared structure.
//!
//! What lives where:
//! - [`graph`]: the immutable bipartite graph, edge-list loading, stats.
//! - [`butterfly`]: butterfly and caterpillar counting, per-edge supports.
//! - [`bloom`]: the bloom index giving O(sup(e)) support updates on deletion.
//! - [`peel`]: online core computation at any (alpha, beta, tau).
//! - [`decomp`]: the full tau_max(alpha, beta, u) decomposition, plain and
//!   with computation-sharing skips.
//! - [`index`]: the four-level total index, three 2D partial indexes, and
//!   their binary serialization.
//! - [`router`]: timing-based training data, a small feed-forward classifier,
//!   cross-validated model selection, and hybrid query dispatch.
//! - [`analytics`]: density, clustering coefficient, core profiling sweeps.
//! - [`synth`]: graph generators used by tests, benchmarks, and the guide.

pub mod analytics;
pub mod bloom;
pub mod butterfly;
pub mod decomp;
pub mod error;
pub mod graph;
pub mod hash;
pub mod index;
pub mod peel;
pub mod router;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, Core, GraphStats, Layer, LoadedGraph};

// The guide's chapters double as doc-tests: every fenced Rust block below
// compiles and runs under `cargo test --doc`, keeping the book in sync with
// the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/peeling.md")]
    mod peeling {}
    #[doc = include_str!("../../../book/src/indexes.md")]
    mod indexes {}
    #[doc = include_str!("../../../book/src/routing.md")]
    mod routing {}
}
