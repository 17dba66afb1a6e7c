//! Random walks on edge-uniform stochastically-evolving graphs.
//!
//! * [`graph`]: static underlying graphs and generators.
//! * [`evolution`]: per-edge stochastic rules and graph instances.
//! * [`walks`]: RWA, RWD and static walk semantics, cover walks.
//! * [`montecarlo`]: seeded cover-time estimation.
//! * [`exact`]: the absorbing Markov chain and exact cover times.
//! * [`bounds`]: closed-form bounds and the electrical network.

pub mod bitset;
pub mod bounds;
pub mod evolution;
pub mod exact;
pub mod graph;
pub mod linalg;
pub mod montecarlo;
pub mod walks;

pub use bounds::{BoundReport, ElectricalNetwork};
pub use evolution::{EvolutionRule, GraphInstance, HistoryWindow};
pub use exact::{collapsed_rwa_chain_k0, exact_cover_time, ChainOptions};
pub use graph::{build_graph, gen_clique, gen_lollipop, gen_path, gen_random_threshold, DegreeStats, StaticGraph};
pub use montecarlo::{estimate_cover_time, estimate_static_cover_time, CoverTimeEstimate, ExperimentConfig, StartPolicy};
pub use walks::{run_cover_walk, Strategy};
