//! Walker strategies on an evolving graph.
//!
//! Every time step has two stages: the graph instance is evolved first, then
//! the walker moves on the fresh instance.
//!
//! * RWA walks on what's available: it picks uniformly among the currently
//!   alive incident edges and stays put if there are none.
//! * RWD walks with a delay: it picks a static neighbor uniformly and waits on
//!   its node until that edge is alive, crossing on the first step it is.
//! * SRW is the static walk. It is run as RWA over an always-alive rule so it
//!   consumes exactly the random draws RWA does under `Bernoulli(1)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::evolution::{evolve_unchecked, EvolutionError, EvolutionRule, GraphInstance, HistoryWindow};
use crate::graph::StaticGraph;

/// Default cap on the number of steps of a single cover walk.
pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000_000;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("start node {start} out of range for {n} nodes")]
    StartOutOfRange { start: usize, n: usize },
    #[error("step limit {limit} exceeded with {covered} of {n} nodes covered")]
    StepLimitExceeded { limit: u64, covered: usize, n: usize },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("trace output failed: {0}")]
    Trace(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Rwd,
    Rwa,
    Srw,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Rwd => "rwd",
            Strategy::Rwa => "rwa",
            Strategy::Srw => "srw",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rwd" => Ok(Strategy::Rwd),
            "rwa" => Ok(Strategy::Rwa),
            "srw" => Ok(Strategy::Srw),
            other => Err(format!("unknown strategy {other:?} (expected rwd, rwa or srw)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkerState {
    pub position: usize,
    pub covered: BitSet,
    pub covered_count: usize,
    pub steps: u64,
    /// Static neighbor an RWD walker is waiting to cross to.
    pub pending_target: Option<usize>,
}

impl WalkerState {
    pub fn new(n: usize, start: usize) -> Self {
        let mut covered = BitSet::new(n);
        covered.set(start, true);
        WalkerState {
            position: start,
            covered,
            covered_count: 1,
            steps: 0,
            pending_target: None,
        }
    }

    pub fn is_cover_complete(&self) -> bool {
        self.covered_count == self.covered.len()
    }

    fn arrive(&mut self, v: usize) {
        self.position = v;
        if self.covered.insert(v) {
            self.covered_count += 1;
        }
    }
}

/// Next-position distribution of an RWA walker, as `(node, probability)`
/// pairs in ascending node order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    pub entries: Vec<(usize, f64)>,
}

impl StepDistribution {
    pub fn probability(&self, v: usize) -> f64 {
        self.entries
            .iter()
            .find(|(u, _)| *u == v)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

pub fn rwa_step_distribution(g: &StaticGraph, inst: &GraphInstance, v: usize) -> StepDistribution {
    let alive: Vec<usize> = g
        .neighbors(v)
        .iter()
        .filter(|nb| inst.is_alive(nb.edge))
        .map(|nb| nb.node)
        .collect();
    if alive.is_empty() {
        return StepDistribution {
            entries: vec![(v, 1.0)],
        };
    }
    let share = 1.0 / alive.len() as f64;
    StepDistribution {
        entries: alive.into_iter().map(|u| (u, share)).collect(),
    }
}

/// One RWA move on `inst`. Draws once, and only when some incident edge is
/// alive.
pub fn step_rwa<R: Rng + ?Sized>(
    state: &mut WalkerState,
    g: &StaticGraph,
    inst: &GraphInstance,
    rng: &mut R,
) {
    let nbrs = g.neighbors(state.position);
    let alive = nbrs.iter().filter(|nb| inst.is_alive(nb.edge)).count();
    if alive > 0 {
        let pick = rng.gen_range(0..alive);
        let target = nbrs
            .iter()
            .filter(|nb| inst.is_alive(nb.edge))
            .nth(pick)
            .expect("pick < alive count")
            .node;
        state.arrive(target);
    }
    state.steps += 1;
}

/// One RWD step on `inst`. A missing target is drawn uniformly from the
/// static neighbors; the walker crosses iff that edge is alive now.
pub fn step_rwd<R: Rng + ?Sized>(
    state: &mut WalkerState,
    g: &StaticGraph,
    inst: &GraphInstance,
    rng: &mut R,
) {
    let v = state.position;
    let target = match state.pending_target {
        Some(t) => t,
        None => {
            let nbrs = g.neighbors(v);
            let t = nbrs[rng.gen_range(0..nbrs.len())].node;
            state.pending_target = Some(t);
            t
        }
    };
    let edge = g
        .edge_index(v, target)
        .expect("pending target is a static neighbor");
    if inst.is_alive(edge) {
        state.pending_target = None;
        state.arrive(target);
    }
    state.steps += 1;
}

#[derive(Debug, Clone, Copy)]
pub struct WalkOptions {
    pub step_limit: u64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkOutcome {
    pub steps: u64,
    pub final_window: HistoryWindow,
}

/// Runs `strategy` from `start` until every node is covered.
///
/// For SRW the rule and `init_window` are ignored; the returned window is
/// then the all-alive instance.
pub fn run_cover_walk<R: Rng + ?Sized>(
    g: &StaticGraph,
    rule: &EvolutionRule,
    strategy: Strategy,
    start: usize,
    init_window: &HistoryWindow,
    rng: &mut R,
    opts: &WalkOptions,
) -> Result<WalkOutcome, WalkError> {
    walk(g, rule, strategy, start, init_window, rng, opts, None)
}

/// As [`run_cover_walk`], writing one `step digest position` line per step,
/// where `digest` is the hex liveness mask of the instance.
#[allow(clippy::too_many_arguments)]
pub fn run_cover_walk_traced<R: Rng + ?Sized>(
    g: &StaticGraph,
    rule: &EvolutionRule,
    strategy: Strategy,
    start: usize,
    init_window: &HistoryWindow,
    rng: &mut R,
    opts: &WalkOptions,
    trace: &mut dyn Write,
) -> Result<WalkOutcome, WalkError> {
    walk(g, rule, strategy, start, init_window, rng, opts, Some(trace))
}

#[allow(clippy::too_many_arguments)]
fn walk<R: Rng + ?Sized>(
    g: &StaticGraph,
    rule: &EvolutionRule,
    strategy: Strategy,
    start: usize,
    init_window: &HistoryWindow,
    rng: &mut R,
    opts: &WalkOptions,
    mut trace: Option<&mut dyn Write>,
) -> Result<WalkOutcome, WalkError> {
    let n = g.node_count();
    if start >= n {
        return Err(WalkError::StartOutOfRange { start, n });
    }
    let static_rule = EvolutionRule::Bernoulli { p: 1.0 };
    let (rule, mut window) = match strategy {
        Strategy::Srw => (
            &static_rule,
            HistoryWindow::repeated(GraphInstance::all_alive(g.edge_count()), 1),
        ),
        _ => {
            init_window.check(g, rule)?;
            (rule, init_window.clone())
        }
    };
    let m = g.edge_count();
    let mut state = WalkerState::new(n, start);
    if let Some(out) = trace.as_deref_mut() {
        writeln!(out, "0 {:x} {}", window.current().bits(), start)?;
    }

    while !state.is_cover_complete() {
        if state.steps >= opts.step_limit {
            return Err(WalkError::StepLimitExceeded {
                limit: opts.step_limit,
                covered: state.covered_count,
                n,
            });
        }
        let next = evolve_unchecked(m, rule, &window, rng);
        window.push(next);
        match strategy {
            Strategy::Rwd => step_rwd(&mut state, g, window.current(), rng),
            Strategy::Rwa | Strategy::Srw => step_rwa(&mut state, g, window.current(), rng),
        }
        if let Some(out) = trace.as_deref_mut() {
            writeln!(out, "{} {:x} {}", state.steps, window.current().bits(), state.position)?;
        }
    }
    Ok(WalkOutcome {
        steps: state.steps,
        final_window: window,
    })
}
