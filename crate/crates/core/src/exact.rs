//! Exact RWA cover times from the joint (history, position, covered-set)
//! Markov chain.
//!
//! A state is `(H, v, V_c)`: the window of the last `max(k, 1)` instances,
//! the walker position and the covered nodes. One transition evolves the
//! graph to a new instance `H'_1` (history shifts by one) and then moves the
//! walker on `H'_1`:
//!
//! `Pr[(H, v, V_c) -> (H', v', V_c ∪ {v'})] = Pr[H'_1 | H] · Pr[v -> v' on H'_1]`
//!
//! States with every node covered are absorbing. Because `V_c` only grows,
//! the chain is block upper-triangular by covered set and the hitting-time
//! system is solved block by block, largest covered sets first.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{self, Write};

use thiserror::Error;

use crate::bitset::BitSet;
use crate::evolution::{EvolutionError, EvolutionRule, GraphInstance, HistoryWindow};
use crate::graph::StaticGraph;
use crate::linalg::{solve_absorption, SolveError, SolveMethod, SolverOptions};
use crate::montecarlo::StartPolicy;

/// Default limit on the estimated state count.
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("estimated state count {estimated:.3e} exceeds the cap of {cap}")]
    CapExceeded { estimated: f64, cap: usize },
    #[error("exact chain supports at most 64 nodes and 64 edges (got n = {n}, m = {m})")]
    TooLarge { n: usize, m: usize },
    #[error("start node {start} out of range for {n} nodes")]
    StartOutOfRange { start: usize, n: usize },
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("full coverage is unreachable from state {state} ({description})")]
    Unreachable { state: usize, description: String },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub window: HistoryWindow,
    pub position: usize,
    pub covered: BitSet,
}

impl ChainState {
    pub fn is_covering(&self) -> bool {
        self.covered.count_ones() == self.covered.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainNode {
    State(ChainState),
    /// Collapsed super-state standing for every fully covered state.
    Covered,
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.row(r).map(|(_, v)| v).sum()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

#[derive(Debug, Clone)]
pub struct Chain {
    pub nodes: Vec<ChainNode>,
    pub transitions: SparseMatrix,
    /// Sorted indices of absorbing nodes.
    pub absorbing: Vec<usize>,
    /// Indices of the designated start states.
    pub starts: Vec<usize>,
    pub history_length: usize,
    pub node_count: usize,
    pub edge_count: usize,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_absorbing(&self, idx: usize) -> bool {
        self.absorbing.binary_search(&idx).is_ok()
    }

    /// Writes `index,kind,position,covered,window` rows; covered and window
    /// instances are hex masks, window entries separated by `;`.
    pub fn write_state_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,kind,position,covered,window")?;
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                ChainNode::Covered => writeln!(out, "{i},covered,,,")?,
                ChainNode::State(s) => {
                    let kind = if self.is_absorbing(i) { "absorbing" } else { "transient" };
                    let window: Vec<String> = s.window.instances().iter().map(|h| format!("{:x}", h.bits())).collect();
                    writeln!(out, "{i},{kind},{},{:x},{}", s.position, s.covered, window.join(";"))?;
                }
            }
        }
        Ok(())
    }

    /// Writes `row,col,prob` triplets of the transition matrix.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row,col,prob")?;
        for r in 0..self.transitions.rows() {
            for (c, v) in self.transitions.row(r) {
                writeln!(out, "{r},{c},{v:e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainOptions {
    pub cap: usize,
    /// Merge all fully covered states into one absorbing node.
    pub collapse_absorbing: bool,
    /// Start from every possible window instead of one fixed window.
    pub all_initial_windows: bool,
    /// Fixed start window; all-dead when `None`.
    pub initial_window: Option<HistoryWindow>,
    pub solver: SolverOptions,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            cap: DEFAULT_STATE_CAP,
            collapse_absorbing: true,
            all_initial_windows: false,
            initial_window: None,
            solver: SolverOptions::default(),
        }
    }
}

/// Upper bound `2^(k·m + n - 1) · n` on the number of chain states, with
/// `k = max(history, 1)` because the window always holds the current
/// instance.
pub fn state_count_bound(history_length: usize, m: usize, n: usize) -> f64 {
    let k = history_length.max(1) as f64;
    (k * m as f64 + n as f64 - 1.0).exp2() * n as f64
}

/// `Pr[H'_1 = to | H]`: the product over edges of the alive probability
/// given that edge's history, or its complement for edges dead in `to`.
pub fn instance_transition_prob(
    rule: &EvolutionRule,
    from: &HistoryWindow,
    to: &GraphInstance,
) -> Result<f64, ExactError> {
    if from.len() != rule.window_length() {
        return Err(EvolutionError::WindowLength {
            expected: rule.window_length(),
            got: from.len(),
        }
        .into());
    }
    let m = to.edge_count();
    if let Some(bad) = from.instances().iter().find(|h| h.edge_count() != m) {
        return Err(EvolutionError::InstanceLength {
            expected: m,
            got: bad.edge_count(),
        }
        .into());
    }
    Ok(match rule {
        EvolutionRule::Bernoulli { p } => {
            let alive = to.alive_count() as i32;
            p.powi(alive) * (1.0 - p).powi(m as i32 - alive)
        }
        EvolutionRule::BirthDeath { p, q } => {
            let current = from.current();
            let mut c = [[0i32; 2]; 2];
            for e in 0..m {
                c[current.is_alive(e) as usize][to.is_alive(e) as usize] += 1;
            }
            (1.0 - p).powi(c[0][0]) * p.powi(c[0][1]) * q.powi(c[1][0]) * (1.0 - q).powi(c[1][1])
        }
        EvolutionRule::General { .. } => (0..m)
            .map(|e| {
                let a = rule.alive_probability_bits(from.edge_pattern(e));
                if to.is_alive(e) {
                    a
                } else {
                    1.0 - a
                }
            })
            .product(),
    })
}

/// Internal state key: window masks (most recent first), position, covered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    window: Vec<u64>,
    position: u32,
    covered: u64,
}

/// Distribution of the next instance mask given the window, as a dense table
/// over all `2^m` masks.
fn next_instance_table(rule: &EvolutionRule, window: &[u64], m: usize) -> Vec<f64> {
    let per_edge_alive: Vec<f64> = (0..m)
        .map(|e| {
            let pattern = window
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, w)| acc | ((((w >> e) & 1) as u32) << i));
            rule.alive_probability_bits(pattern)
        })
        .collect();
    // Edge e doubles the table: masks with bit e clear come first.
    let mut table = vec![1.0f64];
    for &a in &per_edge_alive {
        let mut next = Vec::with_capacity(table.len() * 2);
        next.extend(table.iter().map(|t| t * (1.0 - a)));
        next.extend(table.iter().map(|t| t * a));
        table = next;
    }
    table
}

/// Enumerates every state reachable from the start states
/// `(window, s, {s})` for each `s` in `starts`.
pub fn enumerate_chain(
    g: &StaticGraph,
    rule: &EvolutionRule,
    starts: &[usize],
    opts: &ChainOptions,
) -> Result<Chain, ExactError> {
    let n = g.node_count();
    let m = g.edge_count();
    if n > 64 || m > 64 {
        return Err(ExactError::TooLarge { n, m });
    }
    let estimated = state_count_bound(rule.history_length(), m, n);
    if estimated > opts.cap as f64 {
        return Err(ExactError::CapExceeded {
            estimated,
            cap: opts.cap,
        });
    }
    if let Some(&start) = starts.iter().find(|&&s| s >= n) {
        return Err(ExactError::StartOutOfRange { start, n });
    }

    let len = rule.window_length();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    let start_windows: Vec<Vec<u64>> = if opts.all_initial_windows {
        let per = 1u64 << m;
        let total = per.pow(len as u32);
        (0..total)
            .map(|mut code| {
                (0..len)
                    .map(|_| {
                        let w = code % per;
                        code /= per;
                        w
                    })
                    .collect()
            })
            .collect()
    } else {
        let w = match &opts.initial_window {
            Some(w) => {
                w.check(g, rule)?;
                w.clone()
            }
            None => HistoryWindow::all_dead(g, rule),
        };
        vec![w.instances().iter().map(|h| h.to_mask()).collect()]
    };

    // Static adjacency as (neighbor, edge bit).
    let adj: Vec<Vec<(u32, u64)>> = (0..n)
        .map(|v| g.neighbors(v).iter().map(|nb| (nb.node as u32, 1u64 << nb.edge)).collect())
        .collect();

    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Option<Key>> = Vec::new();
    let mut queue = VecDeque::new();
    let covered_node = if opts.collapse_absorbing {
        keys.push(None);
        Some(0usize)
    } else {
        None
    };

    let mut intern = |key: Key, keys: &mut Vec<Option<Key>>, queue: &mut VecDeque<usize>| -> usize {
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = keys.len();
        index.insert(key.clone(), i);
        keys.push(Some(key));
        queue.push_back(i);
        i
    };

    let mut start_idx = Vec::new();
    for &s in starts {
        for w in &start_windows {
            let key = Key {
                window: w.clone(),
                position: s as u32,
                covered: 1u64 << s,
            };
            let i = if key.covered == full {
                match covered_node {
                    Some(c) => c,
                    None => intern(key, &mut keys, &mut queue),
                }
            } else {
                intern(key, &mut keys, &mut queue)
            };
            start_idx.push(i);
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut table_cache: HashMap<Vec<u64>, Vec<f64>> = HashMap::new();
    while let Some(i) = queue.pop_front() {
        let key = keys[i].clone().expect("queued nodes are states");
        if rows.len() <= i {
            rows.resize(i + 1, Vec::new());
        }
        if key.covered == full {
            rows[i] = vec![(i, 1.0)];
            continue;
        }
        // Bernoulli tables do not depend on the window.
        let cache_key = if rule.history_length() == 0 {
            Vec::new()
        } else {
            key.window.clone()
        };
        let table = table_cache
            .entry(cache_key)
            .or_insert_with(|| next_instance_table(rule, &key.window, m))
            .clone();

        let v = key.position as usize;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (mask, &p_inst) in table.iter().enumerate() {
            if p_inst == 0.0 {
                continue;
            }
            let mask = mask as u64;
            let mut window = Vec::with_capacity(len);
            window.push(mask);
            window.extend_from_slice(&key.window[..len - 1]);

            let alive: Vec<u32> = adj[v].iter().filter(|(_, bit)| mask & bit != 0).map(|&(u, _)| u).collect();
            let moves: Vec<(u32, f64)> = if alive.is_empty() {
                vec![(key.position, 1.0)]
            } else {
                let share = 1.0 / alive.len() as f64;
                alive.iter().map(|&u| (u, share)).collect()
            };
            for (u, p_move) in moves {
                let covered = key.covered | (1u64 << u);
                let target = match covered_node {
                    Some(c) if covered == full => c,
                    _ => intern(
                        Key {
                            window: window.clone(),
                            position: u,
                            covered,
                        },
                        &mut keys,
                        &mut queue,
                    ),
                };
                row.push((target, p_inst * p_move));
            }
        }
        row.sort_unstable_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (c, p) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += p,
                _ => merged.push((c, p)),
            }
        }
        rows[i] = merged;
    }
    if let Some(c) = covered_node {
        if rows.is_empty() {
            rows.push(Vec::new());
        }
        rows[c] = vec![(c, 1.0)];
    }
    rows.resize(keys.len(), Vec::new());

    let mut absorbing = Vec::new();
    let nodes: Vec<ChainNode> = keys
        .into_iter()
        .enumerate()
        .map(|(i, k)| match k {
            None => {
                absorbing.push(i);
                ChainNode::Covered
            }
            Some(k) => {
                if k.covered == full {
                    absorbing.push(i);
                }
                ChainNode::State(ChainState {
                    window: HistoryWindow::new(k.window.iter().map(|&w| GraphInstance::from_mask(m, w)).collect()),
                    position: k.position as usize,
                    covered: BitSet::from_mask(n, k.covered),
                })
            }
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }

    Ok(Chain {
        nodes,
        transitions: SparseMatrix { row_ptr, cols, vals },
        absorbing,
        starts: start_idx,
        history_length: rule.history_length(),
        node_count: n,
        edge_count: m,
    })
}

#[derive(Debug, Clone)]
pub struct HittingTimes {
    /// Expected steps to absorption per chain node; zero on absorbing nodes.
    pub values: Vec<f64>,
    pub residual: f64,
    pub method: SolveMethod,
}

/// Solves `h = 0` on absorbing nodes and `h = 1 + Σ P h` elsewhere.
pub fn hitting_times(chain: &Chain, solver: &SolverOptions) -> Result<HittingTimes, ExactError> {
    let total = chain.len();
    let absorbing: Vec<bool> = (0..total).map(|i| chain.is_absorbing(i)).collect();

    // Every transient node must reach an absorbing one.
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); total];
    for r in 0..total {
        for (c, p) in chain.transitions.row(r) {
            if p > 0.0 && c != r {
                reverse[c].push(r);
            }
        }
    }
    let mut reaches = absorbing.clone();
    let mut queue: VecDeque<usize> = chain.absorbing.iter().copied().collect();
    while let Some(c) = queue.pop_front() {
        for &r in &reverse[c] {
            if !reaches[r] {
                reaches[r] = true;
                queue.push_back(r);
            }
        }
    }
    if let Some(bad) = reaches.iter().position(|&r| !r) {
        let description = match &chain.nodes[bad] {
            ChainNode::State(s) => format!(
                "position {}, covered {:?}, window {:?}",
                s.position,
                s.covered,
                s.window.instances()
            ),
            ChainNode::Covered => "covered".into(),
        };
        return Err(ExactError::Unreachable { state: bad, description });
    }

    let transient: Vec<usize> = (0..total).filter(|&i| !absorbing[i]).collect();
    let mut local = vec![usize::MAX; total];
    for (li, &g) in transient.iter().enumerate() {
        local[g] = li;
    }
    let rows: Vec<Vec<(usize, f64)>> = transient
        .iter()
        .map(|&r| {
            chain
                .transitions
                .row(r)
                .filter(|&(c, _)| !absorbing[c])
                .map(|(c, p)| (local[c], p))
                .collect()
        })
        .collect();

    // Group by covered set, most covered first.
    let mut by_cover: HashMap<u64, Vec<usize>> = HashMap::new();
    for (li, &g) in transient.iter().enumerate() {
        let ChainNode::State(s) = &chain.nodes[g] else {
            unreachable!("transient nodes are states")
        };
        by_cover.entry(s.covered.to_mask()).or_default().push(li);
    }
    let mut blocks: Vec<(u64, Vec<usize>)> = by_cover.into_iter().collect();
    blocks.sort_unstable_by_key(|(mask, _)| (std::cmp::Reverse(mask.count_ones()), *mask));
    let blocks: Vec<Vec<usize>> = blocks.into_iter().map(|(_, b)| b).collect();

    let sol = solve_absorption(&rows, &blocks, solver)?;
    let mut values = vec![0.0; total];
    for (li, &g) in transient.iter().enumerate() {
        values[g] = sol.values[li];
    }
    Ok(HittingTimes {
        values,
        residual: sol.residual,
        method: sol.method,
    })
}

#[derive(Debug, Clone)]
pub struct ExactCoverTime {
    /// Worst hitting time over the start states.
    pub value: f64,
    pub worst_start: usize,
    /// Worst hitting time per start node, in the policy's node order.
    pub per_start: Vec<(usize, f64)>,
    pub state_count: usize,
    pub residual: f64,
}

/// Exact RWA cover time: the largest hitting time of full coverage over the
/// start states.
pub fn exact_cover_time(
    g: &StaticGraph,
    rule: &EvolutionRule,
    start: StartPolicy,
    opts: &ChainOptions,
) -> Result<ExactCoverTime, ExactError> {
    let starts = start.starts(g.node_count());
    let chain = enumerate_chain(g, rule, &starts, opts)?;
    let h = hitting_times(&chain, &opts.solver)?;
    let per_window = chain.starts.len() / starts.len();
    let per_start: Vec<(usize, f64)> = starts
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let worst = chain.starts[i * per_window..(i + 1) * per_window]
                .iter()
                .map(|&idx| h.values[idx])
                .fold(f64::NEG_INFINITY, f64::max);
            (s, worst)
        })
        .collect();
    let &(worst_start, value) = per_start
        .iter()
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .expect("at least one start");
    Ok(ExactCoverTime {
        value,
        worst_start,
        per_start,
        state_count: chain.len(),
        residual: h.residual,
    })
}

/// Exact RWA cover time under `Bernoulli(p)` using the reduced chain over
/// `(v, V_c)` only: the walker leaves `v` for each neighbor with probability
/// `(1 - (1-p)^d) / d` and stays with probability `(1-p)^d`, `d = d(v)`.
pub fn collapsed_rwa_chain_k0(g: &StaticGraph, p: f64, start: StartPolicy) -> Result<f64, ExactError> {
    Ok(collapsed_rwa_hitting_times(g, p, start)?
        .into_iter()
        .map(|(_, h)| h)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Per-start hitting times of full coverage on the reduced chain.
pub fn collapsed_rwa_hitting_times(
    g: &StaticGraph,
    p: f64,
    start: StartPolicy,
) -> Result<Vec<(usize, f64)>, ExactError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ExactError::Probability(p));
    }
    let n = g.node_count();
    if n > 64 {
        return Err(ExactError::TooLarge { n, m: g.edge_count() });
    }
    let starts = start.starts(n);
    if let Some(&s) = starts.iter().find(|&&s| s >= n) {
        return Err(ExactError::StartOutOfRange { start: s, n });
    }
    if n == 1 {
        return Ok(starts.iter().map(|&s| (s, 0.0)).collect());
    }
    if p == 0.0 {
        return Err(ExactError::Unreachable {
            state: 0,
            description: "no edge is ever alive".into(),
        });
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    // Transient states (v, covered) reachable from the starts.
    let mut index: HashMap<(usize, u64), usize> = HashMap::new();
    let mut states: Vec<(usize, u64)> = Vec::new();
    let mut queue = VecDeque::new();
    for &s in &starts {
        let key = (s, 1u64 << s);
        if key.1 != full && !index.contains_key(&key) {
            index.insert(key, states.len());
            states.push(key);
            queue.push_back(key);
        }
    }
    while let Some((v, covered)) = queue.pop_front() {
        for nb in g.neighbors(v) {
            let next = (nb.node, covered | (1u64 << nb.node));
            if next.1 != full && !index.contains_key(&next) {
                index.insert(next, states.len());
                states.push(next);
                queue.push_back(next);
            }
        }
    }

    let rows: Vec<Vec<(usize, f64)>> = states
        .iter()
        .map(|&(v, covered)| {
            let d = g.degree(v);
            let stay = (1.0 - p).powi(d as i32);
            let leave = (1.0 - stay) / d as f64;
            let mut row = vec![(index[&(v, covered)], stay)];
            for nb in g.neighbors(v) {
                let next = (nb.node, covered | (1u64 << nb.node));
                if next.1 != full {
                    row.push((index[&next], leave));
                }
            }
            row
        })
        .collect();

    let mut by_cover: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, &(_, c)) in states.iter().enumerate() {
        by_cover.entry(c).or_default().push(i);
    }
    let mut blocks: Vec<(u64, Vec<usize>)> = by_cover.into_iter().collect();
    blocks.sort_unstable_by_key(|(mask, _)| (std::cmp::Reverse(mask.count_ones()), *mask));
    let blocks: Vec<Vec<usize>> = blocks.into_iter().map(|(_, b)| b).collect();

    let sol = solve_absorption(&rows, &blocks, &SolverOptions::default())?;
    Ok(starts
        .iter()
        .map(|&s| {
            let key = (s, 1u64 << s);
            (s, index.get(&key).map(|&i| sol.values[i]).unwrap_or(0.0))
        })
        .collect())
}

/// Number of `(v, V_c)` states of the reduced chain reachable from the
/// starts, fully covered ones included (no absorbing merge).
pub fn collapsed_state_count(g: &StaticGraph, start: StartPolicy) -> Result<usize, ExactError> {
    let n = g.node_count();
    if n > 64 {
        return Err(ExactError::TooLarge { n, m: g.edge_count() });
    }
    let mut seen: HashSet<(usize, u64)> = HashSet::new();
    let mut queue = VecDeque::new();
    for s in start.starts(n) {
        if s >= n {
            return Err(ExactError::StartOutOfRange { start: s, n });
        }
        if seen.insert((s, 1u64 << s)) {
            queue.push_back((s, 1u64 << s));
        }
    }
    while let Some((v, covered)) = queue.pop_front() {
        for nb in g.neighbors(v) {
            let next = (nb.node, covered | (1u64 << nb.node));
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen.len())
}

/// Exact static (SRW) cover time, worst over all start nodes.
pub fn exact_static_cover_time(g: &StaticGraph) -> Result<f64, ExactError> {
    collapsed_rwa_chain_k0(g, 1.0, StartPolicy::SweepAll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_clique, gen_path};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn instance_probabilities() {
        let b = EvolutionRule::bernoulli(0.5).unwrap();
        let w = HistoryWindow::repeated(GraphInstance::all_dead(2), 1);
        let to = GraphInstance::from_mask(2, 0b01);
        assert_eq!(instance_transition_prob(&b, &w, &to).unwrap(), 0.25);

        let one = EvolutionRule::bernoulli(1.0).unwrap();
        assert_eq!(
            instance_transition_prob(&one, &w, &GraphInstance::all_alive(2)).unwrap(),
            1.0
        );

        let (p, q) = (0.3, 0.6);
        let bd = EvolutionRule::birth_death(p, q).unwrap();
        let got = instance_transition_prob(&bd, &w, &GraphInstance::all_alive(2)).unwrap();
        assert!(close(got, p * p));
        // alive/dead now -> alive/alive: one revival, one survival.
        let w = HistoryWindow::repeated(GraphInstance::from_mask(2, 0b10), 1);
        let got = instance_transition_prob(&bd, &w, &GraphInstance::all_alive(2)).unwrap();
        assert!(close(got, p * (1.0 - q)));

        let bad = HistoryWindow::repeated(GraphInstance::all_dead(2), 2);
        assert!(instance_transition_prob(&bd, &bad, &to).is_err());
    }

    #[test]
    fn general_table_matches_instance_prob() {
        let rule = EvolutionRule::general(2, vec![0.15, 0.4, 0.7, 0.95]).unwrap();
        let m = 3;
        let window = vec![0b011u64, 0b110];
        let table = next_instance_table(&rule, &window, m);
        let hw = HistoryWindow::new(window.iter().map(|&w| GraphInstance::from_mask(m, w)).collect());
        for (mask, &p) in table.iter().enumerate() {
            let direct = instance_transition_prob(&rule, &hw, &GraphInstance::from_mask(m, mask as u64)).unwrap();
            assert!(close(p, direct), "mask {mask}: {p} vs {direct}");
        }
        assert!(close(table.iter().sum::<f64>(), 1.0));
    }

    #[test]
    fn reduced_state_counts() {
        // K3: every (v, V_c) with v in V_c; P3 from an end: {0},{01},{012} x positions.
        assert_eq!(collapsed_state_count(&gen_clique(3).unwrap(), StartPolicy::SweepAll).unwrap(), 12);
        assert_eq!(collapsed_state_count(&gen_path(3).unwrap(), StartPolicy::Fixed(0)).unwrap(), 1 + 2 + 3);
    }

    #[test]
    fn p2_chain_structure() {
        let g = gen_path(2).unwrap();
        let rule = EvolutionRule::bernoulli(0.5).unwrap();
        let opts = ChainOptions {
            collapse_absorbing: false,
            ..Default::default()
        };
        let chain = enumerate_chain(&g, &rule, &[0, 1], &opts).unwrap();
        assert_eq!(chain.len(), 4);
        assert_eq!(chain.absorbing.len(), 2);
        // From the start state, absorption happens w.p. p each step.
        let s = chain.starts[0];
        let absorb: f64 = chain
            .transitions
            .row(s)
            .filter(|&(c, _)| chain.is_absorbing(c))
            .map(|(_, p)| p)
            .sum();
        assert!(close(absorb, 0.5));
    }

    #[test]
    fn rows_are_stochastic_and_absorbing_rows_identity() {
        let g = gen_clique(4).unwrap();
        for rule in [
            EvolutionRule::bernoulli(0.3).unwrap(),
            EvolutionRule::birth_death(0.3, 0.2).unwrap(),
        ] {
            for collapse in [true, false] {
                let opts = ChainOptions {
                    collapse_absorbing: collapse,
                    ..Default::default()
                };
                let chain = enumerate_chain(&g, &rule, &[0], &opts).unwrap();
                for r in 0..chain.len() {
                    assert!((chain.transitions.row_sum(r) - 1.0).abs() < 1e-12);
                    if chain.is_absorbing(r) {
                        assert_eq!(chain.transitions.row(r).collect::<Vec<_>>(), vec![(r, 1.0)]);
                    }
                }
            }
        }
    }

    #[test]
    fn history_shift_is_enforced() {
        // Every successor window must be (H'_1, H_1) for a 1-step rule.
        let g = gen_path(3).unwrap();
        let rule = EvolutionRule::birth_death(0.4, 0.3).unwrap();
        let opts = ChainOptions {
            collapse_absorbing: false,
            ..Default::default()
        };
        let chain = enumerate_chain(&g, &rule, &[0], &opts).unwrap();
        let rule2 = EvolutionRule::general(2, vec![0.4, 0.7, 0.4, 0.7]).unwrap();
        let chain2 = enumerate_chain(&g, &rule2, &[0], &opts).unwrap();
        for ch in [&chain, &chain2] {
            for r in 0..ch.len() {
                if ch.is_absorbing(r) {
                    continue;
                }
                let ChainNode::State(from) = &ch.nodes[r] else { unreachable!() };
                for (c, _) in ch.transitions.row(r) {
                    let ChainNode::State(to) = &ch.nodes[c] else { unreachable!() };
                    let (a, b) = (from.window.instances(), to.window.instances());
                    assert_eq!(&b[1..], &a[..a.len() - 1]);
                }
            }
        }
    }

    #[test]
    fn small_exact_values() {
        let sweep = StartPolicy::SweepAll;
        let opts = ChainOptions::default();
        let e = exact_cover_time(&gen_path(2).unwrap(), &EvolutionRule::bernoulli(0.5).unwrap(), sweep, &opts).unwrap();
        assert!(close(e.value, 2.0));
        let e = exact_cover_time(&gen_path(2).unwrap(), &EvolutionRule::bernoulli(1.0).unwrap(), sweep, &opts).unwrap();
        assert!(close(e.value, 1.0));
        let e = exact_cover_time(&gen_path(3).unwrap(), &EvolutionRule::bernoulli(1.0).unwrap(), sweep, &opts).unwrap();
        assert!(close(e.value, 5.0));
        assert_eq!(e.worst_start, 1);
        let e = exact_cover_time(&gen_clique(3).unwrap(), &EvolutionRule::bernoulli(1.0).unwrap(), sweep, &opts).unwrap();
        assert!(close(e.value, 3.0));
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn absorbing_states_have_zero_hitting_time() {
        let g = gen_path(3).unwrap();
        let chain = enumerate_chain(
            &g,
            &EvolutionRule::bernoulli(0.5).unwrap(),
            &[0],
            &ChainOptions {
                collapse_absorbing: false,
                ..Default::default()
            },
        )
        .unwrap();
        let h = hitting_times(&chain, &SolverOptions::default()).unwrap();
        for &a in &chain.absorbing {
            assert_eq!(h.values[a], 0.0);
        }
        assert!(h.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn collapsed_small_values() {
        let sweep = StartPolicy::SweepAll;
        assert!(close(collapsed_rwa_chain_k0(&gen_path(2).unwrap(), 0.5, sweep).unwrap(), 2.0));
        assert!(close(collapsed_rwa_chain_k0(&gen_clique(3).unwrap(), 1.0, sweep).unwrap(), 3.0));
        assert!(close(exact_static_cover_time(&gen_path(3).unwrap()).unwrap(), 5.0));
        let g = gen_path(3).unwrap();
        let full = exact_cover_time(&g, &EvolutionRule::bernoulli(0.5).unwrap(), sweep, &ChainOptions::default()).unwrap();
        assert!(close(collapsed_rwa_chain_k0(&g, 0.5, sweep).unwrap(), full.value));
    }

    #[test]
    fn unreachable_coverage_is_reported() {
        let g = gen_path(3).unwrap();
        let err = exact_cover_time(&g, &EvolutionRule::bernoulli(0.0).unwrap(), StartPolicy::Fixed(0), &ChainOptions::default())
            .unwrap_err();
        assert!(matches!(err, ExactError::Unreachable { .. }), "{err}");
        // Birth-death with no revival from the all-dead start.
        let err = exact_cover_time(
            &g,
            &EvolutionRule::birth_death(0.0, 0.5).unwrap(),
            StartPolicy::Fixed(0),
            &ChainOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ExactError::Unreachable { .. }), "{err}");
    }

    #[test]
    fn cap_is_enforced() {
        let g = gen_clique(8).unwrap();
        let err = enumerate_chain(&g, &EvolutionRule::bernoulli(0.5).unwrap(), &[0], &ChainOptions::default()).unwrap_err();
        match err {
            ExactError::CapExceeded { estimated, .. } => assert_eq!(estimated, 2f64.powi(28 + 7) * 8.0),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn all_initial_windows_dominates_fixed_window() {
        let g = gen_path(3).unwrap();
        let rule = EvolutionRule::birth_death(0.3, 0.2).unwrap();
        let fixed = exact_cover_time(&g, &rule, StartPolicy::SweepAll, &ChainOptions::default()).unwrap();
        let all = exact_cover_time(
            &g,
            &rule,
            StartPolicy::SweepAll,
            &ChainOptions {
                all_initial_windows: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(all.value >= fixed.value - 1e-12);
        let rule = EvolutionRule::birth_death(0.8, 0.9).unwrap();
        let fixed = exact_cover_time(&g, &rule, StartPolicy::SweepAll, &ChainOptions::default()).unwrap();
        let all = exact_cover_time(
            &g,
            &rule,
            StartPolicy::SweepAll,
            &ChainOptions {
                all_initial_windows: true,
                ..Default::default()
            },
        )
        .unwrap();
        // Alive edges mostly die here, so an all-alive window is slower.
        assert!(all.value > fixed.value + 1e-6);
    }

    #[test]
    fn dump_formats() {
        let g = gen_path(2).unwrap();
        let chain = enumerate_chain(&g, &EvolutionRule::bernoulli(0.5).unwrap(), &[0], &ChainOptions::default()).unwrap();
        let mut states = Vec::new();
        chain.write_state_table(&mut states).unwrap();
        let states = String::from_utf8(states).unwrap();
        assert_eq!(states, "index,kind,position,covered,window\n0,covered,,,\n1,transient,0,1,0\n");
        let mut trip = Vec::new();
        chain.write_triplets(&mut trip).unwrap();
        let trip = String::from_utf8(trip).unwrap();
        assert_eq!(trip, "row,col,prob\n0,0,1e0\n1,0,5e-1\n1,1,5e-1\n");
    }
}
