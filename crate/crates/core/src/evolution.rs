//! Edge-uniform stochastic evolution rules and graph instances.
//!
//! A rule maps the last `k` states of a single edge to the probability that
//! the edge is alive at the next step; every edge applies the same rule
//! independently.

use rand::Rng;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::graph::StaticGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("probability {name} = {value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("general rule with history {k} needs {expected} table entries, got {got}")]
    TableSize { k: usize, expected: usize, got: usize },
    #[error("history length {0} is too long (max {MAX_HISTORY})")]
    HistoryTooLong(usize),
    #[error("edge history has length {got}, rule expects {expected}")]
    PatternLength { expected: usize, got: usize },
    #[error("window holds {got} instances, rule needs {expected}")]
    WindowLength { expected: usize, got: usize },
    #[error("instance covers {got} edges, graph has {expected}")]
    InstanceLength { expected: usize, got: usize },
}

/// Longest supported history for [`EvolutionRule::General`].
pub const MAX_HISTORY: usize = 16;

/// Alive/dead assignment over the possible edges of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphInstance(BitSet);

impl GraphInstance {
    pub fn all_dead(m: usize) -> Self {
        GraphInstance(BitSet::new(m))
    }

    pub fn all_alive(m: usize) -> Self {
        GraphInstance(BitSet::full(m))
    }

    /// Instance over `m <= 64` edges whose bit `e` says whether edge `e` is alive.
    pub fn from_mask(m: usize, mask: u64) -> Self {
        GraphInstance(BitSet::from_mask(m, mask))
    }

    pub fn to_mask(&self) -> u64 {
        self.0.to_mask()
    }

    pub fn edge_count(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_alive(&self, edge: usize) -> bool {
        self.0.contains(edge)
    }

    pub fn set_alive(&mut self, edge: usize, alive: bool) {
        self.0.set(edge, alive);
    }

    pub fn alive_count(&self) -> usize {
        self.0.count_ones()
    }

    pub fn alive_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter_ones()
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionRule {
    /// History-free: every edge is alive with probability `p`.
    Bernoulli { p: f64 },
    /// One-step history: a dead edge revives with probability `p`, an alive
    /// edge dies with probability `q`.
    BirthDeath { p: f64, q: f64 },
    /// Arbitrary `k`-step rule. `table[pattern]` is the alive probability,
    /// where bit `i` of `pattern` is the edge's state `i + 1` steps ago.
    General { k: usize, table: Vec<f64> },
}

fn check_prob(name: &'static str, value: f64) -> Result<(), EvolutionError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EvolutionError::Probability { name, value })
    }
}

impl EvolutionRule {
    pub fn bernoulli(p: f64) -> Result<Self, EvolutionError> {
        check_prob("p", p)?;
        Ok(EvolutionRule::Bernoulli { p })
    }

    pub fn birth_death(p: f64, q: f64) -> Result<Self, EvolutionError> {
        check_prob("p", p)?;
        check_prob("q", q)?;
        Ok(EvolutionRule::BirthDeath { p, q })
    }

    pub fn general(k: usize, table: Vec<f64>) -> Result<Self, EvolutionError> {
        if k > MAX_HISTORY {
            return Err(EvolutionError::HistoryTooLong(k));
        }
        let expected = 1usize << k;
        if table.len() != expected {
            return Err(EvolutionError::TableSize {
                k,
                expected,
                got: table.len(),
            });
        }
        for &v in &table {
            check_prob("table entry", v)?;
        }
        Ok(EvolutionRule::General { k, table })
    }

    pub fn history_length(&self) -> usize {
        match self {
            EvolutionRule::Bernoulli { .. } => 0,
            EvolutionRule::BirthDeath { .. } => 1,
            EvolutionRule::General { k, .. } => *k,
        }
    }

    /// Number of instances a [`HistoryWindow`] for this rule carries.
    pub fn window_length(&self) -> usize {
        self.history_length().max(1)
    }

    /// Alive probability for the packed pattern, bit `i` = state `i + 1`
    /// steps ago. Bits at or above the history length are ignored.
    #[inline]
    pub fn alive_probability_bits(&self, pattern: u32) -> f64 {
        match self {
            EvolutionRule::Bernoulli { p } => *p,
            EvolutionRule::BirthDeath { p, q } => {
                if pattern & 1 == 1 {
                    1.0 - q
                } else {
                    *p
                }
            }
            EvolutionRule::General { k, table } => {
                let mask = if *k == 0 { 0 } else { (1u32 << k) - 1 };
                table[(pattern & mask) as usize]
            }
        }
    }

    /// Alive probability given an edge's history, `history[i]` being its
    /// state `i + 1` steps ago.
    pub fn alive_probability(&self, history: &[bool]) -> Result<f64, EvolutionError> {
        let k = self.history_length();
        if history.len() != k {
            return Err(EvolutionError::PatternLength {
                expected: k,
                got: history.len(),
            });
        }
        let pattern = history
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &alive)| acc | (u32::from(alive) << i));
        Ok(self.alive_probability_bits(pattern))
    }

    /// True if some history pattern gives an edge zero chance of appearing.
    pub fn has_zero_alive_pattern(&self) -> bool {
        match self {
            EvolutionRule::Bernoulli { p } => *p == 0.0,
            EvolutionRule::BirthDeath { p, q } => *p == 0.0 || *q == 1.0,
            EvolutionRule::General { table, .. } => table.contains(&0.0),
        }
    }
}

/// The last `max(k, 1)` instances, most recent first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HistoryWindow {
    instances: Vec<GraphInstance>,
}

impl HistoryWindow {
    /// Window of `len` instances, entry `i` being the instance `i` steps in
    /// the past.
    pub fn new(instances: Vec<GraphInstance>) -> Self {
        assert!(!instances.is_empty(), "a window holds at least one instance");
        HistoryWindow { instances }
    }

    /// All-dead window sized for `rule` on `g`.
    pub fn all_dead(g: &StaticGraph, rule: &EvolutionRule) -> Self {
        Self::repeated(GraphInstance::all_dead(g.edge_count()), rule.window_length())
    }

    pub fn repeated(instance: GraphInstance, len: usize) -> Self {
        HistoryWindow::new(vec![instance; len.max(1)])
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn current(&self) -> &GraphInstance {
        &self.instances[0]
    }

    pub fn instances(&self) -> &[GraphInstance] {
        &self.instances
    }

    /// Packs the states of `edge` across the window: bit `i` is entry `i`.
    #[inline]
    pub fn edge_pattern(&self, edge: usize) -> u32 {
        self.instances
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, inst)| acc | (u32::from(inst.is_alive(edge)) << i))
    }

    /// Makes `next` the current instance, dropping the oldest one.
    pub fn push(&mut self, next: GraphInstance) {
        self.instances.pop();
        self.instances.insert(0, next);
    }

    /// The window after `next` arrives, leaving `self` untouched.
    pub fn shifted(&self, next: GraphInstance) -> Self {
        let mut w = self.clone();
        w.push(next);
        w
    }

    pub(crate) fn check(&self, g: &StaticGraph, rule: &EvolutionRule) -> Result<(), EvolutionError> {
        if self.len() != rule.window_length() {
            return Err(EvolutionError::WindowLength {
                expected: rule.window_length(),
                got: self.len(),
            });
        }
        let m = g.edge_count();
        if let Some(bad) = self.instances.iter().find(|i| i.edge_count() != m) {
            return Err(EvolutionError::InstanceLength {
                expected: m,
                got: bad.edge_count(),
            });
        }
        Ok(())
    }
}

/// Samples the next instance. Exactly one uniform draw is consumed per edge,
/// in edge-index order; an edge is alive when its draw falls below its alive
/// probability.
pub fn evolve_instance<R: Rng + ?Sized>(
    g: &StaticGraph,
    rule: &EvolutionRule,
    window: &HistoryWindow,
    rng: &mut R,
) -> Result<GraphInstance, EvolutionError> {
    window.check(g, rule)?;
    Ok(evolve_unchecked(g.edge_count(), rule, window, rng))
}

#[inline]
pub(crate) fn evolve_unchecked<R: Rng + ?Sized>(
    m: usize,
    rule: &EvolutionRule,
    window: &HistoryWindow,
    rng: &mut R,
) -> GraphInstance {
    let mut next = GraphInstance::all_dead(m);
    match rule {
        EvolutionRule::Bernoulli { p } => {
            for e in 0..m {
                if rng.gen::<f64>() < *p {
                    next.set_alive(e, true);
                }
            }
        }
        _ => {
            for e in 0..m {
                let prob = rule.alive_probability_bits(window.edge_pattern(e));
                if rng.gen::<f64>() < prob {
                    next.set_alive(e, true);
                }
            }
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_clique, gen_path};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alive_probability_examples() {
        let bd = EvolutionRule::birth_death(0.3, 0.2).unwrap();
        assert_eq!(bd.alive_probability(&[true]).unwrap(), 0.8);
        assert_eq!(bd.alive_probability(&[false]).unwrap(), 0.3);
        let b = EvolutionRule::bernoulli(0.5).unwrap();
        assert_eq!(b.alive_probability(&[]).unwrap(), 0.5);
        assert_eq!(
            b.alive_probability(&[true]),
            Err(EvolutionError::PatternLength {
                expected: 0,
                got: 1
            })
        );
    }

    #[test]
    fn general_rule_indexing() {
        // 2-step rule: alive iff alive both of the last two steps.
        let r = EvolutionRule::general(2, vec![0.1, 0.2, 0.3, 0.9]).unwrap();
        assert_eq!(r.alive_probability(&[true, false]).unwrap(), 0.2);
        assert_eq!(r.alive_probability(&[false, true]).unwrap(), 0.3);
        assert_eq!(r.alive_probability(&[true, true]).unwrap(), 0.9);
        assert!(EvolutionRule::general(2, vec![0.5; 3]).is_err());
        assert!(EvolutionRule::bernoulli(1.2).is_err());
        assert!(EvolutionRule::birth_death(0.5, -0.1).is_err());
    }

    #[test]
    fn extreme_bernoulli_instances() {
        let g = gen_clique(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let one = EvolutionRule::bernoulli(1.0).unwrap();
        let zero = EvolutionRule::bernoulli(0.0).unwrap();
        let w = HistoryWindow::all_dead(&g, &one);
        assert_eq!(
            evolve_instance(&g, &one, &w, &mut rng).unwrap(),
            GraphInstance::all_alive(10)
        );
        assert_eq!(
            evolve_instance(&g, &zero, &w, &mut rng).unwrap(),
            GraphInstance::all_dead(10)
        );
    }

    #[test]
    fn window_mismatch_is_rejected() {
        let g = gen_path(3).unwrap();
        let bd = EvolutionRule::birth_death(0.5, 0.5).unwrap();
        let w = HistoryWindow::repeated(GraphInstance::all_dead(2), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            evolve_instance(&g, &bd, &w, &mut rng),
            Err(EvolutionError::WindowLength { .. })
        ));
        let w = HistoryWindow::repeated(GraphInstance::all_dead(3), 1);
        assert!(matches!(
            evolve_instance(&g, &bd, &w, &mut rng),
            Err(EvolutionError::InstanceLength { .. })
        ));
    }

    #[test]
    fn window_shift_keeps_order() {
        let a = GraphInstance::from_mask(2, 0b01);
        let b = GraphInstance::from_mask(2, 0b10);
        let c = GraphInstance::from_mask(2, 0b11);
        let mut w = HistoryWindow::new(vec![a.clone(), b.clone()]);
        w.push(c.clone());
        assert_eq!(w.instances(), &[c, a]);
        // edge 0 alive now (c) and one step before (a)
        assert_eq!(w.edge_pattern(0), 0b11);
        assert_eq!(w.edge_pattern(1), 0b01);
    }

    #[test]
    fn birth_death_survival_frequency() {
        // Single edge alive now; next state alive w.p. 1 - q.
        let g = gen_path(2).unwrap();
        let (p, q) = (0.3, 0.2);
        let rule = EvolutionRule::birth_death(p, q).unwrap();
        let w = HistoryWindow::new(vec![GraphInstance::all_alive(1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000;
        let alive = (0..draws)
            .filter(|_| evolve_instance(&g, &rule, &w, &mut rng).unwrap().is_alive(0))
            .count() as f64;
        let expect = 1.0 - q;
        let sigma = (draws as f64 * expect * (1.0 - expect)).sqrt();
        assert!((alive - draws as f64 * expect).abs() < 3.0 * sigma);
    }

    #[test]
    fn bernoulli_alive_count_is_binomial() {
        // Chi-square goodness of fit of the alive count on K4 (m = 6).
        let g = gen_clique(4).unwrap();
        let p = 0.35;
        let rule = EvolutionRule::bernoulli(p).unwrap();
        let w = HistoryWindow::all_dead(&g, &rule);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = 20_000;
        let mut counts = [0usize; 7];
        for _ in 0..draws {
            counts[evolve_instance(&g, &rule, &w, &mut rng).unwrap().alive_count()] += 1;
        }
        let binom = |k: usize| {
            let c = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0][k];
            c * p.powi(k as i32) * (1.0 - p).powi(6 - k as i32)
        };
        let chi2: f64 = (0..7)
            .map(|k| {
                let e = binom(k) * draws as f64;
                (counts[k] as f64 - e).powi(2) / e
            })
            .sum();
        // 6 degrees of freedom, 99.9% quantile is 22.46.
        assert!(chi2 < 22.46, "chi2 = {chi2}");
    }

    #[test]
    fn memoryless_birth_death_matches_bernoulli() {
        let g = gen_clique(5).unwrap();
        let p = 0.25;
        let bd = EvolutionRule::birth_death(p, 1.0 - p).unwrap();
        let b = EvolutionRule::bernoulli(p).unwrap();
        assert_eq!(bd.alive_probability(&[true]).unwrap(), p);
        assert_eq!(bd.alive_probability(&[false]).unwrap(), p);

        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let mut wb = HistoryWindow::all_dead(&g, &b);
        let mut wbd = HistoryWindow::all_dead(&g, &bd);
        for _ in 0..200 {
            let x = evolve_instance(&g, &b, &wb, &mut r1).unwrap();
            let y = evolve_instance(&g, &bd, &wbd, &mut r2).unwrap();
            assert_eq!(x, y);
            wb.push(x);
            wbd.push(y);
        }
    }

    #[test]
    fn evolution_is_deterministic() {
        let g = gen_clique(6).unwrap();
        let rule = EvolutionRule::birth_death(0.4, 0.3).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = HistoryWindow::all_dead(&g, &rule);
            for _ in 0..50 {
                let next = evolve_instance(&g, &rule, &w, &mut rng).unwrap();
                w.push(next);
            }
            w
        };
        assert_eq!(run(5), run(5));
    }
}
