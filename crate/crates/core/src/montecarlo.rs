//! Monte Carlo cover-time estimation.
//!
//! Trial `t` from start `s` always draws from its own ChaCha8 stream derived
//! from `(seed, s, t)`, so results do not depend on scheduling. In chained
//! mode each trial begins from the previous trial's final window and trials
//! run sequentially; otherwise they run in parallel from the initial window.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::evolution::{EvolutionRule, HistoryWindow};
use crate::graph::StaticGraph;
use crate::walks::{run_cover_walk, Strategy, WalkError, WalkOptions, DEFAULT_STEP_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    Fixed(usize),
    /// Every node in turn; the worst mean is reported.
    SweepAll,
}

impl StartPolicy {
    pub fn starts(&self, n: usize) -> Vec<usize> {
        match *self {
            StartPolicy::Fixed(v) => vec![v],
            StartPolicy::SweepAll => (0..n).collect(),
        }
    }
}

impl std::fmt::Display for StartPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StartPolicy::Fixed(v) => write!(f, "{v}"),
            StartPolicy::SweepAll => f.write_str("sweep"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub rule: EvolutionRule,
    pub strategy: Strategy,
    pub trials: u64,
    pub start: StartPolicy,
    pub chaining: bool,
    pub seed: u64,
    pub step_limit: u64,
    /// Window of the first trial; all-dead when `None`.
    pub initial_window: Option<HistoryWindow>,
}

impl ExperimentConfig {
    pub fn new(rule: EvolutionRule, strategy: Strategy) -> Self {
        ExperimentConfig {
            rule,
            strategy,
            trials: 1000,
            start: StartPolicy::Fixed(0),
            chaining: true,
            seed: 0,
            step_limit: DEFAULT_STEP_LIMIT,
            initial_window: None,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn start(mut self, start: StartPolicy) -> Self {
        self.start = start;
        self
    }

    pub fn chaining(mut self, chaining: bool) -> Self {
        self.chaining = chaining;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverTimeEstimate {
    pub start: usize,
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub min: u64,
    pub max: u64,
}

impl CoverTimeEstimate {
    pub fn from_samples(start: usize, samples: &[u64]) -> Self {
        assert!(!samples.is_empty(), "at least one trial");
        let count = samples.len() as f64;
        let mean = samples.iter().map(|&s| s as f64).sum::<f64>() / count;
        let std_error = if samples.len() > 1 {
            let var = samples
                .iter()
                .map(|&s| (s as f64 - mean).powi(2))
                .sum::<f64>()
                / (count - 1.0);
            (var / count).sqrt()
        } else {
            0.0
        };
        CoverTimeEstimate {
            start,
            mean,
            std_error,
            trials: samples.len() as u64,
            min: *samples.iter().min().unwrap(),
            max: *samples.iter().max().unwrap(),
        }
    }

    /// Mean rounded to the nearest natural number.
    pub fn rounded(&self) -> u64 {
        self.mean.round() as u64
    }
}

/// Random stream for one trial.
pub fn trial_rng(seed: u64, start: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((start as u64) << 40) ^ trial);
    rng
}

/// Per-trial cover times from a single start node.
pub fn run_trials(g: &StaticGraph, cfg: &ExperimentConfig, start: usize) -> Result<Vec<u64>, WalkError> {
    let opts = WalkOptions {
        step_limit: cfg.step_limit,
    };
    let first = cfg
        .initial_window
        .clone()
        .unwrap_or_else(|| HistoryWindow::all_dead(g, &cfg.rule));

    if cfg.chaining {
        let mut window = first;
        let mut out = Vec::with_capacity(cfg.trials as usize);
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, start, t);
            let res = run_cover_walk(g, &cfg.rule, cfg.strategy, start, &window, &mut rng, &opts)?;
            out.push(res.steps);
            if cfg.strategy != Strategy::Srw {
                window = res.final_window;
            }
        }
        Ok(out)
    } else {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, start, t);
                run_cover_walk(g, &cfg.rule, cfg.strategy, start, &first, &mut rng, &opts).map(|r| r.steps)
            })
            .collect()
    }
}

/// One estimate per start node of the policy.
pub fn estimate_cover_time_per_start(
    g: &StaticGraph,
    cfg: &ExperimentConfig,
) -> Result<Vec<CoverTimeEstimate>, WalkError> {
    assert!(cfg.trials >= 1, "trials must be at least 1");
    cfg.start
        .starts(g.node_count())
        .into_iter()
        .map(|s| {
            if s >= g.node_count() {
                return Err(WalkError::StartOutOfRange {
                    start: s,
                    n: g.node_count(),
                });
            }
            run_trials(g, cfg, s).map(|samples| CoverTimeEstimate::from_samples(s, &samples))
        })
        .collect()
}

/// Cover-time estimate; under [`StartPolicy::SweepAll`] the start with the
/// largest mean.
pub fn estimate_cover_time(g: &StaticGraph, cfg: &ExperimentConfig) -> Result<CoverTimeEstimate, WalkError> {
    let per_start = estimate_cover_time_per_start(g, cfg)?;
    Ok(per_start
        .into_iter()
        .reduce(|best, e| if e.mean > best.mean { e } else { best })
        .expect("policy yields at least one start"))
}

/// Static (SRW) cover time.
pub fn estimate_static_cover_time(
    g: &StaticGraph,
    start: StartPolicy,
    trials: u64,
    seed: u64,
) -> Result<CoverTimeEstimate, WalkError> {
    let cfg = ExperimentConfig::new(EvolutionRule::Bernoulli { p: 1.0 }, Strategy::Srw)
        .trials(trials)
        .seed(seed)
        .start(start)
        .chaining(false);
    estimate_cover_time(g, &cfg)
}
