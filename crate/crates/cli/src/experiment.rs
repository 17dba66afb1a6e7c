//! Table-style experiments: static vs temporal cover time plus bounds.

use std::fmt::Write as _;

use evocover::bounds::{rwa_k0_bounds, rwd_k0_bounds, rwd_k1_bounds, two_thirds_clique, BoundsError};
use evocover::graph::GraphError;
use evocover::walks::WalkError;
use evocover::{
    estimate_cover_time, gen_clique, gen_lollipop, gen_path, gen_random_threshold, CoverTimeEstimate, EvolutionRule,
    ExperimentConfig, StaticGraph, Strategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, Family, Section};

pub const CSV_COLUMNS: [&str; 11] = [
    "size", "delta", "Delta", "p", "q", "static", "temporal", "lower", "upper", "trials", "se",
];

#[derive(Debug, thiserror::Error)]
pub enum RowError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Debug, thiserror::Error)]
#[error("section `{section}`, n = {size}, p = {p}: {source}")]
pub struct ExperimentError {
    pub section: String,
    pub size: usize,
    pub p: f64,
    #[source]
    pub source: RowError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub size: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub p: f64,
    pub q: Option<f64>,
    pub static_cover: f64,
    pub temporal_cover: f64,
    /// `None` when no bound is known for the rule/walk pair.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub trials: u64,
    /// Standard error of the temporal mean.
    pub se: f64,
    /// Standard error of the static mean (not part of the CSV).
    pub static_se: f64,
}

impl TableRow {
    /// `lower - 3se <= temporal <= upper + 3se`; vacuous without bounds.
    pub fn within_bounds(&self, sigmas: f64) -> bool {
        let slack = sigmas * self.se;
        self.lower.is_none_or(|l| self.temporal_cover >= l - slack)
            && self.upper.is_none_or(|u| self.temporal_cover <= u + slack)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub metadata: Vec<String>,
    pub rows: Vec<TableRow>,
}

fn build_graph_for(section: &Section, n: usize, rng: &mut ChaCha8Rng) -> Result<StaticGraph, GraphError> {
    match section.family {
        Family::RandomThreshold => gen_random_threshold(n, section.threshold, rng),
        Family::Lollipop => gen_lollipop(n, section.clique.unwrap_or_else(|| two_thirds_clique(n))),
        Family::Path => gen_path(n),
        Family::Clique => gen_clique(n),
    }
}

fn bounds_for(
    strategy: Strategy,
    rule: &EvolutionRule,
    static_cover: f64,
    g: &StaticGraph,
) -> Result<(Option<f64>, Option<f64>), BoundsError> {
    let stats = g.degree_stats();
    let report = match (strategy, rule) {
        (Strategy::Srw, _) => return Ok((Some(static_cover), Some(static_cover))),
        (Strategy::Rwa, EvolutionRule::Bernoulli { p }) => rwa_k0_bounds(static_cover, *p, stats.min_degree, stats.max_degree)?,
        (Strategy::Rwd, EvolutionRule::Bernoulli { p }) => rwd_k0_bounds(static_cover, *p, None, None)?,
        (Strategy::Rwd, EvolutionRule::BirthDeath { p, q }) => rwd_k1_bounds(static_cover, *p, *q)?,
        _ => return Ok((None, None)),
    };
    Ok((Some(report.lower), Some(report.upper)))
}

fn section_metadata(s: &Section) -> String {
    let mut line = format!("# section={} family={}", s.name, s.family);
    match s.family {
        Family::RandomThreshold => write!(line, " threshold={}", s.threshold).unwrap(),
        Family::Lollipop => match s.clique {
            Some(k) => write!(line, " clique={k}").unwrap(),
            None => line.push_str(" clique=floor(2n/3)"),
        },
        _ => {}
    }
    let rule = match s.q {
        Some(q) => format!("birth_death(q={q})"),
        None => "bernoulli".into(),
    };
    let st = &s.settings;
    write!(
        line,
        " rule={rule} seed={} start={} trials={} strategy={} chaining={} step_limit={}",
        st.seed, st.start, st.trials, st.strategy, st.chaining, st.step_limit
    )
    .unwrap();
    line
}

/// Runs one row: a fresh graph, static SRW estimate, temporal estimate and
/// bounds. Row `i` of a section draws its graph and both Monte Carlo seeds
/// from ChaCha8 stream `i` of the section seed.
pub fn run_row(section: &Section, row: u64, n: usize, p: f64) -> Result<TableRow, RowError> {
    let st = &section.settings;
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    rng.set_stream(row);
    let g = build_graph_for(section, n, &mut rng)?;
    let static_seed: u64 = rng.gen();
    let temporal_seed: u64 = rng.gen();

    let rule = section.rule_for(p);
    let static_cfg = ExperimentConfig {
        step_limit: st.step_limit,
        ..ExperimentConfig::new(EvolutionRule::Bernoulli { p: 1.0 }, Strategy::Srw)
            .trials(st.trials)
            .seed(static_seed)
            .start(st.start)
            .chaining(false)
    };
    let static_est: CoverTimeEstimate = estimate_cover_time(&g, &static_cfg)?;
    let temporal_cfg = ExperimentConfig {
        step_limit: st.step_limit,
        ..ExperimentConfig::new(rule.clone(), st.strategy)
            .trials(st.trials)
            .seed(temporal_seed)
            .start(st.start)
            .chaining(st.chaining)
    };
    let temporal = estimate_cover_time(&g, &temporal_cfg)?;
    let (lower, upper) = bounds_for(st.strategy, &rule, static_est.mean, &g)?;
    let stats = g.degree_stats();
    Ok(TableRow {
        size: n,
        min_degree: stats.min_degree,
        max_degree: stats.max_degree,
        p,
        q: section.q,
        static_cover: static_est.mean,
        temporal_cover: temporal.mean,
        lower,
        upper,
        trials: st.trials,
        se: temporal.std_error,
        static_se: static_est.std_error,
    })
}

pub fn run_experiment(config: &Config) -> Result<ExperimentReport, ExperimentError> {
    let mut metadata = vec!["# evocover experiment".to_string()];
    let mut rows = Vec::with_capacity(config.row_count());
    for section in &config.sections {
        metadata.push(section_metadata(section));
        let mut row = 0u64;
        for &n in &section.sizes {
            for &p in &section.p_values {
                let r = run_row(section, row, n, p).map_err(|source| ExperimentError {
                    section: section.name.clone(),
                    size: n,
                    p,
                    source,
                })?;
                rows.push(r);
                row += 1;
            }
        }
    }
    Ok(ExperimentReport { metadata, rows })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.metadata {
            out.push_str(m);
            out.push('\n');
        }
        out.push_str(&CSV_COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.size,
                r.min_degree,
                r.max_degree,
                r.p,
                opt(r.q),
                r.static_cover,
                r.temporal_cover,
                opt(r.lower),
                opt(r.upper),
                r.trials,
                r.se
            )
            .unwrap();
        }
        out
    }

    /// Aligned table with cover times and bounds rounded to the nearest
    /// natural number.
    pub fn to_pretty(&self) -> String {
        let round = |x: f64| format!("{}", x.round() as u64);
        let header: Vec<String> = ["Size", "δ", "Δ", "p", "q", "Static", "Temporal", "Lower", "Upper", "Trials", "SE"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut cells = vec![header];
        for r in &self.rows {
            cells.push(vec![
                r.size.to_string(),
                r.min_degree.to_string(),
                r.max_degree.to_string(),
                r.p.to_string(),
                opt(r.q),
                round(r.static_cover),
                round(r.temporal_cover),
                r.lower.map(round).unwrap_or_else(|| "-".into()),
                r.upper.map(round).unwrap_or_else(|| "-".into()),
                r.trials.to_string(),
                format!("{:.2}", r.se),
            ]);
        }
        let widths: Vec<usize> = (0..cells[0].len())
            .map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for m in &self.metadata {
            out.push_str(m);
            out.push('\n');
        }
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{}{cell}", " ".repeat(w - cell.chars().count())))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        out
    }
}
