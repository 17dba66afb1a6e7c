//! Experiment configuration.
//!
//! A config is a TOML file with optional top-level defaults and one
//! `[[experiment]]` section per table:
//!
//! ```toml
//! seed = 7
//! trials = 1000
//!
//! [[experiment]]
//! name = "dense"
//! family = "random_threshold"
//! n = [10, 100]
//! threshold = 0.85
//! p = [0.9, 0.5, 0.2]
//! ```
//!
//! Every row of the output is one `(n, p)` pair of a section, in file order.

use std::fmt;
use std::ops::Range;

use evocover::{EvolutionRule, StartPolicy, Strategy};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{}: {message}", location(.line, .field))]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

fn location(line: &Option<usize>, field: &Option<String>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!("line {l}, field `{f}`"),
        (Some(l), None) => format!("line {l}"),
        (None, Some(f)) => format!("field `{f}`"),
        (None, None) => "config".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomThreshold,
    Lollipop,
    Path,
    Clique,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::RandomThreshold => "random_threshold",
            Family::Lollipop => "lollipop",
            Family::Path => "path",
            Family::Clique => "clique",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Bernoulli,
    BirthDeath,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawStart {
    Node(usize),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<Spanned<u64>>,
    trials: Option<Spanned<u64>>,
    strategy: Option<Spanned<String>>,
    start: Option<Spanned<RawStart>>,
    chaining: Option<bool>,
    step_limit: Option<Spanned<u64>>,
    #[serde(default)]
    experiment: Vec<RawSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    name: Option<String>,
    family: Spanned<Family>,
    n: Spanned<OneOrMany<usize>>,
    threshold: Option<Spanned<f64>>,
    clique: Option<Spanned<usize>>,
    rule: Option<RuleKind>,
    p: Spanned<OneOrMany<f64>>,
    q: Option<Spanned<f64>>,
    seed: Option<Spanned<u64>>,
    trials: Option<Spanned<u64>>,
    strategy: Option<Spanned<String>>,
    start: Option<Spanned<RawStart>>,
    chaining: Option<bool>,
    step_limit: Option<Spanned<u64>>,
}

/// Run settings shared by the whole file unless a section overrides them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub trials: u64,
    pub strategy: Strategy,
    pub start: StartPolicy,
    pub chaining: bool,
    pub step_limit: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            seed: 0,
            trials: 1000,
            strategy: Strategy::Rwa,
            start: StartPolicy::Fixed(0),
            chaining: true,
            step_limit: evocover::walks::DEFAULT_STEP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub family: Family,
    pub sizes: Vec<usize>,
    pub threshold: f64,
    /// Lollipop clique size; `None` means `floor(2n/3)`.
    pub clique: Option<usize>,
    pub rule: RuleKind,
    pub p_values: Vec<f64>,
    pub q: Option<f64>,
    pub settings: RunSettings,
}

impl Section {
    pub fn rule_for(&self, p: f64) -> EvolutionRule {
        match self.rule {
            RuleKind::Bernoulli => EvolutionRule::Bernoulli { p },
            RuleKind::BirthDeath => EvolutionRule::BirthDeath { p, q: self.q.expect("validated") },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub sections: Vec<Section>,
}

/// Command-line or environment overrides; they beat both file levels.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub strategy: Option<Strategy>,
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.src.len());
        self.src[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: Some(self.line(span)),
            field: Some(field.to_string()),
            message: message.into(),
        })
    }

    fn strategy(&self, s: &Spanned<String>) -> Result<Strategy, ConfigError> {
        s.get_ref()
            .parse()
            .or_else(|_| self.err(s.span(), "strategy", format!("unknown strategy {:?} (rwd, rwa, srw)", s.get_ref())))
    }

    fn start(&self, s: &Spanned<RawStart>) -> Result<StartPolicy, ConfigError> {
        match s.get_ref() {
            RawStart::Node(v) => Ok(StartPolicy::Fixed(*v)),
            RawStart::Keyword(k) if k == "sweep" => Ok(StartPolicy::SweepAll),
            RawStart::Keyword(k) => self.err(s.span(), "start", format!("expected a node index or \"sweep\", got {k:?}")),
        }
    }

    fn positive(&self, v: &Option<Spanned<u64>>, field: &str) -> Result<Option<u64>, ConfigError> {
        match v {
            Some(s) if *s.get_ref() == 0 => self.err(s.span(), field, "must be positive"),
            Some(s) => Ok(Some(*s.get_ref())),
            None => Ok(None),
        }
    }
}

fn parse_error(src: &str, e: toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| Ctx { src }.line(s));
    ConfigError {
        line,
        field: None,
        message: e.message().trim().to_string(),
    }
}

impl Config {
    pub fn parse(src: &str, overrides: &Overrides) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| parse_error(src, e))?;
        let ctx = Ctx { src };

        let mut base = RunSettings::default();
        if let Some(s) = &raw.seed {
            base.seed = *s.get_ref();
        }
        if let Some(t) = ctx.positive(&raw.trials, "trials")? {
            base.trials = t;
        }
        if let Some(s) = &raw.strategy {
            base.strategy = ctx.strategy(s)?;
        }
        if let Some(s) = &raw.start {
            base.start = ctx.start(s)?;
        }
        if let Some(c) = raw.chaining {
            base.chaining = c;
        }
        if let Some(l) = ctx.positive(&raw.step_limit, "step_limit")? {
            base.step_limit = l;
        }

        if raw.experiment.is_empty() {
            return Err(ConfigError {
                line: None,
                field: Some("experiment".into()),
                message: "no [[experiment]] section".into(),
            });
        }

        let mut sections = Vec::with_capacity(raw.experiment.len());
        for (i, sec) in raw.experiment.into_iter().enumerate() {
            let mut settings = base.clone();
            if let Some(s) = &sec.seed {
                settings.seed = *s.get_ref();
            }
            if let Some(t) = ctx.positive(&sec.trials, "trials")? {
                settings.trials = t;
            }
            if let Some(s) = &sec.strategy {
                settings.strategy = ctx.strategy(s)?;
            }
            if let Some(s) = &sec.start {
                settings.start = ctx.start(s)?;
            }
            if let Some(c) = sec.chaining {
                settings.chaining = c;
            }
            if let Some(l) = ctx.positive(&sec.step_limit, "step_limit")? {
                settings.step_limit = l;
            }
            if let Some(s) = overrides.seed {
                settings.seed = s;
            }
            if let Some(t) = overrides.trials {
                settings.trials = t;
            }
            if let Some(s) = overrides.strategy {
                settings.strategy = s;
            }

            let family = *sec.family.get_ref();
            let n_span = sec.n.span();
            let sizes = sec.n.into_inner().into_vec();
            if sizes.is_empty() {
                return ctx.err(n_span, "n", "empty list");
            }
            let min_n = if family == Family::Lollipop { 3 } else { 2 };
            if let Some(&bad) = sizes.iter().find(|&&n| n < min_n) {
                return ctx.err(n_span, "n", format!("{family} needs n >= {min_n}, got {bad}"));
            }
            if let StartPolicy::Fixed(v) = settings.start {
                if let Some(&n) = sizes.iter().find(|&&n| v >= n) {
                    let span = sec.start.as_ref().or(raw.start.as_ref()).map(|s| s.span()).unwrap_or(n_span.clone());
                    return ctx.err(span, "start", format!("start node {v} is out of range for n = {n}"));
                }
            }

            let threshold = match (family, &sec.threshold) {
                (Family::RandomThreshold, None) => {
                    return ctx.err(sec.family.span(), "threshold", "random_threshold needs a threshold");
                }
                (Family::RandomThreshold, Some(t)) => {
                    let t_val = *t.get_ref();
                    if !(0.0..=1.0).contains(&t_val) {
                        return ctx.err(t.span(), "threshold", format!("{t_val} is outside [0, 1]"));
                    }
                    t_val
                }
                (_, Some(t)) => return ctx.err(t.span(), "threshold", format!("not used by {family}")),
                (_, None) => 0.0,
            };

            let clique = match (&sec.clique, family) {
                (Some(k), Family::Lollipop) => {
                    let k_val = *k.get_ref();
                    if let Some(&n) = sizes.iter().find(|&&n| k_val < 2 || k_val >= n) {
                        return ctx.err(k.span(), "clique", format!("need 2 <= clique < n, got {k_val} with n = {n}"));
                    }
                    Some(k_val)
                }
                (Some(k), _) => return ctx.err(k.span(), "clique", format!("not used by {family}")),
                (None, _) => None,
            };

            let p_span = sec.p.span();
            let p_values = sec.p.into_inner().into_vec();
            if p_values.is_empty() {
                return ctx.err(p_span, "p", "empty list");
            }
            if let Some(&bad) = p_values.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
                return ctx.err(p_span, "p", format!("{bad} is outside (0, 1]"));
            }

            let rule = sec.rule.unwrap_or(RuleKind::Bernoulli);
            let q = match (rule, &sec.q) {
                (RuleKind::BirthDeath, Some(q)) => {
                    let q_val = *q.get_ref();
                    if !(0.0..1.0).contains(&q_val) {
                        return ctx.err(q.span(), "q", format!("{q_val} is outside [0, 1)"));
                    }
                    Some(q_val)
                }
                (RuleKind::BirthDeath, None) => {
                    return ctx.err(sec.family.span(), "q", "birth_death needs q");
                }
                (RuleKind::Bernoulli, Some(q)) => return ctx.err(q.span(), "q", "only used with rule = \"birth_death\""),
                (RuleKind::Bernoulli, None) => None,
            };

            sections.push(Section {
                name: sec.name.unwrap_or_else(|| format!("experiment{}", i + 1)),
                family,
                sizes,
                threshold,
                clique,
                rule,
                p_values,
                q,
                settings,
            });
        }
        Ok(Config { sections })
    }

    pub fn row_count(&self) -> usize {
        self.sections.iter().map(|s| s.sizes.len() * s.p_values.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 11
trials = 500

[[experiment]]
name = "dense"
family = "random_threshold"
n = 10
threshold = 0.85
p = [0.9, 0.1]

[[experiment]]
family = "lollipop"
n = [6, 9]
clique = 4
rule = "birth_death"
p = 0.3
q = 0.2
strategy = "rwd"
start = "sweep"
trials = 50
"#;

    #[test]
    fn parses_sections_and_defaults() {
        let c = Config::parse(BASIC, &Overrides::default()).unwrap();
        assert_eq!(c.sections.len(), 2);
        assert_eq!(c.row_count(), 4);
        let a = &c.sections[0];
        assert_eq!(a.name, "dense");
        assert_eq!(a.settings.seed, 11);
        assert_eq!(a.settings.trials, 500);
        assert_eq!(a.settings.start, StartPolicy::Fixed(0));
        assert!(a.settings.chaining);
        let b = &c.sections[1];
        assert_eq!(b.name, "experiment2");
        assert_eq!(b.sizes, vec![6, 9]);
        assert_eq!(b.settings.trials, 50);
        assert_eq!(b.settings.strategy, Strategy::Rwd);
        assert_eq!(b.settings.start, StartPolicy::SweepAll);
        assert_eq!(b.rule_for(0.3), EvolutionRule::BirthDeath { p: 0.3, q: 0.2 });
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(99),
            trials: Some(3),
            strategy: Some(Strategy::Srw),
        };
        let c = Config::parse(BASIC, &o).unwrap();
        for s in &c.sections {
            assert_eq!(s.settings.seed, 99);
            assert_eq!(s.settings.trials, 3);
            assert_eq!(s.settings.strategy, Strategy::Srw);
        }
    }

    fn error_of(src: &str) -> ConfigError {
        Config::parse(src, &Overrides::default()).unwrap_err()
    }

    #[test]
    fn threshold_out_of_range_names_line_and_field() {
        let e = error_of("[[experiment]]\nfamily = \"random_threshold\"\nn = 5\nthreshold = 1.5\np = 0.5\n");
        assert_eq!(e.line, Some(4));
        assert_eq!(e.field.as_deref(), Some("threshold"));
        assert!(e.to_string().starts_with("line 4, field `threshold`"), "{e}");
    }

    #[test]
    fn bad_p_and_strategy() {
        let e = error_of("[[experiment]]\nfamily = \"path\"\nn = 5\np = [0.5, 0.0]\n");
        assert_eq!((e.line, e.field.as_deref()), (Some(4), Some("p")));
        let e = error_of("[[experiment]]\nfamily = \"path\"\nn = 5\np = 0.5\nstrategy = \"fast\"\n");
        assert_eq!((e.line, e.field.as_deref()), (Some(5), Some("strategy")));
    }

    #[test]
    fn syntax_and_unknown_keys_report_lines() {
        let e = error_of("[[experiment]]\nfamily = \"path\"\nn = = 5\n");
        assert_eq!(e.line, Some(3));
        let e = error_of("[[experiment]]\nfamily = \"path\"\nn = 5\np = 0.5\ncolour = 1\n");
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("colour"), "{}", e.message);
        let e = error_of("[[experiment]]\nfamily = \"star\"\nn = 5\np = 0.5\n");
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn missing_pieces() {
        assert_eq!(error_of("seed = 1\n").field.as_deref(), Some("experiment"));
        let e = error_of("[[experiment]]\nfamily = \"random_threshold\"\nn = 5\np = 0.5\n");
        assert_eq!(e.field.as_deref(), Some("threshold"));
        let e = error_of("[[experiment]]\nfamily = \"path\"\nrule = \"birth_death\"\nn = 5\np = 0.5\n");
        assert_eq!(e.field.as_deref(), Some("q"));
        let e = error_of("start = 7\n[[experiment]]\nfamily = \"path\"\nn = 5\np = 0.5\n");
        assert_eq!((e.line, e.field.as_deref()), (Some(1), Some("start")));
        let e = error_of("[[experiment]]\nfamily = \"lollipop\"\nn = 5\nclique = 5\np = 0.5\n");
        assert_eq!((e.line, e.field.as_deref()), (Some(4), Some("clique")));
    }
}
