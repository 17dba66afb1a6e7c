//! Closed-form cover-time bounds and the electrical network analogue of RWD.
//!
//! In the network every edge is a resistor of `1/p` ohms. Hitting times of
//! RWD equal node potentials when `d(w)` amperes are injected at every node
//! `w` and `2m` are withdrawn at the target, and commute times equal
//! `2m · R_eff`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::{gen_lollipop, GraphError, StaticGraph};
use crate::linalg::{solve_dense, SolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("edge probability must lie in (0, 1], got {0}")]
    Probability(f64),
    #[error("q must lie in [0, 1], got {0}")]
    DeathProbability(f64),
    #[error("min(p, 1 - q) is zero: the upper bound is infinite")]
    ZeroXiMin,
    #[error("cover time must be positive, got {0}")]
    CoverTime(f64),
    #[error("degrees must satisfy 1 <= min <= max, got ({0}, {1})")]
    Degrees(usize, usize),
    #[error("nodes must differ and lie below {n}, got ({u}, {v})")]
    Nodes { u: usize, v: usize, n: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFormula {
    /// `C_G / p`, exact in expectation.
    RwdExpected,
    /// `2m(n-1) / p`.
    RwdGenericCap,
    /// `C_G / (1 - (1-p)^Δ)` and `C_G / (1 - (1-p)^δ)`.
    RwaDegree,
    /// `C_G / ξ_max` and `C_G / ξ_min`.
    RwdBirthDeath,
}

impl fmt::Display for BoundFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundFormula::RwdExpected => "C_G/p",
            BoundFormula::RwdGenericCap => "2m(n-1)/p",
            BoundFormula::RwaDegree => "C_G/(1-(1-p)^deg)",
            BoundFormula::RwdBirthDeath => "C_G/xi",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundInputs {
    pub cover_time: f64,
    pub p: f64,
    pub q: Option<f64>,
    pub min_degree: Option<usize>,
    pub max_degree: Option<usize>,
    pub edges: Option<usize>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lower: f64,
    pub upper: f64,
    /// Topology-only cap, when the formula provides one.
    pub cap: Option<f64>,
    pub formulas: Vec<BoundFormula>,
    pub inputs: BoundInputs,
}

fn check_p(p: f64) -> Result<(), BoundsError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(BoundsError::Probability(p))
    }
}

fn check_cover(c: f64) -> Result<(), BoundsError> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::CoverTime(c))
    }
}

/// RWD under `Bernoulli(p)`: expected cover time `C_G / p`, with the cap
/// `2m(n-1)/p` when `m` and `n` are given.
pub fn rwd_k0_bounds(cover_time: f64, p: f64, m: Option<usize>, n: Option<usize>) -> Result<BoundReport, BoundsError> {
    check_p(p)?;
    check_cover(cover_time)?;
    let expected = cover_time / p;
    let cap = match (m, n) {
        (Some(m), Some(n)) => Some(2.0 * m as f64 * (n as f64 - 1.0) / p),
        _ => None,
    };
    let mut formulas = vec![BoundFormula::RwdExpected];
    if cap.is_some() {
        formulas.push(BoundFormula::RwdGenericCap);
    }
    Ok(BoundReport {
        lower: expected,
        upper: expected,
        cap,
        formulas,
        inputs: BoundInputs {
            cover_time,
            p,
            edges: m,
            nodes: n,
            ..Default::default()
        },
    })
}

/// RWA under `Bernoulli(p)`:
/// `C_G / (1 - (1-p)^Δ) <= C <= C_G / (1 - (1-p)^δ)`.
pub fn rwa_k0_bounds(cover_time: f64, p: f64, min_degree: usize, max_degree: usize) -> Result<BoundReport, BoundsError> {
    check_p(p)?;
    check_cover(cover_time)?;
    if min_degree == 0 || min_degree > max_degree {
        return Err(BoundsError::Degrees(min_degree, max_degree));
    }
    let leave = |d: usize| 1.0 - (1.0 - p).powi(d as i32);
    Ok(BoundReport {
        lower: cover_time / leave(max_degree),
        upper: cover_time / leave(min_degree),
        cap: None,
        formulas: vec![BoundFormula::RwaDegree],
        inputs: BoundInputs {
            cover_time,
            p,
            min_degree: Some(min_degree),
            max_degree: Some(max_degree),
            ..Default::default()
        },
    })
}

/// RWD under Birth-Death `(p, q)`: `C_G / ξ_max <= C <= C_G / ξ_min` with
/// `ξ = {p, 1 - q}`.
pub fn rwd_k1_bounds(cover_time: f64, p: f64, q: f64) -> Result<BoundReport, BoundsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BoundsError::Probability(p));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(BoundsError::DeathProbability(q));
    }
    check_cover(cover_time)?;
    let xi_min = p.min(1.0 - q);
    let xi_max = p.max(1.0 - q);
    if xi_min == 0.0 {
        return Err(BoundsError::ZeroXiMin);
    }
    Ok(BoundReport {
        lower: cover_time / xi_max,
        upper: cover_time / xi_min,
        cap: None,
        formulas: vec![BoundFormula::RwdBirthDeath],
        inputs: BoundInputs {
            cover_time,
            p,
            q: Some(q),
            ..Default::default()
        },
    })
}

/// `G` with a uniform resistance of `1/p` ohms on every edge.
#[derive(Debug, Clone)]
pub struct ElectricalNetwork<'g> {
    graph: &'g StaticGraph,
    p: f64,
}

impl<'g> ElectricalNetwork<'g> {
    pub fn new(graph: &'g StaticGraph, p: f64) -> Result<Self, BoundsError> {
        check_p(p)?;
        Ok(ElectricalNetwork { graph, p })
    }

    pub fn resistance(&self) -> f64 {
        1.0 / self.p
    }

    pub fn graph(&self) -> &StaticGraph {
        self.graph
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), BoundsError> {
        let n = self.graph.node_count();
        if u == v || u >= n || v >= n {
            return Err(BoundsError::Nodes { u, v, n });
        }
        Ok(())
    }

    /// Node potentials for the injection `current`, with `ground` held at 0.
    /// The Laplacian row and column of `ground` are dropped.
    fn potentials(&self, current: &[f64], ground: usize) -> Result<Vec<f64>, BoundsError> {
        let n = self.graph.node_count();
        let reduced = |w: usize| if w < ground { w } else { w - 1 };
        let mut lap = DMatrix::<f64>::zeros(n - 1, n - 1);
        for &(a, b) in self.graph.edges() {
            for (x, y) in [(a, b), (b, a)] {
                if x != ground {
                    lap[(reduced(x), reduced(x))] += self.p;
                    if y != ground {
                        lap[(reduced(x), reduced(y))] -= self.p;
                    }
                }
            }
        }
        let rhs = DVector::from_iterator(n - 1, (0..n).filter(|&w| w != ground).map(|w| current[w]));
        let x = solve_dense(lap, rhs)?;
        Ok((0..n).map(|w| if w == ground { 0.0 } else { x[reduced(w)] }).collect())
    }

    /// Potential difference `φ(u) - φ(v)` when every node `w` receives
    /// `d(w)` amperes and `2m` leave at `v`.
    pub fn electric_hitting_time(&self, u: usize, v: usize) -> Result<f64, BoundsError> {
        self.check_pair(u, v)?;
        let g = self.graph;
        let mut current: Vec<f64> = (0..g.node_count()).map(|w| g.degree(w) as f64).collect();
        current[v] -= 2.0 * g.edge_count() as f64;
        Ok(self.potentials(&current, v)?[u])
    }

    /// RWD hitting time from the first-step equations
    /// `H(w) = 1/p + (1/d(w)) Σ_{x ~ w} H(x)`, `H(v) = 0`.
    pub fn first_step_hitting_time(&self, u: usize, v: usize) -> Result<f64, BoundsError> {
        self.check_pair(u, v)?;
        let g = self.graph;
        let n = g.node_count();
        let mut a = DMatrix::<f64>::identity(n, n);
        let mut b = DVector::<f64>::from_element(n, 1.0 / self.p);
        b[v] = 0.0;
        for w in (0..n).filter(|&w| w != v) {
            let share = 1.0 / g.degree(w) as f64;
            for nb in g.neighbors(w) {
                a[(w, nb.node)] -= share;
            }
        }
        Ok(solve_dense(a, b)?[u])
    }

    /// Potential difference per unit current from `u` to `v`.
    pub fn effective_resistance(&self, u: usize, v: usize) -> Result<f64, BoundsError> {
        self.check_pair(u, v)?;
        let mut current = vec![0.0; self.graph.node_count()];
        current[u] = 1.0;
        current[v] = -1.0;
        Ok(self.potentials(&current, v)?[u])
    }

    /// `2m · R_eff(u, v)`.
    pub fn commute_time(&self, u: usize, v: usize) -> Result<f64, BoundsError> {
        Ok(2.0 * self.graph.edge_count() as f64 * self.effective_resistance(u, v)?)
    }
}

/// Clique size of the `L_n^{2n/3}` lollipop: `⌊2n/3⌋`, clamped to `2..=n-1`.
pub fn two_thirds_clique(n: usize) -> usize {
    (2 * n / 3).clamp(2, n.saturating_sub(1).max(2))
}

/// Worst-case RWA lower bound: the RWA degree bound on the `L_n^{2n/3}`
/// lollipop, fed with that lollipop's static cover time.
pub fn lollipop_rwa_lower_bound(n: usize, p: f64, cover_time: f64) -> Result<(StaticGraph, BoundReport), BoundsError> {
    let g = gen_lollipop(n, two_thirds_clique(n))?;
    let stats = g.degree_stats();
    let report = rwa_k0_bounds(cover_time, p, stats.min_degree, stats.max_degree)?;
    Ok((g, report))
}
