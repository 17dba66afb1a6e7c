//! Static underlying graphs and the generators used by the experiments.
//!
//! Nodes are dense `0..n` ids. Edges are stored canonically as `(min, max)`
//! pairs in lexicographic order; the position of an edge in that order is its
//! edge index, which is what graph instances are indexed by.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("edge {{{u}, {v}}} references a node outside 0..{n}")]
    NodeOutOfRange { u: usize, v: usize, n: usize },
    #[error("graph is disconnected: node {0} is unreachable from node 0")]
    Disconnected(usize),
    #[error("lollipop clique size {k} must lie in 2..={max} for n = {n}")]
    LollipopSize { n: usize, k: usize, max: usize },
    #[error("threshold {0} is not a probability")]
    Threshold(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub node: usize,
    /// Index of the connecting edge in [`StaticGraph::edges`].
    pub edge: usize,
}

/// A simple, undirected, connected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Neighbor>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeStats {
    pub min_degree: usize,
    pub max_degree: usize,
}

impl StaticGraph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(min, max)` pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `v` sorted by node id.
    pub fn neighbors(&self, v: usize) -> &[Neighbor] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    pub fn degree_stats(&self) -> DegreeStats {
        degree_stats(self)
    }

    /// Serializes to the edge-list text format: `n m` followed by one `u v`
    /// line per edge in canonical order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.edges.len()).unwrap();
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Parses the edge-list text format. Blank lines are skipped; anything
    /// else malformed is rejected with its 1-based line number.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<StaticGraph, GraphError> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));

        let parse_pair = |line: usize, text: &str| -> Result<(usize, usize), GraphError> {
            let mut it = text.split_whitespace();
            let mut field = |name: &str| {
                it.next()
                    .ok_or_else(|| GraphError::Parse {
                        line,
                        msg: format!("missing {name}"),
                    })?
                    .parse::<usize>()
                    .map_err(|e| GraphError::Parse {
                        line,
                        msg: format!("bad {name}: {e}"),
                    })
            };
            let a = field("first field")?;
            let b = field("second field")?;
            if it.next().is_some() {
                return Err(GraphError::Parse {
                    line,
                    msg: "expected exactly two fields".into(),
                });
            }
            Ok((a, b))
        };

        let io_err = |line: usize, e: std::io::Error| GraphError::Parse {
            line,
            msg: e.to_string(),
        };

        let (header_line, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let header = header.map_err(|e| io_err(header_line, e))?;
        let (n, m) = parse_pair(header_line, &header)?;

        let mut edges = Vec::with_capacity(m);
        for (line, text) in lines.by_ref() {
            let text = text.map_err(|e| io_err(line, e))?;
            if edges.len() == m {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("more than the declared {m} edges"),
                });
            }
            edges.push(parse_pair(line, &text)?);
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: header_line,
                msg: format!("declared {m} edges, found {}", edges.len()),
            });
        }
        build_graph(n, &edges)
    }
}

/// Validates an edge list into a [`StaticGraph`].
pub fn build_graph(n: usize, edge_list: &[(usize, usize)]) -> Result<StaticGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    let mut edges = Vec::with_capacity(edge_list.len());
    for &(u, v) in edge_list {
        if u >= n || v >= n {
            return Err(GraphError::NodeOutOfRange { u, v, n });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        edges.push((u.min(v), u.max(v)));
    }
    edges.sort_unstable();
    if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
        return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
    }

    let mut adjacency = vec![Vec::new(); n];
    for (idx, &(u, v)) in edges.iter().enumerate() {
        adjacency[u].push(Neighbor { node: v, edge: idx });
        adjacency[v].push(Neighbor { node: u, edge: idx });
    }
    for adj in adjacency.iter_mut() {
        adj.sort_unstable_by_key(|nb| nb.node);
    }

    // BFS from node 0.
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for nb in &adjacency[u] {
            if !seen[nb.node] {
                seen[nb.node] = true;
                queue.push_back(nb.node);
            }
        }
    }
    if let Some(unreached) = seen.iter().position(|&s| !s) {
        return Err(GraphError::Disconnected(unreached));
    }

    Ok(StaticGraph {
        n,
        edges,
        adjacency,
    })
}

pub fn gen_path(n: usize) -> Result<StaticGraph, GraphError> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    build_graph(n, &edges)
}

pub fn gen_clique(n: usize) -> Result<StaticGraph, GraphError> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    build_graph(n, &edges)
}

/// Lollipop graph: a clique on `0..k`, a path on `k..n`, joined by the
/// cut-edge `{k-1, k}`.
pub fn gen_lollipop(n: usize, k: usize) -> Result<StaticGraph, GraphError> {
    if n < 3 || k < 2 || k > n - 1 {
        return Err(GraphError::LollipopSize {
            n,
            k,
            max: n.saturating_sub(1),
        });
    }
    let mut edges = Vec::new();
    for u in 0..k {
        for v in u + 1..k {
            edges.push((u, v));
        }
    }
    for v in k..n {
        edges.push((v - 1, v));
    }
    build_graph(n, &edges)
}

/// Path backbone `0-1-…-(n-1)` plus every non-backbone pair, visited in
/// lexicographic order, included with probability `threshold` (one draw per
/// pair).
pub fn gen_random_threshold<R: Rng + ?Sized>(
    n: usize,
    threshold: f64,
    rng: &mut R,
) -> Result<StaticGraph, GraphError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(GraphError::Threshold(threshold));
    }
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    for u in 0..n {
        for v in u + 2..n {
            if rng.gen::<f64>() < threshold {
                edges.push((u, v));
            }
        }
    }
    build_graph(n, &edges)
}

pub fn degree_stats(g: &StaticGraph) -> DegreeStats {
    let degrees = (0..g.n).map(|v| g.degree(v));
    DegreeStats {
        min_degree: degrees.clone().min().unwrap_or(0),
        max_degree: degrees.max().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_builds() {
        let p3 = build_graph(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p3.edge_count(), 2);
        let k3 = build_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(k3.edge_count(), 3);
        assert_eq!(k3.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn validation_errors_are_distinct() {
        assert_eq!(
            build_graph(4, &[(0, 1), (2, 3)]),
            Err(GraphError::Disconnected(2))
        );
        assert_eq!(build_graph(3, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            build_graph(3, &[(0, 1), (1, 0), (1, 2)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            build_graph(3, &[(0, 3)]),
            Err(GraphError::NodeOutOfRange { .. })
        ));
        assert_eq!(build_graph(1, &[]), Err(GraphError::TooFewNodes(1)));
    }

    #[test]
    fn lollipops() {
        let l = gen_lollipop(6, 4).unwrap();
        assert_eq!(l.edge_count(), 8);
        assert!(l.has_edge(3, 4));
        assert_eq!(
            l.degree_stats(),
            DegreeStats {
                min_degree: 1,
                max_degree: 4
            }
        );
        assert_eq!(gen_lollipop(3, 2).unwrap(), gen_path(3).unwrap());
        assert_eq!(gen_lollipop(9, 6).unwrap().edge_count(), 18);
        assert!(gen_lollipop(5, 5).is_err());
        assert!(gen_lollipop(5, 1).is_err());
    }

    #[test]
    fn degree_examples() {
        let stats = |g: StaticGraph| {
            let s = degree_stats(&g);
            (s.min_degree, s.max_degree)
        };
        assert_eq!(stats(gen_path(4).unwrap()), (1, 2));
        assert_eq!(stats(gen_clique(4).unwrap()), (3, 3));
    }

    #[test]
    fn threshold_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g0 = gen_random_threshold(4, 0.0, &mut rng).unwrap();
        assert_eq!(g0, gen_path(4).unwrap());
        let g1 = gen_random_threshold(4, 1.0, &mut rng).unwrap();
        assert_eq!(g1, gen_clique(4).unwrap());
        assert!(gen_random_threshold(4, 1.5, &mut rng).is_err());
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let g = gen_lollipop(6, 4).unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with("6 8\n"));
        let back = StaticGraph::read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(back, g);

        let err = StaticGraph::read_edge_list("3 2\n0 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
        let err = StaticGraph::read_edge_list("3 2\n0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }), "{err}");
        let err = StaticGraph::read_edge_list("3 1\n0 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
    }
}
