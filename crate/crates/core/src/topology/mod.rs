//! Undirected unit-weight router graphs.
//!
//! Every node is a router that doubles as a base station, so a mobile node
//! "attaches" to a node id. Links carry no weight; all path lengths are hop
//! counts. A [`Topology`] is immutable once built and is always connected,
//! free of self-loops and duplicate links, and numbered `0..nodes`.

mod generate;
mod oracle;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use self::generate::{generate, GeneratorKind, GeneratorParams};
pub use self::oracle::PathOracle;

/// Index of a router / base station.
pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: NodeId, v: NodeId },
    #[error("graph is disconnected: node {unreachable} cannot be reached from node 0")]
    Disconnected { unreachable: NodeId },
    #[error("graph has no edges")]
    Empty,
    #[error("unknown node id {node} (topology has {nodes} nodes)")]
    UnknownNode { node: NodeId, nodes: usize },
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

/// A connected, simple, undirected graph with contiguous node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    name: String,
    adjacency: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Topology {
    /// Builds a topology from `(u, v)` pairs.
    ///
    /// Node count is `max id + 1`. Each pair is reported against its 1-based
    /// position in `edges` when it is rejected.
    pub fn from_edges<I>(name: impl Into<String>, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let numbered = edges
            .into_iter()
            .enumerate()
            .map(|(i, (u, v))| (i + 1, u, v));
        Self::build(name.into(), numbered)
    }

    fn build<I>(name: String, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, NodeId, NodeId)>,
    {
        let mut seen = BTreeSet::new();
        let mut max_id = None::<NodeId>;
        for (line, u, v) in edges {
            if u == v {
                return Err(TopologyError::SelfLoop { line, node: u });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(TopologyError::DuplicateEdge { line, u, v });
            }
            max_id = Some(max_id.map_or(key.1, |m| m.max(key.1)));
        }
        let nodes = max_id.ok_or(TopologyError::Empty)? + 1;

        let mut adjacency = vec![Vec::new(); nodes];
        for &(u, v) in &seen {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let topo = Topology {
            name,
            adjacency,
            edges: seen.into_iter().collect(),
        };
        if let Some(unreachable) = topo.first_unreachable() {
            return Err(TopologyError::Disconnected { unreachable });
        }
        Ok(topo)
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut visited = vec![false; self.nodes()];
        let mut stack = vec![0];
        visited[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &self.adjacency[u] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        visited.iter().position(|v| !v)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn links(&self) -> usize {
        self.edges.len()
    }

    pub fn avg_degree(&self) -> f64 {
        2.0 * self.links() as f64 / self.nodes() as f64
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Neighbors of `node` in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.nodes() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn check_node(&self, node: NodeId) -> Result<NodeId, TopologyError> {
        if node < self.nodes() {
            Ok(node)
        } else {
            Err(TopologyError::UnknownNode {
                node,
                nodes: self.nodes(),
            })
        }
    }

    /// Table-style one line summary: `name nodes links avg_degree`.
    pub fn summary(&self) -> String {
        self.to_string()
    }

    /// Serializes back to the edge-list format accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# {}\n", self.summary());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {:.2}",
            self.name,
            self.nodes(),
            self.links(),
            self.avg_degree()
        )
    }
}

/// Parses an edge-list document.
///
/// One `u v` pair of decimal ids per line, separated by whitespace. Blank
/// lines are skipped and `#` starts a comment that runs to end of line.
pub fn load_edge_list(name: impl Into<String>, text: &str) -> Result<Topology, TopologyError> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let mut id = |what: &str| -> Result<NodeId, TopologyError> {
            let field = fields.next().ok_or_else(|| TopologyError::Parse {
                line,
                reason: format!("missing {what} node id"),
            })?;
            field.parse().map_err(|_| TopologyError::Parse {
                line,
                reason: format!("invalid node id {field:?}"),
            })
        };
        let u = id("first")?;
        let v = id("second")?;
        if let Some(extra) = fields.next() {
            return Err(TopologyError::Parse {
                line,
                reason: format!("unexpected trailing field {extra:?}"),
            });
        }
        edges.push((line, u, v));
    }
    Topology::build(name.into(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let topo = load_edge_list("tiny", "0 1\n").unwrap();
        assert_eq!(topo.nodes(), 2);
        assert_eq!(topo.links(), 1);
        assert_eq!(topo.avg_degree(), 1.0);
    }

    #[test]
    fn cycle_of_five() {
        let topo = load_edge_list("c5", "0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
        assert_eq!(topo.avg_degree(), 2.0);
        let oracle = PathOracle::new(&topo);
        assert_eq!(oracle.dist(0, 2).unwrap(), 2);
        assert_eq!(oracle.dist(0, 3).unwrap(), 2);
    }

    #[test]
    fn ts100_sized_document_has_table_degree() {
        // path backbone 0..99 plus 86 chords i -- i+2 gives 99 + 86 = 185 links
        let mut doc = String::from("# ts100 stand-in\n");
        for i in 0..99 {
            doc.push_str(&format!("{} {}\n", i, i + 1));
        }
        for i in 0..86 {
            doc.push_str(&format!("{} {}   # chord\n", i, i + 2));
        }
        let topo = load_edge_list("ts100", &doc).unwrap();
        assert_eq!((topo.nodes(), topo.links()), (100, 185));
        assert!((topo.avg_degree() - 3.7).abs() < 1e-12);
        assert_eq!(topo.summary(), "ts100 100 185 3.70");
    }

    #[test]
    fn comments_and_blank_lines() {
        let topo = load_edge_list("x", "# header\n\n 0\t1 # trailing\n1 2\n").unwrap();
        assert_eq!(topo.links(), 2);
    }

    #[test]
    fn rejects_malformed_line() {
        let err = load_edge_list("x", "0 1\n1 two\n").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 2, .. }), "{err}");
        let err = load_edge_list("x", "0 1\n3\n").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 2, .. }));
        let err = load_edge_list("x", "0 1 2\n").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert_eq!(
            load_edge_list("x", "0 1\n\n2 2\n").unwrap_err(),
            TopologyError::SelfLoop { line: 3, node: 2 }
        );
        assert_eq!(
            load_edge_list("x", "0 1\n1 2\n2 1\n").unwrap_err(),
            TopologyError::DuplicateEdge {
                line: 3,
                u: 2,
                v: 1
            }
        );
    }

    #[test]
    fn rejects_disconnected_and_gaps() {
        let err = load_edge_list("x", "0 1\n2 3\n").unwrap_err();
        assert_eq!(err, TopologyError::Disconnected { unreachable: 2 });
        // id 2 never appears, so it is an isolated node
        let err = load_edge_list("x", "0 1\n1 3\n").unwrap_err();
        assert_eq!(err, TopologyError::Disconnected { unreachable: 2 });
        assert_eq!(
            load_edge_list("x", "# nothing\n").unwrap_err(),
            TopologyError::Empty
        );
    }

    #[test]
    fn edge_list_round_trip() {
        let topo = load_edge_list("rt", "3 0\n0 1\n1 2\n").unwrap();
        let again = load_edge_list("rt", &topo.to_edge_list()).unwrap();
        assert_eq!(topo, again);
    }
}
