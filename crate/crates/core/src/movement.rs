//! Mobile node visit sequences.
//!
//! A trace lists every node the mobile attaches to, starting location
//! included, so a trace of `count` steps holds `count - 1` handoffs. Moves
//! are drawn with replacement from a per-model candidate set, minus a
//! forbidden set (the correspondent node in practice).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{NodeId, PathOracle, Topology, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MovementError {
    #[error("move count must be at least 1")]
    EmptyTrace,
    #[error("cluster model needs at least one candidate")]
    ZeroClusterRadius,
    #[error("no eligible next location from node {at} at step {step}")]
    NoCandidate { step: usize, at: NodeId },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovementKind {
    Random,
    Neighbor,
    Cluster,
}

impl MovementKind {
    pub const ALL: [MovementKind; 3] = [
        MovementKind::Random,
        MovementKind::Neighbor,
        MovementKind::Cluster,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MovementKind::Random => "random",
            MovementKind::Neighbor => "neighbor",
            MovementKind::Cluster => "cluster",
        }
    }
}

impl fmt::Display for MovementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MovementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(MovementKind::Random),
            "neighbor" => Ok(MovementKind::Neighbor),
            "cluster" => Ok(MovementKind::Cluster),
            other => Err(format!("unknown movement model {other:?}")),
        }
    }
}

/// Seven-cell reuse: six neighboring cells in the same cluster.
pub const DEFAULT_CLUSTER_RADIUS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementModel {
    pub kind: MovementKind,
    /// Candidate count for the cluster model; ignored by the others.
    pub cluster_radius: usize,
}

impl MovementModel {
    pub fn new(kind: MovementKind) -> Self {
        MovementModel {
            kind,
            cluster_radius: DEFAULT_CLUSTER_RADIUS,
        }
    }

    pub fn random() -> Self {
        Self::new(MovementKind::Random)
    }

    pub fn neighbor() -> Self {
        Self::new(MovementKind::Neighbor)
    }

    pub fn cluster() -> Self {
        Self::new(MovementKind::Cluster)
    }

    /// Ids within the sliding cluster window around `current`, wrapped
    /// modulo `nodes`: offsets `-r/2 ..= -1` then `+1 ..= r - r/2`.
    pub fn cluster_window(&self, current: NodeId, nodes: usize) -> Vec<NodeId> {
        let back = self.cluster_radius / 2;
        let fwd = self.cluster_radius - back;
        let mut ids = Vec::with_capacity(self.cluster_radius);
        for off in (1..=back).rev() {
            ids.push((current + nodes - off % nodes) % nodes);
        }
        for off in 1..=fwd {
            ids.push((current + off) % nodes);
        }
        let mut seen = BTreeSet::new();
        ids.retain(|&v| v != current && seen.insert(v));
        ids
    }

    fn candidates(
        &self,
        topo: &Topology,
        current: NodeId,
        forbidden: &BTreeSet<NodeId>,
    ) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = match self.kind {
            MovementKind::Random => (0..topo.nodes()).collect(),
            MovementKind::Neighbor => topo.neighbors(current).to_vec(),
            MovementKind::Cluster => self.cluster_window(current, topo.nodes()),
        };
        out.retain(|v| !forbidden.contains(v));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementTrace {
    pub start: NodeId,
    /// Every visited location; `steps[0] == start`.
    pub steps: Vec<NodeId>,
    pub model: MovementModel,
    pub seed: u64,
}

impl MovementTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Consecutive `(from, to)` pairs, one per handoff.
    pub fn moves(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.steps.windows(2).map(|w| (w[0], w[1]))
    }

    /// `step_index,node_id` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step_index,node_id\n");
        for (i, node) in self.steps.iter().enumerate() {
            out.push_str(&format!("{i},{node}\n"));
        }
        out
    }
}

/// Draws a trace whose first location is uniform over non-forbidden nodes.
pub fn generate_trace(
    topo: &Topology,
    model: MovementModel,
    forbidden: &BTreeSet<NodeId>,
    count: usize,
    seed: u64,
) -> Result<MovementTrace, MovementError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<NodeId> = (0..topo.nodes())
        .filter(|v| !forbidden.contains(v))
        .collect();
    let start = *eligible
        .choose(&mut rng)
        .ok_or(MovementError::NoCandidate { step: 0, at: 0 })?;
    walk(topo, model, start, forbidden, count, seed, &mut rng)
}

/// Draws a trace from a fixed first location.
pub fn generate_trace_from(
    topo: &Topology,
    model: MovementModel,
    start: NodeId,
    forbidden: &BTreeSet<NodeId>,
    count: usize,
    seed: u64,
) -> Result<MovementTrace, MovementError> {
    topo.check_node(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    walk(topo, model, start, forbidden, count, seed, &mut rng)
}

fn walk(
    topo: &Topology,
    model: MovementModel,
    start: NodeId,
    forbidden: &BTreeSet<NodeId>,
    count: usize,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<MovementTrace, MovementError> {
    if count == 0 {
        return Err(MovementError::EmptyTrace);
    }
    if model.kind == MovementKind::Cluster && model.cluster_radius == 0 {
        return Err(MovementError::ZeroClusterRadius);
    }
    let mut steps = Vec::with_capacity(count);
    steps.push(start);
    let mut current = start;
    for step in 1..count {
        let candidates = model.candidates(topo, current, forbidden);
        current = *candidates
            .choose(rng)
            .ok_or(MovementError::NoCandidate { step, at: current })?;
        steps.push(current);
    }
    Ok(MovementTrace {
        start,
        steps,
        model,
        seed,
    })
}

/// Hop distance covered by each move; `len() - 1` entries.
pub fn trace_stats(trace: &MovementTrace, oracle: &PathOracle) -> Result<Vec<u32>, MovementError> {
    trace
        .moves()
        .map(|(a, b)| oracle.dist(a, b).map_err(MovementError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path5() -> Topology {
        Topology::from_edges("p5", [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap()
    }

    fn ring(n: usize) -> Topology {
        Topology::from_edges("ring", (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn neighbor_from_degree_one_start() {
        let none = BTreeSet::new();
        for seed in 0..20 {
            let t = generate_trace_from(&path5(), MovementModel::neighbor(), 0, &none, 2, seed)
                .unwrap();
            assert_eq!(t.steps, vec![0, 1]);
        }
    }

    #[test]
    fn cluster_window_at_ten() {
        let m = MovementModel::cluster();
        assert_eq!(m.cluster_window(10, 100), vec![7, 8, 9, 11, 12, 13]);
        assert_eq!(m.cluster_window(1, 100), vec![98, 99, 0, 2, 3, 4]);
        assert_eq!(m.cluster_window(99, 100), vec![96, 97, 98, 0, 1, 2]);
        // tiny graphs collapse duplicates and never offer the current node
        assert_eq!(m.cluster_window(0, 3), vec![1, 2]);
    }

    #[test]
    fn cluster_steps_stay_in_window() {
        let topo = ring(100);
        let none = BTreeSet::new();
        let t = generate_trace_from(&topo, MovementModel::cluster(), 10, &none, 2, 3).unwrap();
        assert!([7, 8, 9, 11, 12, 13].contains(&t.steps[1]));
    }

    #[test]
    fn forbidden_nodes_never_visited() {
        let topo = ring(30);
        let forbidden: BTreeSet<_> = [4, 5].into();
        for kind in MovementKind::ALL {
            let t = generate_trace(&topo, MovementModel::new(kind), &forbidden, 500, 11).unwrap();
            assert!(t.steps.iter().all(|s| !forbidden.contains(s)), "{kind}");
        }
    }

    #[test]
    fn no_candidate_is_an_error() {
        let forbidden: BTreeSet<_> = [1].into();
        let err = generate_trace_from(&path5(), MovementModel::neighbor(), 0, &forbidden, 3, 0)
            .unwrap_err();
        assert_eq!(err, MovementError::NoCandidate { step: 1, at: 0 });
        assert_eq!(
            generate_trace(&path5(), MovementModel::random(), &forbidden, 0, 0).unwrap_err(),
            MovementError::EmptyTrace
        );
    }

    #[test]
    fn stats_of_stationary_and_neighbor_traces() {
        let topo = ring(12);
        let oracle = PathOracle::new(&topo);
        let still = MovementTrace {
            start: 3,
            steps: vec![3; 5],
            model: MovementModel::random(),
            seed: 0,
        };
        assert_eq!(trace_stats(&still, &oracle).unwrap(), vec![0; 4]);
        let t = generate_trace(&topo, MovementModel::neighbor(), &BTreeSet::new(), 50, 9).unwrap();
        assert_eq!(trace_stats(&t, &oracle).unwrap(), vec![1; 49]);
    }

    #[test]
    fn csv_export() {
        let t = MovementTrace {
            start: 4,
            steps: vec![4, 2],
            model: MovementModel::random(),
            seed: 0,
        };
        assert_eq!(t.to_csv(), "step_index,node_id\n0,4\n1,2\n");
    }
}
