use std::collections::VecDeque;

use super::{NodeId, Topology, TopologyError};

/// All-pairs hop distances with a deterministic next-hop rule.
///
/// Distances are computed once by a breadth-first search from every node.
/// Paths are never stored: the next hop from `x` toward `target` is the
/// lowest-numbered neighbor one hop closer to `target`, which is enough to
/// rebuild any shortest path and gives the same answer on every platform.
#[derive(Debug, Clone)]
pub struct PathOracle {
    topology: Topology,
    dist: Vec<u16>,
}

impl PathOracle {
    pub fn new(topology: &Topology) -> Self {
        let n = topology.nodes();
        assert!(
            n <= u16::MAX as usize,
            "topology too large for u16 hop table"
        );
        let mut dist = vec![u16::MAX; n * n];
        let mut queue = VecDeque::with_capacity(n);
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let next = row[u] + 1;
                for &w in topology.neighbors(u) {
                    if row[w] == u16::MAX {
                        row[w] = next;
                        queue.push_back(w);
                    }
                }
            }
        }
        PathOracle {
            topology: topology.clone(),
            dist,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn nodes(&self) -> usize {
        self.topology.nodes()
    }

    /// Hop distance between `u` and `v`.
    pub fn dist(&self, u: NodeId, v: NodeId) -> Result<u32, TopologyError> {
        self.topology.check_node(u)?;
        self.topology.check_node(v)?;
        Ok(self.hops(u, v))
    }

    /// Unchecked variant of [`dist`](Self::dist) for ids already validated.
    #[inline]
    pub fn hops(&self, u: NodeId, v: NodeId) -> u32 {
        u32::from(self.dist[u * self.nodes() + v])
    }

    /// Lowest-numbered neighbor of `from` that is one hop closer to `target`.
    /// Returns `None` when `from == target`.
    pub fn next_hop(&self, from: NodeId, target: NodeId) -> Option<NodeId> {
        let d = self.hops(from, target);
        if d == 0 {
            return None;
        }
        self.topology
            .neighbors(from)
            .iter()
            .copied()
            .find(|&w| self.hops(w, target) + 1 == d)
    }

    /// Shortest path from `u` to `v`, inclusive of both endpoints.
    pub fn shortest_path(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>, TopologyError> {
        self.topology.check_node(u)?;
        self.topology.check_node(v)?;
        let mut path = Vec::with_capacity(self.hops(u, v) as usize + 1);
        path.push(u);
        let mut at = u;
        while let Some(next) = self.next_hop(at, v) {
            path.push(next);
            at = next;
        }
        Ok(path)
    }

    /// Largest hop distance between any two nodes.
    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().map_or(0, u32::from)
    }
}
