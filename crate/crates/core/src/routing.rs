//! The `(CN, G)` delivery tree and the Mobile IP baseline.
//!
//! The tree is rooted at the correspondent node. A join from a new location
//! walks the deterministic shortest path toward the root and grafts links
//! until it meets a node that already holds state; a prune removes the old
//! location and tears down every branch that no longer leads to a leaf.
//!
//! Every node's upstream neighbor is the oracle's next hop toward the root,
//! which is a function of the node alone. Branches grafted at different
//! times therefore always agree, and the tree path to any leaf is a
//! shortest path.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::movement::MovementTrace;
use crate::topology::{NodeId, PathOracle, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("location {0} is the correspondent node")]
    LocationIsSource(NodeId),
    #[error("node {0} is not a leaf of the tree")]
    NotALeaf(NodeId),
    #[error("trace visits the correspondent node {cn} at step {step}")]
    TraceVisitsSource { cn: NodeId, step: usize },
    #[error("empty movement trace")]
    EmptyTrace,
    #[error("tree invariant violated: {0}")]
    Invariant(String),
}

/// Opaque multicast group identifier assigned to a mobile.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct GroupId(pub u32);

/// The `(S, G)` pair: correspondent node and the mobile's group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowKey {
    pub source: NodeId,
    pub group: GroupId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastTree {
    flow: FlowKey,
    parent: BTreeMap<NodeId, NodeId>,
    children: BTreeMap<NodeId, BTreeSet<NodeId>>,
    leaves: BTreeSet<NodeId>,
}

impl MulticastTree {
    /// Tree from `cn` to the mobile's first location.
    pub fn establish(
        oracle: &PathOracle,
        cn: NodeId,
        first_location: NodeId,
    ) -> Result<Self, RoutingError> {
        Self::establish_flow(
            oracle,
            FlowKey {
                source: cn,
                group: GroupId::default(),
            },
            first_location,
        )
    }

    pub fn establish_flow(
        oracle: &PathOracle,
        flow: FlowKey,
        first_location: NodeId,
    ) -> Result<Self, RoutingError> {
        oracle.topology().check_node(flow.source)?;
        let mut tree = MulticastTree {
            flow,
            parent: BTreeMap::new(),
            children: BTreeMap::new(),
            leaves: BTreeSet::new(),
        };
        tree.join(oracle, first_location)?;
        Ok(tree)
    }

    pub fn flow(&self) -> FlowKey {
        self.flow
    }

    pub fn root(&self) -> NodeId {
        self.flow.source
    }

    pub fn leaves(&self) -> &BTreeSet<NodeId> {
        &self.leaves
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node == self.root() || self.parent.contains_key(&node)
    }

    /// Nodes holding `(S, G)` state, root first then ascending.
    pub fn on_tree(&self) -> Vec<NodeId> {
        std::iter::once(self.root())
            .chain(self.parent.keys().copied())
            .collect()
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent.get(&node).copied()
    }

    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children.get(&node).into_iter().flatten().copied()
    }

    /// Number of links in the tree.
    pub fn link_count(&self) -> usize {
        self.parent.len()
    }

    /// Grafts a branch from `new_location` and returns the added-link count.
    pub fn join(&mut self, oracle: &PathOracle, new_location: NodeId) -> Result<u32, RoutingError> {
        oracle.topology().check_node(new_location)?;
        if new_location == self.root() {
            return Err(RoutingError::LocationIsSource(new_location));
        }
        let mut added = 0;
        let mut at = new_location;
        while !self.contains(at) {
            let up = oracle
                .next_hop(at, self.root())
                .expect("connected topology has a next hop");
            self.parent.insert(at, up);
            self.children.entry(up).or_default().insert(at);
            added += 1;
            at = up;
        }
        self.leaves.insert(new_location);
        Ok(added)
    }

    /// Removes `old_location` as a leaf and returns the pruned-link count.
    pub fn prune(&mut self, old_location: NodeId) -> Result<u32, RoutingError> {
        if !self.leaves.remove(&old_location) {
            return Err(RoutingError::NotALeaf(old_location));
        }
        let mut removed = 0;
        let mut at = old_location;
        while at != self.root()
            && !self.leaves.contains(&at)
            && self.children.get(&at).is_none_or(BTreeSet::is_empty)
        {
            let up = self
                .parent
                .remove(&at)
                .expect("non-root on-tree node has a parent");
            self.children.remove(&at);
            if let Some(siblings) = self.children.get_mut(&up) {
                siblings.remove(&at);
            }
            removed += 1;
            at = up;
        }
        Ok(removed)
    }

    /// Tree hops from the root down to `leaf`.
    pub fn path_hops(&self, leaf: NodeId) -> Result<u32, RoutingError> {
        if !self.leaves.contains(&leaf) {
            return Err(RoutingError::NotALeaf(leaf));
        }
        let mut hops = 0;
        let mut at = leaf;
        while let Some(up) = self.parent(at) {
            hops += 1;
            at = up;
        }
        Ok(hops)
    }

    /// Checks every structural invariant of the tree against the topology.
    pub fn validate(&self, oracle: &PathOracle) -> Result<(), RoutingError> {
        let bad = |msg: String| Err(RoutingError::Invariant(msg));
        let topo = oracle.topology();
        let limit = self.parent.len() + 1;
        for (&node, &up) in &self.parent {
            if !topo.has_edge(node, up) {
                return bad(format!("parent link {node}-{up} is not a topology edge"));
            }
            if !self.children.get(&up).is_some_and(|c| c.contains(&node)) {
                return bad(format!("{node} missing from children of {up}"));
            }
            let mut at = node;
            let mut steps = 0;
            while let Some(next) = self.parent(at) {
                at = next;
                steps += 1;
                if steps > limit {
                    return bad(format!("cycle through node {node}"));
                }
            }
            if at != self.root() {
                return bad(format!("node {node} does not reach the root"));
            }
            let supported = self.leaves.contains(&node)
                || self.children.get(&node).is_some_and(|c| !c.is_empty());
            if !supported {
                return bad(format!("stale branch at node {node}"));
            }
        }
        for (&up, kids) in &self.children {
            for &kid in kids {
                if self.parent(kid) != Some(up) {
                    return bad(format!("child {kid} of {up} has a different parent"));
                }
            }
        }
        for &leaf in &self.leaves {
            if !self.contains(leaf) {
                return bad(format!("leaf {leaf} holds no state"));
            }
            let hops = self.path_hops(leaf)?;
            let dist = oracle.hops(self.root(), leaf);
            if hops != dist {
                return bad(format!("leaf {leaf}: tree path {hops} != shortest {dist}"));
            }
        }
        Ok(())
    }
}

/// Per-location hop counts for both architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSample {
    pub step_index: usize,
    pub location: NodeId,
    /// CN to HA.
    pub a_hops: u32,
    /// HA to MN.
    pub b_hops: u32,
    /// CN to MN through the tree.
    pub c_hops: u32,
    pub added_links: u32,
    pub removed_links: u32,
    /// Tree size after the step.
    pub tree_links: u32,
    /// The first sample records tree setup rather than a handoff.
    pub establishment: bool,
}

impl StepSample {
    /// `(A + B) / C`.
    pub fn r(&self) -> f64 {
        f64::from(self.a_hops + self.b_hops) / f64::from(self.c_hops)
    }
}

/// Mobile IP path lengths `(A, B)`: CN to HA, then HA tunneling to the MN.
pub fn mobile_ip_step(
    oracle: &PathOracle,
    cn: NodeId,
    ha: NodeId,
    mn: NodeId,
) -> Result<(u32, u32), RoutingError> {
    Ok((oracle.dist(cn, ha)?, oracle.dist(ha, mn)?))
}

/// Replays a trace, joining each new location before pruning the old one.
pub fn run_scenario(
    oracle: &PathOracle,
    cn: NodeId,
    ha: NodeId,
    trace: &MovementTrace,
) -> Result<Vec<StepSample>, RoutingError> {
    let topo = oracle.topology();
    topo.check_node(cn)?;
    topo.check_node(ha)?;
    if let Some(step) = trace.steps.iter().position(|&s| s == cn) {
        return Err(RoutingError::TraceVisitsSource { cn, step });
    }
    let (&first, rest) = trace.steps.split_first().ok_or(RoutingError::EmptyTrace)?;

    let mut tree = MulticastTree::establish(oracle, cn, first)?;
    let mut samples = Vec::with_capacity(trace.steps.len());
    let record = |tree: &MulticastTree, step_index, location, added, removed, establishment| {
        tree.validate(oracle)?;
        let (a_hops, b_hops) = mobile_ip_step(oracle, cn, ha, location)?;
        let c_hops = tree.path_hops(location)?;
        Ok::<_, RoutingError>(StepSample {
            step_index,
            location,
            a_hops,
            b_hops,
            c_hops,
            added_links: added,
            removed_links: removed,
            tree_links: tree.link_count() as u32,
            establishment,
        })
    };
    let initial = tree.link_count() as u32;
    samples.push(record(&tree, 0, first, initial, 0, true)?);

    let mut current = first;
    for (i, &next) in rest.iter().enumerate() {
        let (added, removed) = if next == current {
            (0, 0)
        } else {
            let added = tree.join(oracle, next)?;
            (added, tree.prune(current)?)
        };
        samples.push(record(&tree, i + 1, next, added, removed, false)?);
        current = next;
    }
    Ok(samples)
}

/// `step,a,b,c,added,removed` rows with a header.
pub fn samples_to_csv(samples: &[StepSample]) -> String {
    let mut out = String::from("step,a,b,c,added,removed\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.step_index, s.a_hops, s.b_hops, s.c_hops, s.added_links, s.removed_links
        ));
    }
    out
}
