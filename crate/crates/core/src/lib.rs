//! Simulation of a multicast-based IP mobility architecture against basic
//! Mobile IP.
//!
//! A mobile node (MN) roams over a router topology. Its correspondent node
//! (CN) sends to a per-mobile multicast group; the MN joins the source
//! specific `(CN, G)` tree from every location it visits and prunes the
//! branch it leaves behind. The same movement is replayed against Mobile IP,
//! where traffic detours through the home agent (HA).
//!
//! * [`topology`]: graphs, edge-list loading, generators, shortest paths.
//! * [`movement`]: random / neighbor / cluster visit sequences.
//! * [`routing`]: the `(CN, G)` tree under join and prune, and per-move
//!   samples for both architectures.
//! * [`handoff`]: packet-level discrete-event simulation of one handoff.
//! * [`metrics`]: route-efficiency and added-link statistics.

pub mod handoff;
pub mod metrics;
pub mod movement;
pub mod routing;
pub mod topology;

pub use topology::{NodeId, PathOracle, Topology};
