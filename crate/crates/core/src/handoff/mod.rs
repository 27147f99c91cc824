//! Packet-level simulation of a single handoff.
//!
//! The correspondent node emits one packet every `packet_interval_ms`. The
//! mobile is attached at `old` until the trigger instant (time 0), from
//! which point it can hear `new`. Only link traversals take time; routers
//! forward instantly. Every hop transmission, data or control, is lost
//! independently with `message_loss_rate`.
//!
//! Multicast handoff: a join leaves `new` (at the trigger, or `advance_lead_ms`
//! earlier for advance joins) and grafts hop by hop onto the first router that
//! already holds `(S, G)` state. A join copy that does not survive a hop is
//! re-sent by the soft-state refresh one `refresh_period_ms` later.
//!
//! Mobile IP handoff: a registration travels `new -> HA`; the home agent
//! tunnels every packet it receives afterwards to `new`.
//!
//! With make-before-break overlap the mobile keeps listening on `old` until
//! packets arrive through `new` *and* the old interface has caught up to the
//! first sequence number seen on `new` (or one old-path delay has elapsed),
//! then prunes `old`. With break-before-make the mobile stops hearing `old`
//! at the trigger and the old branch is torn down by soft-state expiry.

mod engine;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::routing::MulticastTree;
use crate::routing::RoutingError;
use crate::topology::{NodeId, PathOracle, TopologyError};

pub use self::engine::{Delivery, HandoffLog, Interface};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HandoffError {
    #[error("invalid handoff configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("old and new location are both node {0}")]
    SameLocation(NodeId),
    #[error("handoff did not settle within {horizon_ms} ms")]
    NotConverged { horizon_ms: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    PlainJoin,
    TripleJoin,
    AdvanceJoin,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::PlainJoin,
        Strategy::TripleJoin,
        Strategy::AdvanceJoin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::PlainJoin => "plain_join",
            Strategy::TripleJoin => "triple_join",
            Strategy::AdvanceJoin => "advance_join",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    MakeBeforeBreak,
    BreakBeforeMake,
}

/// Join refresh period of a PIM-SM style soft-state protocol.
pub const DEFAULT_REFRESH_PERIOD_MS: u64 = 60_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandoffConfig {
    pub per_hop_delay_ms: u64,
    pub packet_interval_ms: u64,
    pub message_loss_rate: f64,
    pub strategy: Strategy,
    pub advance_lead_ms: u64,
    pub overlap: Overlap,
    pub refresh_period_ms: u64,
    pub seed: u64,
}

impl Default for HandoffConfig {
    fn default() -> Self {
        HandoffConfig {
            per_hop_delay_ms: 10,
            packet_interval_ms: 20,
            message_loss_rate: 0.0,
            strategy: Strategy::PlainJoin,
            advance_lead_ms: 500,
            overlap: Overlap::MakeBeforeBreak,
            refresh_period_ms: DEFAULT_REFRESH_PERIOD_MS,
            seed: 0,
        }
    }
}

impl HandoffConfig {
    pub fn validate(&self) -> Result<(), HandoffError> {
        let bad = |m: &str| Err(HandoffError::InvalidConfig(m.to_string()));
        if self.per_hop_delay_ms == 0 {
            return bad("per_hop_delay_ms must be positive");
        }
        if self.packet_interval_ms == 0 {
            return bad("packet_interval_ms must be positive");
        }
        if self.refresh_period_ms == 0 {
            return bad("refresh_period_ms must be positive");
        }
        if !(0.0..1.0).contains(&self.message_loss_rate) {
            return bad("message_loss_rate must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        HandoffConfig {
            strategy,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMessage {
    Join,
    Prune,
}

/// How a control message goes out on each hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionSchedule {
    /// Back-to-back copies sent when state is created or removed.
    pub copies: u32,
    /// How long before the trigger the message leaves.
    pub lead_ms: u64,
    /// A hop that loses every copy is retried after this long, with one copy.
    pub refresh_period_ms: u64,
    pub loss_rate: f64,
}

impl TransmissionSchedule {
    /// Probability that no copy survives one hop.
    pub fn hop_failure_probability(&self) -> f64 {
        self.loss_rate.powi(self.copies as i32)
    }
}

pub fn apply_strategy(cfg: &HandoffConfig, message: ControlMessage) -> TransmissionSchedule {
    let copies = match cfg.strategy {
        Strategy::TripleJoin => 3,
        Strategy::PlainJoin | Strategy::AdvanceJoin => 1,
    };
    let lead_ms = match (cfg.strategy, message) {
        (Strategy::AdvanceJoin, ControlMessage::Join) => cfg.advance_lead_ms,
        _ => 0,
    };
    TransmissionSchedule {
        copies,
        lead_ms,
        refresh_period_ms: cfg.refresh_period_ms,
        loss_rate: cfg.message_loss_rate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoffReport {
    /// Trigger to first packet heard through `new`.
    pub handoff_latency_ms: u64,
    pub packets_lost: u64,
    pub packets_duplicated: u64,
    pub out_of_order: u64,
    /// Join, prune or registration copies put on a link.
    pub control_messages: u64,
}

/// Multicast handoff from `old` (a leaf of `tree`) to `new`.
pub fn simulate_handoff(
    oracle: &PathOracle,
    tree: &MulticastTree,
    old: NodeId,
    new: NodeId,
    cfg: &HandoffConfig,
) -> Result<HandoffReport, HandoffError> {
    simulate_handoff_logged(oracle, tree, old, new, cfg).map(|log| log.report)
}

/// Like [`simulate_handoff`], keeping the full delivery log and timeline.
pub fn simulate_handoff_logged(
    oracle: &PathOracle,
    tree: &MulticastTree,
    old: NodeId,
    new: NodeId,
    cfg: &HandoffConfig,
) -> Result<HandoffLog, HandoffError> {
    cfg.validate()?;
    let topo = oracle.topology();
    topo.check_node(old)?;
    topo.check_node(new)?;
    if !tree.leaves().contains(&old) {
        return Err(RoutingError::NotALeaf(old).into());
    }
    if new == tree.root() {
        return Err(RoutingError::LocationIsSource(new).into());
    }
    if new == old {
        return Err(HandoffError::SameLocation(new));
    }
    engine::multicast(oracle, tree, old, new, cfg)
}

/// Mobile IP handoff: registration `new -> ha`, then tunneling from `ha`.
pub fn simulate_mip_handoff(
    oracle: &PathOracle,
    cn: NodeId,
    ha: NodeId,
    old: NodeId,
    new: NodeId,
    cfg: &HandoffConfig,
) -> Result<HandoffReport, HandoffError> {
    simulate_mip_handoff_logged(oracle, cn, ha, old, new, cfg).map(|log| log.report)
}

pub fn simulate_mip_handoff_logged(
    oracle: &PathOracle,
    cn: NodeId,
    ha: NodeId,
    old: NodeId,
    new: NodeId,
    cfg: &HandoffConfig,
) -> Result<HandoffLog, HandoffError> {
    cfg.validate()?;
    let topo = oracle.topology();
    for node in [cn, ha, old, new] {
        topo.check_node(node)?;
    }
    if new == old {
        return Err(HandoffError::SameLocation(new));
    }
    engine::mobile_ip(oracle, cn, ha, old, new, cfg)
}
