use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_strategy, ControlMessage, HandoffConfig, HandoffError, HandoffReport, Overlap};
use crate::routing::MulticastTree;
use crate::topology::{NodeId, PathOracle};

type Time = i64;

/// Give up when a handoff has not settled after this many refresh periods.
const MAX_REFRESH_ROUNDS: i64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interface {
    Old,
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub seq: i64,
    pub time_ms: i64,
    pub via: Interface,
}

/// Timeline and delivery log of one simulated handoff. Times are relative
/// to the trigger (0); packet `seq` leaves the source at
/// `seq * packet_interval_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoffLog {
    pub report: HandoffReport,
    /// Links grafted by the join (multicast) or registration hops (Mobile IP).
    pub setup_hops: u32,
    /// Graft point of the new branch, or the home agent.
    pub fork: NodeId,
    /// Hops from the source to `fork`.
    pub fork_depth: u32,
    pub join_sent_ms: i64,
    /// New branch live at the fork / binding switched at the home agent.
    pub graft_ms: Option<i64>,
    pub first_new_ms: Option<i64>,
    /// Mobile stopped listening on `old`.
    pub prune_sent_ms: Option<i64>,
    /// Old branch detached at the fork.
    pub prune_done_ms: Option<i64>,
    pub first_seq: i64,
    pub last_seq: i64,
    pub deliveries: Vec<Delivery>,
}

impl HandoffLog {
    /// When packet `seq` passes the fork.
    pub fn fork_pass_ms(&self, seq: i64, cfg: &HandoffConfig) -> i64 {
        seq * cfg.packet_interval_ms as i64
            + i64::from(self.fork_depth) * cfg.per_hop_delay_ms as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Class {
    Mobility = 0,
    Control = 1,
    Data = 2,
}

struct Queue<E> {
    heap: BinaryHeap<Reverse<(Time, Class, u64)>>,
    slots: Vec<Option<E>>,
}

impl<E> Queue<E> {
    fn new() -> Self {
        Queue {
            heap: BinaryHeap::new(),
            slots: Vec::new(),
        }
    }

    fn push(&mut self, at: Time, class: Class, event: E) {
        let id = self.slots.len() as u64;
        self.slots.push(Some(event));
        self.heap.push(Reverse((at, class, id)));
    }

    fn pop(&mut self) -> Option<(Time, E)> {
        let Reverse((at, _, id)) = self.heap.pop()?;
        let event = self.slots[id as usize].take().expect("event popped once");
        Some((at, event))
    }
}

/// Per-hop Bernoulli loss shared by data and control traffic.
struct Channel {
    rng: ChaCha8Rng,
    loss: f64,
}

impl Channel {
    fn new(cfg: &HandoffConfig) -> Self {
        Channel {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            loss: cfg.message_loss_rate,
        }
    }

    fn survives(&mut self) -> bool {
        self.loss == 0.0 || self.rng.gen::<f64>() >= self.loss
    }

    /// Sends `copies` back-to-back; true when at least one arrives.
    fn any_survives(&mut self, copies: u32) -> bool {
        (0..copies).fold(false, |ok, _| self.survives() || ok)
    }

    fn survives_hops(&mut self, hops: u32) -> bool {
        (0..hops).all(|_| self.survives())
    }
}

/// The mobile node's two interfaces and its prune decision.
struct Receiver {
    overlap: Overlap,
    hearing_old: bool,
    attached_new: bool,
    first_new: Option<(i64, Time)>,
    old_max: Option<i64>,
    deliveries: Vec<Delivery>,
}

impl Receiver {
    fn new(overlap: Overlap) -> Self {
        Receiver {
            overlap,
            hearing_old: true,
            attached_new: false,
            first_new: None,
            old_max: None,
            deliveries: Vec::new(),
        }
    }

    fn attach_new(&mut self) {
        self.attached_new = true;
        if self.overlap == Overlap::BreakBeforeMake {
            self.hearing_old = false;
        }
    }

    /// Returns true when this was the first packet heard through `new`.
    fn receive(&mut self, at: Time, seq: i64, via: Interface) -> bool {
        let heard = match via {
            Interface::Old => self.hearing_old,
            Interface::New => self.attached_new,
        };
        if !heard {
            return false;
        }
        self.deliveries.push(Delivery {
            seq,
            time_ms: at,
            via,
        });
        match via {
            Interface::Old => {
                self.old_max = Some(self.old_max.map_or(seq, |m| m.max(seq)));
                false
            }
            Interface::New if self.first_new.is_none() => {
                self.first_new = Some((seq, at));
                true
            }
            Interface::New => false,
        }
    }

    /// Make-before-break only: new interface live and old caught up.
    fn ready_to_prune(&self, deadline_passed: bool) -> bool {
        match (self.overlap, self.first_new) {
            (Overlap::MakeBeforeBreak, Some((first, _))) if self.hearing_old => {
                deadline_passed || self.old_max.is_some_and(|m| m >= first - 1)
            }
            _ => false,
        }
    }
}

/// Emission window and settle bookkeeping shared by both engines.
struct Clock {
    interval: i64,
    hop: i64,
    drain: i64,
    first_seq: i64,
    last_seq: Option<i64>,
    horizon: Time,
    settled: Option<Time>,
}

impl Clock {
    fn new(cfg: &HandoffConfig, lead: i64, max_depth: u32) -> Self {
        let interval = cfg.packet_interval_ms as i64;
        let hop = cfg.per_hop_delay_ms as i64;
        let warmup = lead + hop * i64::from(max_depth) + interval;
        Clock {
            interval,
            hop,
            drain: hop * (i64::from(max_depth) + 2) + 2 * interval,
            first_seq: -(warmup + interval - 1) / interval - 1,
            last_seq: None,
            horizon: MAX_REFRESH_ROUNDS * cfg.refresh_period_ms as i64,
            settled: None,
        }
    }

    fn settle(&mut self, at: Time) {
        if self.settled.is_none() {
            self.settled = Some(at);
            self.last_seq = Some((at + self.drain + self.interval - 1).div_euclid(self.interval));
        }
    }

    /// Whether `seq + 1` should still be emitted.
    fn emit_next(&self, seq: i64, at: Time) -> Result<bool, HandoffError> {
        if self.settled.is_none() && at > self.horizon {
            return Err(HandoffError::NotConverged {
                horizon_ms: self.horizon,
            });
        }
        Ok(self.last_seq.is_none_or(|last| seq < last))
    }
}

fn finish(clock: &Clock, rx: Receiver, control: u64) -> (HandoffReport, i64, Vec<Delivery>) {
    let last_seq = clock.last_seq.expect("settled before finishing");
    let mut seen = BTreeSet::new();
    let mut duplicated = 0;
    let mut out_of_order = 0;
    let mut highest = i64::MIN;
    for d in &rx.deliveries {
        if !seen.insert(d.seq) {
            duplicated += 1;
        } else if d.seq < highest {
            out_of_order += 1;
        }
        highest = highest.max(d.seq);
    }
    let emitted = (last_seq - clock.first_seq + 1) as u64;
    let delivered = seen.range(clock.first_seq..=last_seq).count() as u64;
    let latency = rx.first_new.map_or(0, |(_, at)| at.max(0)) as u64;
    let report = HandoffReport {
        handoff_latency_ms: latency,
        packets_lost: emitted - delivered,
        packets_duplicated: duplicated,
        out_of_order,
        control_messages: control,
    };
    (report, last_seq, rx.deliveries)
}

#[derive(Debug)]
enum McastEvent {
    Emit(i64),
    Data { seq: i64, node: NodeId },
    Attach,
    IssueJoin,
    JoinArrive { node: NodeId, from: NodeId },
    JoinRetry { node: NodeId },
    PruneArrive { node: NodeId, from: NodeId },
    LocalExpire,
    PruneDeadline,
}

#[derive(Debug, Default, Clone)]
struct RouterState {
    children: BTreeSet<NodeId>,
    local: bool,
}

struct Multicast<'a> {
    oracle: &'a PathOracle,
    cfg: &'a HandoffConfig,
    cn: NodeId,
    old: NodeId,
    new: NodeId,
    state: BTreeMap<NodeId, RouterState>,
    queue: Queue<McastEvent>,
    channel: Channel,
    rx: Receiver,
    clock: Clock,
    join_copies: u32,
    prune_copies: u32,
    control: u64,
    graft: Option<Time>,
    prune_sent: Option<Time>,
    prune_done: Option<Time>,
}

pub(super) fn multicast(
    oracle: &PathOracle,
    tree: &MulticastTree,
    old: NodeId,
    new: NodeId,
    cfg: &HandoffConfig,
) -> Result<HandoffLog, HandoffError> {
    let cn = tree.root();
    let mut grafted = tree.clone();
    let setup_hops = grafted.join(oracle, new)?;
    let mut fork = new;
    for _ in 0..setup_hops {
        fork = oracle.next_hop(fork, cn).expect("walk toward the source");
    }
    let join = apply_strategy(cfg, ControlMessage::Join);
    let prune = apply_strategy(cfg, ControlMessage::Prune);
    let depth = oracle.hops(cn, old).max(oracle.hops(cn, new));

    let mut state: BTreeMap<NodeId, RouterState> = BTreeMap::new();
    for node in tree.on_tree() {
        state.insert(
            node,
            RouterState {
                children: tree.children(node).collect(),
                local: tree.leaves().contains(&node),
            },
        );
    }
    let lead = join.lead_ms as i64;
    let mut sim = Multicast {
        oracle,
        cfg,
        cn,
        old,
        new,
        state,
        queue: Queue::new(),
        channel: Channel::new(cfg),
        rx: Receiver::new(cfg.overlap),
        clock: Clock::new(cfg, lead, depth),
        join_copies: join.copies,
        prune_copies: prune.copies,
        control: 0,
        graft: None,
        prune_sent: None,
        prune_done: None,
    };
    let first = sim.clock.first_seq;
    sim.queue.push(
        first * sim.clock.interval,
        Class::Data,
        McastEvent::Emit(first),
    );
    sim.queue
        .push(-lead, Class::Mobility, McastEvent::IssueJoin);
    sim.queue.push(0, Class::Mobility, McastEvent::Attach);
    sim.run()?;

    let (report, last_seq, deliveries) = finish(&sim.clock, sim.rx, sim.control);
    Ok(HandoffLog {
        report,
        setup_hops,
        fork,
        fork_depth: oracle.hops(cn, fork),
        join_sent_ms: -lead,
        graft_ms: sim.graft,
        first_new_ms: sim
            .clock
            .settled
            .and(Some(report.handoff_latency_ms as i64)),
        prune_sent_ms: sim.prune_sent,
        prune_done_ms: sim.prune_done,
        first_seq: first,
        last_seq,
        deliveries,
    })
}

impl Multicast<'_> {
    fn upstream(&self, node: NodeId) -> NodeId {
        self.oracle
            .next_hop(node, self.cn)
            .expect("non-root node has an upstream")
    }

    fn run(&mut self) -> Result<(), HandoffError> {
        while let Some((at, event)) = self.queue.pop() {
            match event {
                McastEvent::Emit(seq) => {
                    self.forward(at, seq, self.cn);
                    if self.clock.emit_next(seq, at)? {
                        self.queue.push(
                            at + self.clock.interval,
                            Class::Data,
                            McastEvent::Emit(seq + 1),
                        );
                    }
                }
                McastEvent::Data { seq, node } => self.on_data(at, seq, node),
                McastEvent::Attach => {
                    self.rx.attach_new();
                    if self.cfg.overlap == Overlap::BreakBeforeMake {
                        let expiry = at + self.cfg.refresh_period_ms as i64;
                        self.queue
                            .push(expiry, Class::Control, McastEvent::LocalExpire);
                    }
                }
                McastEvent::IssueJoin => {
                    if let Some(st) = self.state.get_mut(&self.new) {
                        st.local = true;
                        self.graft.get_or_insert(at);
                    } else {
                        self.state.insert(
                            self.new,
                            RouterState {
                                local: true,
                                ..Default::default()
                            },
                        );
                        self.send_join(at, self.new, self.join_copies);
                    }
                }
                McastEvent::JoinArrive { node, from } => {
                    if let Some(st) = self.state.get_mut(&node) {
                        st.children.insert(from);
                        self.graft.get_or_insert(at);
                    } else {
                        self.state.insert(
                            node,
                            RouterState {
                                children: BTreeSet::from([from]),
                                local: false,
                            },
                        );
                        self.send_join(at, node, self.join_copies);
                    }
                }
                McastEvent::JoinRetry { node } => {
                    if self.state.contains_key(&node) {
                        self.send_join(at, node, 1);
                    }
                }
                McastEvent::PruneArrive { node, from } => {
                    if let Some(st) = self.state.get_mut(&node) {
                        st.children.remove(&from);
                    }
                    self.prune_upward(at, node);
                }
                McastEvent::LocalExpire => {
                    if let Some(st) = self.state.get_mut(&self.old) {
                        st.local = false;
                        self.prune_upward(at, self.old);
                    }
                }
                McastEvent::PruneDeadline => {
                    if self.rx.ready_to_prune(true) {
                        self.mobile_prune(at);
                    }
                }
            }
        }
        Ok(())
    }

    fn forward(&mut self, at: Time, seq: i64, node: NodeId) {
        let Some(st) = self.state.get(&node) else {
            return;
        };
        let children: Vec<NodeId> = st.children.iter().copied().collect();
        for child in children {
            if self.channel.survives() {
                self.queue.push(
                    at + self.clock.hop,
                    Class::Data,
                    McastEvent::Data { seq, node: child },
                );
            }
        }
    }

    fn on_data(&mut self, at: Time, seq: i64, node: NodeId) {
        let Some(st) = self.state.get(&node) else {
            return;
        };
        if st.local {
            let via = if node == self.old {
                Some(Interface::Old)
            } else if node == self.new {
                Some(Interface::New)
            } else {
                None
            };
            if let Some(via) = via {
                if self.rx.receive(at, seq, via) {
                    match self.cfg.overlap {
                        Overlap::BreakBeforeMake => self.clock.settle(at),
                        Overlap::MakeBeforeBreak => {
                            let wait =
                                i64::from(self.oracle.hops(self.cn, self.old)) * self.clock.hop;
                            self.queue
                                .push(at + wait, Class::Mobility, McastEvent::PruneDeadline);
                        }
                    }
                }
                if self.rx.ready_to_prune(false) {
                    self.mobile_prune(at);
                }
            }
        }
        self.forward(at, seq, node);
    }

    fn mobile_prune(&mut self, at: Time) {
        self.rx.hearing_old = false;
        self.prune_sent = Some(at);
        self.clock.settle(at);
        if let Some(st) = self.state.get_mut(&self.old) {
            st.local = false;
        }
        self.prune_upward(at, self.old);
    }

    /// Drops `node`'s state if nothing below needs it and passes the prune on.
    fn prune_upward(&mut self, at: Time, node: NodeId) {
        let Some(st) = self.state.get(&node) else {
            return;
        };
        if node == self.cn || st.local || !st.children.is_empty() {
            self.prune_done.get_or_insert(at);
            return;
        }
        self.state.remove(&node);
        let up = self.upstream(node);
        self.control += u64::from(self.prune_copies);
        let delay = if self.channel.any_survives(self.prune_copies) {
            self.clock.hop
        } else {
            // upstream oif times out instead
            self.cfg.refresh_period_ms as i64
        };
        self.queue.push(
            at + delay,
            Class::Control,
            McastEvent::PruneArrive {
                node: up,
                from: node,
            },
        );
    }

    fn send_join(&mut self, at: Time, node: NodeId, copies: u32) {
        let up = self.upstream(node);
        self.control += u64::from(copies);
        if self.channel.any_survives(copies) {
            self.queue.push(
                at + self.clock.hop,
                Class::Control,
                McastEvent::JoinArrive {
                    node: up,
                    from: node,
                },
            );
        } else {
            self.queue.push(
                at + self.cfg.refresh_period_ms as i64,
                Class::Control,
                McastEvent::JoinRetry { node },
            );
        }
    }
}

#[derive(Debug)]
enum MipEvent {
    Emit(i64),
    AtHomeAgent(i64),
    Data { seq: i64, via: Interface },
    Attach,
    Register,
    BindingSwitch,
    PruneDeadline,
}

pub(super) fn mobile_ip(
    oracle: &PathOracle,
    cn: NodeId,
    ha: NodeId,
    old: NodeId,
    new: NodeId,
    cfg: &HandoffConfig,
) -> Result<HandoffLog, HandoffError> {
    let to_ha = oracle.hops(cn, ha);
    let to_old = oracle.hops(ha, old);
    let to_new = oracle.hops(ha, new);
    let mut clock = Clock::new(cfg, 0, to_ha + to_old.max(to_new));
    let mut queue = Queue::new();
    let mut channel = Channel::new(cfg);
    let mut rx = Receiver::new(cfg.overlap);
    let hop = clock.hop;
    let refresh = cfg.refresh_period_ms as i64;
    let mut binding_new = false;
    let mut control = 0u64;
    let mut graft = None;
    let mut prune_sent = None;

    let first = clock.first_seq;
    queue.push(first * clock.interval, Class::Data, MipEvent::Emit(first));
    queue.push(0, Class::Mobility, MipEvent::Attach);
    queue.push(0, Class::Mobility, MipEvent::Register);

    while let Some((at, event)) = queue.pop() {
        match event {
            MipEvent::Emit(seq) => {
                if channel.survives_hops(to_ha) {
                    let arrive = at + i64::from(to_ha) * hop;
                    queue.push(arrive, Class::Data, MipEvent::AtHomeAgent(seq));
                }
                if clock.emit_next(seq, at)? {
                    queue.push(at + clock.interval, Class::Data, MipEvent::Emit(seq + 1));
                }
            }
            MipEvent::AtHomeAgent(seq) => {
                let (via, hops) = if binding_new {
                    (Interface::New, to_new)
                } else {
                    (Interface::Old, to_old)
                };
                if channel.survives_hops(hops) {
                    let arrive = at + i64::from(hops) * hop;
                    queue.push(arrive, Class::Data, MipEvent::Data { seq, via });
                }
            }
            MipEvent::Data { seq, via } => {
                if rx.receive(at, seq, via) {
                    match cfg.overlap {
                        Overlap::BreakBeforeMake => clock.settle(at),
                        Overlap::MakeBeforeBreak => {
                            let wait = i64::from(to_ha + to_old) * hop;
                            queue.push(at + wait, Class::Mobility, MipEvent::PruneDeadline);
                        }
                    }
                }
                if rx.ready_to_prune(false) {
                    rx.hearing_old = false;
                    prune_sent = Some(at);
                    clock.settle(at);
                }
            }
            MipEvent::Attach => rx.attach_new(),
            MipEvent::Register => {
                // registration is retransmitted end to end by the mobile
                let mut delivered = true;
                for _ in 0..to_new {
                    control += 1;
                    if !channel.survives() {
                        delivered = false;
                        break;
                    }
                }
                if delivered {
                    let arrive = at + i64::from(to_new) * hop;
                    queue.push(arrive, Class::Control, MipEvent::BindingSwitch);
                } else {
                    queue.push(at + refresh, Class::Mobility, MipEvent::Register);
                }
            }
            MipEvent::BindingSwitch => {
                binding_new = true;
                graft = Some(at);
            }
            MipEvent::PruneDeadline => {
                if rx.ready_to_prune(true) {
                    rx.hearing_old = false;
                    prune_sent = Some(at);
                    clock.settle(at);
                }
            }
        }
    }

    let settled = clock.settled;
    let (report, last_seq, deliveries) = finish(&clock, rx, control);
    Ok(HandoffLog {
        report,
        setup_hops: to_new,
        fork: ha,
        fork_depth: to_ha,
        join_sent_ms: 0,
        graft_ms: graft,
        first_new_ms: settled.and(Some(report.handoff_latency_ms as i64)),
        prune_sent_ms: prune_sent,
        prune_done_ms: prune_sent,
        first_seq: first,
        last_seq,
        deliveries,
    })
}
