//! Seeded topology generators.
//!
//! Three families are produced, sized by node count and average degree:
//!
//! * `flat_random`: a random recursive spanning tree plus uniformly sampled
//!   extra links.
//! * `transit_stub`: a small transit core with stub clusters hanging off each
//!   transit router. Stubs are intra-dense and have one or two uplinks.
//! * `tiers_like`: a three-level hierarchy (WAN core, MAN router per cluster,
//!   LAN nodes below it) that stays close to a tree, with sparse cross links.
//!
//! In the clustered families node ids are assigned so that every cluster
//! occupies a contiguous id range, transit/WAN routers first.
//!
//! Every generator lands exactly on `round(nodes * degree / 2)` links.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NodeId, Topology, TopologyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    FlatRandom,
    TransitStub,
    TiersLike,
}

impl GeneratorKind {
    pub fn prefix(self) -> &'static str {
        match self {
            GeneratorKind::FlatRandom => "r",
            GeneratorKind::TransitStub => "ts",
            GeneratorKind::TiersLike => "ti",
        }
    }
}

fn default_stub_size() -> usize {
    8
}

fn default_stubs_per_transit() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub kind: GeneratorKind,
    pub node_count: usize,
    pub target_avg_degree: f64,
    pub seed: u64,
    /// Nodes per stub (or LAN) cluster.
    #[serde(default = "default_stub_size")]
    pub stub_size: usize,
    /// Stub clusters per transit (or WAN) router.
    #[serde(default = "default_stubs_per_transit")]
    pub stubs_per_transit: usize,
}

impl GeneratorParams {
    pub fn new(kind: GeneratorKind, node_count: usize, target_avg_degree: f64, seed: u64) -> Self {
        GeneratorParams {
            kind,
            node_count,
            target_avg_degree,
            seed,
            stub_size: default_stub_size(),
            stubs_per_transit: default_stubs_per_transit(),
        }
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |msg: String| Err(TopologyError::Infeasible(msg));
        if self.node_count < 2 {
            return bad(format!("node_count {} < 2", self.node_count));
        }
        if !self.target_avg_degree.is_finite() || self.target_avg_degree < 2.0 {
            return bad(format!("target_avg_degree {} < 2", self.target_avg_degree));
        }
        if self.stub_size == 0 || self.stubs_per_transit == 0 {
            return bad("stub_size and stubs_per_transit must be positive".into());
        }
        if self.node_count > u16::MAX as usize {
            return bad(format!("node_count {} too large", self.node_count));
        }
        let max_links = self.node_count * (self.node_count - 1) / 2;
        if self.target_links() > max_links {
            return bad(format!(
                "{} links requested but a {}-node simple graph holds at most {}",
                self.target_links(),
                self.node_count,
                max_links
            ));
        }
        Ok(())
    }

    pub fn target_links(&self) -> usize {
        (self.node_count as f64 * self.target_avg_degree / 2.0).round() as usize
    }

    /// Default label, e.g. `ts100`.
    pub fn default_name(&self) -> String {
        format!("{}{}", self.kind.prefix(), self.node_count)
    }
}

/// Generates a connected topology. Pure function of `params`.
pub fn generate(params: &GeneratorParams) -> Result<Topology, TopologyError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut g = EdgeBuilder::new(params.node_count);
    match params.kind {
        GeneratorKind::FlatRandom => flat_random(params, &mut g, &mut rng)?,
        GeneratorKind::TransitStub => transit_stub(params, &mut g, &mut rng)?,
        GeneratorKind::TiersLike => tiers_like(params, &mut g, &mut rng)?,
    }
    debug_assert_eq!(g.len(), params.target_links());
    Topology::from_edges(params.default_name(), g.into_edges())
}

struct EdgeBuilder {
    adj: Vec<BTreeSet<NodeId>>,
    count: usize,
}

impl EdgeBuilder {
    fn new(n: usize) -> Self {
        EdgeBuilder {
            adj: vec![BTreeSet::new(); n],
            count: 0,
        }
    }

    fn add(&mut self, u: NodeId, v: NodeId) -> bool {
        if u == v || !self.adj[u].insert(v) {
            return false;
        }
        self.adj[v].insert(u);
        self.count += 1;
        true
    }

    fn has(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].contains(&v)
    }

    fn len(&self) -> usize {
        self.count
    }

    /// Random recursive tree over `nodes` (in the given order).
    fn spanning_tree(&mut self, nodes: &[NodeId], rng: &mut ChaCha8Rng) {
        for i in 1..nodes.len() {
            let j = rng.gen_range(0..i);
            self.add(nodes[i], nodes[j]);
        }
    }

    fn into_edges(self) -> Vec<(NodeId, NodeId)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, set)| set.range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }
}

/// A set of node groups inside which extra links may be sampled.
struct Regions<'a> {
    groups: Vec<&'a [NodeId]>,
}

impl<'a> Regions<'a> {
    fn free_pairs(&self, g: &EdgeBuilder) -> usize {
        self.groups
            .iter()
            .map(|grp| {
                let k = grp.len();
                let used: usize = grp
                    .iter()
                    .map(|&u| grp.iter().filter(|&&v| v > u && g.has(u, v)).count())
                    .sum();
                k * k.saturating_sub(1) / 2 - used
            })
            .sum()
    }

    /// Adds up to `count` new links chosen uniformly among free pairs.
    /// Returns how many were added.
    fn fill(&self, g: &mut EdgeBuilder, count: usize, rng: &mut ChaCha8Rng) -> usize {
        if count == 0 {
            return 0;
        }
        let weights: Vec<usize> = self
            .groups
            .iter()
            .map(|grp| grp.len() * grp.len().saturating_sub(1) / 2)
            .collect();
        if weights.iter().all(|&w| w == 0) {
            return 0;
        }
        let chooser = WeightedIndex::new(&weights).expect("nonzero weights");
        let mut added = 0;
        let mut attempts = 0;
        let budget = 20 * count + 1000;
        while added < count && attempts < budget {
            attempts += 1;
            let grp = self.groups[chooser.sample(rng)];
            let a = grp[rng.gen_range(0..grp.len())];
            let b = grp[rng.gen_range(0..grp.len())];
            if g.add(a, b) {
                added += 1;
            }
        }
        if added < count {
            // dense regime: enumerate what is left and draw without replacement
            let mut free: Vec<(NodeId, NodeId)> = self
                .groups
                .iter()
                .flat_map(|grp| {
                    grp.iter()
                        .enumerate()
                        .flat_map(move |(i, &u)| grp[i + 1..].iter().map(move |&v| (u, v)))
                })
                .filter(|&(u, v)| !g.has(u, v))
                .collect();
            free.shuffle(rng);
            for (u, v) in free.into_iter().take(count - added) {
                g.add(u, v);
                added += 1;
            }
        }
        added
    }
}

fn flat_random(
    params: &GeneratorParams,
    g: &mut EdgeBuilder,
    rng: &mut ChaCha8Rng,
) -> Result<(), TopologyError> {
    let mut order: Vec<NodeId> = (0..params.node_count).collect();
    order.shuffle(rng);
    g.spanning_tree(&order, rng);
    let all: Vec<NodeId> = (0..params.node_count).collect();
    let extra = params.target_links() - g.len();
    let regions = Regions { groups: vec![&all] };
    let added = regions.fill(g, extra, rng);
    ensure_reached(params, added, extra)
}

/// Id layout shared by the clustered generators.
struct ClusterLayout {
    core: Vec<NodeId>,
    clusters: Vec<Vec<NodeId>>,
    /// Core router each cluster hangs off.
    attach: Vec<NodeId>,
}

impl ClusterLayout {
    fn new(params: &GeneratorParams) -> Self {
        let n = params.node_count;
        let unit = 1 + params.stubs_per_transit * params.stub_size;
        let core_count = ((n as f64 / unit as f64).round() as usize).clamp(1, n - 1);
        let rest = n - core_count;
        let cluster_count =
            ((rest as f64 / params.stub_size as f64).round() as usize).clamp(1, rest);
        let (base, extra) = (rest / cluster_count, rest % cluster_count);

        let core: Vec<NodeId> = (0..core_count).collect();
        let mut clusters = Vec::with_capacity(cluster_count);
        let mut next = core_count;
        for i in 0..cluster_count {
            let size = base + usize::from(i < extra);
            clusters.push((next..next + size).collect::<Vec<_>>());
            next += size;
        }
        let attach = (0..cluster_count)
            .map(|i| i * core_count / cluster_count)
            .collect();
        ClusterLayout {
            core,
            clusters,
            attach,
        }
    }
}

fn transit_stub(
    params: &GeneratorParams,
    g: &mut EdgeBuilder,
    rng: &mut ChaCha8Rng,
) -> Result<(), TopologyError> {
    let layout = ClusterLayout::new(params);
    g.spanning_tree(&layout.core, rng);
    for (stub, &transit) in layout.clusters.iter().zip(&layout.attach) {
        g.spanning_tree(stub, rng);
        let gateway = stub[rng.gen_range(0..stub.len())];
        g.add(gateway, transit);
    }
    let mut remaining = params.target_links() - g.len();

    // mesh the transit core to an average degree of about 3.5
    let core_region = Regions {
        groups: vec![&layout.core],
    };
    let core_extra = remaining.min((layout.core.len() * 3).div_ceil(4));
    remaining -= core_region.fill(g, core_extra, rng);

    // a second uplink for roughly half of the stubs
    for (stub, &transit) in layout.clusters.iter().zip(&layout.attach) {
        if remaining == 0 {
            break;
        }
        if stub.len() > 1 && rng.gen_bool(0.5) {
            let gateway = stub[rng.gen_range(0..stub.len())];
            if g.add(gateway, transit) {
                remaining -= 1;
            }
        }
    }

    let stubs = Regions {
        groups: layout.clusters.iter().map(Vec::as_slice).collect(),
    };
    let added = stubs.fill(g, remaining, rng);
    ensure_reached(params, added, remaining)
}

fn tiers_like(
    params: &GeneratorParams,
    g: &mut EdgeBuilder,
    rng: &mut ChaCha8Rng,
) -> Result<(), TopologyError> {
    let layout = ClusterLayout::new(params);
    g.spanning_tree(&layout.core, rng);
    for (cluster, &wan) in layout.clusters.iter().zip(&layout.attach) {
        // first node is the MAN router, the rest form the LAN tree below it
        g.spanning_tree(cluster, rng);
        g.add(cluster[0], wan);
    }
    let mut remaining = params.target_links() - g.len();

    let core_region = Regions {
        groups: vec![&layout.core],
    };
    let core_extra = remaining.min(layout.core.len().div_ceil(4));
    remaining -= core_region.fill(g, core_extra, rng);

    // MAN routers under the same WAN router get a few redundant links
    let mut mans_by_wan: Vec<Vec<NodeId>> = vec![Vec::new(); layout.core.len()];
    for (cluster, &wan) in layout.clusters.iter().zip(&layout.attach) {
        mans_by_wan[wan].push(cluster[0]);
    }
    let man_region = Regions {
        groups: mans_by_wan.iter().map(Vec::as_slice).collect(),
    };
    let man_extra = (remaining / 5).min(man_region.free_pairs(g));
    remaining -= man_region.fill(g, man_extra, rng);

    let lans = Regions {
        groups: layout.clusters.iter().map(Vec::as_slice).collect(),
    };
    let added = lans.fill(g, remaining, rng);
    ensure_reached(params, added, remaining)
}

fn ensure_reached(
    params: &GeneratorParams,
    added: usize,
    wanted: usize,
) -> Result<(), TopologyError> {
    if added < wanted {
        return Err(TopologyError::Infeasible(format!(
            "{:?} layout with stub_size {} cannot hold {} links on {} nodes; \
             {} short (raise stub_size or lower the degree)",
            params.kind,
            params.stub_size,
            params.target_links(),
            params.node_count,
            wanted - added
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kind: GeneratorKind, n: usize, deg: f64) -> GeneratorParams {
        GeneratorParams::new(kind, n, deg, 7)
    }

    #[test]
    fn flat_random_r50() {
        let topo = generate(&params(GeneratorKind::FlatRandom, 50, 8.68)).unwrap();
        assert_eq!(topo.nodes(), 50);
        let links = topo.links() as f64;
        assert!((links - 217.0).abs() <= 0.15 * 217.0, "{links}");
        assert_eq!(topo.name(), "r50");
    }

    #[test]
    fn transit_stub_ts100() {
        let topo = generate(&params(GeneratorKind::TransitStub, 100, 3.7)).unwrap();
        assert_eq!(topo.nodes(), 100);
        assert!((topo.avg_degree() - 3.7).abs() <= 0.15 * 3.7);
        assert_eq!(topo.links(), 185);
    }

    #[test]
    fn transit_stub_clusters_are_contiguous_and_dense() {
        let p = params(GeneratorKind::TransitStub, 100, 3.7);
        let layout = ClusterLayout::new(&p);
        assert_eq!(layout.core, vec![0, 1, 2, 3]);
        assert_eq!(layout.clusters.len(), 12);
        assert!(layout.clusters.iter().all(|c| c.len() == 8));
        let topo = generate(&p).unwrap();
        // most links stay inside a cluster
        let cluster_of = |v: NodeId| (v >= 4).then(|| (v - 4) / 8);
        let intra = topo
            .edges()
            .iter()
            .filter(|&&(u, v)| cluster_of(u).is_some() && cluster_of(u) == cluster_of(v))
            .count();
        assert!(intra as f64 > 0.7 * topo.links() as f64, "{intra}");
    }

    #[test]
    fn tiers_like_ti1000() {
        let topo = generate(&params(GeneratorKind::TiersLike, 1000, 2.81)).unwrap();
        assert_eq!(topo.links(), 1405);
    }

    #[test]
    fn determinism() {
        for kind in [
            GeneratorKind::FlatRandom,
            GeneratorKind::TransitStub,
            GeneratorKind::TiersLike,
        ] {
            let p = params(kind, 120, 3.5);
            assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
            let mut other = p.clone();
            other.seed += 1;
            assert_ne!(
                generate(&p).unwrap().edges(),
                generate(&other).unwrap().edges()
            );
        }
    }

    #[test]
    fn infeasible_parameters() {
        assert!(generate(&params(GeneratorKind::FlatRandom, 1, 2.0)).is_err());
        assert!(generate(&params(GeneratorKind::FlatRandom, 10, 1.5)).is_err());
        assert!(generate(&params(GeneratorKind::FlatRandom, 10, 9.5)).is_err());
        // eight-node stubs cap the intra-cluster degree near 7
        let err = generate(&params(GeneratorKind::TransitStub, 1008, 7.51)).unwrap_err();
        assert!(matches!(err, TopologyError::Infeasible(_)));
        let mut wide = params(GeneratorKind::TransitStub, 1008, 7.51);
        wide.stub_size = 16;
        wide.stubs_per_transit = 2;
        assert_eq!(generate(&wide).unwrap().links(), 3785);
    }

    #[test]
    fn complete_graph_is_reachable() {
        let topo = generate(&params(GeneratorKind::FlatRandom, 12, 11.0)).unwrap();
        assert_eq!(topo.links(), 66);
    }
}
