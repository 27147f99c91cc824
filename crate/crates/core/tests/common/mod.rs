#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use mobisim::Topology;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph: random recursive tree plus `extra` random chords.
pub fn random_graph(n: usize, extra: usize, seed: u64) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    let max = n * (n - 1) / 2;
    let want = (edges.len() + extra).min(max);
    while edges.len() < want {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Topology::from_edges(format!("g{n}_{seed}"), edges).unwrap()
}

/// Random spanning tree only.
pub fn random_tree(n: usize, seed: u64) -> Topology {
    random_graph(n, 0, seed)
}

pub fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Topology> {
    (2..=max_nodes, 0usize..3 * max_nodes, any::<u64>())
        .prop_map(|(n, extra, seed)| random_graph(n, extra, seed))
}

/// Textbook BFS over the edge list, independent of `PathOracle`.
pub fn bfs(topo: &Topology, src: usize) -> Vec<Option<u32>> {
    let n = topo.nodes();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in topo.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut dist = vec![None; n];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}
