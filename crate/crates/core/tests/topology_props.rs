mod common;

use common::{bfs, graph_strategy, random_graph};
use mobisim::topology::load_edge_list;
use mobisim::topology::{generate, GeneratorKind, GeneratorParams};
use mobisim::PathOracle;
use proptest::prelude::*;

#[test]
fn oracle_matches_bfs_on_random_graphs() {
    for seed in 0..50u64 {
        let n = 2 + (seed as usize * 7) % 59;
        let topo = random_graph(n, n, seed);
        let oracle = PathOracle::new(&topo);
        for u in 0..n {
            let expect = bfs(&topo, u);
            for (v, d) in expect.iter().enumerate() {
                let d = d.unwrap();
                assert_eq!(oracle.dist(u, v).unwrap(), d, "dist({u},{v}) seed {seed}");
                let path = oracle.shortest_path(u, v).unwrap();
                assert_eq!(path.len() as u32, d + 1);
                assert_eq!((path[0], *path.last().unwrap()), (u, v));
                assert!(path.windows(2).all(|w| topo.has_edge(w[0], w[1])));
            }
        }
    }
}

#[test]
fn tie_break_prefers_lowest_next_hop() {
    // every shortest path is enumerated; the lexicographically smallest wins
    let topo = random_graph(14, 20, 3);
    let oracle = PathOracle::new(&topo);
    fn all_paths(
        topo: &mobisim::Topology,
        u: usize,
        v: usize,
        d: &[Option<u32>],
    ) -> Vec<Vec<usize>> {
        if u == v {
            return vec![vec![v]];
        }
        let mut out = Vec::new();
        for &w in topo.neighbors(u) {
            if d[w].unwrap() + 1 == d[u].unwrap() {
                for mut rest in all_paths(topo, w, v, d) {
                    rest.insert(0, u);
                    out.push(rest);
                }
            }
        }
        out
    }
    for v in 0..topo.nodes() {
        let to_v = bfs(&topo, v);
        for u in 0..topo.nodes() {
            let best = all_paths(&topo, u, v, &to_v).into_iter().min().unwrap();
            assert_eq!(oracle.shortest_path(u, v).unwrap(), best);
        }
    }
}

#[test]
fn edge_list_round_trip_of_generated_topology() {
    let topo = generate(&GeneratorParams::new(
        GeneratorKind::TransitStub,
        150,
        3.71,
        8,
    ))
    .unwrap();
    let back = load_edge_list(topo.name(), &topo.to_edge_list()).unwrap();
    assert_eq!(back, topo);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(topo in graph_strategy(40)) {
        let oracle = PathOracle::new(&topo);
        let n = topo.nodes();
        for u in 0..n {
            prop_assert_eq!(oracle.hops(u, u), 0);
            for v in 0..n {
                prop_assert_eq!(oracle.hops(u, v), oracle.hops(v, u));
                for w in 0..n {
                    prop_assert!(oracle.hops(u, w) <= oracle.hops(u, v) + oracle.hops(v, w));
                }
            }
        }
    }

    #[test]
    fn shortest_paths_are_edge_walks(topo in graph_strategy(60), a in any::<usize>(), b in any::<usize>()) {
        let oracle = PathOracle::new(&topo);
        let (u, v) = (a % topo.nodes(), b % topo.nodes());
        let path = oracle.shortest_path(u, v).unwrap();
        prop_assert_eq!(path.len() as u32, oracle.hops(u, v) + 1);
        prop_assert!(path.windows(2).all(|w| topo.has_edge(w[0], w[1])));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generators_hit_degree_and_are_pure(
        kind in prop_oneof![
            Just(GeneratorKind::FlatRandom),
            Just(GeneratorKind::TransitStub),
            Just(GeneratorKind::TiersLike),
        ],
        n in 30usize..200,
        deg in 2.5f64..6.0,
        seed in any::<u64>(),
    ) {
        let params = GeneratorParams::new(kind, n, deg, seed);
        let topo = generate(&params).unwrap();
        prop_assert_eq!(topo.nodes(), n);
        prop_assert!((topo.avg_degree() - deg).abs() <= 0.15 * deg);
        let reach = bfs(&topo, 0);
        prop_assert!(reach.iter().all(Option::is_some));
        prop_assert_eq!(generate(&params).unwrap(), topo);
    }
}
