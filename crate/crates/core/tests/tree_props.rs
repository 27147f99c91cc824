mod common;

use std::collections::BTreeSet;

use common::{bfs, graph_strategy, random_graph, random_tree};
use mobisim::movement::{generate_trace, MovementKind, MovementModel};
use mobisim::routing::{run_scenario, MulticastTree};
use mobisim::PathOracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random join/prune walk checking tree hops against BFS after each mutation.
fn check_random_walk(n: usize, seed: u64) {
    let topo = random_graph(n, n / 2 + (seed as usize % n), seed);
    let oracle = PathOracle::new(&topo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cn = rng.gen_range(0..n);
    let from_cn = bfs(&topo, cn);
    let pick = |rng: &mut ChaCha8Rng| loop {
        let v = rng.gen_range(0..n);
        if v != cn {
            break v;
        }
    };
    let mut leaf = pick(&mut rng);
    let mut tree = MulticastTree::establish(&oracle, cn, leaf).unwrap();
    let mut added = tree.link_count() as i64;
    let mut removed = 0i64;
    for _ in 0..30 {
        let next = pick(&mut rng);
        if next == leaf {
            continue;
        }
        added += i64::from(tree.join(&oracle, next).unwrap());
        for &l in tree.leaves() {
            assert_eq!(Some(tree.path_hops(l).unwrap()), from_cn[l]);
        }
        removed += i64::from(tree.prune(leaf).unwrap());
        assert_eq!(Some(tree.path_hops(next).unwrap()), from_cn[next]);
        tree.validate(&oracle).unwrap();
        assert!(added >= removed);
        assert_eq!(added - removed, tree.link_count() as i64);
        leaf = next;
    }
}

#[test]
fn tree_hops_equal_distance_over_many_scenarios() {
    for seed in 0..1000u64 {
        check_random_walk(3 + (seed as usize * 13) % 98, seed);
    }
}

#[test]
fn neighbor_moves_on_trees_add_at_most_one_link() {
    for seed in 0..40u64 {
        let topo = random_tree(30 + seed as usize, seed);
        let oracle = PathOracle::new(&topo);
        let cn = (seed as usize * 7) % topo.nodes();
        let forbidden: BTreeSet<_> = [cn].into();
        let Ok(trace) = generate_trace(&topo, MovementModel::neighbor(), &forbidden, 100, seed)
        else {
            continue;
        };
        let samples = run_scenario(&oracle, cn, (cn + 1) % topo.nodes(), &trace).unwrap();
        assert!(samples[1..].iter().all(|s| s.added_links <= 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scenario_invariants(
        topo in graph_strategy(100),
        kind in prop_oneof![
            Just(MovementKind::Random),
            Just(MovementKind::Neighbor),
            Just(MovementKind::Cluster),
        ],
        seed in any::<u64>(),
    ) {
        prop_assume!(topo.nodes() >= 3);
        let oracle = PathOracle::new(&topo);
        let n = topo.nodes();
        let cn = seed as usize % n;
        let ha = (seed >> 20) as usize % n;
        let forbidden: BTreeSet<_> = [cn].into();
        let Ok(trace) = generate_trace(&topo, MovementModel::new(kind), &forbidden, 60, seed) else {
            return Ok(());
        };
        let samples = run_scenario(&oracle, cn, ha, &trace).unwrap();
        prop_assert_eq!(samples.len(), trace.len());
        let from_cn = bfs(&topo, cn);
        let from_ha = bfs(&topo, ha);
        let (mut added, mut removed) = (0u64, 0u64);
        for (s, &loc) in samples.iter().zip(&trace.steps) {
            prop_assert_eq!(Some(s.c_hops), from_cn[loc]);
            prop_assert_eq!(Some(s.a_hops), from_cn[ha]);
            prop_assert_eq!(Some(s.b_hops), from_ha[loc]);
            prop_assert!(s.a_hops + s.b_hops >= s.c_hops);
            prop_assert!(s.r() >= 1.0);
            added += u64::from(s.added_links);
            removed += u64::from(s.removed_links);
            prop_assert!(added >= removed);
            prop_assert_eq!(added - removed, u64::from(s.tree_links));
        }
        prop_assert_eq!(run_scenario(&oracle, cn, ha, &trace).unwrap(), samples);
    }
}
