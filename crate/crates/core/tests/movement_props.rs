mod common;

use std::collections::BTreeSet;

use common::{bfs, graph_strategy, random_graph};
use mobisim::movement::{generate_trace, trace_stats, MovementKind, MovementModel};
use mobisim::PathOracle;
use proptest::prelude::*;

/// Chi-square critical value for 49 degrees of freedom at the 1% level.
const CHI2_49_P01: f64 = 74.919;

#[test]
fn random_model_visits_uniformly() {
    let topo = random_graph(50, 60, 17);
    let steps = 20_000;
    let t = generate_trace(
        &topo,
        MovementModel::random(),
        &BTreeSet::new(),
        steps,
        4242,
    )
    .unwrap();
    let mut counts = [0u32; 50];
    for &s in &t.steps {
        counts[s] += 1;
    }
    let expected = steps as f64 / 50.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (f64::from(c) - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < CHI2_49_P01, "chi-square {chi2:.2}");
}

#[test]
fn random_trace_distances_match_bfs() {
    let topo = random_graph(20, 15, 5);
    let oracle = PathOracle::new(&topo);
    let t = generate_trace(&topo, MovementModel::random(), &BTreeSet::new(), 200, 1).unwrap();
    let stats = trace_stats(&t, &oracle).unwrap();
    assert_eq!(stats.len(), 199);
    for (d, (a, b)) in stats.iter().zip(t.moves()) {
        assert_eq!(Some(*d), bfs(&topo, a)[b]);
    }
}

fn in_window(prev: usize, next: usize, n: usize) -> bool {
    let fwd = (next + n - prev) % n;
    let back = (prev + n - next) % n;
    next != prev && (fwd <= 3 || back <= 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traces_respect_their_model(
        topo in graph_strategy(80),
        kind in prop_oneof![
            Just(MovementKind::Random),
            Just(MovementKind::Neighbor),
            Just(MovementKind::Cluster),
        ],
        count in 1usize..150,
        seed in any::<u64>(),
    ) {
        prop_assume!(topo.nodes() >= 8);
        let cn = (seed as usize) % topo.nodes();
        let forbidden: BTreeSet<_> = [cn].into();
        let model = MovementModel::new(kind);
        let Ok(t) = generate_trace(&topo, model, &forbidden, count, seed) else {
            // only a neighbor walk can get stranded behind the forbidden node
            prop_assert_eq!(kind, MovementKind::Neighbor);
            return Ok(());
        };
        prop_assert_eq!(t.len(), count);
        prop_assert_eq!(t.steps[0], t.start);
        prop_assert!(t.steps.iter().all(|&s| s != cn && s < topo.nodes()));
        for (a, b) in t.moves() {
            match kind {
                MovementKind::Neighbor => prop_assert!(topo.has_edge(a, b)),
                MovementKind::Cluster => prop_assert!(in_window(a, b, topo.nodes())),
                MovementKind::Random => {}
            }
        }
        prop_assert_eq!(generate_trace(&topo, model, &forbidden, count, seed).unwrap(), t);
    }
}
