use mobisim::metrics::{aggregate, run_stats, RunRecord};
use mobisim::routing::StepSample;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(n: usize, seed: u64) -> Vec<StepSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(0..8);
    (0..n)
        .map(|i| {
            let c = rng.gen_range(1..12);
            StepSample {
                step_index: i,
                location: i,
                a_hops: a,
                b_hops: rng.gen_range(0..15),
                c_hops: c,
                added_links: rng.gen_range(0..6),
                removed_links: 0,
                tree_links: c,
                establishment: i == 0,
            }
        })
        .collect()
}

/// Spreadsheet-style recomputation: plain loops, rank-based percentile.
fn recompute(samples: &[StepSample]) -> (f64, f64, f64, f64, f64, u64, u64) {
    let mut r: Vec<f64> = samples
        .iter()
        .map(|s| (s.a_hops + s.b_hops) as f64 / s.c_hops as f64)
        .collect();
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mean_r = r.iter().sum::<f64>() / r.len() as f64;
    let rank = (0.9 * r.len() as f64).ceil() as usize;
    let p90_r = r[rank - 1];
    let handoffs = &samples[1..];
    let mean_l = handoffs.iter().map(|s| s.added_links as f64).sum::<f64>() / handoffs.len() as f64;
    let mean_b = handoffs.iter().map(|s| s.b_hops as f64).sum::<f64>() / handoffs.len() as f64;
    let ab = samples.iter().map(|s| (s.a_hops + s.b_hops) as u64).sum();
    let c = samples.iter().map(|s| s.c_hops as u64).sum();
    (
        mean_r,
        p90_r,
        *r.last().unwrap(),
        mean_l,
        mean_b / mean_l,
        ab,
        c,
    )
}

#[test]
fn thousand_samples_match_recomputation() {
    let samples = synthetic(1000, 77);
    let stats = run_stats(&samples).unwrap();
    let (mean_r, p90_r, max_r, mean_l, b_over_l, ab, c) = recompute(&samples);
    assert!((stats.r.mean - mean_r).abs() < 1e-12);
    assert_eq!(stats.r.p90, p90_r);
    assert_eq!(stats.r.max, max_r);
    assert!((stats.mean_l().unwrap() - mean_l).abs() < 1e-12);
    assert!((stats.b_over_l.unwrap() - b_over_l).abs() < 1e-12);
    assert_eq!((stats.total_ab, stats.total_c), (ab, c));
    assert_eq!(stats.handoffs, 999);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aggregate_is_order_independent(seeds in prop::collection::vec(any::<u64>(), 1..12), rot in any::<usize>()) {
        let records: Vec<RunRecord> = seeds
            .iter()
            .enumerate()
            .map(|(i, &s)| RunRecord {
                topology_type: ["r", "ts"][i % 2].into(),
                topology: format!("t{}", i % 3),
                model: ["random", "neighbor"][(i / 2) % 2].into(),
                run_index: i,
                stats: run_stats(&synthetic(40, s)).unwrap(),
            })
            .collect();
        let mut shuffled = records.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        prop_assert_eq!(aggregate(&records).unwrap(), aggregate(&shuffled).unwrap());
    }

    #[test]
    fn maxima_never_below_mean(seed in any::<u64>(), n in 2usize..300) {
        let stats = run_stats(&synthetic(n, seed)).unwrap();
        prop_assert!(stats.r.max >= stats.r.mean - 1e-12);
        let l = stats.added.unwrap();
        prop_assert!(l.max >= l.mean - 1e-12);
    }
}

#[test]
fn nearest_rank_p90_can_sit_below_a_skewed_mean() {
    // nine r = 1 samples and one r = 11: mean 2, p90 1
    let mut samples = synthetic(10, 0);
    for (i, s) in samples.iter_mut().enumerate() {
        (s.a_hops, s.b_hops, s.c_hops) = if i == 9 { (5, 6, 1) } else { (1, 0, 1) };
    }
    let stats = run_stats(&samples).unwrap();
    assert_eq!((stats.r.mean, stats.r.p90, stats.r.max), (2.0, 1.0, 11.0));
}
