//! Route-efficiency and handoff statistics over [`StepSample`] streams.
//!
//! Per-sample ratio `r = (A + B) / C` uses every sample. Added links `L`
//! and the `B / L` ratio use handoff samples only: the establishment sample
//! is tree setup, and stationary steps still count as handoffs with `L = 0`.
//! Percentiles are nearest-rank on an ascending sort.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::routing::StepSample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no samples")]
    Empty,
    #[error("sample {0} has a zero-hop tree path")]
    ZeroPath(usize),
    #[error("size sensitivity needs at least 3 sizes, got {0}")]
    TooFewSizes(usize),
}

/// Reference values from the original wide-area study, for side-by-side
/// reporting only.
pub mod reference {
    pub const MEAN_R: f64 = 2.11;
    pub const MEAN_L: f64 = 2.51;
    pub const MEAN_L_NEIGHBOR: f64 = 1.18;
    pub const MEAN_L_CLUSTER: f64 = 2.38;
    pub const MEAN_L_RANDOM: f64 = 3.97;
    pub const B_OVER_L: f64 = 2.31;
    pub const TOTAL_AB: f64 = 11_157.0;
    pub const TOTAL_C: f64 = 6_208.0;
}

/// Mean, 90th percentile and maximum of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub p90: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        Some(Summary {
            mean: sorted.iter().sum::<f64>() / n as f64,
            p90: sorted[percentile_index(n, 0.9)],
            max: sorted[n - 1],
        })
    }
}

/// Nearest-rank index `ceil(q * n) - 1`.
pub fn percentile_index(n: usize, q: f64) -> usize {
    ((q * n as f64).ceil() as usize).clamp(1, n) - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub samples: usize,
    pub handoffs: usize,
    pub total_c: u64,
    pub total_ab: u64,
    pub r: Summary,
    /// Added links per handoff; `None` when the run has no handoffs.
    pub added: Option<Summary>,
    /// Mean `B` over handoff samples.
    pub mean_b: Option<f64>,
    /// `mean B / mean L`; `None` when no links were ever added.
    pub b_over_l: Option<f64>,
}

impl RunStats {
    pub fn mean_r(&self) -> f64 {
        self.r.mean
    }

    pub fn mean_l(&self) -> Option<f64> {
        self.added.map(|s| s.mean)
    }
}

pub fn run_stats(samples: &[StepSample]) -> Result<RunStats, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(s) = samples.iter().find(|s| s.c_hops == 0) {
        return Err(MetricsError::ZeroPath(s.step_index));
    }
    let ratios: Vec<f64> = samples.iter().map(StepSample::r).collect();
    let handoffs: Vec<&StepSample> = samples.iter().filter(|s| !s.establishment).collect();
    let added: Vec<f64> = handoffs.iter().map(|s| f64::from(s.added_links)).collect();
    let added = Summary::of(&added);
    let mean_b = (!handoffs.is_empty())
        .then(|| handoffs.iter().map(|s| f64::from(s.b_hops)).sum::<f64>() / handoffs.len() as f64);
    let b_over_l = match (mean_b, added) {
        (Some(b), Some(l)) if l.mean > 0.0 => Some(b / l.mean),
        _ => None,
    };
    Ok(RunStats {
        samples: samples.len(),
        handoffs: handoffs.len(),
        total_c: samples.iter().map(|s| u64::from(s.c_hops)).sum(),
        total_ab: samples.iter().map(|s| u64::from(s.a_hops + s.b_hops)).sum(),
        r: Summary::of(&ratios).expect("nonempty"),
        added,
        mean_b,
        b_over_l,
    })
}

/// One run as fed to [`aggregate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub topology_type: String,
    pub topology: String,
    pub model: String,
    pub run_index: usize,
    pub stats: RunStats,
}

/// Per-(topology, model) means over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyStats {
    pub topology_type: String,
    pub topology: String,
    pub model: String,
    pub runs: usize,
    pub mean_r: f64,
    pub p90_r: f64,
    pub max_r: f64,
    pub mean_l: Option<f64>,
    pub p90_l: Option<f64>,
    pub max_l: Option<f64>,
    pub mean_b: Option<f64>,
    pub b_over_l: Option<f64>,
    pub total_ab: f64,
    pub total_c: f64,
    /// Largest per-sample `r` seen in any run.
    pub peak_r: f64,
}

/// Per-(topology type, model) means over same-type topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub topology_type: String,
    pub model: String,
    pub topologies: usize,
    pub runs: usize,
    pub mean_r: f64,
    pub p90_r: f64,
    /// Mean over topologies of each topology's mean-over-runs maximum.
    pub max_r: f64,
    pub mean_l: Option<f64>,
    pub p90_l: Option<f64>,
    pub max_l: Option<f64>,
    pub b_over_l: Option<f64>,
    pub total_ab: f64,
    pub total_c: f64,
    /// Largest single-sample `r` across the group.
    pub peak_r: f64,
}

impl AggregateRow {
    pub fn bandwidth_ratio(&self) -> f64 {
        self.total_ab / self.total_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub per_topology: Vec<TopologyStats>,
    pub rows: Vec<AggregateRow>,
}

impl AggregateStats {
    /// Unweighted mean of `mean_r` over all rows.
    pub fn overall_mean_r(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.mean_r)).unwrap_or(f64::NAN)
    }

    pub fn overall_mean_l(&self) -> Option<f64> {
        mean(self.rows.iter().filter_map(|r| r.mean_l))
    }

    pub fn overall_b_over_l(&self) -> Option<f64> {
        mean(self.rows.iter().filter_map(|r| r.b_over_l))
    }

    /// Σ(A+B) / ΣC over every row.
    pub fn overall_bandwidth_ratio(&self) -> f64 {
        let ab: f64 = self.rows.iter().map(|r| r.total_ab).sum();
        let c: f64 = self.rows.iter().map(|r| r.total_c).sum();
        ab / c
    }

    pub fn row(&self, topology_type: &str, model: &str) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.topology_type == topology_type && r.model == model)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn sorted_mean(mut values: Vec<f64>) -> Option<f64> {
    values.sort_by(f64::total_cmp);
    mean(values.into_iter())
}

/// Two-level averaging: runs within a topology, then topologies within a
/// type. Result does not depend on the order of `runs`.
pub fn aggregate(runs: &[RunRecord]) -> Result<AggregateStats, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut by_topology: BTreeMap<(&str, &str, &str), Vec<&RunStats>> = BTreeMap::new();
    for run in runs {
        by_topology
            .entry((&run.topology_type, &run.topology, &run.model))
            .or_default()
            .push(&run.stats);
    }

    let per_topology: Vec<TopologyStats> = by_topology
        .into_iter()
        .map(|((ty, topo, model), stats)| {
            let avg = |f: &dyn Fn(&RunStats) -> Option<f64>| {
                sorted_mean(stats.iter().filter_map(|s| f(s)).collect())
            };
            TopologyStats {
                topology_type: ty.to_string(),
                topology: topo.to_string(),
                model: model.to_string(),
                runs: stats.len(),
                mean_r: avg(&|s| Some(s.r.mean)).expect("nonempty"),
                p90_r: avg(&|s| Some(s.r.p90)).expect("nonempty"),
                max_r: avg(&|s| Some(s.r.max)).expect("nonempty"),
                mean_l: avg(&|s| s.added.map(|a| a.mean)),
                p90_l: avg(&|s| s.added.map(|a| a.p90)),
                max_l: avg(&|s| s.added.map(|a| a.max)),
                mean_b: avg(&|s| s.mean_b),
                b_over_l: avg(&|s| s.b_over_l),
                total_ab: avg(&|s| Some(s.total_ab as f64)).expect("nonempty"),
                total_c: avg(&|s| Some(s.total_c as f64)).expect("nonempty"),
                peak_r: stats.iter().map(|s| s.r.max).fold(f64::MIN, f64::max),
            }
        })
        .collect();

    let mut by_type: BTreeMap<(&str, &str), Vec<&TopologyStats>> = BTreeMap::new();
    for t in &per_topology {
        by_type
            .entry((&t.topology_type, &t.model))
            .or_default()
            .push(t);
    }
    let rows = by_type
        .into_iter()
        .map(|((ty, model), topos)| {
            let avg = |f: &dyn Fn(&TopologyStats) -> Option<f64>| {
                sorted_mean(topos.iter().filter_map(|t| f(t)).collect())
            };
            AggregateRow {
                topology_type: ty.to_string(),
                model: model.to_string(),
                topologies: topos.len(),
                runs: topos.iter().map(|t| t.runs).sum(),
                mean_r: avg(&|t| Some(t.mean_r)).expect("nonempty"),
                p90_r: avg(&|t| Some(t.p90_r)).expect("nonempty"),
                max_r: avg(&|t| Some(t.max_r)).expect("nonempty"),
                mean_l: avg(&|t| t.mean_l),
                p90_l: avg(&|t| t.p90_l),
                max_l: avg(&|t| t.max_l),
                b_over_l: avg(&|t| t.b_over_l),
                total_ab: avg(&|t| Some(t.total_ab)).expect("nonempty"),
                total_c: avg(&|t| Some(t.total_c)).expect("nonempty"),
                peak_r: topos.iter().map(|t| t.peak_r).fold(f64::MIN, f64::max),
            }
        })
        .collect();
    Ok(AggregateStats { per_topology, rows })
}

/// Spread of a metric across topology sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub mean: f64,
    /// Population standard deviation over the mean.
    pub cv: f64,
}

impl Dispersion {
    pub fn of(values: &[f64]) -> Option<Dispersion> {
        let mean = mean(values.iter().copied())?;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let cv = if mean == 0.0 { 0.0 } else { var.sqrt() / mean };
        Some(Dispersion { mean, cv })
    }
}

/// One size point of a single topology type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub nodes: usize,
    pub mean_r: f64,
    pub mean_l: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSensitivity {
    pub sizes: Vec<usize>,
    pub r: Dispersion,
    pub l: Option<Dispersion>,
}

pub fn size_sensitivity(points: &[SizePoint]) -> Result<SizeSensitivity, MetricsError> {
    if points.len() < 3 {
        return Err(MetricsError::TooFewSizes(points.len()));
    }
    let mut points = points.to_vec();
    points.sort_by_key(|p| p.nodes);
    let r: Vec<f64> = points.iter().map(|p| p.mean_r).collect();
    let l: Option<Vec<f64>> = points.iter().map(|p| p.mean_l).collect();
    Ok(SizeSensitivity {
        sizes: points.iter().map(|p| p.nodes).collect(),
        r: Dispersion::of(&r).expect("nonempty"),
        l: l.and_then(|l| Dispersion::of(&l)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: usize, a: u32, b: u32, c: u32, added: u32) -> StepSample {
        StepSample {
            step_index: i,
            location: 0,
            a_hops: a,
            b_hops: b,
            c_hops: c,
            added_links: added,
            removed_links: 0,
            tree_links: c,
            establishment: i == 0,
        }
    }

    #[test]
    fn equality_case() {
        let s: Vec<_> = (0..5).map(|i| sample(i, 2, 3, 5, 1)).collect();
        let stats = run_stats(&s).unwrap();
        assert_eq!(stats.r.mean, 1.0);
        assert_eq!(stats.total_ab, stats.total_c);
        assert_eq!(stats.handoffs, 4);
        assert_eq!(stats.b_over_l, Some(3.0));
    }

    #[test]
    fn mean_r_of_two() {
        let s = [sample(0, 1, 3, 2, 2), sample(1, 2, 4, 3, 0)];
        let stats = run_stats(&s).unwrap();
        assert_eq!(stats.r.mean, 2.0);
        assert_eq!(stats.added.unwrap().mean, 0.0);
        assert_eq!(stats.b_over_l, None);
    }

    #[test]
    fn errors() {
        assert_eq!(run_stats(&[]).unwrap_err(), MetricsError::Empty);
        assert_eq!(
            run_stats(&[sample(0, 1, 1, 0, 0)]).unwrap_err(),
            MetricsError::ZeroPath(0)
        );
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn nearest_rank() {
        assert_eq!(percentile_index(10, 0.9), 8);
        assert_eq!(percentile_index(1000, 0.9), 899);
        assert_eq!(percentile_index(1, 0.9), 0);
        assert_eq!(percentile_index(3, 0.9), 2);
        let s = Summary::of(&[5.0, 1.0, 3.0, 2.0, 4.0, 9.0, 8.0, 7.0, 6.0, 10.0]).unwrap();
        assert_eq!((s.mean, s.p90, s.max), (5.5, 9.0, 10.0));
    }

    fn record(ty: &str, topo: &str, run: usize, r: f64) -> RunRecord {
        let stats = RunStats {
            samples: 1,
            handoffs: 1,
            total_c: 10,
            total_ab: (10.0 * r) as u64,
            r: Summary {
                mean: r,
                p90: r,
                max: r,
            },
            added: Some(Summary {
                mean: 1.0,
                p90: 1.0,
                max: 1.0,
            }),
            mean_b: Some(2.0),
            b_over_l: Some(2.0),
        };
        RunRecord {
            topology_type: ty.into(),
            topology: topo.into(),
            model: "random".into(),
            run_index: run,
            stats,
        }
    }

    #[test]
    fn single_run_passes_through() {
        let agg = aggregate(&[record("ts", "ts100", 0, 1.7)]).unwrap();
        assert_eq!(agg.rows.len(), 1);
        assert_eq!(agg.rows[0].mean_r, 1.7);
        assert_eq!(agg.rows[0].b_over_l, Some(2.0));
        assert_eq!(agg.overall_mean_r(), 1.7);
    }

    #[test]
    fn two_runs_average() {
        let agg =
            aggregate(&[record("ts", "ts100", 0, 1.5), record("ts", "ts100", 1, 2.5)]).unwrap();
        assert_eq!(agg.rows[0].mean_r, 2.0);
        assert_eq!(agg.rows[0].peak_r, 2.5);
    }

    #[test]
    fn two_level_average_weights_topologies_equally() {
        // ts100 has three runs at 1.0, ts200 one run at 3.0
        let runs = [
            record("ts", "ts100", 0, 1.0),
            record("ts", "ts100", 1, 1.0),
            record("ts", "ts100", 2, 1.0),
            record("ts", "ts200", 0, 3.0),
        ];
        let agg = aggregate(&runs).unwrap();
        assert_eq!(agg.per_topology.len(), 2);
        assert_eq!(agg.rows[0].mean_r, 2.0);
        assert_eq!(agg.rows[0].topologies, 2);
        assert_eq!(agg.rows[0].runs, 4);
    }

    #[test]
    fn size_dispersion() {
        let flat: Vec<_> = [50, 100, 150]
            .iter()
            .map(|&n| SizePoint {
                nodes: n,
                mean_r: 2.0,
                mean_l: Some(1.5),
            })
            .collect();
        let s = size_sensitivity(&flat).unwrap();
        assert_eq!(s.r.cv, 0.0);
        assert_eq!(s.l.unwrap().cv, 0.0);
        assert_eq!(
            size_sensitivity(&flat[..2]).unwrap_err(),
            MetricsError::TooFewSizes(2)
        );
        let d = Dispersion::of(&[1.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.cv), (2.0, 0.5));
    }
}
