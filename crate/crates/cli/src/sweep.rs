//! Packet-level handoff sweep over the moves of every run.

use mobisim::handoff::{
    simulate_handoff, simulate_mip_handoff, HandoffConfig, HandoffReport, Strategy,
};
use mobisim::routing::MulticastTree;
use rayon::prelude::*;

use crate::config::{LoadedTopology, ScenarioConfig};
use crate::error::CliError;
use crate::report::csv_text;
use crate::runner::RunOutput;
use crate::seeds::child_seed;

/// Label of the Mobile IP baseline rows.
pub const MOBILE_IP: &str = "mobile_ip";

#[derive(Debug, Clone, PartialEq)]
pub struct HandoffRow {
    pub topology: String,
    pub model: String,
    pub run: usize,
    pub step: usize,
    pub strategy: &'static str,
    pub added_links: u32,
    pub b_hops: u32,
    pub report: HandoffReport,
}

/// Seed for the handoff at `step` of a run.
fn move_seed(run: &RunOutput, step: usize) -> u64 {
    child_seed(run.job.child_seed, &run.topology, "handoff", step)
}

/// Replays the run's tree and simulates each non-stationary move under
/// every strategy plus Mobile IP.
pub fn sweep_run(
    base: &HandoffConfig,
    topo: &LoadedTopology,
    run: &RunOutput,
) -> Result<Vec<HandoffRow>, CliError> {
    let oracle = &topo.oracle;
    let violation = |detail: String| CliError::Invariant {
        topology: run.topology.clone(),
        model: run.job.model.to_string(),
        run: run.job.run_index,
        child_seed: run.job.child_seed,
        detail,
    };
    let mut tree = MulticastTree::establish(oracle, run.cn, run.trace.steps[0])
        .map_err(|e| violation(e.to_string()))?;
    let mut rows = Vec::new();
    for (i, (old, new)) in run.trace.moves().enumerate() {
        let step = i + 1;
        if old == new {
            continue;
        }
        let sample = &run.samples[step];
        let seed = move_seed(run, step);
        let row = |strategy, report| HandoffRow {
            topology: run.topology.clone(),
            model: run.job.model.to_string(),
            run: run.job.run_index,
            step,
            strategy,
            added_links: sample.added_links,
            b_hops: sample.b_hops,
            report,
        };
        for strategy in Strategy::ALL {
            let cfg = HandoffConfig {
                seed,
                ..base.with_strategy(strategy)
            };
            let report = simulate_handoff(oracle, &tree, old, new, &cfg)
                .map_err(|e| violation(format!("step {step} {}: {e}", strategy.as_str())))?;
            rows.push(row(strategy.as_str(), report));
        }
        let cfg = HandoffConfig {
            seed,
            ..base.clone()
        };
        let report = simulate_mip_handoff(oracle, run.cn, run.ha, old, new, &cfg)
            .map_err(|e| violation(format!("step {step} {MOBILE_IP}: {e}")))?;
        rows.push(row(MOBILE_IP, report));

        tree.join(oracle, new)
            .map_err(|e| violation(e.to_string()))?;
        tree.prune(old).map_err(|e| violation(e.to_string()))?;
    }
    Ok(rows)
}

pub fn sweep_all(
    cfg: &ScenarioConfig,
    topologies: &[LoadedTopology],
    runs: &[RunOutput],
    workers: usize,
) -> Result<Vec<HandoffRow>, CliError> {
    let base = cfg.handoff.clone().unwrap_or_default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let per_run: Vec<Vec<HandoffRow>> = pool.install(|| {
        runs.par_iter()
            .map(|run| sweep_run(&base, &topologies[run.job.topology], run))
            .collect::<Result<_, _>>()
    })?;
    Ok(per_run.into_iter().flatten().collect())
}

pub fn handoff_csv(rows: &[HandoffRow]) -> String {
    csv_text(
        &[
            "topology",
            "model",
            "run",
            "step",
            "strategy",
            "L",
            "B",
            "latency_ms",
            "lost",
            "dup",
            "out_of_order",
            "control_msgs",
        ],
        rows.iter().map(|r| {
            vec![
                r.topology.clone(),
                r.model.clone(),
                r.run.to_string(),
                r.step.to_string(),
                r.strategy.to_string(),
                r.added_links.to_string(),
                r.b_hops.to_string(),
                r.report.handoff_latency_ms.to_string(),
                r.report.packets_lost.to_string(),
                r.report.packets_duplicated.to_string(),
                r.report.out_of_order.to_string(),
                r.report.control_messages.to_string(),
            ]
        }),
    )
}
