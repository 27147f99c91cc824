//! Expands a scenario into independent runs and executes them.

use std::collections::BTreeSet;

use mobisim::metrics::{run_stats, RunRecord, RunStats};
use mobisim::movement::{
    generate_trace, MovementError, MovementKind, MovementModel, MovementTrace,
};
use mobisim::routing::{run_scenario, StepSample};
use mobisim::NodeId;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{LoadedTopology, ScenarioConfig};
use crate::error::CliError;
use crate::seeds::{child_seed, ENDPOINTS_LABEL};

/// Fresh trace seeds tried when a neighbor walk gets stranded next to the CN.
const TRACE_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunJob {
    pub topology: usize,
    pub model: MovementKind,
    pub run_index: usize,
    pub child_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub job: RunJob,
    pub topology: String,
    pub topology_type: String,
    pub cn: NodeId,
    pub ha: NodeId,
    pub trace: MovementTrace,
    pub samples: Vec<StepSample>,
    pub stats: RunStats,
}

impl RunOutput {
    pub fn record(&self) -> RunRecord {
        RunRecord {
            topology_type: self.topology_type.clone(),
            topology: self.topology.clone(),
            model: self.job.model.as_str().to_string(),
            run_index: self.job.run_index,
            stats: self.stats.clone(),
        }
    }

    /// File stem shared by this run's sample and trace CSVs.
    pub fn file_stem(&self) -> String {
        format!(
            "{}__{}__{:03}",
            self.topology, self.job.model, self.job.run_index
        )
    }
}

/// Every (topology, model, run) in config order.
pub fn plan(cfg: &ScenarioConfig, topologies: &[LoadedTopology]) -> Vec<RunJob> {
    let mut jobs = Vec::new();
    for (t, topo) in topologies.iter().enumerate() {
        for &model in &cfg.models {
            for run_index in 0..cfg.seeds_per_scenario {
                jobs.push(RunJob {
                    topology: t,
                    model,
                    run_index,
                    child_seed: child_seed(cfg.master_seed, &topo.name, model.as_str(), run_index),
                });
            }
        }
    }
    jobs
}

fn draw_endpoints(rng: &mut ChaCha8Rng, nodes: usize) -> (NodeId, NodeId) {
    let cn = rng.gen_range(0..nodes);
    let ha = loop {
        let v = rng.gen_range(0..nodes);
        if v != cn {
            break v;
        }
    };
    (cn, ha)
}

pub fn execute(
    cfg: &ScenarioConfig,
    topo: &LoadedTopology,
    job: RunJob,
) -> Result<RunOutput, CliError> {
    let violation = |detail: String| CliError::Invariant {
        topology: topo.name.clone(),
        model: job.model.to_string(),
        run: job.run_index,
        child_seed: job.child_seed,
        detail,
    };
    let nodes = topo.topology.nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(job.child_seed);
    let (cn, ha) = if cfg.redraw_endpoints_per_seed {
        draw_endpoints(&mut rng, nodes)
    } else {
        let seed = child_seed(cfg.master_seed, &topo.name, ENDPOINTS_LABEL, 0);
        draw_endpoints(&mut ChaCha8Rng::seed_from_u64(seed), nodes)
    };

    let model = MovementModel {
        kind: job.model,
        cluster_radius: cfg.cluster_radius,
    };
    let forbidden = BTreeSet::from([cn]);
    let mut attempt = 0;
    let trace = loop {
        let trace_seed = rng.next_u64();
        match generate_trace(
            &topo.topology,
            model,
            &forbidden,
            cfg.moves_per_run,
            trace_seed,
        ) {
            Ok(t) => break t,
            Err(MovementError::NoCandidate { .. }) if attempt + 1 < TRACE_ATTEMPTS => attempt += 1,
            Err(e) => return Err(violation(format!("trace generation: {e}"))),
        }
    };

    let samples =
        run_scenario(&topo.oracle, cn, ha, &trace).map_err(|e| violation(e.to_string()))?;
    check_samples(topo, cn, &trace, &samples).map_err(violation)?;
    let stats = run_stats(&samples).map_err(|e| violation(e.to_string()))?;
    Ok(RunOutput {
        job,
        topology: topo.name.clone(),
        topology_type: topo.topology_type.clone(),
        cn,
        ha,
        trace,
        samples,
        stats,
    })
}

/// Route-efficiency bound, link conservation and tree-path equality.
fn check_samples(
    topo: &LoadedTopology,
    cn: NodeId,
    trace: &MovementTrace,
    samples: &[StepSample],
) -> Result<(), String> {
    if samples.len() != trace.len() {
        return Err(format!(
            "{} samples for {} steps",
            samples.len(),
            trace.len()
        ));
    }
    let (mut added, mut removed) = (0u64, 0u64);
    for (s, &loc) in samples.iter().zip(&trace.steps) {
        let k = s.step_index;
        if loc == cn {
            return Err(format!("step {k} visits the CN"));
        }
        if s.a_hops + s.b_hops < s.c_hops {
            return Err(format!(
                "step {k}: a+b = {} < c = {}",
                s.a_hops + s.b_hops,
                s.c_hops
            ));
        }
        if s.c_hops != topo.oracle.hops(cn, loc) {
            return Err(format!(
                "step {k}: tree path {} differs from shortest path",
                s.c_hops
            ));
        }
        added += u64::from(s.added_links);
        removed += u64::from(s.removed_links);
        if added < removed || added - removed != u64::from(s.tree_links) {
            return Err(format!(
                "step {k}: added {added}, removed {removed}, tree has {} links",
                s.tree_links
            ));
        }
    }
    Ok(())
}

/// Runs every job on a pool of `workers` threads; results keep plan order.
pub fn run_all(
    cfg: &ScenarioConfig,
    topologies: &[LoadedTopology],
    workers: usize,
) -> Result<Vec<RunOutput>, CliError> {
    let jobs = plan(cfg, topologies);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&job| execute(cfg, &topologies[job.topology], job))
            .collect()
    })
}

/// Finds the job whose child seed is `seed`.
pub fn find_job(cfg: &ScenarioConfig, topologies: &[LoadedTopology], seed: u64) -> Option<RunJob> {
    plan(cfg, topologies)
        .into_iter()
        .find(|j| j.child_seed == seed)
}
