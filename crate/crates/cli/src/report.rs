//! Report directory writer. Everything here runs on one thread, in plan
//! order, so a report is a pure function of its config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mobisim::metrics::{
    aggregate, reference, size_sensitivity, AggregateStats, SizePoint, SizeSensitivity,
};
use mobisim::routing::samples_to_csv;
use serde::Serialize;

use crate::config::{LoadedTopology, ScenarioConfig};
use crate::error::CliError;
use crate::runner::RunOutput;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed-precision float for stable CSV bytes.
pub fn num(v: f64) -> String {
    format!("{v:.6}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Builds CSV text from a header and rows of already formatted fields.
pub(crate) fn csv_text<R, S>(header: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<str>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    config_sha256: String,
    master_seed: u64,
    moves_per_run: usize,
    seeds_per_scenario: usize,
    redraw_endpoints_per_seed: bool,
    cluster_radius: usize,
    runs: usize,
    config: &'a ScenarioConfig,
}

/// Per-run results plus the aggregate tables derived from them.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub runs: Vec<RunOutput>,
    pub aggregate: AggregateStats,
    /// Keyed by (topology type, model); only types with at least 3 sizes.
    pub sizes: BTreeMap<(String, String), SizeSensitivity>,
}

impl SuiteReport {
    pub fn build(runs: Vec<RunOutput>, topologies: &[LoadedTopology]) -> Result<Self, CliError> {
        let records: Vec<_> = runs.iter().map(RunOutput::record).collect();
        let aggregate = aggregate(&records).map_err(|e| CliError::Config(e.to_string()))?;
        let nodes: BTreeMap<&str, usize> = topologies
            .iter()
            .map(|t| (t.name.as_str(), t.topology.nodes()))
            .collect();
        let mut points: BTreeMap<(String, String), Vec<SizePoint>> = BTreeMap::new();
        for t in &aggregate.per_topology {
            points
                .entry((t.topology_type.clone(), t.model.clone()))
                .or_default()
                .push(SizePoint {
                    nodes: nodes[t.topology.as_str()],
                    mean_r: t.mean_r,
                    mean_l: t.mean_l,
                });
        }
        let sizes = points
            .into_iter()
            .filter_map(|(k, p)| size_sensitivity(&p).ok().map(|s| (k, s)))
            .collect();
        Ok(SuiteReport {
            runs,
            aggregate,
            sizes,
        })
    }

    /// Mean `L` per movement model over every topology.
    pub fn mean_l_by_model(&self) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for t in &self.aggregate.per_topology {
            if let Some(l) = t.mean_l {
                let e = acc.entry(t.model.clone()).or_default();
                e.0 += l;
                e.1 += 1;
            }
        }
        acc.into_iter()
            .map(|(m, (s, n))| (m, s / n as f64))
            .collect()
    }

    pub fn write(
        &self,
        dir: &Path,
        cfg: &ScenarioConfig,
        topologies: &[LoadedTopology],
    ) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let provenance = Provenance {
            tool: "mobisim",
            version: TOOL_VERSION,
            config_sha256: cfg.digest(),
            master_seed: cfg.master_seed,
            moves_per_run: cfg.moves_per_run,
            seeds_per_scenario: cfg.seeds_per_scenario,
            redraw_endpoints_per_seed: cfg.redraw_endpoints_per_seed,
            cluster_radius: cfg.cluster_radius,
            runs: self.runs.len(),
            config: cfg,
        };
        let json = serde_json::to_string_pretty(&provenance).expect("provenance serializes");
        write_file(&dir.join("provenance.json"), json + "\n")?;

        write_file(
            &dir.join("topologies.csv"),
            csv_text(
                &["name", "type", "nodes", "links", "avg_degree"],
                topologies.iter().map(|t| {
                    vec![
                        t.name.clone(),
                        t.topology_type.clone(),
                        t.topology.nodes().to_string(),
                        t.topology.links().to_string(),
                        format!("{:.2}", t.topology.avg_degree()),
                    ]
                }),
            ),
        )?;

        for run in &self.runs {
            let stem = run.file_stem();
            write_file(
                &dir.join("samples").join(format!("{stem}.csv")),
                samples_to_csv(&run.samples),
            )?;
            write_file(
                &dir.join("traces").join(format!("{stem}.csv")),
                run.trace.to_csv(),
            )?;
        }
        write_file(&dir.join("runs.csv"), self.runs_csv())?;
        write_file(&dir.join("per_topology.csv"), self.per_topology_csv())?;
        write_file(&dir.join("aggregate.csv"), self.aggregate_csv())?;
        write_file(&dir.join("summary.csv"), self.summary_csv())?;
        write_file(&dir.join("size_sensitivity.csv"), self.sizes_csv())?;
        write_file(&dir.join("reference.csv"), self.reference_csv())?;
        Ok(())
    }

    pub fn runs_csv(&self) -> String {
        csv_text(
            &[
                "topology",
                "type",
                "model",
                "run",
                "child_seed",
                "cn",
                "ha",
                "trace_seed",
                "samples",
                "mean_r",
                "p90_r",
                "max_r",
                "mean_l",
                "p90_l",
                "max_l",
                "mean_b",
                "b_over_l",
                "total_ab",
                "total_c",
            ],
            self.runs.iter().map(|r| {
                let s = &r.stats;
                vec![
                    r.topology.clone(),
                    r.topology_type.clone(),
                    r.job.model.to_string(),
                    r.job.run_index.to_string(),
                    r.job.child_seed.to_string(),
                    r.cn.to_string(),
                    r.ha.to_string(),
                    r.trace.seed.to_string(),
                    s.samples.to_string(),
                    num(s.r.mean),
                    num(s.r.p90),
                    num(s.r.max),
                    opt(s.added.map(|a| a.mean)),
                    opt(s.added.map(|a| a.p90)),
                    opt(s.added.map(|a| a.max)),
                    opt(s.mean_b),
                    opt(s.b_over_l),
                    s.total_ab.to_string(),
                    s.total_c.to_string(),
                ]
            }),
        )
    }

    pub fn per_topology_csv(&self) -> String {
        csv_text(
            &[
                "topology", "type", "model", "runs", "mean_r", "p90_r", "max_r", "peak_r",
                "mean_l", "p90_l", "max_l", "mean_b", "b_over_l", "total_ab", "total_c",
            ],
            self.aggregate.per_topology.iter().map(|t| {
                vec![
                    t.topology.clone(),
                    t.topology_type.clone(),
                    t.model.clone(),
                    t.runs.to_string(),
                    num(t.mean_r),
                    num(t.p90_r),
                    num(t.max_r),
                    num(t.peak_r),
                    opt(t.mean_l),
                    opt(t.p90_l),
                    opt(t.max_l),
                    opt(t.mean_b),
                    opt(t.b_over_l),
                    num(t.total_ab),
                    num(t.total_c),
                ]
            }),
        )
    }

    pub fn aggregate_csv(&self) -> String {
        csv_text(
            &[
                "type",
                "model",
                "topologies",
                "runs",
                "mean_r",
                "p90_r",
                "max_r",
                "peak_r",
                "mean_l",
                "p90_l",
                "max_l",
                "b_over_l",
                "total_ab",
                "total_c",
                "bandwidth_ratio",
            ],
            self.aggregate.rows.iter().map(|a| {
                vec![
                    a.topology_type.clone(),
                    a.model.clone(),
                    a.topologies.to_string(),
                    a.runs.to_string(),
                    num(a.mean_r),
                    num(a.p90_r),
                    num(a.max_r),
                    num(a.peak_r),
                    opt(a.mean_l),
                    opt(a.p90_l),
                    opt(a.max_l),
                    opt(a.b_over_l),
                    num(a.total_ab),
                    num(a.total_c),
                    num(a.bandwidth_ratio()),
                ]
            }),
        )
    }

    /// One row per (topology, movement, metric); type-level rows use `*`.
    pub fn summary_csv(&self) -> String {
        let mut rows = Vec::new();
        for t in &self.aggregate.per_topology {
            let base = [t.topology.clone(), t.topology_type.clone(), t.model.clone()];
            let mut push = |metric: &str, mean: String, p90: String, max: String| {
                let mut row = base.to_vec();
                row.extend([metric.to_string(), mean, p90, max]);
                rows.push(row);
            };
            push("r", num(t.mean_r), num(t.p90_r), num(t.max_r));
            push("L", opt(t.mean_l), opt(t.p90_l), opt(t.max_l));
            push("B/L", opt(t.b_over_l), String::new(), String::new());
            push("total_ab", num(t.total_ab), String::new(), String::new());
            push("total_c", num(t.total_c), String::new(), String::new());
        }
        for a in &self.aggregate.rows {
            let base = ["*".to_string(), a.topology_type.clone(), a.model.clone()];
            let mut push = |metric: &str, mean: String, p90: String, max: String| {
                let mut row = base.to_vec();
                row.extend([metric.to_string(), mean, p90, max]);
                rows.push(row);
            };
            push("r", num(a.mean_r), num(a.p90_r), num(a.max_r));
            push("L", opt(a.mean_l), opt(a.p90_l), opt(a.max_l));
            push("B/L", opt(a.b_over_l), String::new(), String::new());
            push("total_ab", num(a.total_ab), String::new(), String::new());
            push("total_c", num(a.total_c), String::new(), String::new());
        }
        csv_text(
            &[
                "topology", "type", "movement", "metric", "mean", "p90", "max",
            ],
            rows,
        )
    }

    pub fn sizes_csv(&self) -> String {
        csv_text(
            &["type", "model", "sizes", "mean_r", "cv_r", "mean_l", "cv_l"],
            self.sizes.iter().map(|((ty, model), s)| {
                let sizes: Vec<String> = s.sizes.iter().map(usize::to_string).collect();
                vec![
                    ty.clone(),
                    model.clone(),
                    sizes.join(" "),
                    num(s.r.mean),
                    num(s.r.cv),
                    opt(s.l.map(|l| l.mean)),
                    opt(s.l.map(|l| l.cv)),
                ]
            }),
        )
    }

    /// Simulated values next to the published reference values. The
    /// references are annotations, not targets.
    pub fn reference_csv(&self) -> String {
        let agg = &self.aggregate;
        let by_model = self.mean_l_by_model();
        let rows = vec![
            ("mean_r", Some(agg.overall_mean_r()), reference::MEAN_R),
            ("mean_l", agg.overall_mean_l(), reference::MEAN_L),
            (
                "mean_l_neighbor",
                by_model.get("neighbor").copied(),
                reference::MEAN_L_NEIGHBOR,
            ),
            (
                "mean_l_cluster",
                by_model.get("cluster").copied(),
                reference::MEAN_L_CLUSTER,
            ),
            (
                "mean_l_random",
                by_model.get("random").copied(),
                reference::MEAN_L_RANDOM,
            ),
            ("b_over_l", agg.overall_b_over_l(), reference::B_OVER_L),
            (
                "bandwidth_ratio",
                Some(agg.overall_bandwidth_ratio()),
                reference::TOTAL_AB / reference::TOTAL_C,
            ),
        ];
        csv_text(
            &["metric", "simulated", "reference"],
            rows.into_iter()
                .map(|(m, s, r)| vec![m.to_string(), opt(s), num(r)]),
        )
    }
}

/// Output directory: explicit flag or env, then config, then `report`.
pub fn output_dir(flag: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("report"))
}
