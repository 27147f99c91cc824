//! Experiment front end for `mobisim`: scenario configs, parallel runs,
//! CSV reports, handoff sweeps and SVG charts.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod runner;
pub mod seeds;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use config::{LoadedTopology, ScenarioConfig, TopologySpec};
pub use error::CliError;
pub use report::SuiteReport;
pub use runner::RunOutput;

/// Runs the whole matrix and writes the report directory.
pub fn cmd_run(cfg: &ScenarioConfig, out: &Path, workers: usize) -> Result<SuiteReport, CliError> {
    let topologies = cfg.load_topologies()?;
    let runs = runner::run_all(cfg, &topologies, workers)?;
    let report = SuiteReport::build(runs, &topologies)?;
    report.write(out, cfg, &topologies)?;
    Ok(report)
}

/// Sweeps every move of every run through the packet-level simulator and
/// writes `handoff.csv`.
pub fn cmd_handoff(
    cfg: &ScenarioConfig,
    out: &Path,
    workers: usize,
) -> Result<Vec<sweep::HandoffRow>, CliError> {
    if cfg.handoff.is_none() {
        return Err(CliError::Config(
            "the handoff command needs a `handoff` block".into(),
        ));
    }
    let topologies = cfg.load_topologies()?;
    let runs = runner::run_all(cfg, &topologies, workers)?;
    let rows = sweep::sweep_all(cfg, &topologies, &runs, workers)?;
    report::write_file(&out.join("handoff.csv"), sweep::handoff_csv(&rows))?;
    Ok(rows)
}

pub fn cmd_plot(report_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    plot::plot_report(report_dir)
}

/// Re-executes the single run whose child seed is `seed`. With `out`, writes
/// its sample and trace CSVs under `out/replay`.
pub fn cmd_replay(
    cfg: &ScenarioConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let topologies = cfg.load_topologies()?;
    let job = runner::find_job(cfg, &topologies, seed)
        .ok_or_else(|| CliError::Config(format!("no run in this config has child seed {seed}")))?;
    let run = runner::execute(cfg, &topologies[job.topology], job)?;
    if let Some(dir) = out {
        let dir = dir.join("replay");
        let stem = run.file_stem();
        report::write_file(
            &dir.join(format!("{stem}.samples.csv")),
            mobisim::routing::samples_to_csv(&run.samples),
        )?;
        report::write_file(&dir.join(format!("{stem}.trace.csv")), run.trace.to_csv())?;
    }
    Ok(run)
}
