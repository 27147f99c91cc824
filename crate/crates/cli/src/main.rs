use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mobisim_cli::{cmd_handoff, cmd_plot, cmd_replay, cmd_run, report, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "mobisim",
    version,
    about = "Multicast mobility vs Mobile IP simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides the config's `output_dir`.
    #[arg(long, env = "MOBISIM_OUT")]
    out: Option<PathBuf>,
    /// Concurrent runs.
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run every topology x model x seed and write the report.
    Run(Common),
    /// Packet-level handoff sweep over every move.
    Handoff(Common),
    /// Render SVG charts from a report directory.
    Plot {
        #[arg(long, env = "MOBISIM_OUT")]
        out: PathBuf,
    },
    /// Re-run the single run with the given child seed.
    Replay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        replay: u64,
        #[arg(long, env = "MOBISIM_OUT")]
        out: Option<PathBuf>,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(c) => {
            let cfg = ScenarioConfig::from_path(&c.config)?;
            let out = report::output_dir(c.out, &cfg);
            let rep = cmd_run(&cfg, &out, c.workers.max(1))?;
            println!(
                "{} runs -> {} (mean r {:.3})",
                rep.runs.len(),
                out.display(),
                rep.aggregate.overall_mean_r()
            );
        }
        Command::Handoff(c) => {
            let cfg = ScenarioConfig::from_path(&c.config)?;
            let out = report::output_dir(c.out, &cfg);
            let rows = cmd_handoff(&cfg, &out, c.workers.max(1))?;
            println!(
                "{} handoffs -> {}",
                rows.len(),
                out.join("handoff.csv").display()
            );
        }
        Command::Plot { out } => {
            for path in cmd_plot(&out)? {
                println!("{}", path.display());
            }
        }
        Command::Replay {
            config,
            replay,
            out,
        } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let run = cmd_replay(&cfg, replay, out.as_deref())?;
            print!("{}", mobisim::routing::samples_to_csv(&run.samples));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mobisim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
