use std::path::PathBuf;
use std::process::ExitCode;

use anosov_cli::{emit_plot, run_config, PlotKind, RunOverrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "anosov",
    version,
    about = "Check Anosov-type properties of matrix-generated free groups"
)]
struct Cli {
    /// Worker threads for the checkers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for reports and plots.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checkers of an experiment config.
    Run {
        config: PathBuf,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plot a report written by `run`.
    Plot {
        report: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.command {
        Command::Run { config, seed } => {
            let outcome = run_config(
                &config,
                &RunOverrides {
                    seed,
                    out_dir: cli.out_dir,
                },
            );
            if let Some(msg) = &outcome.message {
                eprintln!("{msg}");
            }
            if let Some(summary) = &outcome.summary {
                for name in ["uru", "morse", "limit", "anosov"] {
                    if let Some(c) = summary.checkers.get(name) {
                        println!("{name}: {:?}", c.verdict);
                    }
                }
                for (name, e) in &summary.errors {
                    println!("{name}: error: {e}");
                }
                println!("reports written to {}", outcome.out_dir.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Command::Plot { report, kind } => {
            let out_dir = cli
                .out_dir
                .unwrap_or_else(|| report.parent().map(PathBuf::from).unwrap_or_default());
            match emit_plot(&report, kind, &out_dir) {
                Ok((csv, svg)) => {
                    println!("{}\n{}", csv.display(), svg.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
