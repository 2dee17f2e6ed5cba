use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use flowseg_cli::{run_bench, run_detect, run_eval, run_synth, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "flowseg", version, about = "Moving-object detection from dense optical flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect foreground on every `*.flo` in a directory.
    Detect {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score predicted masks against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic flow sequence with ground truth.
    Synth {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time detection per frame and against RANSAC iterations.
    Bench {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect { flows, out, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let s = run_detect(&flows, &out, &cfg)?;
            println!("{} frames, {} failed", s.frames, s.failed.len());
        }
        Command::Eval { pred, gt, report, curve, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let s = run_eval(&pred, &gt, &report, &curve, &cfg)?;
            println!(
                "{} frames, F-measure {:.4}, pooled {:.4}",
                s.scores.len(),
                s.video_f_measure,
                s.pooled_f_measure
            );
        }
        Command::Synth { script, out } => {
            let n = run_synth(&script, &out)?;
            println!("{n} frames written to {}", out.display());
        }
        Command::Bench { flows, config, reps } => {
            let cfg = RunConfig::load(config.as_deref())?;
            println!("{}", run_bench(&flows, &cfg, reps)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
