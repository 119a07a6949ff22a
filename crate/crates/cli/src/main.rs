//! `gamma-rbm` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

mod commands;
mod settings;

use settings::Flags;

#[derive(Debug, Parser)]
#[command(
    name = "gamma-rbm",
    version,
    about = "Train and evaluate RBMs on amplitude spectrograms"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a spectrogram cache from WAV files or synthetic clips.
    #[command(group(ArgGroup::new("source").required(true).args(["wav_dir", "synth_clips"])))]
    Prepare {
        /// Output cache file.
        out: PathBuf,
        /// Directory of `.wav` files, read in name order.
        #[arg(long)]
        wav_dir: Option<PathBuf>,
        /// Number of synthetic clips to generate instead of reading files.
        #[arg(long)]
        synth_clips: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        synth_seconds: f64,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
    },
    /// Train one model per `--hidden` value on a cache.
    Train {
        cache: PathBuf,
        /// Checkpoint output; with several `--hidden` values a `-j<J>` suffix is added.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Per-epoch metrics output (CSV); suffixed like the checkpoint.
        #[arg(long)]
        metrics: PathBuf,
    },
    /// Score a checkpoint on a cache.
    Evaluate {
        checkpoint: PathBuf,
        cache: PathBuf,
        /// Report output (CSV); defaults to the checkpoint path with `.eval.csv`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Resynthesize a WAV file through a model, keeping the original phase.
    Reconstruct {
        checkpoint: PathBuf,
        wav_in: PathBuf,
        wav_out: PathBuf,
    },
    /// Write a synthetic speech-like WAV file.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        seconds: f64,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings::Settings::resolve(&cli.flags).and_then(|s| match cli.command {
        Command::Prepare {
            out,
            wav_dir,
            synth_clips,
            synth_seconds,
            sample_rate,
        } => {
            let source = match (wav_dir, synth_clips) {
                (Some(dir), _) => commands::Source::WavDir(dir),
                (None, Some(clips)) => commands::Source::Synth {
                    clips,
                    seconds: synth_seconds,
                    sample_rate,
                },
                (None, None) => unreachable!("clap enforces the source group"),
            };
            commands::prepare(&s, &source, &out)
        }
        Command::Train {
            cache,
            checkpoint,
            metrics,
        } => commands::train(&s, &cache, &checkpoint, &metrics),
        Command::Evaluate {
            checkpoint,
            cache,
            report,
        } => commands::evaluate(&s, &checkpoint, &cache, report.as_deref()),
        Command::Reconstruct {
            checkpoint,
            wav_in,
            wav_out,
        } => commands::reconstruct(&s, &checkpoint, &wav_in, &wav_out),
        Command::Synth {
            out,
            seconds,
            sample_rate,
        } => commands::synth(&s, &out, seconds, sample_rate),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
