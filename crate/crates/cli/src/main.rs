use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "logsynth", version, about = "Fit, summarize and generate statistical log models")]
struct Cli {
    /// JSON file with `fit`, `generate` and `export` sections; missing keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice; overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (all cores when unset).
    #[arg(long, global = true, env = "LOGSYNTH_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one model per log of a dataset manifest.
    Fit {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Estimate model statistics from fitted log models (files or directories).
    Stats {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate synthetic logs from model statistics.
    Generate {
        #[arg(long)]
        stats: PathBuf,
        #[arg(short = 'n', long, default_value_t = 1)]
        count: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Render a log model into heightmap rasters and meshes.
    Reconstruct {
        model: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Leave the grain texture out of the rendered surface.
        #[arg(long)]
        no_grain: bool,
    },
    /// Check a log model or statistics file against its invariants.
    Validate { file: PathBuf },
}

fn exit_code(e: &logsynth::Error) -> u8 {
    use logsynth::Error::*;
    match e {
        Io { .. } => 3,
        Numeric(_) | Domain(_) | InsufficientData(_) => 4,
        Validation(_) | InvalidParameter(_) | EmptyInput(_) | Parse { .. } | Schema(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(4);
        }
    }
    let result = commands::load_config(cli.config.as_deref(), cli.seed).and_then(|cfg| match cli.command {
        Command::Fit { manifest, output } => commands::fit(&cfg, &manifest, &output),
        Command::Stats { models, output } => commands::stats(&models, &output),
        Command::Generate { stats, count, output } => commands::generate(&cfg, &stats, count, &output),
        Command::Reconstruct { model, output, no_grain } => commands::reconstruct(&cfg, &model, &output, !no_grain),
        Command::Validate { file } => commands::validate(&file),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
