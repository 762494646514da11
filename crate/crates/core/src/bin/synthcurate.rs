use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use synthcurate::pipeline::{PipelineConfig, PipelineError, Run, RunManifest};

#[derive(Parser)]
#[command(name = "synthcurate", version, about = "Curate LLM-generated training text")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "synthcurate.toml")]
    config: PathBuf,
    /// Override the alignment, resampling and evaluation seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the offline mock generator.
    #[arg(long, global = true)]
    mock: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Pick demonstration batches by posterior uncertainty.
    Sample,
    /// Summarise batches and generate synthetic samples.
    Generate,
    /// Fit per-sample weights on the synthetic corpus.
    Align,
    /// Draw the aligned synthetic corpus.
    Resample,
    /// Distances, vocabulary and coverage metrics.
    Evaluate,
    /// Coverage and alignment over the configured grid.
    Sweep,
    /// sample, generate, align, resample and evaluate in order.
    Pipeline,
    /// Re-hash the artifacts listed in the run manifest.
    Verify,
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let mut config = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    let mut run = Run::new(config);
    run.force_mock = cli.mock;
    match cli.command {
        Command::Sample => run.sample(),
        Command::Generate => run.generate(),
        Command::Align => run.align(),
        Command::Resample => run.resample(),
        Command::Evaluate => run.evaluate(),
        Command::Sweep => run.sweep(),
        Command::Pipeline => run.pipeline(),
        Command::Verify => RunManifest::load(run.out_dir())
            .and_then(|m| m.verify(run.out_dir()))
            .map_err(|e| PipelineError::Stage {
                stage: "verify",
                message: e.to_string(),
            }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("synthcurate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
