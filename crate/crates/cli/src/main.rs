//! `pflicm` batch front end.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::bail;
use clap::{Args, Parser, Subcommand};
use pflicm::config::{Mode, RunConfig};
use pflicm::pipeline;

#[derive(Parser)]
#[command(name = "pflicm", version, about = "Texture segmentation with possibilistic fuzzy local-information c-means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one feature subset and write membership, typicality and product maps.
    Fit(Common),
    /// Greedy forward feature selection driven by the validity index.
    Select(Common),
    /// Score a parameter grid on a fixed subset.
    Grid(Common),
    /// Compare a subset against random subsets of the same size.
    Baseline(Common),
    /// Dump the standardized per-superpixel feature matrix.
    Features(Common),
    /// Run the mode named in the config (or a replayed manifest).
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input image; overrides the config.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base solver seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(common: &Common, mode: Option<Mode>) -> anyhow::Result<RunConfig> {
    let mut config = match (&common.config, &common.input) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(input)) => RunConfig::for_input(input, common.out.clone().unwrap_or_else(|| "out".into())),
        (None, None) => bail!("pass --config or --input"),
    };
    if let Some(input) = &common.input {
        config.input = Some(input.clone());
        config.scene = None;
    }
    if let Some(out) = &common.out {
        config.output = out.clone();
    }
    if let Some(seed) = common.seed {
        config.solver.seed = seed;
    }
    if let Some(mode) = mode {
        config.mode = mode;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, mode) = match &cli.command {
        Command::Fit(c) => (c, Some(Mode::Fit)),
        Command::Select(c) => (c, Some(Mode::Select)),
        Command::Grid(c) => (c, Some(Mode::Grid)),
        Command::Baseline(c) => (c, Some(Mode::Baseline)),
        Command::Features(c) => (c, Some(Mode::Features)),
        Command::Run(c) => (c, None),
    };
    let result = build_config(common, mode).and_then(|config| Ok(pipeline::run(&config)?));
    match result {
        Ok(report) => {
            println!(
                "{}: wrote {} files to {}",
                common_mode_name(&cli.command),
                report.files.len(),
                report.output.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn common_mode_name(command: &Command) -> &'static str {
    match command {
        Command::Fit(_) => "fit",
        Command::Select(_) => "select",
        Command::Grid(_) => "grid",
        Command::Baseline(_) => "baseline",
        Command::Features(_) => "features",
        Command::Run(_) => "run",
    }
}
