use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aetas::corpus::write_jsonl;
use aetas::synth::{generate, ground_truth, SynthSpec};
use aetas_cli::config::OUTPUT_DIR_ENV;
use aetas_cli::error::CliError;
use aetas_cli::manifest::write_atomic;
use aetas_cli::{CliResult, Outcome, Overrides, Pipeline, PipelineConfig, Stage};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "aetas", version, about = "Diachronic embedding drift pipeline")]
struct Cli {
    /// Overrides the training and split-half seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config file.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and normalize the corpus.
    Ingest(ConfigArgs),
    /// Group documents into merged decade bins.
    Bin(ConfigArgs),
    /// Train one SGNS space per bin.
    Train(ConfigArgs),
    /// Rotate every space onto the anchor.
    Align(ConfigArgs),
    /// Drift, neighbor overlap, pivot and norm baselines.
    Drift(ConfigArgs),
    /// Value-axis projections and leave-one-out bands.
    Axes(ConfigArgs),
    /// Split-half baselines, net drift and seed variance.
    Stability(ConfigArgs),
    /// Frequencies, frequency regression and trajectories.
    Stats(ConfigArgs),
    /// SVG charts from the stage tables.
    Report(ConfigArgs),
    /// Every stage in order, skipping fresh ones.
    RunAll(ConfigArgs),
    /// Write a synthetic corpus with planted drift.
    Synth {
        /// TOML spec; omitted fields take the desk-scale defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn pipeline(args: &ConfigArgs, seed: Option<u64>) -> CliResult<Pipeline> {
    let overrides = Overrides {
        output_dir: args.output_dir.clone(),
        seed,
    };
    Pipeline::new(PipelineConfig::load(&args.config, &overrides)?)
}

fn report(stage: Stage, outcome: Outcome) {
    match outcome {
        Outcome::Ran => println!("{}: done", stage.name()),
        Outcome::UpToDate => println!("{}: up to date", stage.name()),
    }
}

fn synth(spec: Option<&Path>, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let mut spec: SynthSpec = match spec {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.into(), source })?;
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => SynthSpec::default(),
    };
    if let Some(s) = seed {
        spec.rng_seed = s;
    }
    let docs = generate(&spec)?;
    let mut corpus = Vec::new();
    write_jsonl(&mut corpus, &docs)?;
    write_atomic(&out.join("corpus.jsonl"), &corpus)?;
    let truth = serde_json::to_string_pretty(&ground_truth(&spec)).map_err(|e| CliError::Core(e.into()))?;
    write_atomic(&out.join("ground_truth.json"), format!("{truth}\n").as_bytes())?;
    let mut targets = String::from("word,domain\n");
    for d in &spec.drift_words {
        targets.push_str(&format!("{},drift\n", d.word));
    }
    for c in &spec.control_words {
        targets.push_str(&format!("{},control\n", c.word));
    }
    write_atomic(&out.join("targets.csv"), targets.as_bytes())?;
    println!("wrote {} documents to {}", docs.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let stage = |s: Stage, args: &ConfigArgs| -> CliResult<()> {
        report(s, pipeline(args, cli.seed)?.run_stage(s)?);
        Ok(())
    };
    match &cli.command {
        Command::Ingest(a) => stage(Stage::Ingest, a),
        Command::Bin(a) => stage(Stage::Bin, a),
        Command::Train(a) => stage(Stage::Train, a),
        Command::Align(a) => stage(Stage::Align, a),
        Command::Drift(a) => stage(Stage::Drift, a),
        Command::Axes(a) => stage(Stage::Axes, a),
        Command::Stability(a) => stage(Stage::Stability, a),
        Command::Stats(a) => stage(Stage::Stats, a),
        Command::Report(a) => stage(Stage::Report, a),
        Command::RunAll(a) => {
            for (s, o) in pipeline(a, cli.seed)?.run_all()? {
                report(s, o);
            }
            Ok(())
        }
        Command::Synth { spec, out } => synth(spec.as_deref(), out, cli.seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
