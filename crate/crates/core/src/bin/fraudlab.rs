use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fraudlab::dataset::{self, DEFAULT_LABEL_COLUMN};
use fraudlab::metrics::ReportFormat;
use fraudlab::pipeline::{
    self, InputSource, Manifest, PipelineConfig, StageSeeds, MANIFEST_FILE, OUT_DIR_ENV,
};
use fraudlab::{Error, Result};

/// Fraud-detection experiments on imbalanced transaction data.
#[derive(Parser)]
#[command(name = "fraudlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic imbalanced dataset as CSV.
    Generate(GenerateArgs),
    /// Summarise a dataset: shape, class balance, per-feature statistics.
    Inspect(InspectArgs),
    /// Run the full pipeline from a config file.
    Run(RunArgs),
    /// Re-render the model table from a run's manifest.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Take the synthetic spec and seed from this config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    positive_fraction: Option<f64>,
    #[arg(long)]
    features: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct InspectArgs {
    /// CSV file to inspect. Without it, the config's input is used.
    path: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    label: String,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output_dir and $FRAUDLAB_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the report printed to stdout.
    #[arg(long, default_value = "table", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct ReportArgs {
    /// Manifest file, or a run directory containing manifest.json.
    path: Option<PathBuf>,
    /// Run directory (alternative to PATH).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "table", value_parser = parse_format)]
    format: ReportFormat,
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut config = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if seed.is_some() {
        config.seed = seed;
    }
    Ok(config)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref(), args.seed)?;
    if let Some(n) = args.n {
        config.synthetic_n = n;
    }
    if let Some(pf) = args.positive_fraction {
        config.synthetic_positive_fraction = pf;
    }
    if let Some(d) = args.features {
        config.synthetic_features = d;
    }
    if let Some(sep) = args.separation {
        config.synthetic_separation = sep;
    }
    if let Some(noise) = args.noise {
        config.synthetic_noise = noise;
    }
    let label = args.label.unwrap_or_else(|| config.label_column.clone());
    let seed = config.require_seed()?;
    let data = dataset::generate_synthetic(
        &config.synthetic_spec(),
        StageSeeds::from_master(seed).generate,
    )?;
    dataset::write_csv(&data, &args.out, &label)?;
    let (neg, pos) = data.class_counts();
    eprintln!(
        "wrote {} rows ({neg} negatives, {pos} positives) to {}",
        data.n_rows(),
        args.out.display()
    );
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<()> {
    let data = match (&args.path, &args.config) {
        (Some(path), _) => dataset::load_csv(path, &args.label)?,
        (None, Some(cfg)) => {
            let config = load_config(Some(cfg), args.seed)?;
            let seed = match config.input {
                InputSource::Synthetic => config.require_seed()?,
                InputSource::Csv => config.seed.unwrap_or_default(),
            };
            pipeline::load_input(&config, &StageSeeds::from_master(seed))?.0
        }
        (None, None) => {
            return Err(Error::Config("inspect needs a CSV path or --config".into()));
        }
    };
    print!("{}", pipeline::inspect(&data));
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = load_config(Some(&args.config), args.seed)?;
    if let Some(out) = args.out {
        config.output_dir = out;
    } else if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        config.output_dir = PathBuf::from(dir);
    }
    let outcome = pipeline::run_pipeline(&config)?;
    print!(
        "{}",
        pipeline::render_from_manifest(&outcome.manifest, args.format)?
    );
    eprintln!("artifacts written to {}", outcome.output_dir.display());
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let target = args
        .path
        .or(args.out)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| Error::Config("report needs a manifest path or --out <dir>".into()))?;
    let path = if target.is_dir() {
        target.join(MANIFEST_FILE)
    } else {
        target
    };
    let manifest = Manifest::load(&path)?;
    print!(
        "{}",
        pipeline::render_from_manifest(&manifest, args.format)?
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Inspect(a) => inspect(a),
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
