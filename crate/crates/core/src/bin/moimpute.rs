use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use moimpute::data::{normalize, BuiltinDataset};
use moimpute::evo::EvoConfig;
use moimpute::harness::{
    aggregate, load_reports, run_experiment_with, run_matrix, write_aggregate_csv,
    write_summaries, DatasetSource, ExperimentConfig, MatrixSpec,
};
use moimpute::metrics::write_reports_csv;
use moimpute::missing::{generate_missing, write_mask_csv, MissingSpec, MissingType, Pattern, Situation};
use moimpute::objectives::Formulation;
use moimpute::{Error, Result};

#[derive(Parser)]
#[command(name = "moimpute", version, about = "Evolve imputation and SVM model selection on incomplete data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
    /// Run a grid of experiments, skipping cells finished earlier.
    Matrix(MatrixArgs),
    /// Generate a missing-value mask for a complete dataset.
    GenMissing(GenMissingArgs),
    /// Re-aggregate per-run reports into CSV summaries.
    Report(ReportArgs),
}

#[derive(Args, Clone, Default)]
struct EvoArgs {
    /// Population size [default: 54]
    #[arg(long)]
    population: Option<usize>,
    /// Maximum number of clusters [default: 10]
    #[arg(long)]
    max_clusters: Option<usize>,
    /// Crossover pool size [default: 8]
    #[arg(long)]
    pool_size: Option<usize>,
    /// Generation cap [default: 100]
    #[arg(long)]
    max_generations: Option<usize>,
    /// Stop when a population-mean objective changes less than this [default: 0.0005]
    #[arg(long)]
    threshold: Option<f64>,
}

impl EvoArgs {
    fn apply(&self, evo: &mut EvoConfig) {
        if let Some(v) = self.population {
            evo.population = v;
        }
        if let Some(v) = self.max_clusters {
            evo.max_clusters = v;
        }
        if let Some(v) = self.pool_size {
            evo.pool_size = v;
        }
        if let Some(v) = self.max_generations {
            evo.max_generations = v;
        }
        if let Some(v) = self.threshold {
            evo.threshold = v;
        }
    }
}

#[derive(Args, Clone)]
struct DatasetArgs {
    /// Built-in dataset name (iris, zoo, sonar) or a CSV path
    #[arg(long)]
    dataset: Option<String>,
    /// Label column of a CSV dataset
    #[arg(long, default_value = "class")]
    label_column: String,
    /// Columns of a CSV dataset to treat as categorical
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
}

impl DatasetArgs {
    fn source(&self) -> Option<DatasetSource> {
        let name = self.dataset.as_ref()?;
        Some(match name.parse::<BuiltinDataset>() {
            Ok(b) => b.into(),
            Err(_) => DatasetSource::Csv {
                path: PathBuf::from(name),
                label_column: self.label_column.clone(),
                categorical: self.categorical.clone(),
            },
        })
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetArgs,
    /// ASW, Correlation or VR [default: ASW]
    #[arg(long)]
    formulation: Option<Formulation>,
    /// Fraction of feature cells to mask [default: 0.05]
    #[arg(long)]
    ratio: Option<f64>,
    /// Simple, Medium or Complex [default: Simple]
    #[arg(long)]
    pattern: Option<Pattern>,
    /// Overall or UD [default: Overall]
    #[arg(long = "type")]
    mtype: Option<MissingType>,
    /// TestOnly or TrainAndTest [default: TestOnly]
    #[arg(long)]
    situation: Option<Situation>,
    /// Seed of the missing-value masks [default: 1]
    #[arg(long)]
    missing_seed: Option<u64>,
    /// Seed of the split and the optimizer [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of rows held out for testing [default: 0.3]
    #[arg(long)]
    test_fraction: Option<f64>,
    #[command(flatten)]
    evo: EvoArgs,
    /// Directory for the report, its CSV row and the generation log
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct MatrixArgs {
    /// TOML grid file; list flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in dataset names
    #[arg(long, value_delimiter = ',')]
    datasets: Vec<BuiltinDataset>,
    #[arg(long, value_delimiter = ',')]
    formulations: Vec<Formulation>,
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    patterns: Vec<Pattern>,
    #[arg(long, value_delimiter = ',')]
    types: Vec<MissingType>,
    #[arg(long, value_delimiter = ',')]
    situations: Vec<Situation>,
    /// Replicate seeds [default: 1,2,3,4,5]
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[command(flatten)]
    evo: EvoArgs,
    /// Grid cells run concurrently
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "matrix-out")]
    out: PathBuf,
}

#[derive(Args)]
struct GenMissingArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value_t = 0.05)]
    ratio: f64,
    #[arg(long, default_value = "Simple")]
    pattern: Pattern,
    #[arg(long = "type", default_value = "Overall")]
    mtype: MissingType,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Mask CSV of (row, column) pairs; a JSON sidecar is written next to it
    #[arg(long, default_value = "mask.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Matrix output directory or a directory of run reports
    dir: PathBuf,
    /// Where to write the CSV summaries [default: DIR]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run(args: RunArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::new(BuiltinDataset::Iris.into()),
    };
    if let Some(source) = args.dataset.source() {
        cfg.dataset = source;
    }
    let m = &mut cfg.missing;
    m.ratio = args.ratio.unwrap_or(m.ratio);
    m.pattern = args.pattern.unwrap_or(m.pattern);
    m.mtype = args.mtype.unwrap_or(m.mtype);
    m.situation = args.situation.unwrap_or(m.situation);
    m.seed = args.missing_seed.unwrap_or(m.seed);
    cfg.evo.formulation = args.formulation.unwrap_or(cfg.evo.formulation);
    cfg.evo.seed = args.seed.unwrap_or(cfg.evo.seed);
    cfg.test_fraction = args.test_fraction.unwrap_or(cfg.test_fraction);
    args.evo.apply(&mut cfg.evo);

    create_dir(&args.out)?;
    let id = cfg.run_id();
    let mut history = String::new();
    let outcome = run_experiment_with(&cfg, |g| {
        eprintln!(
            "generation {:>3}  imputation {:.4}  cv error {:.4}  front {:>2}  {:.1}s",
            g.generation, g.mean_imputation, g.mean_cv_error, g.front1_size, g.elapsed_seconds
        );
        history.push_str(&serde_json::to_string(g).unwrap_or_default());
        history.push('\n');
    });
    let report = outcome.report;
    let json = serde_json::to_string_pretty(&report)?;
    write_file(&args.out.join(format!("{id}.json")), json.as_bytes())?;
    write_file(&args.out.join(format!("{id}.history.jsonl")), history.as_bytes())?;
    write_file(&args.out.join(format!("{id}.toml")), cfg.to_toml()?.as_bytes())?;
    let mut csv = Vec::new();
    write_reports_csv(&mut csv, std::slice::from_ref(&report))?;
    write_file(&args.out.join(format!("{id}.csv")), &csv)?;
    println!("{json}");
    Ok(!report.failed)
}

fn matrix(args: MatrixArgs) -> Result<bool> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            MatrixSpec::from_toml(&text)?
        }
        None => MatrixSpec::default(),
    };
    if !args.datasets.is_empty() {
        spec.datasets = args.datasets.iter().map(|&b| b.into()).collect();
    }
    macro_rules! override_list {
        ($($field:ident),*) => {$(
            if !args.$field.is_empty() {
                spec.$field = args.$field.clone();
            }
        )*};
    }
    override_list!(formulations, ratios, patterns, types, situations, seeds);
    args.evo.apply(&mut spec.evo);

    let cells = spec.cells().len();
    eprintln!("{cells} runs, {} workers, output in {}", args.workers, args.out.display());
    let outcome = run_matrix(&spec, &args.out, args.workers)?;
    eprintln!(
        "{} runs ({} resumed), {} failed",
        outcome.reports.len(),
        outcome.skipped,
        outcome.failures
    );
    Ok(outcome.failures == 0)
}

#[derive(Serialize)]
struct MaskSidecar<'a> {
    dataset: String,
    rows: usize,
    columns: usize,
    masked_cells: usize,
    spec: &'a MissingSpec,
}

fn gen_missing(args: GenMissingArgs) -> Result<bool> {
    let source = args
        .dataset
        .source()
        .ok_or_else(|| Error::Config("--dataset is required".into()))?;
    let data = normalize(&source.load()?);
    let spec = MissingSpec {
        ratio: args.ratio,
        pattern: args.pattern,
        mtype: args.mtype,
        situation: Situation::TestOnly,
        seed: args.seed,
    };
    let masked = generate_missing(&data.base, &spec)?;
    let mut csv = Vec::new();
    write_mask_csv(&mut csv, &masked.mask)?;
    write_file(&args.out, &csv)?;
    let sidecar = MaskSidecar {
        dataset: source.name(),
        rows: masked.n_rows(),
        columns: masked.n_features(),
        masked_cells: masked.missing_count(),
        spec: &spec,
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    write_file(&args.out.with_extension("json"), json.as_bytes())?;
    println!("{json}");
    Ok(true)
}

fn report(args: ReportArgs) -> Result<bool> {
    let reports = load_reports(&args.dir)?;
    let out = args.out.unwrap_or_else(|| args.dir.clone());
    create_dir(&out)?;
    write_summaries(&out, &reports)?;
    write_aggregate_csv(std::io::stdout(), &aggregate(&reports))?;
    Ok(reports.iter().all(|r| !r.failed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Matrix(a) => matrix(a),
        Command::GenMissing(a) => gen_missing(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
