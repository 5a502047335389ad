//! Experiment orchestration: single runs, grids of runs with a resumable
//! on-disk manifest, and aggregation of per-run reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, normalize, split, BuiltinDataset, CsvOptions, MaskedDataset};
use crate::error::{Error, Result};
use crate::evo::{optimize_with, EvoConfig, GenerationRecord, Optimization, Problem};
use crate::metrics::{write_reports_csv, RunReport};
use crate::missing::{
    apply_situation, MissingSpec, MissingType, Pattern, Situation, CANONICAL_RATIOS,
};
use crate::mix_seed;
use crate::objectives::Formulation;

/// Where a run's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Builtin(BuiltinDataset),
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        categorical: Vec<String>,
    },
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Builtin(b) => b.name().to_string(),
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }

    pub fn load(&self) -> Result<MaskedDataset> {
        match self {
            DatasetSource::Builtin(b) => b.load(),
            DatasetSource::Csv {
                path,
                label_column,
                categorical,
            } => {
                let mut opts = CsvOptions::new(label_column.clone());
                opts.categorical = categorical.clone();
                load_csv(path, &opts)
            }
        }
    }
}

impl From<BuiltinDataset> for DatasetSource {
    fn from(b: BuiltinDataset) -> Self {
        DatasetSource::Builtin(b)
    }
}

/// One run: dataset, missing-value scenario and optimizer settings. The
/// formulation and run seed live in `evo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub missing: MissingSpec,
    #[serde(default)]
    pub evo: EvoConfig,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

fn default_test_fraction() -> f64 {
    0.3
}

pub const DEFAULT_MISSING: MissingSpec = MissingSpec {
    ratio: 0.05,
    pattern: Pattern::Simple,
    mtype: MissingType::Overall,
    situation: Situation::TestOnly,
    seed: 1,
};

impl ExperimentConfig {
    /// Defaults: 5% Simple Overall values missing from the test rows only,
    /// a 30% stratified test split and the default optimizer settings.
    pub fn new(dataset: DatasetSource) -> Self {
        ExperimentConfig {
            dataset,
            missing: DEFAULT_MISSING,
            evo: EvoConfig::default(),
            test_fraction: default_test_fraction(),
        }
    }

    /// Stable identifier used for file names and the manifest.
    pub fn run_id(&self) -> String {
        let m = &self.missing;
        format!(
            "{}_{}_r{}_{}_{}_{}_ms{}_s{}",
            self.dataset.name(),
            self.evo.formulation,
            m.ratio,
            m.pattern,
            m.mtype,
            m.situation,
            m.seed,
            self.evo.seed
        )
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A finished run: the report plus, when the optimizer ran, its full state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub problem: Option<Problem>,
    pub optimization: Option<Optimization>,
}

/// Load, normalize, split, mask, optimize and score. Errors are captured
/// in a failed report rather than returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> RunReport {
    run_experiment_with(cfg, |_| {}).report
}

/// [`run_experiment`] that streams generation records and keeps the
/// optimizer state.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    observer: impl FnMut(&GenerationRecord),
) -> RunOutcome {
    let name = cfg.dataset.name();
    match try_run(cfg, observer) {
        Ok((problem, run, elapsed)) => RunOutcome {
            report: RunReport::from_run(name, cfg.missing, cfg.evo, &problem, &run, elapsed),
            problem: Some(problem),
            optimization: Some(run),
        },
        Err(e) => RunOutcome {
            report: RunReport::failure(name, cfg.missing, cfg.evo, e),
            problem: None,
            optimization: None,
        },
    }
}

/// Normalized train/test pair with the scenario's missing cells applied.
pub fn prepare(cfg: &ExperimentConfig) -> Result<(MaskedDataset, MaskedDataset)> {
    let data = normalize(&cfg.dataset.load()?);
    if data.missing_count() > 0 {
        return Err(Error::InvalidData(
            "experiments mask complete data; the source already has missing cells".into(),
        ));
    }
    let (train, test) = split(&data, cfg.test_fraction, cfg.evo.seed)?;
    apply_situation(&train, &test, &cfg.missing)
}

fn try_run(
    cfg: &ExperimentConfig,
    observer: impl FnMut(&GenerationRecord),
) -> Result<(Problem, Optimization, f64)> {
    cfg.evo.validate()?;
    let (train, test) = prepare(cfg)?;
    let problem = Problem::new(&train, &test, cfg.evo.formulation, mix_seed(cfg.evo.seed, 3))?;
    let start = Instant::now();
    let run = optimize_with(&problem, &cfg.evo, observer)?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok((problem, run, elapsed))
}

/// A grid of runs: every combination of the listed values, once per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatrixSpec {
    pub datasets: Vec<DatasetSource>,
    pub formulations: Vec<Formulation>,
    pub ratios: Vec<f64>,
    pub patterns: Vec<Pattern>,
    pub types: Vec<MissingType>,
    pub situations: Vec<Situation>,
    /// Each seed drives the split, the masks and the optimizer of one
    /// replicate.
    pub seeds: Vec<u64>,
    /// Template for the optimizer; formulation and seed are overridden.
    pub evo: EvoConfig,
    pub test_fraction: f64,
}

impl Default for MatrixSpec {
    fn default() -> Self {
        MatrixSpec {
            datasets: BuiltinDataset::ALL.iter().map(|&b| b.into()).collect(),
            formulations: Formulation::ALL.to_vec(),
            ratios: CANONICAL_RATIOS.to_vec(),
            patterns: Pattern::ALL.to_vec(),
            types: MissingType::ALL.to_vec(),
            situations: Situation::ALL.to_vec(),
            seeds: (1..=5).collect(),
            evo: EvoConfig::default(),
            test_fraction: default_test_fraction(),
        }
    }
}

impl MatrixSpec {
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for dataset in &self.datasets {
            for &formulation in &self.formulations {
                for &ratio in &self.ratios {
                    for &pattern in &self.patterns {
                        for &mtype in &self.types {
                            for &situation in &self.situations {
                                for &seed in &self.seeds {
                                    out.push(ExperimentConfig {
                                        dataset: dataset.clone(),
                                        missing: MissingSpec {
                                            ratio,
                                            pattern,
                                            mtype,
                                            situation,
                                            seed,
                                        },
                                        evo: EvoConfig {
                                            formulation,
                                            seed,
                                            ..self.evo
                                        },
                                        test_fraction: self.test_fraction,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const RUNS_DIR: &str = "runs";
pub const REPORTS_FILE: &str = "reports.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    /// One report per grid cell, in grid order.
    pub reports: Vec<RunReport>,
    /// Cells already completed by an earlier invocation.
    pub skipped: usize,
    pub failures: usize,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(out_dir: &Path) -> Result<BTreeSet<String>> {
    let path = out_dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(BTreeSet::new());
    }
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    BufReader::new(file)
        .lines()
        .map(|l| l.map(|s| s.trim().to_string()).map_err(|e| Error::io(&path, e)))
        .filter(|l| l.as_ref().map_or(true, |s| !s.is_empty()))
        .collect()
}

fn read_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs every grid cell not yet listed in `out_dir`'s manifest, with at
/// most `workers` cells in flight. Each finished cell writes
/// `runs/<id>.json` and a `runs/<id>.history.jsonl` generation log, then
/// appends its id to the manifest. Afterwards the per-run CSV and the
/// aggregate CSV are rewritten from all reports.
pub fn run_matrix(spec: &MatrixSpec, out_dir: &Path, workers: usize) -> Result<MatrixOutcome> {
    let runs_dir = out_dir.join(RUNS_DIR);
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
    let done = read_manifest(out_dir)?;
    let cells = spec.cells();
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let manifest = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&manifest_path)
            .map_err(|e| Error::io(&manifest_path, e))?,
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let skipped = cells.iter().filter(|c| done.contains(&c.run_id())).count();
    let reports: Vec<Result<RunReport>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let id = cell.run_id();
                let report_path = runs_dir.join(format!("{id}.json"));
                if done.contains(&id) {
                    return read_report(&report_path);
                }
                let mut history = Vec::new();
                let outcome = run_experiment_with(cell, |g| {
                    history.extend(serde_json::to_vec(g).unwrap_or_default());
                    history.push(b'\n');
                });
                write_atomic(&runs_dir.join(format!("{id}.history.jsonl")), &history)?;
                let json = serde_json::to_vec_pretty(&outcome.report)?;
                write_atomic(&report_path, &json)?;
                let mut m = manifest.lock().expect("manifest lock");
                writeln!(m, "{id}").map_err(|e| Error::io(&manifest_path, e))?;
                m.flush().map_err(|e| Error::io(&manifest_path, e))?;
                Ok(outcome.report)
            })
            .collect()
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    write_summaries(out_dir, &reports)?;
    let failures = reports.iter().filter(|r| r.failed).count();
    Ok(MatrixOutcome {
        reports,
        skipped,
        failures,
    })
}

/// Writes `reports.csv` and `aggregate.csv` into `out_dir`.
pub fn write_summaries(out_dir: &Path, reports: &[RunReport]) -> Result<()> {
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, reports)?;
    write_atomic(&out_dir.join(REPORTS_FILE), &buf)?;
    let mut buf = Vec::new();
    write_aggregate_csv(&mut buf, &aggregate(reports))?;
    write_atomic(&out_dir.join(AGGREGATE_FILE), &buf)
}

/// Loads every `*.json` report under `dir` (or `dir/runs`), sorted by file
/// name.
pub fn load_reports(dir: &Path) -> Result<Vec<RunReport>> {
    let runs = dir.join(RUNS_DIR);
    let dir = if runs.is_dir() { runs } else { dir.to_path_buf() };
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_report(p)).collect()
}

/// Means over the runs of one category value within one situation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub category: String,
    pub sub_category: String,
    pub situation: Situation,
    pub runs: usize,
    pub failures: usize,
    pub mean_elapsed_seconds: f64,
    pub mean_front1_size: f64,
    pub mean_cv_error: f64,
    pub mean_error_difference: Option<f64>,
}

pub const AGGREGATE_COLUMNS: [&str; 9] = [
    "category",
    "sub_category",
    "situation",
    "runs",
    "failures",
    "mean_elapsed_seconds",
    "mean_front1_size",
    "mean_cv_error",
    "mean_error_difference",
];

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-situation means for every value of each category (dataset,
/// formulation, ratio, pattern, type). Failed runs are counted but left
/// out of the means.
pub fn aggregate(reports: &[RunReport]) -> Vec<AggregateRow> {
    type Key = fn(&RunReport) -> String;
    let categories: [(&str, Key); 5] = [
        ("dataset", |r| r.dataset.clone()),
        ("formulation", |r| r.formulation.to_string()),
        ("ratio", |r| r.missing.ratio.to_string()),
        ("pattern", |r| r.missing.pattern.to_string()),
        ("type", |r| r.missing.mtype.to_string()),
    ];
    let mut rows = Vec::new();
    for situation in Situation::ALL {
        for (category, key) in categories {
            let mut groups: BTreeMap<String, Vec<&RunReport>> = BTreeMap::new();
            for r in reports.iter().filter(|r| r.missing.situation == situation) {
                groups.entry(key(r)).or_default().push(r);
            }
            for (sub, members) in groups {
                let ok: Vec<&&RunReport> = members.iter().filter(|r| !r.failed).collect();
                rows.push(AggregateRow {
                    category: category.to_string(),
                    sub_category: sub,
                    situation,
                    runs: members.len(),
                    failures: members.len() - ok.len(),
                    mean_elapsed_seconds: mean(ok.iter().map(|r| r.elapsed_seconds))
                        .unwrap_or(f64::NAN),
                    mean_front1_size: mean(ok.iter().map(|r| r.front1_size as f64))
                        .unwrap_or(f64::NAN),
                    mean_cv_error: mean(
                        ok.iter().filter_map(|r| r.mean_objectives.map(|o| o.cv_error)),
                    )
                    .unwrap_or(f64::NAN),
                    mean_error_difference: mean(ok.iter().filter_map(|r| r.error_difference)),
                });
            }
        }
    }
    rows
}

pub fn write_aggregate_csv<W: Write>(writer: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(AGGREGATE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.category.clone(),
            r.sub_category.clone(),
            r.situation.to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
            r.mean_elapsed_seconds.to_string(),
            r.mean_front1_size.to_string(),
            r.mean_cv_error.to_string(),
            r.mean_error_difference.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
