//! Imputation accuracy, test errors, NMI between traces, hypervolume, and
//! the per-run report.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::MaskedDataset;
use crate::error::{Error, Result};
use crate::evo::{EvaluatedChromosome, EvoConfig, Optimization, Problem, StopReason};
use crate::missing::MissingSpec;
use crate::objectives::{Formulation, ObjectivePair};
use crate::svm::{train_multiclass, KernelSpec};

pub const NMI_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImputationAccuracy {
    pub mae: f64,
    pub rmse: f64,
}

/// MAE and RMSE over the masked cells of `d`, in normalized units. `None`
/// when nothing is masked or the erased values are unknown.
pub fn imputation_accuracy(imputed: &Array2<f64>, d: &MaskedDataset) -> Option<ImputationAccuracy> {
    let truth = d.truth.as_ref()?;
    let (mut abs, mut sq, mut count) = (0.0, 0.0, 0usize);
    for ((idx, &missing), t) in d.mask.indexed_iter().zip(truth.iter()) {
        if missing {
            let e = imputed[idx] - t;
            abs += e.abs();
            sq += e * e;
            count += 1;
        }
    }
    (count > 0).then(|| ImputationAccuracy {
        mae: abs / count as f64,
        rmse: (sq / count as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestErrors {
    pub complete: f64,
    pub imputed: f64,
}

fn error_rate(predicted: &[usize], truth: &[usize]) -> f64 {
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    wrong as f64 / truth.len() as f64
}

/// Trains on an imputed train matrix and scores both the complete and the
/// imputed test matrices.
pub fn chromosome_test_errors(
    train: ArrayView2<f64>,
    train_labels: &[usize],
    test_complete: ArrayView2<f64>,
    test_imputed: ArrayView2<f64>,
    test_labels: &[usize],
    cost: f64,
    kernel: KernelSpec,
) -> Result<TestErrors> {
    if test_labels.is_empty() {
        return Err(Error::InvalidData("empty test set".into()));
    }
    let model = train_multiclass(train, train_labels, cost, kernel)?;
    Ok(TestErrors {
        complete: error_rate(&model.predict(test_complete), test_labels),
        imputed: error_rate(&model.predict(test_imputed), test_labels),
    })
}

/// Front-averaged complete and imputed test errors.
pub fn test_errors(front1: &[&EvaluatedChromosome], problem: &Problem) -> Result<TestErrors> {
    let complete = problem
        .test_complete()
        .ok_or_else(|| Error::InvalidData("complete test features unknown".into()))?;
    let members: Vec<_> = front1.iter().filter(|e| !e.failed).collect();
    if members.is_empty() {
        return Err(Error::InvalidData("no successfully evaluated front member".into()));
    }
    let (mut c, mut i) = (0.0, 0.0);
    for e in &members {
        let imputed = e.imputed.as_ref().expect("evaluated member keeps its imputation");
        let errs = chromosome_test_errors(
            problem.train_rows(imputed),
            problem.train_labels(),
            complete,
            problem.test_rows(imputed),
            problem.test_labels(),
            e.chromosome.cost,
            e.chromosome.kernel_spec(),
        )?;
        c += errs.complete;
        i += errs.imputed;
    }
    let n = members.len() as f64;
    Ok(TestErrors {
        complete: c / n,
        imputed: i / n,
    })
}

/// Equal-frequency bin per value. Values are ranked and equal values share
/// the bin of their first occurrence.
fn equal_frequency_bins(x: &[f64], bins: usize) -> Vec<usize> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0; n];
    let mut first = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank > 0 && x[i] != x[order[rank - 1]] {
            first = rank;
        }
        out[i] = first * bins / n;
    }
    out
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(X;Y) / sqrt(H(X) H(Y))` after
/// equal-frequency discretization into `bins` bins. Constant input gives 0.
pub fn nmi(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidData("NMI sequences differ in length".into()));
    }
    if bins < 1 || x.len() < bins {
        return Err(Error::InvalidData(format!(
            "NMI needs at least {bins} values, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let bx = equal_frequency_bins(x, bins);
    let by = equal_frequency_bins(y, bins);
    let mut joint = vec![0usize; bins * bins];
    let mut cx = vec![0usize; bins];
    let mut cy = vec![0usize; bins];
    for (&a, &b) in bx.iter().zip(&by) {
        joint[a * bins + b] += 1;
        cx[a] += 1;
        cy[b] += 1;
    }
    let (hx, hy) = (entropy(&cx, n), entropy(&cy, n));
    if hx <= 0.0 || hy <= 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (cx[a] as f64 * cy[b] as f64)).ln();
            }
        }
    }
    Ok((mi / (hx * hy).sqrt()).clamp(0.0, 1.0))
}

/// Area of the unit square dominated by the front, after mapping the
/// imputation value onto `[0, 1]` and the error to `1 − cv_error`, with the
/// reference point at the origin.
pub fn hypervolume(front: &[ObjectivePair], formulation: Formulation) -> f64 {
    let mut pts: Vec<(f64, f64)> = front
        .iter()
        .map(|p| {
            (
                formulation.unit_scale(p.imputation_value).clamp(0.0, 1.0),
                (1.0 - p.cv_error).clamp(0.0, 1.0),
            )
        })
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut top = 0.0;
    let mut area = 0.0;
    for (x, y) in pts {
        if y > top {
            area += x * (y - top);
            top = y;
        }
    }
    area
}

/// Everything recorded about one run, including an echo of its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub formulation: Formulation,
    pub missing: MissingSpec,
    pub evo: EvoConfig,
    pub failed: bool,
    pub error: Option<String>,
    /// Optimizer wall time, millisecond resolution.
    pub elapsed_seconds: f64,
    pub generations: usize,
    pub stop_reason: Option<StopReason>,
    pub front1_size: usize,
    /// Front-1 means.
    pub mean_objectives: Option<ObjectivePair>,
    pub hypervolume: Option<f64>,
    pub imputed_test_error: Option<f64>,
    pub complete_test_error: Option<f64>,
    pub error_difference: Option<f64>,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub nmi_imputation: Option<f64>,
    pub nmi_model: Option<f64>,
}

/// Column order of [`RunReport::csv_record`].
pub const REPORT_COLUMNS: [&str; 27] = [
    "dataset",
    "formulation",
    "ratio",
    "pattern",
    "type",
    "situation",
    "missing_seed",
    "population",
    "max_clusters",
    "pool_size",
    "max_generations",
    "threshold",
    "seed",
    "failed",
    "elapsed_seconds",
    "generations",
    "front1_size",
    "mean_imputation",
    "mean_cv_error",
    "hypervolume",
    "imputed_test_error",
    "complete_test_error",
    "error_difference",
    "mae",
    "rmse",
    "nmi_imputation",
    "nmi_model",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunReport {
    /// A report for a run that did not produce results.
    pub fn failure(
        dataset: impl Into<String>,
        missing: MissingSpec,
        evo: EvoConfig,
        error: impl ToString,
    ) -> RunReport {
        RunReport {
            dataset: dataset.into(),
            formulation: evo.formulation,
            missing,
            evo,
            failed: true,
            error: Some(error.to_string()),
            elapsed_seconds: 0.0,
            generations: 0,
            stop_reason: None,
            front1_size: 0,
            mean_objectives: None,
            hypervolume: None,
            imputed_test_error: None,
            complete_test_error: None,
            error_difference: None,
            mae: None,
            rmse: None,
            nmi_imputation: None,
            nmi_model: None,
        }
    }

    /// Scores a finished optimization.
    pub fn from_run(
        dataset: impl Into<String>,
        missing: MissingSpec,
        evo: EvoConfig,
        problem: &Problem,
        run: &Optimization,
        elapsed_seconds: f64,
    ) -> RunReport {
        let front = run.front1();
        let n = front.len() as f64;
        let formulation = evo.formulation;
        let objectives: Vec<ObjectivePair> = front.iter().map(|e| e.objectives).collect();
        let mean_objectives = ObjectivePair {
            imputation_value: objectives.iter().map(|o| o.imputation_value).sum::<f64>() / n,
            cv_error: objectives.iter().map(|o| o.cv_error).sum::<f64>() / n,
            formulation,
        };
        let errors = test_errors(&front, problem).ok();
        let ok: Vec<_> = front.iter().filter(|e| !e.failed).collect();
        let mean_of = |f: &dyn Fn(&EvaluatedChromosome) -> Option<f64>| {
            let v: Vec<f64> = ok.iter().filter_map(|e| f(e)).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let mae = mean_of(&|e| e.diagnostics.mae);
        let rmse = mean_of(&|e| e.diagnostics.rmse);

        let paired = |f: &dyn Fn(&crate::evo::TraceRecord) -> Option<(f64, f64)>| {
            let (a, b): (Vec<f64>, Vec<f64>) = run.trace.iter().filter_map(f).unzip();
            nmi(&a, &b, NMI_BINS).ok()
        };
        let nmi_imputation = paired(&|t| t.diagnostics.rmse.map(|r| (t.imputation_value, r)));
        let nmi_model =
            paired(&|t| t.diagnostics.complete_test_error.map(|c| (t.cv_error, c)));

        RunReport {
            dataset: dataset.into(),
            formulation,
            missing,
            evo,
            failed: false,
            error: None,
            elapsed_seconds: (elapsed_seconds * 1000.0).round() / 1000.0,
            generations: run.generations(),
            stop_reason: Some(run.stop_reason),
            front1_size: front.len(),
            mean_objectives: Some(mean_objectives),
            hypervolume: Some(hypervolume(&objectives, formulation)),
            imputed_test_error: errors.map(|e| e.imputed),
            complete_test_error: errors.map(|e| e.complete),
            error_difference: errors.map(|e| e.imputed - e.complete),
            mae,
            rmse,
            nmi_imputation,
            nmi_model,
        }
    }

    /// One CSV row in [`REPORT_COLUMNS`] order; absent values are empty.
    pub fn csv_record(&self) -> Vec<String> {
        let m = &self.missing;
        let e = &self.evo;
        vec![
            self.dataset.clone(),
            self.formulation.to_string(),
            m.ratio.to_string(),
            m.pattern.to_string(),
            m.mtype.to_string(),
            m.situation.to_string(),
            m.seed.to_string(),
            e.population.to_string(),
            e.max_clusters.to_string(),
            e.pool_size.to_string(),
            e.max_generations.to_string(),
            e.threshold.to_string(),
            e.seed.to_string(),
            self.failed.to_string(),
            self.elapsed_seconds.to_string(),
            self.generations.to_string(),
            self.front1_size.to_string(),
            opt(self.mean_objectives.map(|o| o.imputation_value)),
            opt(self.mean_objectives.map(|o| o.cv_error)),
            opt(self.hypervolume),
            opt(self.imputed_test_error),
            opt(self.complete_test_error),
            opt(self.error_difference),
            opt(self.mae),
            opt(self.rmse),
            opt(self.nmi_imputation),
            opt(self.nmi_model),
        ]
    }

    /// JSON with the elapsed time zeroed, for reproducibility comparisons.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.elapsed_seconds = 0.0;
        Ok(serde_json::to_string_pretty(&copy)?)
    }
}

/// Writes a header and one row per report.
pub fn write_reports_csv<W: Write>(writer: W, reports: &[RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
