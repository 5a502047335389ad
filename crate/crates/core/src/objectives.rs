//! Imputation objectives (silhouette, train/test correlation, variance
//! ratio) and the cross-validated model-selection objective.

use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::{cv_error, KernelSpec};

pub const CV_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "ASW")]
    Asw,
    Correlation,
    #[serde(rename = "VR")]
    Vr,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::Asw, Formulation::Correlation, Formulation::Vr];

    /// The value assigned when the imputation objective cannot be computed.
    pub fn worst(self) -> f64 {
        match self {
            Formulation::Asw | Formulation::Correlation => -1.0,
            Formulation::Vr => 0.0,
        }
    }

    /// Maps an objective value onto `[0, 1]`.
    pub fn unit_scale(self, value: f64) -> f64 {
        match self {
            Formulation::Asw | Formulation::Correlation => (value + 1.0) / 2.0,
            Formulation::Vr => value,
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Asw => "ASW",
            Formulation::Correlation => "Correlation",
            Formulation::Vr => "VR",
        })
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown formulation {s:?}")))
    }
}

/// Imputation value (maximized) and cross-validated error (minimized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePair {
    pub imputation_value: f64,
    pub cv_error: f64,
    pub formulation: Formulation,
}

/// Average silhouette width under Euclidean distance.
///
/// Singleton clusters score 0, as do points whose own-cluster and nearest
/// other-cluster mean distances are both 0. Fewer than two non-empty clusters
/// is an error.
pub fn asw(data: ArrayView2<f64>, assignment: &[usize]) -> Result<f64> {
    let n = data.nrows();
    assert_eq!(n, assignment.len());
    let n_labels = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; n_labels];
    assignment.iter().for_each(|&k| sizes[k] += 1);
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::DegenerateClustering(
            "silhouette needs at least two non-empty clusters".into(),
        ));
    }

    let rows: Vec<_> = data.axis_iter(Axis(0)).collect();
    let mut sums = vec![0.0; n_labels];
    let mut total = 0.0;
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                let d: f64 = rows[i]
                    .iter()
                    .zip(rows[j].iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                sums[assignment[j]] += d;
            }
        }
        let own = assignment[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..n_labels)
            .filter(|&k| k != own && sizes[k] > 0)
            .map(|k| sums[k] / sizes[k] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

pub fn row_sums(x: ArrayView2<f64>) -> Vec<f64> {
    x.axis_iter(Axis(0)).map(|r| r.sum()).collect()
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}

/// Linear interpolation of an ascending sequence at `len` evenly spaced
/// quantile positions.
pub fn resample_sorted(sorted: &[f64], len: usize) -> Vec<f64> {
    let last = sorted.len() - 1;
    if len == 1 {
        return vec![sorted[0]];
    }
    (0..len)
        .map(|i| {
            let pos = i as f64 * last as f64 / (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(last);
            let t = pos - lo as f64;
            sorted[lo] * (1.0 - t) + sorted[hi] * t
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Correlation between train and test imputations with unit weights.
///
/// With all-ones weights each side reduces to its per-row feature sums. The
/// two row-sum sequences are sorted, the shorter one is linearly
/// interpolated to the length of the longer, and the aligned pairs are
/// Pearson-correlated. Zero spread on either side yields 0.
pub fn correlation_obj(train: ArrayView2<f64>, test: ArrayView2<f64>) -> f64 {
    let mut a = row_sums(train);
    let mut b = row_sums(test);
    if a.len() < 2 || b.len() < 2 {
        return 0.0;
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let len = a.len().max(b.len());
    let a = if a.len() < len { resample_sorted(&a, len) } else { a };
    let b = if b.len() < len { resample_sorted(&b, len) } else { b };
    pearson(&a, &b)
}

/// `min(s_tr, s_te) / max(s_tr, s_te)` over the row-sum variances.
pub fn variance_ratio(train: ArrayView2<f64>, test: ArrayView2<f64>) -> f64 {
    let s_tr = sample_variance(&row_sums(train));
    let s_te = sample_variance(&row_sums(test));
    match (s_tr > 0.0, s_te > 0.0) {
        (false, false) => 1.0,
        (true, true) => s_tr.min(s_te) / s_tr.max(s_te),
        _ => 0.0,
    }
}

/// 10-fold cross-validated classification error on the imputed train rows.
pub fn model_selection_obj(
    imputed_train: ArrayView2<f64>,
    labels: &[usize],
    cost: f64,
    kernel: KernelSpec,
    seed: u64,
) -> Result<f64> {
    cv_error(imputed_train, labels, cost, kernel, CV_FOLDS, seed)
}
