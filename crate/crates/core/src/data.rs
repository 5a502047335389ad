//! Tabular datasets with an out-of-band missing-value mask.
//!
//! Features are held in an `n × m` matrix. Which cells are missing is decided
//! by the boolean mask alone; the storage under a masked cell is `NaN` so that
//! accidental arithmetic on it is loud, but no code path treats `NaN` as the
//! missing marker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MISSING_TOKENS: [&str; 3] = ["?", "NA", ""];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Affine map from the stored value back to original units:
/// `original = offset + span * stored`. A constant column has `span == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub offset: f64,
    pub span: f64,
}

impl Scale {
    pub const IDENTITY: Scale = Scale {
        offset: 0.0,
        span: 1.0,
    };

    pub fn to_original(&self, stored: f64) -> f64 {
        self.offset + self.span * stored
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Sorted category labels; a categorical value is stored as its index here.
    pub levels: Vec<String>,
    pub scale: Scale,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Numeric,
            levels: Vec::new(),
            scale: Scale::IDENTITY,
        }
    }

    /// Smallest observed value in original units (after normalization).
    pub fn original_min(&self) -> f64 {
        self.scale.to_original(0.0)
    }

    pub fn original_max(&self) -> f64 {
        if self.scale.span == 0.0 {
            self.scale.offset
        } else {
            self.scale.to_original(1.0)
        }
    }

    /// Maps a stored value back to original units; categorical values are
    /// rounded to the nearest level code.
    pub fn to_original(&self, stored: f64) -> f64 {
        let v = self.scale.to_original(stored);
        match self.kind {
            FeatureKind::Numeric => v,
            FeatureKind::Categorical => {
                let top = self.levels.len().saturating_sub(1) as f64;
                v.round().clamp(0.0, top)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub feature_specs: Vec<FeatureSpec>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_specs: Vec<FeatureSpec>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidData(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if feature_specs.len() != features.ncols() {
            return Err(Error::InvalidData(format!(
                "{} feature specs for {} columns",
                feature_specs.len(),
                features.ncols()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidData(format!("label {bad} has no class name")));
        }
        let distinct: BTreeSet<usize> = labels.iter().copied().collect();
        if distinct.len() < 2 {
            return Err(Error::InvalidData(
                "labels must contain at least 2 distinct classes".into(),
            ));
        }
        Ok(Dataset {
            features,
            labels,
            class_names,
            feature_specs,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// A dataset whose feature cells may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedDataset {
    pub base: Dataset,
    /// `true` marks a missing cell.
    pub mask: Array2<bool>,
    /// Erased values on masked cells (`NaN` elsewhere), present when the
    /// mask was generated from complete data.
    pub truth: Option<Array2<f64>>,
}

impl MaskedDataset {
    pub fn complete(base: Dataset) -> Self {
        let mask = Array2::from_elem(base.features.dim(), false);
        MaskedDataset {
            base,
            mask,
            truth: None,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.base.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.base.n_features()
    }

    pub fn labels(&self) -> &[usize] {
        &self.base.labels
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.base.features
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.mask[[row, col]]
    }

    pub fn missing_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Feature matrix with every masked cell restored from `truth`.
    pub fn ground_truth_features(&self) -> Option<Array2<f64>> {
        let truth = self.truth.as_ref()?;
        let mut out = self.base.features.clone();
        for ((idx, &missing), t) in self.mask.indexed_iter().zip(truth.iter()) {
            if missing {
                out[idx] = *t;
            }
        }
        Some(out)
    }

    /// Checks the structural invariants: truth defined exactly on masked
    /// cells and every row keeps at least one observed value.
    pub fn validate(&self) -> Result<()> {
        if self.mask.dim() != self.base.features.dim() {
            return Err(Error::InvalidData("mask shape differs from features".into()));
        }
        if let Some(truth) = &self.truth {
            for ((idx, &missing), t) in self.mask.indexed_iter().zip(truth.iter()) {
                if missing == t.is_nan() {
                    return Err(Error::InvalidData(format!(
                        "truth not aligned with mask at {idx:?}"
                    )));
                }
            }
        }
        if self.n_features() > 0 {
            for (i, row) in self.mask.axis_iter(Axis(0)).enumerate() {
                if row.iter().all(|&m| m) {
                    return Err(Error::InvalidData(format!("row {i} has no observed value")));
                }
            }
        }
        Ok(())
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> MaskedDataset {
        let base = Dataset {
            features: self.base.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.base.labels[r]).collect(),
            class_names: self.base.class_names.clone(),
            feature_specs: self.base.feature_specs.clone(),
        };
        MaskedDataset {
            base,
            mask: self.mask.select(Axis(0), rows),
            truth: self.truth.as_ref().map(|t| t.select(Axis(0), rows)),
        }
    }
}

/// Options for [`load_csv`] / [`read_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: String,
    pub missing_tokens: Vec<String>,
    /// Columns forced to categorical; columns with any non-numeric observed
    /// token are categorical regardless.
    pub categorical: Vec<String>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            missing_tokens: DEFAULT_MISSING_TOKENS.iter().map(|s| s.to_string()).collect(),
            categorical: Vec::new(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<MaskedDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, options)
}

pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<MaskedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_idx = header
        .iter()
        .position(|h| *h == options.label_column)
        .ok_or_else(|| {
            Error::InvalidData(format!("label column {:?} not found", options.label_column))
        })?;

    let is_missing = |tok: &str| options.missing_tokens.iter().any(|m| m == tok);
    let mut columns: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len() - 1];
    let mut raw_labels = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::InvalidData(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                record.len(),
                header.len()
            )));
        }
        let mut col = 0;
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                if is_missing(field) {
                    return Err(Error::InvalidData(format!(
                        "missing token in label column at row {}",
                        line + 1
                    )));
                }
                raw_labels.push(field.to_owned());
            } else {
                columns[col].push((!is_missing(field)).then(|| field.to_owned()));
                col += 1;
            }
        }
    }

    let n = raw_labels.len();
    let m = columns.len();
    let mut features = Array2::from_elem((n, m), f64::NAN);
    let mut mask = Array2::from_elem((n, m), false);
    let mut specs = Vec::with_capacity(m);
    let names = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.clone());

    for ((j, column), name) in columns.into_iter().enumerate().zip(names) {
        let observed = column.iter().flatten().count();
        if observed < 2 {
            return Err(Error::InvalidData(format!(
                "column {name:?} has {observed} observed values, need at least 2"
            )));
        }
        let numeric = column
            .iter()
            .flatten()
            .all(|tok| f64::from_str(tok).is_ok_and(f64::is_finite));
        let categorical = !numeric || options.categorical.iter().any(|c| *c == name);

        let spec = if categorical {
            let levels: Vec<String> = column
                .iter()
                .flatten()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let code: BTreeMap<&str, usize> = levels
                .iter()
                .enumerate()
                .map(|(k, l)| (l.as_str(), k))
                .collect();
            for (i, cell) in column.iter().enumerate() {
                match cell {
                    Some(tok) => features[[i, j]] = code[tok.as_str()] as f64,
                    None => mask[[i, j]] = true,
                }
            }
            FeatureSpec {
                name,
                kind: FeatureKind::Categorical,
                levels,
                scale: Scale::IDENTITY,
            }
        } else {
            for (i, cell) in column.iter().enumerate() {
                match cell {
                    Some(tok) => features[[i, j]] = tok.parse().expect("checked numeric"),
                    None => mask[[i, j]] = true,
                }
            }
            FeatureSpec::numeric(name)
        };
        specs.push(spec);
    }

    let class_names: Vec<String> = raw_labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels = raw_labels
        .iter()
        .map(|l| class_names.binary_search(l).expect("label is a class"))
        .collect();

    let base = Dataset::new(features, labels, class_names, specs)?;
    Ok(MaskedDataset {
        base,
        mask,
        truth: None,
    })
}

/// Min-max scales every column to `[0, 1]` using observed values only.
/// Constant columns map to 0.5. Masked cells are left untouched.
pub fn normalize(d: &MaskedDataset) -> MaskedDataset {
    let mut out = d.clone();
    for j in 0..d.n_features() {
        let (lo, hi) = d
            .base
            .features
            .column(j)
            .iter()
            .zip(d.mask.column(j))
            .filter(|(_, &missing)| !missing)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
                (lo.min(v), hi.max(v))
            });
        if !lo.is_finite() {
            continue;
        }
        let old = d.base.feature_specs[j].scale;
        let range = hi - lo;
        let new_scale = if range > 0.0 {
            Scale {
                offset: old.to_original(lo),
                span: old.span * range,
            }
        } else {
            Scale {
                offset: old.to_original(lo),
                span: 0.0,
            }
        };
        out.base.feature_specs[j].scale = new_scale;

        let map = |v: f64| if range > 0.0 { (v - lo) / range } else { 0.5 };
        for i in 0..d.n_rows() {
            if !d.mask[[i, j]] {
                out.base.features[[i, j]] = map(d.base.features[[i, j]]);
            }
            if let Some(truth) = out.truth.as_mut() {
                if d.mask[[i, j]] {
                    truth[[i, j]] = map(truth[[i, j]]);
                }
            }
        }
    }
    out
}

/// Stratified random split. Each class is shuffled with the seed and
/// `round(test_fraction · class size)` of its rows go to the test part; rows
/// keep their original relative order within each part.
pub fn split(
    d: &MaskedDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(MaskedDataset, MaskedDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} not in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..d.base.n_classes() {
        let mut rows: Vec<usize> = (0..d.n_rows())
            .filter(|&i| d.base.labels[i] == class)
            .collect();
        if rows.is_empty() {
            continue;
        }
        if rows.len() < 2 {
            return Err(Error::InvalidData(format!(
                "class {:?} has a single member and cannot appear in both parts",
                d.base.class_names[class]
            )));
        }
        rows.shuffle(&mut rng);
        let n_test = ((test_fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

/// Stacks `top` over `bottom` row-wise. Both must share the feature layout.
pub fn concat_rows(top: &MaskedDataset, bottom: &MaskedDataset) -> Result<MaskedDataset> {
    if top.n_features() != bottom.n_features() {
        return Err(Error::InvalidData("feature counts differ".into()));
    }
    let features = ndarray::concatenate(
        Axis(0),
        &[top.base.features.view(), bottom.base.features.view()],
    )
    .expect("same column count");
    let mask = ndarray::concatenate(Axis(0), &[top.mask.view(), bottom.mask.view()])
        .expect("same column count");
    let truth = match (&top.truth, &bottom.truth) {
        (None, None) => None,
        (a, b) => {
            let fill = |t: &Option<Array2<f64>>, rows: usize| {
                t.clone()
                    .unwrap_or_else(|| Array2::from_elem((rows, top.n_features()), f64::NAN))
            };
            let a = fill(a, top.n_rows());
            let b = fill(b, bottom.n_rows());
            Some(ndarray::concatenate(Axis(0), &[a.view(), b.view()]).expect("same column count"))
        }
    };
    let mut labels = top.base.labels.clone();
    labels.extend_from_slice(&bottom.base.labels);
    Ok(MaskedDataset {
        base: Dataset {
            features,
            labels,
            class_names: top.base.class_names.clone(),
            feature_specs: top.base.feature_specs.clone(),
        },
        mask,
        truth,
    })
}

/// The three reference datasets shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinDataset {
    Iris,
    Zoo,
    Sonar,
}

const IRIS_CSV: &str = include_str!("../data/iris.csv");
const ZOO_CSV: &str = include_str!("../data/zoo.csv");
const SONAR_CSV: &str = include_str!("../data/sonar.csv");

impl BuiltinDataset {
    pub const ALL: [BuiltinDataset; 3] = [
        BuiltinDataset::Iris,
        BuiltinDataset::Zoo,
        BuiltinDataset::Sonar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinDataset::Iris => "iris",
            BuiltinDataset::Zoo => "zoo",
            BuiltinDataset::Sonar => "sonar",
        }
    }

    /// Raw (unnormalized) dataset.
    pub fn load(self) -> Result<MaskedDataset> {
        let mut options = CsvOptions::new("class");
        let text = match self {
            BuiltinDataset::Iris => IRIS_CSV,
            BuiltinDataset::Sonar => SONAR_CSV,
            BuiltinDataset::Zoo => {
                // every attribute except the leg count is boolean
                options.categorical = ZOO_CSV
                    .lines()
                    .next()
                    .unwrap_or_default()
                    .split(',')
                    .filter(|c| *c != "legs" && *c != "class")
                    .map(str::to_owned)
                    .collect();
                ZOO_CSV
            }
        };
        read_csv(text.as_bytes(), &options)
    }
}

impl fmt::Display for BuiltinDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iris" => Ok(BuiltinDataset::Iris),
            "zoo" => Ok(BuiltinDataset::Zoo),
            "sonar" => Ok(BuiltinDataset::Sonar),
            other => Err(Error::Config(format!("unknown dataset {other:?}"))),
        }
    }
}
