//! Reproducible MCAR mask generation over the ratio × pattern × type grid.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MaskedDataset};
use crate::error::{Error, Result};
use crate::mix_seed;

pub const CANONICAL_RATIOS: [f64; 5] = [0.01, 0.05, 0.10, 0.25, 0.50];

/// Bounds on how many cells of an affected row may be missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    /// Exactly one missing cell per affected row.
    Simple,
    /// Between 2 and half of the features.
    Medium,
    /// Between half and 80% of the features.
    Complex,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Simple, Pattern::Medium, Pattern::Complex];

    /// Inclusive per-row count range for `m` features.
    pub fn row_range(self, m: usize) -> Result<(usize, usize)> {
        let half_up = m.div_ceil(2);
        let (lo, hi) = match self {
            Pattern::Simple => (1, 1),
            Pattern::Medium => (2, half_up),
            Pattern::Complex => (half_up, (m * 4) / 5),
        };
        // two features leave Complex indistinguishable from Simple
        let too_narrow = self == Pattern::Complex && m < 3;
        if m < 2 || too_narrow || lo > hi || hi >= m {
            return Err(Error::InfeasibleMissing(format!(
                "{self} pattern has no valid per-row count with {m} features"
            )));
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MissingType {
    /// Cells placed uniformly at random within each affected row.
    Overall,
    /// Per-feature missing counts differ by at most one.
    #[serde(rename = "UD")]
    Ud,
}

impl MissingType {
    pub const ALL: [MissingType; 2] = [MissingType::Overall, MissingType::Ud];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Situation {
    TestOnly,
    TrainAndTest,
}

impl Situation {
    pub const ALL: [Situation; 2] = [Situation::TestOnly, Situation::TrainAndTest];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingSpec {
    pub ratio: f64,
    pub pattern: Pattern,
    #[serde(rename = "type")]
    pub mtype: MissingType,
    pub situation: Situation,
    pub seed: u64,
}

impl MissingSpec {
    /// The 30 ratio × pattern × type combinations for one situation.
    pub fn grid(situation: Situation, seed: u64) -> Vec<MissingSpec> {
        let mut out = Vec::with_capacity(30);
        for &ratio in &CANONICAL_RATIOS {
            for pattern in Pattern::ALL {
                for mtype in MissingType::ALL {
                    out.push(MissingSpec {
                        ratio,
                        pattern,
                        mtype,
                        situation,
                        seed,
                    });
                }
            }
        }
        out
    }

    /// `⌊ratio · cells⌋`, robust to the representation error of the ratio.
    pub fn budget(&self, cells: usize) -> usize {
        (self.ratio * cells as f64 + 1e-9).floor() as usize
    }
}

/// Masks exactly `⌊ratio·n·m⌋` cells of a complete dataset.
///
/// Affected rows are drawn without replacement and each receives a count
/// drawn uniformly from the pattern's range; the last row is truncated to
/// fit the budget. When every row has been drawn and budget remains, rows
/// are topped up round-robin up to the pattern's upper bound.
pub fn generate_missing(complete: &Dataset, spec: &MissingSpec) -> Result<MaskedDataset> {
    if !(0.0..1.0).contains(&spec.ratio) {
        return Err(Error::InfeasibleMissing(format!(
            "ratio {} not in [0, 1)",
            spec.ratio
        )));
    }
    if complete.features.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidData("dataset already has missing cells".into()));
    }
    let (n, m) = complete.features.dim();
    let budget = spec.budget(n * m);
    let mut mask = Array2::from_elem((n, m), false);
    if budget > 0 {
        let (lo, hi) = spec.pattern.row_range(m)?;
        if budget > n * hi {
            return Err(Error::InfeasibleMissing(format!(
                "{budget} cells requested but the {} pattern allows at most {} on {n} rows",
                spec.pattern,
                n * hi
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let counts = row_counts(n, budget, lo, hi, &mut rng);
        match spec.mtype {
            MissingType::Overall => place_overall(&mut mask, &counts, &mut rng),
            MissingType::Ud => place_uniform(&mut mask, &counts, budget, &mut rng)?,
        }
    }

    let mut features = complete.features.clone();
    let mut truth = Array2::from_elem((n, m), f64::NAN);
    for ((idx, &missing), v) in mask.indexed_iter().zip(features.iter_mut()) {
        if missing {
            truth[idx] = *v;
            *v = f64::NAN;
        }
    }
    let out = MaskedDataset {
        base: Dataset {
            features,
            ..complete.clone()
        },
        mask,
        truth: Some(truth),
    };
    out.validate()?;
    Ok(out)
}

fn row_counts(n: usize, budget: usize, lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut counts = vec![0; n];
    let mut remaining = budget;
    let mut affected = Vec::new();
    for &row in &order {
        if remaining == 0 {
            break;
        }
        let c = rng.random_range(lo..=hi).min(remaining);
        counts[row] = c;
        remaining -= c;
        affected.push(row);
    }
    while remaining > 0 {
        for &row in &affected {
            if remaining == 0 {
                break;
            }
            if counts[row] < hi {
                counts[row] += 1;
                remaining -= 1;
            }
        }
    }
    counts
}

fn place_overall(mask: &mut Array2<bool>, counts: &[usize], rng: &mut ChaCha8Rng) {
    let m = mask.ncols();
    for (row, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for col in index::sample(rng, m, c) {
            mask[[row, col]] = true;
        }
    }
}

/// Realizes the row counts against near-equal column targets: the budget is
/// dealt round-robin over features (the remainder going to random features),
/// then rows are filled largest-first from the features with the most
/// outstanding demand, breaking ties at random.
fn place_uniform(
    mask: &mut Array2<bool>,
    counts: &[usize],
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let m = mask.ncols();
    let mut demand = vec![budget / m; m];
    let mut cols: Vec<usize> = (0..m).collect();
    cols.shuffle(rng);
    for &c in cols.iter().take(budget % m) {
        demand[c] += 1;
    }

    let mut rows: Vec<usize> = (0..counts.len()).filter(|&r| counts[r] > 0).collect();
    rows.shuffle(rng);
    rows.sort_by_key(|&r| std::cmp::Reverse(counts[r]));
    for row in rows {
        cols.shuffle(rng);
        cols.sort_by_key(|&c| std::cmp::Reverse(demand[c]));
        for &col in cols.iter().take(counts[row]) {
            if demand[col] == 0 {
                return Err(Error::InfeasibleMissing(
                    "row counts cannot be spread uniformly over features".into(),
                ));
            }
            demand[col] -= 1;
            mask[[row, col]] = true;
        }
    }
    Ok(())
}

/// Generates masks for a complete train/test pair according to the
/// situation. The test mask uses the same derived seed in both situations.
pub fn apply_situation(
    train: &MaskedDataset,
    test: &MaskedDataset,
    spec: &MissingSpec,
) -> Result<(MaskedDataset, MaskedDataset)> {
    if train.missing_count() > 0 || test.missing_count() > 0 {
        return Err(Error::InvalidData(
            "situations are applied to complete data only".into(),
        ));
    }
    let test_spec = MissingSpec {
        seed: mix_seed(spec.seed, 2),
        ..*spec
    };
    let test_out = generate_missing(&test.base, &test_spec)?;
    let train_out = match spec.situation {
        Situation::TestOnly => train.clone(),
        Situation::TrainAndTest => {
            let train_spec = MissingSpec {
                seed: mix_seed(spec.seed, 1),
                ..*spec
            };
            generate_missing(&train.base, &train_spec)?
        }
    };
    Ok((train_out, test_out))
}

/// Writes the masked cells as `row,column` pairs.
pub fn write_mask_csv<W: Write>(writer: W, mask: &Array2<bool>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "column"])?;
    for ((i, j), &missing) in mask.indexed_iter() {
        if missing {
            w.write_record([i.to_string(), j.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<mask csv>", e))?;
    Ok(())
}

pub fn read_mask_csv<R: Read>(reader: R, rows: usize, cols: usize) -> Result<Array2<bool>> {
    let mut mask = Array2::from_elem((rows, cols), false);
    let mut rdr = csv::Reader::from_reader(reader);
    for record in rdr.records() {
        let record = record?;
        let parse = |k: usize| -> Result<usize> {
            record
                .get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidData(format!("bad mask record {record:?}")))
        };
        let (i, j) = (parse(0)?, parse(1)?);
        if i >= rows || j >= cols {
            return Err(Error::InvalidData(format!("mask cell ({i}, {j}) out of range")));
        }
        mask[[i, j]] = true;
    }
    Ok(mask)
}

/// Re-applies a stored mask to complete data, recording the erased values.
pub fn apply_mask(complete: &Dataset, mask: Array2<bool>) -> Result<MaskedDataset> {
    if mask.dim() != complete.features.dim() {
        return Err(Error::InvalidData("mask shape differs from dataset".into()));
    }
    let mut features = complete.features.clone();
    let mut truth = Array2::from_elem(mask.dim(), f64::NAN);
    for ((idx, &missing), v) in mask.indexed_iter().zip(features.iter_mut()) {
        if missing {
            truth[idx] = *v;
            *v = f64::NAN;
        }
    }
    let out = MaskedDataset {
        base: Dataset {
            features,
            ..complete.clone()
        },
        mask,
        truth: Some(truth),
    };
    out.validate()?;
    Ok(out)
}

macro_rules! text_enum {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $(if s.eq_ignore_ascii_case($name) { return Ok($variant); })+
                Err(Error::Config(format!(concat!("unknown ", stringify!($ty), " {:?}"), s)))
            }
        }
    };
}

text_enum!(Pattern { Pattern::Simple => "Simple", Pattern::Medium => "Medium", Pattern::Complex => "Complex" });
text_enum!(MissingType { MissingType::Overall => "Overall", MissingType::Ud => "UD" });
text_enum!(Situation { Situation::TestOnly => "TestOnly", Situation::TrainAndTest => "TrainAndTest" });
