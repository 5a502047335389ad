//! Learning SVM classifiers from incomplete tabular data.
//!
//! Missing cells are imputed from fuzzy-cluster memberships whose centers
//! and fuzziness are evolved jointly with the SVM hyper-parameters by a
//! bi-objective genetic algorithm: one objective scores the imputation, the
//! other is the cross-validated classification error.
//!
//! ```ignore
//! use moimpute::{data::BuiltinDataset, harness::ExperimentConfig};
//!
//! let cfg = ExperimentConfig::new(BuiltinDataset::Iris.into());
//! let report = moimpute::harness::run_experiment(&cfg);
//! println!("front size {}", report.front1_size);
//! ```

pub mod data;
pub mod error;
pub mod evo;
pub mod fuzzy;
pub mod harness;
pub mod metrics;
pub mod missing;
pub mod objectives;
pub mod svm;

pub use error::{Error, Result};

/// Derives an independent 64-bit seed for a numbered sub-stream.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
