//! Ten-fold cross-validation of the built-in SVM over a few kernels.
//!
//! cargo run --release --example svm_cross_validation

use moimpute::data::{normalize, BuiltinDataset};
use moimpute::svm::{cv_error, KernelSpec};

fn main() -> moimpute::Result<()> {
    let kernels = [
        ("linear", KernelSpec::linear()),
        ("radial γ=0.5", KernelSpec::radial(0.5)),
        ("radial γ=5", KernelSpec::radial(5.0)),
        ("poly d=3", KernelSpec::polynomial(1.0, 1.0, 3)),
        ("sigmoid", KernelSpec::sigmoid(0.5, 0.0)),
    ];
    for dataset in BuiltinDataset::ALL {
        let data = normalize(&dataset.load()?);
        for (name, kernel) in kernels {
            for cost in [0.1, 1.0, 10.0] {
                let err = cv_error(data.features().view(), data.labels(), cost, kernel, 10, 1)?;
                println!("{dataset:<6} {name:<13} C={cost:<5} error {err:.3}");
            }
        }
    }
    Ok(())
}
