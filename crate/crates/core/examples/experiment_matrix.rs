//! A small resumable grid of experiments with per-category summaries.
//!
//! cargo run --release --example experiment_matrix -- [out-dir]

use std::path::PathBuf;

use moimpute::data::BuiltinDataset;
use moimpute::harness::{aggregate, run_matrix, write_aggregate_csv, MatrixSpec};
use moimpute::missing::{MissingType, Pattern, Situation};
use moimpute::objectives::Formulation;

fn main() -> moimpute::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "matrix-example".into()));
    let mut spec = MatrixSpec {
        datasets: vec![BuiltinDataset::Iris.into()],
        formulations: Formulation::ALL.to_vec(),
        ratios: vec![0.05],
        patterns: vec![Pattern::Simple, Pattern::Medium],
        types: vec![MissingType::Overall],
        situations: Situation::ALL.to_vec(),
        seeds: vec![1],
        ..MatrixSpec::default()
    };
    spec.evo.max_generations = 20;
    println!("{} cells into {}", spec.cells().len(), out.display());

    // a second invocation finds every cell in the manifest and reruns nothing
    let outcome = run_matrix(&spec, &out, 1)?;
    println!("{} reports, {} resumed, {} failed", outcome.reports.len(), outcome.skipped, outcome.failures);
    write_aggregate_csv(std::io::stdout(), &aggregate(&outcome.reports))?;
    Ok(())
}
