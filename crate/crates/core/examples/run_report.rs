//! One configured experiment end to end: the report compares test error on
//! complete and imputed test rows.
//!
//! cargo run --release --example run_report

use moimpute::data::BuiltinDataset;
use moimpute::harness::{run_experiment, ExperimentConfig};
use moimpute::missing::{Pattern, Situation};

fn main() -> moimpute::Result<()> {
    let mut cfg = ExperimentConfig::new(BuiltinDataset::Iris.into());
    cfg.missing.ratio = 0.10;
    cfg.missing.pattern = Pattern::Medium;
    cfg.missing.situation = Situation::TrainAndTest;
    println!("config:\n{}", cfg.to_toml()?);

    let report = run_experiment(&cfg);
    if let Some(e) = &report.error {
        eprintln!("run failed: {e}");
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let (Some(c), Some(i)) = (report.complete_test_error, report.imputed_test_error) {
        println!("test error complete {c:.4}, imputed {i:.4}, difference {:.4}", i - c);
    }
    Ok(())
}
