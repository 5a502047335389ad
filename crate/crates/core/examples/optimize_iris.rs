//! Evolve imputation and SVM settings together on iris with masked test
//! rows, printing progress and the final first front.
//!
//! cargo run --release --example optimize_iris -- [ASW|Correlation|VR]

use moimpute::data::{normalize, split, BuiltinDataset};
use moimpute::evo::{optimize_with, EvoConfig, Problem};
use moimpute::harness::DEFAULT_MISSING;
use moimpute::missing::apply_situation;
use moimpute::objectives::Formulation;

fn main() -> moimpute::Result<()> {
    let formulation: Formulation = std::env::args().nth(1).unwrap_or_else(|| "ASW".into()).parse()?;
    let iris = normalize(&BuiltinDataset::Iris.load()?);
    let (train, test) = split(&iris, 0.3, 1)?;
    let (train, test) = apply_situation(&train, &test, &DEFAULT_MISSING)?;
    println!("{} masked test cells", test.missing_count());

    let cfg = EvoConfig {
        formulation,
        ..EvoConfig::default()
    };
    let problem = Problem::new(&train, &test, formulation, 11)?;
    let run = optimize_with(&problem, &cfg, |g| {
        println!(
            "generation {:>3}  mean {formulation} {:.4}  mean cv error {:.4}  front {}",
            g.generation, g.mean_imputation, g.mean_cv_error, g.front1_size
        );
    })?;
    println!("stopped: {:?}", run.stop_reason);
    for member in run.front1() {
        let c = &member.chromosome;
        println!(
            "  {formulation} {:.4}  cv {:.4}  clusters {}  v {:.2}  {:?} C={:.3}  MAE {:?}",
            member.objectives.imputation_value,
            member.objectives.cv_error,
            c.n_clusters(),
            c.fuzziness,
            c.kernel,
            c.cost,
            member.diagnostics.mae,
        );
    }
    Ok(())
}
