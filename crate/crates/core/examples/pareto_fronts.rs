//! Rank a cloud of objective pairs into fronts and measure the first front.
//!
//! cargo run --example pareto_fronts

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moimpute::evo::rank_fronts;
use moimpute::metrics::hypervolume;
use moimpute::objectives::{Formulation, ObjectivePair};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<ObjectivePair> = (0..30)
        .map(|_| ObjectivePair {
            imputation_value: rng.random(),
            cv_error: rng.random::<f64>() * 0.5,
            formulation: Formulation::Vr,
        })
        .collect();
    let ranks = rank_fronts(&points);
    let fronts = *ranks.iter().max().unwrap_or(&0);
    for front in 1..=fronts {
        let members: Vec<String> = points
            .iter()
            .zip(&ranks)
            .filter(|(_, &r)| r == front)
            .map(|(p, _)| format!("({:.2}, {:.2})", p.imputation_value, p.cv_error))
            .collect();
        println!("front {front}: {}", members.join(" "));
    }
    let first: Vec<ObjectivePair> = points.iter().zip(&ranks).filter(|(_, &r)| r == 1).map(|(p, _)| *p).collect();
    println!("hypervolume of front 1: {:.4}", hypervolume(&first, Formulation::Vr));
    println!("hypervolume of all points: {:.4}", hypervolume(&points, Formulation::Vr));
}
