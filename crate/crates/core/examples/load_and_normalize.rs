//! Load a bundled dataset, scale it to the unit cube and split it.
//!
//! cargo run --example load_and_normalize -- [iris|zoo|sonar]

use moimpute::data::{normalize, split, BuiltinDataset};

fn main() -> moimpute::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "iris".into());
    let dataset: BuiltinDataset = name.parse()?;
    let data = normalize(&dataset.load()?);
    println!(
        "{dataset}: {} rows, {} features, {} classes",
        data.n_rows(),
        data.n_features(),
        data.base.n_classes()
    );
    for (j, spec) in data.base.feature_specs.iter().enumerate().take(6) {
        let col = data.base.features.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "  {:<14} stored [{lo:.2}, {hi:.2}]  original [{:.2}, {:.2}]",
            spec.name,
            spec.original_min(),
            spec.original_max()
        );
    }
    let (train, test) = split(&data, 0.3, 1)?;
    println!("stratified split: {} train / {} test rows", train.n_rows(), test.n_rows());
    Ok(())
}
