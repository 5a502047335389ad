//! Erase cells under each missing-data pattern and show where they landed.
//!
//! cargo run --example generate_missing

use moimpute::data::{normalize, BuiltinDataset};
use moimpute::missing::{generate_missing, MissingSpec, MissingType, Pattern, Situation};

fn main() -> moimpute::Result<()> {
    let iris = normalize(&BuiltinDataset::Iris.load()?);
    for pattern in Pattern::ALL {
        for mtype in MissingType::ALL {
            let spec = MissingSpec {
                ratio: 0.10,
                pattern,
                mtype,
                situation: Situation::TestOnly,
                seed: 7,
            };
            let masked = generate_missing(&iris.base, &spec)?;
            let per_row: Vec<usize> = masked
                .mask
                .rows()
                .into_iter()
                .map(|r| r.iter().filter(|&&b| b).count())
                .collect();
            let rows_hit = per_row.iter().filter(|&&k| k > 0).count();
            let per_feature: Vec<usize> = masked
                .mask
                .columns()
                .into_iter()
                .map(|c| c.iter().filter(|&&b| b).count())
                .collect();
            println!(
                "{pattern:<8} {mtype:<8} {} cells over {rows_hit} rows, per feature {per_feature:?}",
                masked.missing_count()
            );
        }
    }

    // Simple allows one cell per row, so 5% of sonar's 60 columns cannot fit
    let sonar = normalize(&BuiltinDataset::Sonar.load()?);
    let spec = MissingSpec {
        ratio: 0.05,
        pattern: Pattern::Simple,
        mtype: MissingType::Overall,
        situation: Situation::TestOnly,
        seed: 1,
    };
    match generate_missing(&sonar.base, &spec) {
        Ok(_) => println!("sonar 5% Simple fits"),
        Err(e) => println!("sonar 5% Simple: {e}"),
    }
    Ok(())
}
