//! Fill masked cells from fuzzy memberships to a fixed set of centers and
//! compare against the erased values.
//!
//! cargo run --example fuzzy_impute

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moimpute::data::{normalize, BuiltinDataset};
use moimpute::fuzzy::{impute, mean_impute, ClusterConfig};
use moimpute::metrics::imputation_accuracy;
use moimpute::harness::DEFAULT_MISSING;
use moimpute::missing::{generate_missing, MissingSpec};

fn main() -> moimpute::Result<()> {
    let iris = normalize(&BuiltinDataset::Iris.load()?);
    let spec = MissingSpec {
        ratio: 0.10,
        ..DEFAULT_MISSING
    };
    let masked = generate_missing(&iris.base, &spec)?;
    let baseline = mean_impute(&masked)?;
    if let Some(acc) = imputation_accuracy(&baseline, &masked) {
        println!("column means      MAE {:.4}  RMSE {:.4}", acc.mae, acc.rmse);
    }

    // class centroids make good centers; random ones usually do not
    let m = iris.n_features();
    let mut centroids = Array2::zeros((3, m));
    for class in 0..3 {
        let rows: Vec<usize> = (0..iris.n_rows()).filter(|&i| iris.labels()[i] == class).collect();
        for j in 0..m {
            centroids[[class, j]] = rows.iter().map(|&i| iris.base.features[[i, j]]).sum::<f64>() / rows.len() as f64;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random = Array2::from_shape_simple_fn((3, m), || rng.random::<f64>());
    for (label, centers) in [("class centroids", centroids), ("random centers", random)] {
        for v in [1.5, 2.0, 4.0] {
            let cfg = ClusterConfig::new(centers.clone(), v)?;
            let filled = impute(&masked, &cfg, &baseline);
            let acc = imputation_accuracy(&filled, &masked).expect("cells were masked");
            println!("{label:<16} v={v:<4} MAE {:.4}  RMSE {:.4}", acc.mae, acc.rmse);
        }
    }
    Ok(())
}
