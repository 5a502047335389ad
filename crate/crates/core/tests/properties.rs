//! Property-based invariants across the library.

mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use moimpute::data::{normalize, split, Dataset, FeatureSpec, MaskedDataset};
use moimpute::evo::{crossover, mutate, random_chromosome, rank_fronts};
use moimpute::fuzzy::{membership, ClusterConfig};
use moimpute::metrics::{hypervolume, imputation_accuracy, nmi};
use moimpute::objectives::{asw, correlation_obj, variance_ratio, Formulation, ObjectivePair};

fn matrix(rows: std::ops::RangeInclusive<usize>, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    rows.prop_flat_map(move |n| {
        prop::collection::vec(0.0f64..1.0, n * cols)
            .prop_map(move |v| Array2::from_shape_vec((n, cols), v).unwrap())
    })
}

fn dataset(features: Array2<f64>) -> MaskedDataset {
    let n = features.nrows();
    let m = features.ncols();
    MaskedDataset::complete(
        Dataset::new(
            features,
            (0..n).map(|i| i % 3).collect(),
            vec!["a".into(), "b".into(), "c".into()],
            (0..m).map(|j| FeatureSpec::numeric(format!("f{j}"))).collect(),
        )
        .unwrap(),
    )
}

fn pairs(len: usize) -> impl Strategy<Value = Vec<ObjectivePair>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..len).prop_map(|v| {
        v.into_iter()
            .map(|(i, e)| ObjectivePair {
                imputation_value: i,
                cv_error: e,
                formulation: Formulation::Vr,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn normalize_is_idempotent(x in matrix(6..=20, 3), scale in 0.1f64..50.0, shift in -10.0f64..10.0) {
        let d = dataset(x.mapv(|v| v * scale + shift));
        let once = normalize(&d);
        let twice = normalize(&once);
        for (a, b) in once.base.features.iter().zip(twice.base.features.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(a));
        }
    }

    #[test]
    fn split_partitions_rows(x in matrix(9..=40, 2), frac in 0.1f64..0.9, seed in any::<u64>()) {
        let mut d = dataset(x);
        // a unique value in column 0 identifies each row
        let n = d.n_rows();
        for i in 0..n {
            d.base.features[[i, 0]] = i as f64;
        }
        let (train, test) = split(&d, frac, seed).unwrap();
        let mut ids: Vec<usize> = train.base.features.column(0).iter()
            .chain(test.base.features.column(0).iter())
            .map(|&v| v as usize)
            .collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
        for class in 0..3 {
            prop_assert!(train.labels().contains(&class));
            prop_assert!(test.labels().contains(&class));
        }
    }

    #[test]
    fn memberships_sum_to_one(centers in matrix(2..=10, 4), x in prop::collection::vec(0.0f64..1.0, 4), v in 1.05f64..6.0) {
        let cfg = ClusterConfig::new(centers, v).unwrap();
        let u = membership(ndarray::ArrayView1::from(&x), &cfg);
        prop_assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(u.iter().all(|&w| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn correlation_objective_is_symmetric_and_order_free(a in matrix(3..=15, 3), b in matrix(3..=15, 3), seed in any::<u64>()) {
        let ab = correlation_obj(a.view(), b.view());
        let ba = correlation_obj(b.view(), a.view());
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&ab));
        let mut rows: Vec<usize> = (0..a.nrows()).collect();
        rand::seq::SliceRandom::shuffle(rows.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = a.select(ndarray::Axis(0), &rows);
        prop_assert!((correlation_obj(shuffled.view(), b.view()) - ab).abs() < 1e-12);
    }

    #[test]
    fn variance_ratio_is_symmetric(a in matrix(2..=15, 3), b in matrix(2..=15, 3)) {
        let ab = variance_ratio(a.view(), b.view());
        prop_assert!((ab - variance_ratio(b.view(), a.view())).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn asw_is_translation_invariant(x in matrix(4..=20, 3), shift in prop::collection::vec(-5.0f64..5.0, 3)) {
        let assignment: Vec<usize> = (0..x.nrows()).map(|i| i % 2).collect();
        let s = asw(x.view(), &assignment).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        let moved = &x + &ndarray::Array1::from(shift);
        prop_assert!((asw(moved.view(), &assignment).unwrap() - s).abs() < 1e-9);
    }

    #[test]
    fn hypervolume_ignores_dominated_points(front in pairs(25)) {
        let ranks = rank_fronts(&front);
        let nd: Vec<ObjectivePair> = front.iter().zip(&ranks).filter(|(_, &r)| r == 1).map(|(p, _)| *p).collect();
        let all = hypervolume(&front, Formulation::Vr);
        prop_assert!((all - hypervolume(&nd, Formulation::Vr)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&all));
        let mapped: Vec<(f64, f64)> = front.iter().map(|p| (p.imputation_value, 1.0 - p.cv_error)).collect();
        prop_assert!((all - common::grid_hypervolume(&mapped, 400)).abs() < 5e-3);
    }

    #[test]
    fn hypervolume_grows_with_the_set(front in pairs(15), extra in pairs(5)) {
        let mut bigger = front.clone();
        bigger.extend(extra);
        prop_assert!(hypervolume(&bigger, Formulation::Vr) >= hypervolume(&front, Formulation::Vr) - 1e-15);
    }

    #[test]
    fn ranks_match_peeling(front in pairs(60)) {
        prop_assert_eq!(rank_fronts(&front), common::peel_ranks(&front));
    }

    #[test]
    fn rmse_bounds_mae(truth in matrix(3..=12, 3), imputed in matrix(3..=12, 3), cells in prop::collection::vec(any::<bool>(), 36)) {
        let n = truth.nrows().min(imputed.nrows());
        let truth = truth.slice(ndarray::s![..n, ..]).to_owned();
        let imputed = imputed.slice(ndarray::s![..n, ..]).to_owned();
        let mut d = dataset(truth.clone());
        d.mask = Array2::from_shape_fn((n, 3), |(i, j)| cells[i * 3 + j]);
        d.truth = Some(Array2::from_shape_fn((n, 3), |(i, j)| if d.mask[[i, j]] { truth[[i, j]] } else { f64::NAN }));
        match imputation_accuracy(&imputed, &d) {
            Some(acc) => prop_assert!(acc.rmse >= acc.mae - 1e-12 && acc.mae >= 0.0),
            None => prop_assert_eq!(d.missing_count(), 0),
        }
    }

    #[test]
    fn nmi_is_symmetric_and_bounded(x in prop::collection::vec(0.0f64..1.0, 10..60), seed in any::<u64>()) {
        let mut y = x.clone();
        rand::seq::SliceRandom::shuffle(y.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let xy = nmi(&x, &y, 10).unwrap();
        prop_assert!((xy - nmi(&y, &x, 10).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&xy));
        prop_assert!((nmi(&x, &x, 10).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn operators_stay_in_range(seed in any::<u64>(), m in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_chromosome(10, m, &mut rng);
        let b = random_chromosome(10, m, &mut rng);
        a.validate(10).unwrap();
        let child = crossover(&a, &b, &mut rng);
        prop_assert!(child.validate(10).is_ok());
        prop_assert!(child.n_clusters() == a.n_clusters() || child.n_clusters() == b.n_clusters());
        let mutant = mutate(&child, &mut rng);
        prop_assert!(mutant.validate(10).is_ok());
        prop_assert_eq!(mutant.n_clusters(), child.n_clusters());
    }
}
