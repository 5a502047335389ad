//! Kernel SVM classification: binary SMO training, one-vs-one multiclass
//! voting and stratified k-fold cross-validated error.

mod kernel;
pub mod smo;

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use smo::{solve_dual, DualSolution, SmoParams};

use crate::error::{Error, Result};
use crate::mix_seed;

/// A trained binary classifier, `f(x) = Σ coef_i k(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Array2<f64>,
    /// Signed `α_i · y_i` per support vector.
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub cost: f64,
}

impl SvmModel {
    pub fn decision(&self, x: ArrayView1<f64>) -> f64 {
        self.support_vectors
            .axis_iter(Axis(0))
            .zip(&self.dual_coeffs)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// ±1 labels; a zero decision value maps to +1.
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.axis_iter(Axis(0))
            .map(|row| if self.decision(row) >= 0.0 { 1.0 } else { -1.0 })
            .collect()
    }
}

pub fn train_binary(x: ArrayView2<f64>, y: &[f64], cost: f64, kernel: KernelSpec) -> Result<SvmModel> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidData("row and label counts differ".into()));
    }
    let gram = kernel.gram(x);
    let rows: Vec<usize> = (0..y.len()).collect();
    let sol = solve_dual(&gram, &rows, y, cost, &SmoParams::default())?;
    Ok(model_from_solution(x, &rows, y, &sol, kernel, cost))
}

fn model_from_solution(
    x: ArrayView2<f64>,
    rows: &[usize],
    y: &[f64],
    sol: &DualSolution,
    kernel: KernelSpec,
    cost: f64,
) -> SvmModel {
    let kept: Vec<usize> = (0..rows.len()).filter(|&t| sol.alpha[t] > 0.0).collect();
    let sv_rows: Vec<usize> = kept.iter().map(|&t| rows[t]).collect();
    SvmModel {
        support_vectors: x.select(Axis(0), &sv_rows),
        dual_coeffs: kept.iter().map(|&t| sol.alpha[t] * y[t]).collect(),
        bias: sol.bias,
        kernel,
        cost,
    }
}

/// One-vs-one ensemble. The pair `(a, b)` with `a < b` labels class `a` as +1.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel {
    pub classes: Vec<usize>,
    pub pairs: Vec<((usize, usize), SvmModel)>,
}

impl MulticlassModel {
    pub fn n_models(&self) -> usize {
        self.pairs.len()
    }

    /// Majority vote over all pairs, ties going to the lowest class id.
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.axis_iter(Axis(0))
            .map(|row| {
                let decisions = self
                    .pairs
                    .iter()
                    .map(|(_, model)| model.decision(row) >= 0.0);
                vote(&self.classes, self.pairs.iter().map(|(p, _)| *p).zip(decisions))
            })
            .collect()
    }
}

fn vote(classes: &[usize], outcomes: impl Iterator<Item = ((usize, usize), bool)>) -> usize {
    let top = classes.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; top + 1];
    for ((a, b), positive) in outcomes {
        counts[if positive { a } else { b }] += 1;
    }
    classes
        .iter()
        .copied()
        .fold((classes[0], 0), |best, c| {
            if counts[c] > best.1 {
                (c, counts[c])
            } else {
                best
            }
        })
        .0
}

pub fn train_multiclass(
    x: ArrayView2<f64>,
    y: &[usize],
    cost: f64,
    kernel: KernelSpec,
) -> Result<MulticlassModel> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidData("row and label counts differ".into()));
    }
    let classes: Vec<usize> = y.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::InvalidData("need at least 2 classes".into()));
    }
    let gram = kernel.gram(x);
    let rows: Vec<usize> = (0..y.len()).collect();
    let fit = OvoFit::fit(&gram, &rows, y, cost, &SmoParams::default())?;
    let pairs = fit
        .pairs
        .into_iter()
        .map(|p| {
            let model = SvmModel {
                support_vectors: x.select(Axis(0), &p.support),
                dual_coeffs: p.coef,
                bias: p.bias,
                kernel,
                cost,
            };
            ((p.positive, p.negative), model)
        })
        .collect();
    Ok(MulticlassModel {
        classes: fit.classes,
        pairs,
    })
}

pub fn predict(model: &MulticlassModel, x: ArrayView2<f64>) -> Vec<usize> {
    model.predict(x)
}

/// One binary problem of a one-vs-one fit over Gram-matrix indices.
#[derive(Debug, Clone)]
struct PairFit {
    positive: usize,
    negative: usize,
    support: Vec<usize>,
    coef: Vec<f64>,
    bias: f64,
}

/// One-vs-one fit addressed by indices into a shared Gram matrix, so that
/// cross-validation folds never copy feature rows.
#[derive(Debug, Clone)]
struct OvoFit {
    classes: Vec<usize>,
    pairs: Vec<PairFit>,
}

impl OvoFit {
    /// `labels` is indexed by Gram row; only `rows` take part.
    fn fit(
        gram: &Array2<f64>,
        rows: &[usize],
        labels: &[usize],
        cost: f64,
        params: &SmoParams,
    ) -> Result<OvoFit> {
        let classes: Vec<usize> = rows
            .iter()
            .map(|&r| labels[r])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut pairs = Vec::new();
        for (ia, &a) in classes.iter().enumerate() {
            for &b in &classes[ia + 1..] {
                let sub: Vec<usize> = rows
                    .iter()
                    .copied()
                    .filter(|&r| labels[r] == a || labels[r] == b)
                    .collect();
                let y: Vec<f64> = sub
                    .iter()
                    .map(|&r| if labels[r] == a { 1.0 } else { -1.0 })
                    .collect();
                let sol = solve_dual(gram, &sub, &y, cost, params)?;
                let kept: Vec<usize> = (0..sub.len()).filter(|&t| sol.alpha[t] > 0.0).collect();
                pairs.push(PairFit {
                    positive: a,
                    negative: b,
                    support: kept.iter().map(|&t| sub[t]).collect(),
                    coef: kept.iter().map(|&t| sol.alpha[t] * y[t]).collect(),
                    bias: sol.bias,
                });
            }
        }
        Ok(OvoFit { classes, pairs })
    }

    fn predict_row(&self, gram: &Array2<f64>, row: usize) -> usize {
        if self.classes.len() == 1 {
            return self.classes[0];
        }
        let outcomes = self.pairs.iter().map(|p| {
            let f: f64 = p
                .support
                .iter()
                .zip(&p.coef)
                .map(|(&s, c)| c * gram[[row, s]])
                .sum::<f64>()
                + p.bias;
            ((p.positive, p.negative), f >= 0.0)
        });
        vote(&self.classes, outcomes)
    }
}

/// Stratified fold ids. Each class is shuffled with a class-specific stream
/// of `seed` and dealt round-robin, continuing where the previous class
/// stopped, so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let mut out = vec![0; labels.len()];
    let classes: BTreeSet<usize> = labels.iter().copied().collect();
    let mut next = 0;
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, class as u64));
        members.shuffle(&mut rng);
        for i in members {
            out[i] = next % folds;
            next += 1;
        }
    }
    out
}

/// Fraction of rows misclassified when each fold is predicted by a model
/// trained on the remaining folds.
pub fn cv_error(
    x: ArrayView2<f64>,
    y: &[usize],
    cost: f64,
    kernel: KernelSpec,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let gram = kernel.gram(x);
    cv_error_on_gram(&gram, y, cost, folds, seed)
}

pub(crate) fn cv_error_on_gram(
    gram: &Array2<f64>,
    y: &[usize],
    cost: f64,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::InvalidData("no rows".into()));
    }
    let fold_of = stratified_folds(y, folds, seed);
    let params = SmoParams::default();
    let mut wrong = 0usize;
    for fold in 0..folds {
        let (held, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == fold);
        if held.is_empty() || train.is_empty() {
            continue;
        }
        let fit = OvoFit::fit(gram, &train, y, cost, &params)?;
        wrong += held
            .iter()
            .filter(|&&i| fit.predict_row(gram, i) != y[i])
            .count();
    }
    Ok(wrong as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn separable_pair_boundary() {
        let x = array![[0.0], [1.0]];
        let model = train_binary(x.view(), &[-1.0, 1.0], 100.0, KernelSpec::linear()).unwrap();
        assert_eq!(model.predict(x.view()), vec![-1.0, 1.0]);
        // f(x) = w x + b crosses zero at -b / w
        let w = model.decision(array![1.0].view()) - model.decision(array![0.0].view());
        assert!((-model.decision(array![0.0].view()) / w - 0.5).abs() < 1e-3);
    }

    #[test]
    fn xor_with_radial_kernel() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let model = train_binary(x.view(), &y, 100.0, KernelSpec::radial(1.0)).unwrap();
        assert_eq!(model.predict(x.view()), y.to_vec());
    }

    #[test]
    fn dual_feasibility() {
        let x = array![[0.1, 0.3], [0.4, 0.8], [0.9, 0.2], [0.5, 0.5], [0.2, 0.9], [0.7, 0.7]];
        let y = [1.0, -1.0, 1.0, -1.0, -1.0, 1.0];
        let gram = KernelSpec::radial(2.0).gram(x.view());
        let sol = solve_dual(&gram, &[0, 1, 2, 3, 4, 5], &y, 3.0, &SmoParams::default()).unwrap();
        assert!(sol.alpha.iter().all(|&a| (0.0..=3.0).contains(&a)));
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-6);
    }

    #[test]
    fn two_class_multiclass_matches_binary() {
        let x = array![[0.1, 0.2], [0.3, 0.1], [0.8, 0.9], [0.7, 0.6], [0.5, 0.4], [0.45, 0.6]];
        let labels = [0, 0, 1, 1, 0, 1];
        let kernel = KernelSpec::radial(1.5);
        let multi = train_multiclass(x.view(), &labels, 10.0, kernel).unwrap();
        assert_eq!(multi.n_models(), 1);
        let signs: Vec<f64> = labels.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
        let binary = train_binary(x.view(), &signs, 10.0, kernel).unwrap();
        let grid = array![[0.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.2, 0.8], [0.6, 0.3]];
        let from_binary: Vec<usize> = binary
            .predict(grid.view())
            .into_iter()
            .map(|s| if s > 0.0 { 0 } else { 1 })
            .collect();
        assert_eq!(multi.predict(grid.view()), from_binary);
    }

    #[test]
    fn multiclass_pair_counts() {
        let iris = crate::data::normalize(&crate::data::BuiltinDataset::Iris.load().unwrap());
        let m = train_multiclass(iris.features().view(), iris.labels(), 10.0, KernelSpec::radial(1.0)).unwrap();
        assert_eq!(m.n_models(), 3);
        let zoo = crate::data::normalize(&crate::data::BuiltinDataset::Zoo.load().unwrap());
        let m = train_multiclass(zoo.features().view(), zoo.labels(), 10.0, KernelSpec::linear()).unwrap();
        assert_eq!(m.n_models(), 21);
    }

    #[test]
    fn empty_prediction() {
        let x = array![[0.0], [1.0]];
        let m = train_multiclass(x.view(), &[0, 1], 1.0, KernelSpec::linear()).unwrap();
        assert!(m.predict(Array2::<f64>::zeros((0, 1)).view()).is_empty());
    }

    #[test]
    fn vote_ties_go_to_lowest_class() {
        let outcomes = vec![((0, 1), true), ((0, 2), false), ((1, 2), true)];
        assert_eq!(vote(&[0, 1, 2], outcomes.into_iter()), 0);
    }

    #[test]
    fn folds_are_stratified_and_pure() {
        let labels: Vec<usize> = (0..53).map(|i| i % 3).collect();
        let folds = stratified_folds(&labels, 10, 4);
        assert_eq!(folds, stratified_folds(&labels, 10, 4));
        let mut sizes = [0usize; 10];
        folds.iter().for_each(|&f| sizes[f] += 1);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn separable_clusters_have_zero_cv_error() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 100.0;
            rows.extend_from_slice(&[0.1 + t, 0.2]);
            y.push(0);
            rows.extend_from_slice(&[0.8 + t, 0.9]);
            y.push(1);
        }
        let x = Array2::from_shape_vec((40, 2), rows).unwrap();
        let err = cv_error(x.view(), &y, 100.0, KernelSpec::linear(), 10, 1).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn coin_flip_labels_near_half() {
        // Monte Carlo over 20 seeds of independent features and labels.
        let mut total = 0.0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((200, 3), |_| rng.random::<f64>());
            let y: Vec<usize> = (0..200).map(|_| rng.random_range(0..2)).collect();
            total += cv_error(x.view(), &y, 1.0, KernelSpec::radial(1.0), 10, seed).unwrap();
        }
        let mean = total / 20.0;
        assert!((mean - 0.5).abs() <= 0.1, "mean cv error {mean}");
    }

    #[test]
    fn iris_tuned_cv_error() {
        let iris = crate::data::normalize(&crate::data::BuiltinDataset::Iris.load().unwrap());
        let err = cv_error(iris.features().view(), iris.labels(), 10.0, KernelSpec::radial(2.0), 10, 1).unwrap();
        assert!(err <= 0.05, "iris cv error {err}");
    }
}
