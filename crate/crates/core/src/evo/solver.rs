use std::sync::Arc;
use std::time::Instant;

use ndarray::{s, Array2, ArrayView2};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chromosome::{random_chromosome, Chromosome};
use super::operators::{crossover_event, mutate};
use super::pareto::rank_fronts;
use crate::data::{concat_rows, MaskedDataset};
use crate::error::{Error, Result};
use crate::fuzzy::{hard_assignment, impute_with, mean_impute, memberships};
use crate::metrics::{chromosome_test_errors, imputation_accuracy};
use crate::mix_seed;
use crate::objectives::{
    asw, correlation_obj, model_selection_obj, variance_ratio, Formulation, ObjectivePair,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvoConfig {
    pub population: usize,
    pub max_clusters: usize,
    pub pool_size: usize,
    pub max_generations: usize,
    pub threshold: f64,
    pub formulation: Formulation,
    pub seed: u64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        EvoConfig {
            population: 54,
            max_clusters: 10,
            pool_size: 8,
            max_generations: 100,
            threshold: 0.0005,
            formulation: Formulation::Asw,
            seed: 1,
        }
    }
}

impl EvoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 2 || self.population < self.pool_size {
            return Err(Error::Config(format!(
                "need 2 <= pool size ({}) <= population ({})",
                self.pool_size, self.population
            )));
        }
        if self.max_clusters < 2 {
            return Err(Error::Config("max clusters must be at least 2".into()));
        }
        if self.max_generations < 1 {
            return Err(Error::Config("max generations must be at least 1".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::Config("threshold must be non-negative".into()));
        }
        Ok(())
    }
}

/// Everything a chromosome evaluation depends on besides the chromosome.
///
/// Train and test rows are stacked (train first) and imputed together; the
/// mean-imputed matrix that memberships are computed from is built once.
#[derive(Debug, Clone)]
pub struct Problem {
    pub data: MaskedDataset,
    pub n_train: usize,
    pub baseline: Array2<f64>,
    pub formulation: Formulation,
    pub fold_seed: u64,
    train_labels: Vec<usize>,
    test_labels: Vec<usize>,
    /// Stacked features with masked cells restored, when known.
    truth: Option<Array2<f64>>,
}

impl Problem {
    pub fn new(
        train: &MaskedDataset,
        test: &MaskedDataset,
        formulation: Formulation,
        fold_seed: u64,
    ) -> Result<Problem> {
        if train.n_rows() < 2 || test.n_rows() < 1 {
            return Err(Error::InvalidData("train needs 2 rows and test 1".into()));
        }
        let data = concat_rows(train, test)?;
        let baseline = mean_impute(&data)?;
        let truth = if data.missing_count() == 0 {
            Some(data.base.features.clone())
        } else {
            data.ground_truth_features()
        };
        Ok(Problem {
            n_train: train.n_rows(),
            baseline,
            formulation,
            fold_seed,
            train_labels: train.labels().to_vec(),
            test_labels: test.labels().to_vec(),
            truth,
            data,
        })
    }

    pub fn n_features(&self) -> usize {
        self.data.n_features()
    }

    pub fn train_labels(&self) -> &[usize] {
        &self.train_labels
    }

    pub fn test_labels(&self) -> &[usize] {
        &self.test_labels
    }

    pub fn train_rows<'a>(&self, x: &'a Array2<f64>) -> ArrayView2<'a, f64> {
        x.slice(s![..self.n_train, ..])
    }

    pub fn test_rows<'a>(&self, x: &'a Array2<f64>) -> ArrayView2<'a, f64> {
        x.slice(s![self.n_train.., ..])
    }

    /// Complete test features, when the erased values are known.
    pub fn test_complete(&self) -> Option<ArrayView2<'_, f64>> {
        self.truth.as_ref().map(|t| t.slice(s![self.n_train.., ..]))
    }

    pub fn truth(&self) -> Option<&Array2<f64>> {
        self.truth.as_ref()
    }
}

/// Quality measures of one evaluation against known ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub complete_test_error: Option<f64>,
    pub imputed_test_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvaluatedChromosome {
    pub chromosome: Chromosome,
    pub objectives: ObjectivePair,
    /// 1 for the non-dominated set; 0 until ranked.
    pub front_rank: usize,
    /// Stacked train+test matrix imputed by this chromosome.
    pub imputed: Option<Arc<Array2<f64>>>,
    pub diagnostics: Diagnostics,
    /// Evaluation failed and the objectives hold the worst values.
    pub failed: bool,
}

fn imputation_objective(problem: &Problem, imputed: &Array2<f64>, u: &Array2<f64>) -> Result<f64> {
    Ok(match problem.formulation {
        Formulation::Asw => asw(imputed.view(), &hard_assignment(u))?,
        Formulation::Correlation => {
            correlation_obj(problem.train_rows(imputed), problem.test_rows(imputed))
        }
        Formulation::Vr => variance_ratio(problem.train_rows(imputed), problem.test_rows(imputed)),
    })
}

/// Decodes, imputes and scores a chromosome. A pure function of the
/// chromosome and the problem; failures yield the worst objective values.
pub fn evaluate(problem: &Problem, chromosome: &Chromosome) -> EvaluatedChromosome {
    let formulation = problem.formulation;
    let attempt = || -> Result<(f64, f64, Array2<f64>)> {
        let cfg = chromosome.cluster_config()?;
        let u = memberships(problem.baseline.view(), &cfg);
        let imputed = impute_with(&problem.data, &cfg, &u);
        let value = imputation_objective(problem, &imputed, &u)?;
        let cv = model_selection_obj(
            problem.train_rows(&imputed),
            problem.train_labels(),
            chromosome.cost,
            chromosome.kernel_spec(),
            problem.fold_seed,
        )?;
        Ok((value, cv, imputed))
    };
    match attempt() {
        Ok((value, cv, imputed)) => {
            let diagnostics = diagnose(problem, chromosome, &imputed);
            EvaluatedChromosome {
                chromosome: chromosome.clone(),
                objectives: ObjectivePair {
                    imputation_value: value,
                    cv_error: cv,
                    formulation,
                },
                front_rank: 0,
                imputed: Some(Arc::new(imputed)),
                diagnostics,
                failed: false,
            }
        }
        Err(_) => EvaluatedChromosome {
            chromosome: chromosome.clone(),
            objectives: ObjectivePair {
                imputation_value: formulation.worst(),
                cv_error: 1.0,
                formulation,
            },
            front_rank: 0,
            imputed: None,
            diagnostics: Diagnostics::default(),
            failed: true,
        },
    }
}

fn diagnose(problem: &Problem, chromosome: &Chromosome, imputed: &Array2<f64>) -> Diagnostics {
    let accuracy = imputation_accuracy(imputed, &problem.data);
    let errors = problem.test_complete().and_then(|complete| {
        chromosome_test_errors(
            problem.train_rows(imputed),
            problem.train_labels(),
            complete,
            problem.test_rows(imputed),
            problem.test_labels(),
            chromosome.cost,
            chromosome.kernel_spec(),
        )
        .ok()
    });
    Diagnostics {
        mae: accuracy.map(|a| a.mae),
        rmse: accuracy.map(|a| a.rmse),
        complete_test_error: errors.map(|e| e.complete),
        imputed_test_error: errors.map(|e| e.imputed),
    }
}

pub fn evaluate_all(problem: &Problem, chromosomes: &[Chromosome]) -> Vec<EvaluatedChromosome> {
    chromosomes.par_iter().map(|c| evaluate(problem, c)).collect()
}

/// Assigns front ranks in place.
pub fn rank_population(pop: &mut [EvaluatedChromosome]) {
    let objectives: Vec<ObjectivePair> = pop.iter().map(|e| e.objectives).collect();
    for (e, rank) in pop.iter_mut().zip(rank_fronts(&objectives)) {
        e.front_rank = rank;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 1 for the initial population.
    pub generation: usize,
    pub mean_imputation: f64,
    pub mean_cv_error: f64,
    pub front1_size: usize,
    /// Chromosomes evaluated to produce this generation.
    pub evaluations: usize,
    pub elapsed_seconds: f64,
}

/// Objectives and diagnostics of one population member in one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub generation: usize,
    pub imputation_value: f64,
    pub cv_error: f64,
    #[serde(flatten)]
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxGenerations,
    ImputationConverged,
    ErrorConverged,
    FrontSaturated,
}

/// Which stopping rule fires after the last recorded generation, if any.
pub fn stop_reason(history: &[GenerationRecord], cfg: &EvoConfig) -> Option<StopReason> {
    let last = history.last()?;
    if last.generation >= cfg.max_generations {
        return Some(StopReason::MaxGenerations);
    }
    if let [.., prev, last] = history {
        if (last.mean_imputation - prev.mean_imputation).abs() < cfg.threshold {
            return Some(StopReason::ImputationConverged);
        }
        if (last.mean_cv_error - prev.mean_cv_error).abs() < cfg.threshold {
            return Some(StopReason::ErrorConverged);
        }
    }
    if last.front1_size >= cfg.population {
        return Some(StopReason::FrontSaturated);
    }
    None
}

pub fn should_stop(history: &[GenerationRecord], cfg: &EvoConfig) -> bool {
    stop_reason(history, cfg).is_some()
}

/// Sizes of one replacement step: `(n_mut, n_off, crossover events)`.
pub fn replacement_counts(population: usize, front1: usize) -> (usize, usize, usize) {
    let q = population.saturating_sub(front1);
    let n_mut = q.div_ceil(2);
    let n_off = q - n_mut;
    (n_mut, n_off, n_off.div_ceil(3))
}

/// Builds the next generation from a ranked population.
///
/// Front 1 is carried over unchanged with its cached evaluation. The other
/// members are ordered worst front first (random order within a front); the
/// worse part is replaced by crossover offspring and the better part is
/// mutated.
pub fn step(
    pop: &[EvaluatedChromosome],
    problem: &Problem,
    cfg: &EvoConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<EvaluatedChromosome> {
    let (elites, mut rest): (Vec<usize>, Vec<usize>) =
        (0..pop.len()).partition(|&i| pop[i].front_rank == 1);
    let (n_mut, n_off, events) = replacement_counts(pop.len(), elites.len());
    rest.shuffle(rng);
    rest.sort_by_key(|&i| std::cmp::Reverse(pop[i].front_rank));

    let chromosomes: Vec<Chromosome> = pop.iter().map(|e| e.chromosome.clone()).collect();
    let objectives: Vec<ObjectivePair> = pop.iter().map(|e| e.objectives).collect();
    let mut offspring = Vec::with_capacity(events * 3);
    for _ in 0..events {
        offspring.extend(crossover_event(&chromosomes, &objectives, cfg.pool_size, rng));
    }
    let mut keep = sample(rng, offspring.len(), n_off).into_vec();
    keep.sort_unstable();
    let offspring = keep.into_iter().map(|k| offspring[k].clone());

    let mutants = rest[n_off..]
        .iter()
        .take(n_mut)
        .map(|&i| mutate(&pop[i].chromosome, rng));
    let fresh: Vec<Chromosome> = mutants.chain(offspring).collect();

    let mut next: Vec<EvaluatedChromosome> = elites.iter().map(|&i| pop[i].clone()).collect();
    next.extend(evaluate_all(problem, &fresh));
    next
}

#[derive(Debug, Clone)]
pub struct Optimization {
    /// Final ranked population.
    pub population: Vec<EvaluatedChromosome>,
    pub history: Vec<GenerationRecord>,
    /// Every member of every generation, in generation order.
    pub trace: Vec<TraceRecord>,
    pub stop_reason: StopReason,
}

impl Optimization {
    pub fn front1(&self) -> Vec<&EvaluatedChromosome> {
        self.population.iter().filter(|e| e.front_rank == 1).collect()
    }

    pub fn generations(&self) -> usize {
        self.history.len()
    }
}

pub fn optimize(problem: &Problem, cfg: &EvoConfig) -> Result<Optimization> {
    optimize_with(problem, cfg, |_| {})
}

/// Runs the generation loop, handing every generation record to `observer`
/// as soon as it is complete.
pub fn optimize_with(
    problem: &Problem,
    cfg: &EvoConfig,
    mut observer: impl FnMut(&GenerationRecord),
) -> Result<Optimization> {
    cfg.validate()?;
    if problem.formulation != cfg.formulation {
        return Err(Error::Config("problem and config formulations differ".into()));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0));
    let initial: Vec<Chromosome> = (0..cfg.population)
        .map(|_| random_chromosome(cfg.max_clusters, problem.n_features(), &mut rng))
        .collect();
    let mut pop = evaluate_all(problem, &initial);
    rank_population(&mut pop);

    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut evaluations = pop.len();
    loop {
        let generation = history.len() + 1;
        let record = summarize(&pop, generation, evaluations, start.elapsed().as_secs_f64());
        trace.extend(pop.iter().map(|e| TraceRecord {
            generation,
            imputation_value: e.objectives.imputation_value,
            cv_error: e.objectives.cv_error,
            diagnostics: e.diagnostics,
        }));
        observer(&record);
        history.push(record);
        if let Some(reason) = stop_reason(&history, cfg) {
            return Ok(Optimization {
                population: pop,
                history,
                trace,
                stop_reason: reason,
            });
        }
        let mut step_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 100 + generation as u64));
        let front1 = record.front1_size;
        pop = step(&pop, problem, cfg, &mut step_rng);
        evaluations = pop.len() - front1;
        rank_population(&mut pop);
    }
}

fn summarize(
    pop: &[EvaluatedChromosome],
    generation: usize,
    evaluations: usize,
    elapsed_seconds: f64,
) -> GenerationRecord {
    let n = pop.len() as f64;
    GenerationRecord {
        generation,
        mean_imputation: pop.iter().map(|e| e.objectives.imputation_value).sum::<f64>() / n,
        mean_cv_error: pop.iter().map(|e| e.objectives.cv_error).sum::<f64>() / n,
        front1_size: pop.iter().filter(|e| e.front_rank == 1).count(),
        evaluations,
        elapsed_seconds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{normalize, split, BuiltinDataset};
    use crate::missing::{apply_situation, MissingSpec, MissingType, Pattern, Situation};

    fn record(generation: usize, imp: f64, err: f64, front: usize) -> GenerationRecord {
        GenerationRecord {
            generation,
            mean_imputation: imp,
            mean_cv_error: err,
            front1_size: front,
            evaluations: 0,
            elapsed_seconds: 0.0,
        }
    }

    #[test]
    fn stopping_rules() {
        let cfg = EvoConfig::default();
        assert!(should_stop(&[record(100, 0.5, 0.5, 3)], &cfg));
        assert!(!should_stop(&[record(1, 0.5, 0.5, 3)], &cfg));
        let h = [record(1, 0.80001, 0.3, 3), record(2, 0.80040, 0.2, 3)];
        assert_eq!(stop_reason(&h, &cfg), Some(StopReason::ImputationConverged));
        let h = [record(1, 0.5, 0.3, 3), record(2, 0.6, 0.3002, 3)];
        assert_eq!(stop_reason(&h, &cfg), Some(StopReason::ErrorConverged));
        let h = [record(1, 0.5, 0.3, 3), record(2, 0.6, 0.2, 54)];
        assert_eq!(stop_reason(&h, &cfg), Some(StopReason::FrontSaturated));
        let h = [record(1, 0.5, 0.3, 3), record(2, 0.6, 0.2, 53)];
        assert_eq!(stop_reason(&h, &cfg), None);
    }

    #[test]
    fn replacement_arithmetic() {
        assert_eq!(replacement_counts(54, 40), (7, 7, 3));
        assert_eq!(replacement_counts(54, 53), (1, 0, 0));
        assert_eq!(replacement_counts(54, 1), (27, 26, 9));
        assert_eq!(replacement_counts(54, 54), (0, 0, 0));
    }

    fn iris_problem(formulation: Formulation) -> Problem {
        let iris = normalize(&BuiltinDataset::Iris.load().unwrap());
        let (train, test) = split(&iris, 0.3, 1).unwrap();
        let spec = MissingSpec {
            ratio: 0.05,
            pattern: Pattern::Simple,
            mtype: MissingType::Overall,
            situation: Situation::TestOnly,
            seed: 1,
        };
        let (train, test) = apply_situation(&train, &test, &spec).unwrap();
        Problem::new(&train, &test, formulation, 7).unwrap()
    }

    #[test]
    fn evaluation_is_pure() {
        let problem = iris_problem(Formulation::Vr);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chromosomes: Vec<Chromosome> = (0..6)
            .map(|_| random_chromosome(10, 4, &mut rng))
            .collect();
        let forward = evaluate_all(&problem, &chromosomes);
        let mut reversed: Vec<Chromosome> = chromosomes.clone();
        reversed.reverse();
        let mut backward = evaluate_all(&problem, &reversed);
        backward.reverse();
        for (a, b) in forward.iter().zip(&backward) {
            assert_eq!(a.objectives, b.objectives);
            assert_eq!(a.diagnostics, b.diagnostics);
        }
    }

    #[test]
    fn step_keeps_size_and_elites() {
        let problem = iris_problem(Formulation::Correlation);
        let cfg = EvoConfig {
            population: 12,
            pool_size: 4,
            formulation: Formulation::Correlation,
            ..EvoConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let initial: Vec<Chromosome> = (0..12).map(|_| random_chromosome(10, 4, &mut rng)).collect();
        let mut pop = evaluate_all(&problem, &initial);
        rank_population(&mut pop);
        let elites: Vec<Chromosome> = pop
            .iter()
            .filter(|e| e.front_rank == 1)
            .map(|e| e.chromosome.clone())
            .collect();
        let a = step(&pop, &problem, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let b = step(&pop, &problem, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a.len(), 12);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.chromosome, y.chromosome);
            assert_eq!(x.objectives, y.objectives);
        }
        for (e, elite) in a.iter().zip(&elites) {
            assert_eq!(&e.chromosome, elite);
        }
    }

    #[test]
    fn short_run_terminates_with_valid_front() {
        let problem = iris_problem(Formulation::Asw);
        let cfg = EvoConfig {
            population: 12,
            pool_size: 4,
            max_generations: 4,
            ..EvoConfig::default()
        };
        let mut streamed = 0;
        let out = optimize_with(&problem, &cfg, |_| streamed += 1).unwrap();
        assert_eq!(streamed, out.history.len());
        assert!(out.history.len() <= 4);
        assert_eq!(out.population.len(), 12);
        assert_eq!(out.trace.len(), 12 * out.history.len());
        let front = out.front1();
        assert!(!front.is_empty());
        for e in out.population.iter() {
            e.chromosome.validate(10).unwrap();
        }
    }
}
