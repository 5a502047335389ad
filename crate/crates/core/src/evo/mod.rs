//! Bi-objective genetic search over variable-length chromosomes that encode
//! a fuzzy clustering (fuzziness and centers) and SVM hyper-parameters.
//!
//! Survivors are chosen by non-dominated front rank alone: the first front
//! is carried over unchanged, the better half of the rest is mutated and the
//! worse half is replaced by crossover offspring.

mod chromosome;
mod operators;
mod pareto;
mod solver;

pub use chromosome::{
    random_chromosome, Chromosome, COST_RANGE, DEGREE_RANGE, FUZZINESS_RANGE, GAMMA_RANGE, R_RANGE,
    SVM_UNITS,
};
pub use operators::{crossover, crossover_event, crossover_with, mutate, mutate_slots, PoolRoles};
pub use pareto::{dominates, rank_fronts};
pub use solver::{
    evaluate, evaluate_all, optimize, optimize_with, rank_population, replacement_counts,
    should_stop, step, stop_reason, Diagnostics, EvaluatedChromosome, EvoConfig,
    GenerationRecord, Optimization, Problem, StopReason, TraceRecord,
};
