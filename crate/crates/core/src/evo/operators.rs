use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;

use super::chromosome::{
    random_degree, random_kernel, uniform, Chromosome, COST_RANGE, FUZZINESS_RANGE, GAMMA_RANGE,
    R_RANGE,
};
use crate::objectives::ObjectivePair;

/// Unit-wise crossover of two parents.
///
/// The offspring has as many centers as parent `a` when `length_from_a`,
/// otherwise as many as `b`. `mask` covers `1 + min(c_a, c_b) + 5` units in
/// the order `{v}`, center blocks, C, kernel, γ, r, d; `false` takes the
/// unit from `a`, `true` from `b`. Center blocks beyond the mask come from
/// the length-setting parent.
pub fn crossover_with(a: &Chromosome, b: &Chromosome, length_from_a: bool, mask: &[bool]) -> Chromosome {
    let shared = a.n_clusters().min(b.n_clusters());
    assert_eq!(mask.len(), 1 + shared + 5, "mask length");
    let pick = |unit: usize| if mask[unit] { b } else { a };
    let long = if length_from_a { a } else { b };
    let c = long.n_clusters();

    let mut centers = Array2::zeros((c, long.n_features()));
    for k in 0..c {
        let src = if k < shared { pick(1 + k) } else { long };
        centers.row_mut(k).assign(&src.centers.row(k));
    }
    let svm = 1 + shared;
    Chromosome {
        fuzziness: pick(0).fuzziness,
        centers,
        cost: pick(svm).cost,
        kernel: pick(svm + 1).kernel,
        gamma: pick(svm + 2).gamma,
        r: pick(svm + 3).r,
        degree: pick(svm + 4).degree,
    }
}

/// [`crossover_with`] with the length parent and mask drawn uniformly.
pub fn crossover<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> Chromosome {
    let length_from_a = rng.random::<bool>();
    let units = 1 + a.n_clusters().min(b.n_clusters()) + 5;
    let mask: Vec<bool> = (0..units).map(|_| rng.random::<bool>()).collect();
    crossover_with(a, b, length_from_a, &mask)
}

/// Resamples the given scalar slots uniformly within their ranges.
///
/// Slot order: `v`, the `c·m` center coordinates row by row, then C,
/// kernel, γ, r, d.
pub fn mutate_slots<R: Rng + ?Sized>(c: &Chromosome, slots: &[usize], rng: &mut R) -> Chromosome {
    let mut out = c.clone();
    let coords = c.centers.len();
    let m = c.n_features();
    for &slot in slots {
        match slot {
            0 => out.fuzziness = uniform(rng, FUZZINESS_RANGE),
            s if s <= coords => out.centers[[(s - 1) / m, (s - 1) % m]] = rng.random::<f64>(),
            s => match s - coords - 1 {
                0 => out.cost = uniform(rng, COST_RANGE),
                1 => out.kernel = random_kernel(rng),
                2 => out.gamma = uniform(rng, GAMMA_RANGE),
                3 => out.r = uniform(rng, R_RANGE),
                4 => out.degree = random_degree(rng),
                _ => panic!("slot {slot} out of range"),
            },
        }
    }
    out
}

/// Picks `k` uniform in `{1..slots}` and resamples `k` distinct slots.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, rng: &mut R) -> Chromosome {
    let total = c.slot_count();
    let k = rng.random_range(1..=total);
    let slots = sample(rng, total, k).into_vec();
    mutate_slots(c, &slots, rng)
}

/// Roles within a crossover pool, as indices into the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolRoles {
    pub best_imputation: usize,
    pub best_error: usize,
    pub worst_imputation: usize,
    pub worst_error: usize,
}

impl PoolRoles {
    /// Earliest pool member wins ties.
    pub fn from_pool(pool: &[usize], objectives: &[ObjectivePair]) -> PoolRoles {
        let arg = |better: &dyn Fn(&ObjectivePair, &ObjectivePair) -> bool| {
            pool.iter()
                .copied()
                .reduce(|best, i| if better(&objectives[i], &objectives[best]) { i } else { best })
                .expect("empty pool")
        };
        PoolRoles {
            best_imputation: arg(&|a, b| a.imputation_value > b.imputation_value),
            best_error: arg(&|a, b| a.cv_error < b.cv_error),
            worst_imputation: arg(&|a, b| a.imputation_value < b.imputation_value),
            worst_error: arg(&|a, b| a.cv_error > b.cv_error),
        }
    }

    /// Parent pairs in offspring order.
    pub fn pairs(&self) -> [(usize, usize); 3] {
        [
            (self.best_imputation, self.best_error),
            (self.best_imputation, self.worst_error),
            (self.best_error, self.worst_imputation),
        ]
    }
}

/// One crossover event yielding three offspring.
///
/// A pool of `pool_size` members is drawn without replacement. If any pair
/// has the same member in both roles the pool is drawn once more; pairs
/// that remain degenerate produce a mutated clone of that member.
pub fn crossover_event<R: Rng + ?Sized>(
    pop: &[Chromosome],
    objectives: &[ObjectivePair],
    pool_size: usize,
    rng: &mut R,
) -> [Chromosome; 3] {
    assert_eq!(pop.len(), objectives.len());
    assert!(pool_size >= 1 && pool_size <= pop.len(), "pool larger than population");
    let draw = |rng: &mut R| {
        let pool = sample(rng, pop.len(), pool_size).into_vec();
        PoolRoles::from_pool(&pool, objectives)
    };
    let mut roles = draw(rng);
    if roles.pairs().iter().any(|(a, b)| a == b) {
        roles = draw(rng);
    }
    roles.pairs().map(|(a, b)| {
        if a == b {
            mutate(&pop[a], rng)
        } else {
            crossover(&pop[a], &pop[b], rng)
        }
    })
}
