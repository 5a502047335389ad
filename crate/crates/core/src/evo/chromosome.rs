use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fuzzy::ClusterConfig;
use crate::svm::{KernelKind, KernelSpec};

/// Closed ranges of the scalar genes.
pub const FUZZINESS_RANGE: (f64, f64) = (1.5, 5.0);
pub const COST_RANGE: (f64, f64) = (0.01, 100.0);
pub const GAMMA_RANGE: (f64, f64) = (0.005, 5.0);
pub const R_RANGE: (f64, f64) = (0.0, 20.0);
pub const DEGREE_RANGE: (u32, u32) = (2, 5);

/// Number of SVM gene units following the center blocks: C, kernel, γ, r, d.
pub const SVM_UNITS: usize = 5;

/// One candidate solution: fuzzy-clustering genes followed by SVM genes.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub fuzziness: f64,
    /// `c × m`, one center per row.
    pub centers: Array2<f64>,
    pub cost: f64,
    pub kernel: KernelKind,
    pub gamma: f64,
    pub r: f64,
    pub degree: u32,
}

impl Chromosome {
    pub fn n_clusters(&self) -> usize {
        self.centers.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.centers.ncols()
    }

    /// Scalar slots: `1 + c·m + 5`.
    pub fn slot_count(&self) -> usize {
        1 + self.centers.len() + SVM_UNITS
    }

    /// Crossover units: `{v}`, one block per center, then the SVM genes.
    pub fn unit_count(&self) -> usize {
        1 + self.n_clusters() + SVM_UNITS
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        KernelSpec {
            kind: self.kernel,
            gamma: self.gamma,
            r: self.r,
            degree: self.degree,
        }
    }

    pub fn cluster_config(&self) -> Result<ClusterConfig> {
        ClusterConfig::new(self.centers.clone(), self.fuzziness)
    }

    /// Checks cluster count and every gene against its range.
    pub fn validate(&self, max_clusters: usize) -> Result<()> {
        let within = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
        let c = self.n_clusters();
        if !(2..=max_clusters).contains(&c) {
            return Err(Error::Config(format!("{c} clusters outside [2, {max_clusters}]")));
        }
        if !within(self.fuzziness, FUZZINESS_RANGE)
            || !within(self.cost, COST_RANGE)
            || !within(self.gamma, GAMMA_RANGE)
            || !within(self.r, R_RANGE)
            || !(DEGREE_RANGE.0..=DEGREE_RANGE.1).contains(&self.degree)
            || self.centers.iter().any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::Config(format!("gene out of range in {self:?}")));
        }
        Ok(())
    }
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    rng.random_range(lo..=hi)
}

pub(crate) fn random_kernel<R: Rng + ?Sized>(rng: &mut R) -> KernelKind {
    KernelKind::ALL[rng.random_range(0..KernelKind::ALL.len())]
}

pub(crate) fn random_degree<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    rng.random_range(DEGREE_RANGE.0..=DEGREE_RANGE.1)
}

/// Cluster count uniform in `{2..max_clusters}`, every gene uniform in its
/// range.
pub fn random_chromosome<R: Rng + ?Sized>(max_clusters: usize, m: usize, rng: &mut R) -> Chromosome {
    assert!(m >= 1 && max_clusters >= 2);
    let c = rng.random_range(2..=max_clusters);
    let fuzziness = uniform(rng, FUZZINESS_RANGE);
    let centers = Array2::from_shape_simple_fn((c, m), || rng.random::<f64>());
    Chromosome {
        fuzziness,
        centers,
        cost: uniform(rng, COST_RANGE),
        kernel: random_kernel(rng),
        gamma: uniform(rng, GAMMA_RANGE),
        r: uniform(rng, R_RANGE),
        degree: random_degree(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slot_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = random_chromosome(10, 4, &mut rng);
        let c = ch.n_clusters();
        assert!((2..=10).contains(&c));
        assert_eq!(ch.slot_count(), 1 + c * 4 + 5);
        assert_eq!(ch.unit_count(), 1 + c + 5);
        ch.validate(10).unwrap();
    }

    #[test]
    fn cluster_count_histogram_covers_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [0usize; 11];
        for _ in 0..1000 {
            let ch = random_chromosome(10, 3, &mut rng);
            ch.validate(10).unwrap();
            seen[ch.n_clusters()] += 1;
        }
        assert!(seen[2..].iter().all(|&k| k > 0), "{seen:?}");
        assert_eq!(seen[0] + seen[1], 0);
    }

    #[test]
    fn same_rng_state_same_chromosome() {
        let a = random_chromosome(10, 5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_chromosome(10, 5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
