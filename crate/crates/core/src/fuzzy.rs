//! Fuzzy-clustering memberships and membership-weighted imputation.
//!
//! Centers are supplied by the caller (they are decision variables of the
//! evolutionary search), so there is no alternating center update here.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::data::MaskedDataset;
use crate::error::{Error, Result};

/// Squared distances at or below this are treated as coincident.
pub const ZERO_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// `c × m`, one center per row.
    pub centers: Array2<f64>,
    pub fuzziness: f64,
}

impl ClusterConfig {
    pub fn new(centers: Array2<f64>, fuzziness: f64) -> Result<Self> {
        if centers.nrows() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 clusters, got {}",
                centers.nrows()
            )));
        }
        if !(fuzziness > 1.0) {
            return Err(Error::Config(format!("fuzziness {fuzziness} must exceed 1")));
        }
        if centers.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Config("center coordinates must lie in [0, 1]".into()));
        }
        Ok(ClusterConfig { centers, fuzziness })
    }

    pub fn n_clusters(&self) -> usize {
        self.centers.nrows()
    }
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Membership degrees of one point in every cluster.
///
/// `u_k = [Σ_j (d_k / d_j)^(1/(v−1))]⁻¹` on squared Euclidean distances. A
/// point sitting on a center belongs to it entirely; when it sits on several
/// coincident centers the mass is split evenly among them.
pub fn membership(x: ArrayView1<f64>, cfg: &ClusterConfig) -> Vec<f64> {
    let c = cfg.n_clusters();
    let dist: Vec<f64> = cfg
        .centers
        .axis_iter(Axis(0))
        .map(|center| squared_distance(x, center))
        .collect();

    let zeros = dist.iter().filter(|&&d| d <= ZERO_DISTANCE).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return dist
            .iter()
            .map(|&d| if d <= ZERO_DISTANCE { share } else { 0.0 })
            .collect();
    }

    // u_k ∝ d_k^(−1/(v−1)), normalized in log space.
    let p = 1.0 / (cfg.fuzziness - 1.0);
    let logs: Vec<f64> = dist.iter().map(|d| -p * d.ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut u: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = u.iter().sum();
    u.iter_mut().for_each(|w| *w /= total);
    debug_assert_eq!(u.len(), c);
    u
}

/// Row-wise memberships for every point, `n × c`.
pub fn memberships(data: ArrayView2<f64>, cfg: &ClusterConfig) -> Array2<f64> {
    let mut u = Array2::zeros((data.nrows(), cfg.n_clusters()));
    for (i, row) in data.axis_iter(Axis(0)).enumerate() {
        for (k, value) in membership(row, cfg).into_iter().enumerate() {
            u[[i, k]] = value;
        }
    }
    u
}

/// Index of the largest membership per row (lowest index on ties).
pub fn hard_assignment(u: &Array2<f64>) -> Vec<usize> {
    u.axis_iter(Axis(0))
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                    if v > best.1 {
                        (k, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

/// Column means of observed values fill the masked cells.
pub fn mean_impute(d: &MaskedDataset) -> Result<Array2<f64>> {
    let mut out = d.base.features.clone();
    for j in 0..d.n_features() {
        let (sum, count) = d
            .base
            .features
            .column(j)
            .iter()
            .zip(d.mask.column(j))
            .filter(|(_, &missing)| !missing)
            .fold((0.0, 0usize), |(s, c), (&v, _)| (s + v, c + 1));
        if count == 0 {
            return Err(Error::InvalidData(format!("column {j} is fully missing")));
        }
        let mean = sum / count as f64;
        for i in 0..d.n_rows() {
            if d.mask[[i, j]] {
                out[[i, j]] = mean;
            }
        }
    }
    Ok(out)
}

/// Replaces every masked cell `(i, j)` by `Σ_k u_ik · c_kj`, with memberships
/// computed from the `baseline` rows. Observed cells are copied unchanged.
pub fn impute(d: &MaskedDataset, cfg: &ClusterConfig, baseline: &Array2<f64>) -> Array2<f64> {
    let u = memberships(baseline.view(), cfg);
    impute_with(d, cfg, &u)
}

/// [`impute`] with precomputed memberships.
pub fn impute_with(d: &MaskedDataset, cfg: &ClusterConfig, u: &Array2<f64>) -> Array2<f64> {
    let mut out = d.base.features.clone();
    for ((i, j), &missing) in d.mask.indexed_iter() {
        if missing {
            out[[i, j]] = u
                .row(i)
                .iter()
                .zip(cfg.centers.column(j))
                .map(|(w, c)| w * c)
                .sum();
        }
    }
    out
}

/// `Σ_i Σ_k u_ik^v ‖x_i − c_k‖²`.
pub fn fcm_objective(data: ArrayView2<f64>, cfg: &ClusterConfig, u: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    for (i, x) in data.axis_iter(Axis(0)).enumerate() {
        for (k, center) in cfg.centers.axis_iter(Axis(0)).enumerate() {
            total += u[[i, k]].powf(cfg.fuzziness) * squared_distance(x, center);
        }
    }
    total
}
