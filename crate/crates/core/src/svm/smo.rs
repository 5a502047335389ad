//! Soft-margin SVM dual solved by sequential minimal optimization.
//!
//! Minimizes `½ αᵀQα − Σα` subject to `0 ≤ α ≤ C` and `yᵀα = 0`, where
//! `Q_ij = y_i y_j K_ij`. Each step picks the maximal violating index and a
//! partner chosen by the second-order gain, then solves the two-variable
//! subproblem analytically.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Curvature floor for non-positive-definite pairs (e.g. sigmoid kernels).
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    /// Iteration cap; `None` means `100 · max(n, 100)`.
    pub max_iterations: Option<usize>,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            tolerance: 1e-3,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ α_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    /// Dual objective `Σα − ½ αᵀQα` (to be maximized).
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the dual over the sub-problem `rows` of a precomputed Gram matrix.
/// `y[t]` is the ±1 label of `rows[t]`.
pub fn solve_dual(
    gram: &Array2<f64>,
    rows: &[usize],
    y: &[f64],
    cost: f64,
    params: &SmoParams,
) -> Result<DualSolution> {
    let n = rows.len();
    assert_eq!(n, y.len());
    if !(cost > 0.0) {
        return Err(Error::Config(format!("cost {cost} must be positive")));
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(Error::InvalidData("binary SVM needs both labels".into()));
    }

    let k = |a: usize, b: usize| gram[[rows[a], rows[b]]];
    let diag: Vec<f64> = (0..n).map(|t| k(t, t)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_iterations.unwrap_or(100 * n.max(100));
    let upper = |a: f64| a >= cost;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    loop {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = if y[t] > 0.0 {
                !upper(alpha[t])
            } else {
                !lower(alpha[t])
            };
            if in_up && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        // j: best second-order gain in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_gain = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                let in_low = if y[t] > 0.0 {
                    !lower(alpha[t])
                } else {
                    !upper(alpha[t])
                };
                if !in_low {
                    continue;
                }
                let v = y[t] * grad[t];
                gmax2 = gmax2.max(v);
                let grad_diff = gmax + v;
                if grad_diff > 0.0 {
                    let quad = diag[i] + diag[t] - 2.0 * k(i, t);
                    let gain = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                    if gain <= best_gain {
                        best_gain = gain;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < params.tolerance || j == usize::MAX {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations });
        }
        iterations += 1;

        let (ci, cj) = (cost, cost);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = k(i, j);
        if y[i] != y[j] {
            let quad = diag[i] + diag[j] - 2.0 * kij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = diag[i] + diag[j] - 2.0 * kij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
        }
    }

    // bias from free vectors, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    // Σα − ½αᵀQα = −½ Σ α_t (g_t − 1) with g = Qα − 1
    let objective = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    Ok(DualSolution {
        alpha,
        bias: -rho,
        objective,
        iterations,
    })
}
