//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use moimpute::objectives::ObjectivePair;

/// Exact maximum of `Σα − ½αᵀQα` over `0 ≤ α ≤ C`, `yᵀα = 0`, found by
/// enumerating every lower/upper/free assignment and solving the KKT system
/// of the free block. Requires a positive definite kernel matrix.
pub fn qp_bruteforce(k: &DMatrix<f64>, y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let objective = |a: &[f64]| {
        let av = DVector::from_column_slice(a);
        a.iter().sum::<f64>() - 0.5 * (av.transpose() * &q * &av)[(0, 0)]
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut status = vec![0u8; n];
    for code in 0..3usize.pow(n as u32) {
        let mut rest = code;
        for s in status.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| status[i] == 2).collect();
        let mut alpha: Vec<f64> = status
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();
        if free.is_empty() {
            let eq: f64 = alpha.iter().zip(y).map(|(a, y)| a * y).sum();
            if eq.abs() > 1e-12 {
                continue;
            }
        } else {
            let f = free.len();
            let mut a = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q[(i, j)];
                }
                a[(r, f)] = y[i];
                a[(f, r)] = y[i];
                let fixed: f64 = (0..n).filter(|&j| status[j] == 1).map(|j| q[(i, j)] * c).sum();
                rhs[r] = 1.0 - fixed;
            }
            rhs[f] = -(0..n).filter(|&j| status[j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = a.lu().solve(&rhs) else { continue };
            if free.iter().enumerate().any(|(r, _)| sol[r] < -1e-12 || sol[r] > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        let value = objective(&alpha);
        if value > best.0 {
            best = (value, alpha);
        }
    }
    best
}

/// Front ranks by literal peeling: repeatedly collect every remaining point
/// not dominated by another remaining point.
pub fn peel_ranks(points: &[ObjectivePair]) -> Vec<usize> {
    let dominated = |a: &ObjectivePair, b: &ObjectivePair| {
        (a.imputation_value >= b.imputation_value && a.cv_error <= b.cv_error)
            && (a.imputation_value > b.imputation_value || a.cv_error < b.cv_error)
    };
    let n = points.len();
    let mut rank = vec![0usize; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut level = 1;
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominated(&points[j], &points[i])))
            .collect();
        for &i in &front {
            rank[i] = level;
        }
        remaining.retain(|i| !front.contains(i));
        level += 1;
    }
    rank
}

/// Fraction of a `cells × cells` grid over the unit square whose cell
/// centers are dominated by some point (maximize both axes).
pub fn grid_hypervolume(points: &[(f64, f64)], cells: usize) -> f64 {
    let mut covered = 0usize;
    for gx in 0..cells {
        let x = (gx as f64 + 0.5) / cells as f64;
        let top = points
            .iter()
            .filter(|p| p.0 >= x)
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        for gy in 0..cells {
            let y = (gy as f64 + 0.5) / cells as f64;
            if y <= top {
                covered += 1;
            }
        }
    }
    covered as f64 / (cells * cells) as f64
}
