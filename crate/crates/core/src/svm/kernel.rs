use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Linear,
    Radial,
    Polynomial,
    Sigmoid,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Linear,
        KernelKind::Radial,
        KernelKind::Polynomial,
        KernelKind::Sigmoid,
    ];
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::Radial => "radial",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Sigmoid => "sigmoid",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown kernel {s:?}")))
    }
}

/// A kernel and all of its parameters. Parameters the kind does not use are
/// carried along and ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub r: f64,
    pub degree: u32,
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: 1.0,
            r: 0.0,
            degree: 2,
        }
    }

    pub fn radial(gamma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Radial,
            gamma,
            ..Self::linear()
        }
    }

    pub fn polynomial(gamma: f64, r: f64, degree: u32) -> Self {
        KernelSpec {
            kind: KernelKind::Polynomial,
            gamma,
            r,
            degree,
        }
    }

    pub fn sigmoid(gamma: f64, r: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Sigmoid,
            gamma,
            r,
            degree: 2,
        }
    }

    /// Kernel value from the dot product and the squared distance.
    #[inline]
    fn from_parts(&self, dot: f64, sq_dist: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => dot,
            KernelKind::Radial => (-self.gamma * sq_dist).exp(),
            KernelKind::Polynomial => (self.gamma * dot + self.r).powi(self.degree as i32),
            KernelKind::Sigmoid => (self.gamma * dot + self.r).tanh(),
        }
    }

    pub fn eval(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        let dot = x.dot(&y);
        let sq: f64 = if self.kind == KernelKind::Radial {
            x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
        } else {
            0.0
        };
        self.from_parts(dot, sq)
    }

    /// `K[i][j] = k(a_i, b_j)`.
    pub fn cross(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
        let mut k = a.dot(&b.t());
        let na: Vec<f64> = a.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect();
        let nb: Vec<f64> = b.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect();
        for ((i, j), v) in k.indexed_iter_mut() {
            let sq = (na[i] + nb[j] - 2.0 * *v).max(0.0);
            *v = self.from_parts(*v, sq);
        }
        k
    }

    /// Symmetric Gram matrix of the rows of `x`.
    pub fn gram(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let dots = x.dot(&x.t());
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let sq = if i == j {
                    0.0
                } else {
                    (dots[[i, i]] + dots[[j, j]] - 2.0 * dots[[i, j]]).max(0.0)
                };
                let v = self.from_parts(dots[[i, j]], sq);
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        k
    }
}

pub fn kernel_eval(k: &KernelSpec, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    k.eval(x, y)
}
