//! Kernel functions, Gram matrices, label kernels, and kernel centering for
//! training and out-of-sample data.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{double_center, DataMatrix};

/// A kernel family with its scalar parameters.
///
/// * linear: `x1.x2 + c1`
/// * polynomial: `(c1 x1.x2 + c2)^c3`
/// * rbf: `exp(-gamma |x1 - x2|^2)`, `gamma = 1 / (2 sigma^2)`
/// * sigmoid: `tanh(c1 x1.x2 + c2)`
/// * cosine: `x1.x2 / (|x1| |x2|)`
/// * delta: label-only Kronecker delta
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear { c1: f64 },
    Polynomial { c1: f64, c2: f64, c3: f64 },
    Rbf { gamma: f64 },
    Sigmoid { c1: f64, c2: f64 },
    Cosine,
    Delta,
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec::Linear { c1: 0.0 }
    }

    pub fn polynomial_default() -> Self {
        KernelSpec::Polynomial {
            c1: 1.0,
            c2: 1.0,
            c3: 3.0,
        }
    }

    pub fn rbf_default(d: usize) -> Self {
        KernelSpec::Rbf {
            gamma: 1.0 / d.max(1) as f64,
        }
    }

    pub fn sigmoid_default(d: usize) -> Self {
        KernelSpec::Sigmoid {
            c1: 1.0 / d.max(1) as f64,
            c2: 0.0,
        }
    }

    /// RBF kernel from its width `sigma`.
    pub fn rbf_sigma(sigma: f64) -> Self {
        KernelSpec::Rbf {
            gamma: 1.0 / (2.0 * sigma * sigma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear { .. } => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Sigmoid { .. } => "sigmoid",
            KernelSpec::Cosine => "cosine",
            KernelSpec::Delta => "delta",
        }
    }

    /// Checks parameter constraints.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Usage(format!("invalid {} kernel: {m}", self.name())));
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                bad("gamma must be positive")
            }
            KernelSpec::Polynomial { c3, .. } if !(c3 >= 1.0) => bad("c3 must be at least 1"),
            KernelSpec::Linear { c1 } if !c1.is_finite() => bad("c1 must be finite"),
            KernelSpec::Polynomial { c1, c2, .. } | KernelSpec::Sigmoid { c1, c2 }
                if !(c1.is_finite() && c2.is_finite()) =>
            {
                bad("c1 and c2 must be finite")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear { c1 } => write!(f, "linear(c1={c1})"),
            KernelSpec::Polynomial { c1, c2, c3 } => {
                write!(f, "polynomial(c1={c1}, c2={c2}, c3={c3})")
            }
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
            KernelSpec::Sigmoid { c1, c2 } => write!(f, "sigmoid(c1={c1}, c2={c2})"),
            KernelSpec::Cosine => f.write_str("cosine"),
            KernelSpec::Delta => f.write_str("delta"),
        }
    }
}

/// A Gram matrix between two sample sets.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub spec: KernelSpec,
}

/// Per-sample label vectors stored as columns (ℓ×n).
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    pub entries: DMatrix<f64>,
}

fn eval_views(spec: &KernelSpec, a: DVectorView<f64>, b: DVectorView<f64>) -> Result<f64> {
    Ok(match *spec {
        KernelSpec::Linear { c1 } => a.dot(&b) + c1,
        KernelSpec::Polynomial { c1, c2, c3 } => (c1 * a.dot(&b) + c2).powf(c3),
        KernelSpec::Rbf { gamma } => {
            let dist2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * dist2).exp()
        }
        KernelSpec::Sigmoid { c1, c2 } => (c1 * a.dot(&b) + c2).tanh(),
        KernelSpec::Cosine => {
            let na = a.norm();
            let nb = b.norm();
            if na == 0.0 || nb == 0.0 {
                return Err(Error::DegenerateInput(
                    "cosine kernel is undefined for a zero vector".into(),
                ));
            }
            a.dot(&b) / (na * nb)
        }
        KernelSpec::Delta => return Err(Error::WrongKernelKind("delta".into())),
    })
}

/// Evaluates the kernel on two feature vectors.
pub fn kernel_eval(spec: &KernelSpec, x1: &DVector<f64>, x2: &DVector<f64>) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::dim(format!(
            "kernel arguments have lengths {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    eval_views(spec, x1.as_view(), x2.as_view())
}

/// `K[i][j] = k(x1_i, x2_j)` over the columns of both data sets.
pub fn kernel_matrix(spec: &KernelSpec, x1: &DataMatrix, x2: &DataMatrix) -> Result<KernelMatrix> {
    if x1.features() != x2.features() {
        return Err(Error::dim(format!(
            "kernel inputs have {} and {} features",
            x1.features(),
            x2.features()
        )));
    }
    if matches!(spec, KernelSpec::Delta) {
        return Err(Error::WrongKernelKind("delta".into()));
    }
    let (a, b) = (x1.as_matrix(), x2.as_matrix());
    let mut entries = DMatrix::zeros(a.ncols(), b.ncols());
    for j in 0..b.ncols() {
        for i in 0..a.ncols() {
            entries[(i, j)] = eval_views(spec, a.column(i), b.column(j))?;
        }
    }
    Ok(KernelMatrix {
        entries,
        spec: *spec,
    })
}

/// Class index per label, numbered by first appearance.
pub fn class_indices<L: Eq + Hash + Clone>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut seen: HashMap<L, usize> = HashMap::new();
    let idx = labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(l.clone()).or_insert(next)
        })
        .collect();
    (idx, seen.len())
}

/// Kronecker-delta label kernel: 1 where two samples share a class.
pub fn delta_kernel<L: Eq + Hash + Clone>(labels: &[L]) -> Result<KernelMatrix> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("delta kernel needs at least one label".into()));
    }
    let (idx, _) = class_indices(labels);
    let n = idx.len();
    Ok(KernelMatrix {
        entries: DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(idx[i] == idx[j]))),
        spec: KernelSpec::Delta,
    })
}

/// One-hot label matrix, classes in first-appearance order.
pub fn one_hot<L: Eq + Hash + Clone>(labels: &[L]) -> Result<LabelMatrix> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("one-hot encoding needs at least one label".into()));
    }
    let (idx, classes) = class_indices(labels);
    Ok(LabelMatrix {
        entries: DMatrix::from_fn(classes, idx.len(), |c, j| f64::from(u8::from(idx[j] == c))),
    })
}

/// Linear kernel `Y^T Y` over real label vectors.
pub fn linear_label_kernel(labels: &LabelMatrix) -> KernelMatrix {
    KernelMatrix {
        entries: labels.entries.transpose() * &labels.entries,
        spec: KernelSpec::linear(),
    }
}

/// Double-centered training kernel `H K H`.
pub fn center_train_kernel(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    double_center(k)
}

/// Centers a train-vs-test kernel using the training kernel statistics:
/// `Kt - (1/n) 1 Kt - (1/n) K 1 + (1/n^2) 1 K 1`.
pub fn center_oos_kernel(k: &DMatrix<f64>, kt: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !k.is_square() {
        return Err(Error::dim(format!(
            "training kernel must be square, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let n = k.nrows();
    if kt.nrows() != n {
        return Err(Error::dim(format!(
            "test kernel has {} rows, training kernel has {n}",
            kt.nrows()
        )));
    }
    let nf = n as f64;
    // column means of Kt over training index, and row means of K
    let kt_means: Vec<f64> = kt.column_iter().map(|c| c.sum() / nf).collect();
    let k_row_means: Vec<f64> = k.row_iter().map(|r| r.sum() / nf).collect();
    let k_mean = k.sum() / (nf * nf);
    Ok(DMatrix::from_fn(n, kt.ncols(), |i, j| {
        kt[(i, j)] - kt_means[j] - k_row_means[i] + k_mean
    }))
}
