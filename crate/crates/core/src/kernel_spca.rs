//! Kernel SPCA by two routes.
//!
//! The direct route solves `Kx H Ky H Kx Θ = Kx Θ Λ` for expansion
//! coefficients Θ of the directions over the mapped training samples. The
//! dual route factors `Ky = Δ Δ^T` and eigendecomposes `Δ^T H Kx H Δ`.
//! Neither route can reconstruct data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelSpec};
use crate::kernel_pca::leading_kernel_eigen;
use crate::linalg::{
    canonical_sign, double_center, left_center, svd, sym_eig_sorted, DataMatrix, SvdMode,
};
use crate::pca::{columnwise, leading_psd_eigen, symmetrize, Embedding};
use crate::spca::decompose_label_kernel;

/// Relative regularizer added to the diagonal of `Kx` before whitening.
pub const WHITENING_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpcaDirectModel {
    /// Θ, n×p, with `Θ^T (Kx + εI) Θ = I` from the whitened solve.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub theta: DMatrix<f64>,
    /// Generalized eigenvalues Λ, descending.
    #[serde(with = "crate::linalg::serde_vector")]
    pub eigenvalues: DVector<f64>,
    pub spec: KernelSpec,
    #[serde(with = "crate::linalg::serde_data")]
    pub train_data: DataMatrix,
    #[serde(with = "crate::linalg::serde_matrix")]
    pub train_kernel: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpcaDualModel {
    #[serde(with = "crate::linalg::serde_matrix")]
    pub delta: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_matrix")]
    pub right_vectors: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_vector")]
    pub singular: DVector<f64>,
    pub spec: KernelSpec,
    #[serde(with = "crate::linalg::serde_data")]
    pub train_data: DataMatrix,
    #[serde(with = "crate::linalg::serde_matrix")]
    pub train_kernel: DMatrix<f64>,
}

impl KernelSpcaDirectModel {
    pub fn components(&self) -> usize {
        self.theta.ncols()
    }
}

impl KernelSpcaDualModel {
    pub fn components(&self) -> usize {
        self.singular.len()
    }
}

fn check_inputs(x: &DataMatrix, spec: &KernelSpec, ky: &DMatrix<f64>) -> Result<()> {
    spec.validate()?;
    let n = x.samples();
    if ky.shape() != (n, n) {
        return Err(Error::dim(format!(
            "label kernel is {}x{}, data has {n} samples",
            ky.nrows(),
            ky.ncols()
        )));
    }
    Ok(())
}

fn check_label_psd(ky: &DMatrix<f64>) -> Result<()> {
    // the factorization carries the admissibility check
    decompose_label_kernel(ky).map(|_| ())
}

/// `Kx H Ky H Kx`.
pub fn supervised_kernel_operator(kx: &DMatrix<f64>, ky: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let hkyh = double_center(ky)?;
    Ok(symmetrize(kx * hkyh * kx))
}

/// Direct route: the generalized problem `(Kx H Ky H Kx, Kx + εI)` solved by
/// symmetric whitening with `ε = 1e-10 tr(Kx) / n`.
pub fn fit_kspca_direct(
    x: &DataMatrix,
    spec: &KernelSpec,
    ky: &DMatrix<f64>,
    p: usize,
) -> Result<KernelSpcaDirectModel> {
    check_inputs(x, spec, ky)?;
    check_label_psd(ky)?;
    let n = x.samples();
    let kx = kernel_matrix(spec, x, x)?.entries;
    let a = supervised_kernel_operator(&kx, ky)?;

    let scale = kx.trace().abs() / n as f64;
    let eps = WHITENING_EPSILON * if scale > 0.0 { scale } else { 1.0 };
    let b = &kx + DMatrix::identity(n, n) * eps;
    let be = sym_eig_sorted(&b, n)?;
    let lowest = be.values[n - 1];
    if !(lowest > 0.0) {
        return Err(Error::NotPositiveSemidefinite {
            value: lowest - eps,
            largest: be.values[0] - eps,
        });
    }
    // W D^{-1/2}
    let mut whitener = be.vectors.clone();
    for (j, d) in be.values.iter().enumerate() {
        whitener.column_mut(j).unscale_mut(d.sqrt());
    }
    let c = symmetrize(whitener.transpose() * &a * &whitener);
    let (z, lambda) = leading_psd_eigen(&c, p)?;
    let theta = canonical_sign(&(&whitener * z));
    Ok(KernelSpcaDirectModel {
        theta,
        eigenvalues: lambda,
        spec: *spec,
        train_data: x.clone(),
        train_kernel: kx,
    })
}

/// Direct route by the naive eigenproblem `H Ky H Kx Θ = Θ Λ` of a
/// non-symmetric matrix. Columns of Θ are rescaled to unit `θ^T Kx θ`.
pub fn fit_kspca_direct_naive(
    x: &DataMatrix,
    spec: &KernelSpec,
    ky: &DMatrix<f64>,
    p: usize,
) -> Result<KernelSpcaDirectModel> {
    check_inputs(x, spec, ky)?;
    check_label_psd(ky)?;
    let n = x.samples();
    if p == 0 || p > n {
        return Err(Error::RankExceeded {
            requested: p,
            available: if p == 0 { 0 } else { n },
        });
    }
    let kx = kernel_matrix(spec, x, x)?.entries;
    let m = double_center(ky)? * &kx;

    let eig = m.clone().complex_eigenvalues();
    let mut vals: Vec<(f64, f64)> = eig.iter().map(|c| (c.re, c.im)).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top = vals.iter().map(|v| v.0.hypot(v.1)).fold(0.0, f64::max);
    let tol = 1e-10 * top;
    let available = vals.iter().take_while(|v| v.0 > tol).count();
    if p > available || top == 0.0 {
        return Err(Error::RankExceeded {
            requested: p,
            available,
        });
    }
    if let Some(&(re, im)) = vals[..p].iter().find(|v| v.1.abs() > 1e-8 * top) {
        return Err(Error::ComplexEigenvalues { re, im });
    }

    let mut theta = DMatrix::zeros(n, p);
    let mut j = 0;
    while j < p {
        // eigenvalue cluster starting at j
        let lead = vals[j].0;
        let mut k = j + 1;
        while k < n && (vals[k].0 - lead).abs() <= 1e-8 * top {
            k += 1;
        }
        let mult = k - j;
        let shifted = &m - DMatrix::identity(n, n) * lead;
        let f = svd(&shifted, SvdMode::Complete);
        for c in 0..mult.min(p - j) {
            let v = f.right.column(n - 1 - c);
            theta.set_column(j + c, &v);
        }
        j = k;
    }
    for mut col in theta.column_iter_mut() {
        let norm2 = col.dot(&(&kx * &col));
        if !(norm2 > 0.0) {
            return Err(Error::DegenerateInput(
                "eigenvector lies in the null space of the data kernel".into(),
            ));
        }
        col.unscale_mut(norm2.sqrt());
    }
    Ok(KernelSpcaDirectModel {
        theta: canonical_sign(&theta),
        eigenvalues: DVector::from_iterator(p, vals[..p].iter().map(|v| v.0)),
        spec: *spec,
        train_data: x.clone(),
        train_kernel: kx,
    })
}

fn check_features(train: &DataMatrix, x: &DataMatrix) -> Result<()> {
    if x.features() != train.features() {
        return Err(Error::dim(format!(
            "model expects {} features, data has {}",
            train.features(),
            x.features()
        )));
    }
    Ok(())
}

/// `Θ^T Kx`.
pub fn project_direct_train(model: &KernelSpcaDirectModel) -> Embedding {
    Embedding::new(columnwise(&model.theta.transpose(), &model.train_kernel))
}

/// `Θ^T K_t` with the uncentered train-vs-test kernel.
pub fn project_direct(model: &KernelSpcaDirectModel, xt: &DataMatrix) -> Result<Embedding> {
    check_features(&model.train_data, xt)?;
    let kt = kernel_matrix(&model.spec, &model.train_data, xt)?.entries;
    Ok(Embedding::new(columnwise(&model.theta.transpose(), &kt)))
}

/// Dual route: eigenpairs of `Δ^T H Kx H Δ`.
pub fn fit_kspca_dual(
    x: &DataMatrix,
    spec: &KernelSpec,
    ky: &DMatrix<f64>,
    p: usize,
) -> Result<KernelSpcaDualModel> {
    check_inputs(x, spec, ky)?;
    let delta = decompose_label_kernel(ky)?;
    let kx = kernel_matrix(spec, x, x)?.entries;
    let h_delta = left_center(&delta);
    let op = symmetrize(h_delta.transpose() * &kx * &h_delta);
    let (right_vectors, singular) = leading_kernel_eigen(&op, p)?;
    // the operator can be pure rounding noise (a constant label kernel), so
    // its eigenvalues are also judged against the size of its factors
    let n = x.samples();
    let floor = n as f64 * f64::EPSILON * delta.norm_squared() * kx.norm();
    let available = singular.iter().take_while(|s| *s * *s > floor).count();
    if available < p {
        return Err(Error::RankExceeded {
            requested: p,
            available,
        });
    }
    Ok(KernelSpcaDualModel {
        delta,
        right_vectors,
        singular,
        spec: *spec,
        train_data: x.clone(),
        train_kernel: kx,
    })
}

fn dual_from_kernel(model: &KernelSpcaDualModel, kt: &DMatrix<f64>) -> Embedding {
    // Σ^{-1} V^T Δ^T H K_t
    let w = (&model.delta * &model.right_vectors).transpose();
    let mut e = columnwise(&w, &left_center(kt));
    for (i, s) in model.singular.iter().enumerate() {
        e.row_mut(i).unscale_mut(*s);
    }
    Embedding::new(e)
}

/// `Σ^{-1} V^T Δ^T H Kx`.
pub fn project_dual_train(model: &KernelSpcaDualModel) -> Embedding {
    dual_from_kernel(model, &model.train_kernel)
}

/// `Σ^{-1} V^T Δ^T H K_t` with the uncentered `K_t`.
pub fn project_dual(model: &KernelSpcaDualModel, xt: &DataMatrix) -> Result<Embedding> {
    check_features(&model.train_data, xt)?;
    let kt = kernel_matrix(&model.spec, &model.train_data, xt)?.entries;
    Ok(dual_from_kernel(model, &kt))
}

/// Always fails: kernel SPCA cannot reconstruct data.
pub fn reconstruct_direct(_model: &KernelSpcaDirectModel) -> Result<DataMatrix> {
    Err(Error::unsupported("kernel SPCA (direct)"))
}

/// Always fails: kernel SPCA cannot reconstruct data.
pub fn reconstruct_dual(_model: &KernelSpcaDualModel) -> Result<DataMatrix> {
    Err(Error::unsupported("kernel SPCA (dual)"))
}
