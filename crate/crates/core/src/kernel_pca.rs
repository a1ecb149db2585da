//! Kernel PCA from the double-centered Gram matrix. Reconstruction is not
//! available: the feature map only exists through kernel evaluations.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{center_oos_kernel, center_train_kernel, kernel_matrix, KernelSpec};
use crate::linalg::{psd_rank, sym_eig_sorted, DataMatrix};
use crate::pca::{columnwise, Embedding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    #[serde(with = "crate::linalg::serde_matrix")]
    pub right_vectors: DMatrix<f64>,
    /// Square roots of the leading eigenvalues of the centered kernel.
    #[serde(with = "crate::linalg::serde_vector")]
    pub singular: DVector<f64>,
    pub spec: KernelSpec,
    #[serde(with = "crate::linalg::serde_data")]
    pub train_data: DataMatrix,
    /// Uncentered training kernel; out-of-sample centering needs it.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub train_kernel: DMatrix<f64>,
}

impl KernelModel {
    pub fn components(&self) -> usize {
        self.singular.len()
    }
}

/// Leading eigenpairs of a symmetric operator that should be PSD.
///
/// Eigenvalues below the rank tolerance are unavailable; requesting one that
/// is clearly negative is a `NotPositiveSemidefinite` error.
pub(crate) fn leading_kernel_eigen(
    op: &DMatrix<f64>,
    p: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = op.nrows();
    if p == 0 || p > n {
        return Err(Error::RankExceeded {
            requested: p,
            available: if p == 0 { 0 } else { n },
        });
    }
    let all = sym_eig_sorted(op, n)?;
    let largest = all.values[0].max(0.0);
    let rank = psd_rank(all.values.as_slice(), n);
    if p > rank {
        let value = all.values[p - 1];
        if value < -1e-8 * largest {
            return Err(Error::NotPositiveSemidefinite { value, largest });
        }
        return Err(Error::RankExceeded {
            requested: p,
            available: rank,
        });
    }
    let negative = all.values.iter().filter(|&&v| v < -1e-8 * largest).count();
    if negative > 0 {
        warn!("dropping {negative} negative eigenvalues of an indefinite kernel");
    }
    Ok((
        all.vectors.columns(0, p).into_owned(),
        all.values.rows(0, p).map(f64::sqrt),
    ))
}

pub fn fit_kpca(x: &DataMatrix, spec: &KernelSpec, p: usize) -> Result<KernelModel> {
    spec.validate()?;
    let k = kernel_matrix(spec, x, x)?.entries;
    let centered = center_train_kernel(&k)?;
    let (right_vectors, singular) = leading_kernel_eigen(&centered, p)?;
    Ok(KernelModel {
        right_vectors,
        singular,
        spec: *spec,
        train_data: x.clone(),
        train_kernel: k,
    })
}

/// `Σ V^T`.
pub fn project_train(model: &KernelModel) -> Embedding {
    let mut e = model.right_vectors.transpose();
    for (i, s) in model.singular.iter().enumerate() {
        e.row_mut(i).scale_mut(*s);
    }
    Embedding::new(e)
}

/// `Σ^{-1} V^T K̆_t` with `K̆_t` centered by the training kernel statistics.
pub fn project_oos(model: &KernelModel, xt: &DataMatrix) -> Result<Embedding> {
    if xt.features() != model.train_data.features() {
        return Err(Error::dim(format!(
            "model expects {} features, data has {}",
            model.train_data.features(),
            xt.features()
        )));
    }
    let kt = kernel_matrix(&model.spec, &model.train_data, xt)?.entries;
    let kt_c = center_oos_kernel(&model.train_kernel, &kt)?;
    let mut e = columnwise(&model.right_vectors.transpose(), &kt_c);
    for (i, s) in model.singular.iter().enumerate() {
        e.row_mut(i).unscale_mut(*s);
    }
    Ok(Embedding::new(e))
}

/// Always fails: kernel PCA cannot reconstruct training or out-of-sample data.
pub fn reconstruct_any(_model: &KernelModel) -> Result<DataMatrix> {
    Err(Error::unsupported("kernel PCA"))
}
