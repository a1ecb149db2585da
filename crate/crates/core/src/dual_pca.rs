//! Dual PCA: every formula works through the right singular vectors and
//! singular values of the centered data, which is cheap when d ≫ n.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_mean, center_data, subtract_mean, svd, DataMatrix, SvdMode};
use crate::pca::{columnwise, Embedding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualModel {
    /// V, n×p.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub right_vectors: DMatrix<f64>,
    /// Diagonal of Σ, strictly positive and descending.
    #[serde(with = "crate::linalg::serde_vector")]
    pub singular: DVector<f64>,
    /// X̆, retained because every dual formula consumes it.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub centered_train: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_vector")]
    pub mean: DVector<f64>,
}

impl DualModel {
    pub fn features(&self) -> usize {
        self.centered_train.nrows()
    }

    pub fn components(&self) -> usize {
        self.singular.len()
    }

    /// Principal directions recovered as `X̆ V Σ^{-1}`.
    pub fn directions(&self) -> DMatrix<f64> {
        let mut u = &self.centered_train * &self.right_vectors;
        for (j, s) in self.singular.iter().enumerate() {
            u.column_mut(j).unscale_mut(*s);
        }
        u
    }

    fn check(&self, xt: &DataMatrix) -> Result<DMatrix<f64>> {
        if xt.features() != self.features() {
            return Err(Error::dim(format!(
                "model expects {} features, data has {}",
                self.features(),
                xt.features()
            )));
        }
        Ok(subtract_mean(xt.as_matrix(), &self.mean))
    }

    /// `V^T X̆^T x̆_t` for every column of `xt`.
    fn dual_coordinates(&self, xt: &DataMatrix) -> Result<DMatrix<f64>> {
        let centered = self.check(xt)?;
        let inner = columnwise(&self.centered_train.transpose(), &centered);
        Ok(columnwise(&self.right_vectors.transpose(), &inner))
    }
}

/// Fits from the incomplete SVD of `X̆`, keeping the top `p` triples.
pub fn fit_dual(x: &DataMatrix, p: usize) -> Result<DualModel> {
    if x.samples() < 2 {
        return Err(Error::DegenerateInput("dual PCA needs at least two samples".into()));
    }
    let c = center_data(x);
    let f = svd(&c.entries, SvdMode::Incomplete);
    let rank = f.singular.len();
    if p == 0 || p > rank {
        return Err(Error::RankExceeded {
            requested: p,
            available: rank,
        });
    }
    Ok(DualModel {
        right_vectors: f.right.columns(0, p).into_owned(),
        singular: f.singular.rows(0, p).into_owned(),
        centered_train: c.entries,
        mean: c.mean,
    })
}

/// `Σ V^T`.
pub fn project_train(model: &DualModel) -> Embedding {
    let mut e = model.right_vectors.transpose();
    for (i, s) in model.singular.iter().enumerate() {
        e.row_mut(i).scale_mut(*s);
    }
    Embedding::new(e)
}

/// `X̆ V V^T + μ`.
pub fn reconstruct_train(model: &DualModel) -> Result<DataMatrix> {
    let v = &model.right_vectors;
    let back = &model.centered_train * v * v.transpose();
    DataMatrix::new(add_mean(&back, &model.mean))
}

/// `Σ^{-1} V^T X̆^T x̆_t`.
pub fn project_oos(model: &DualModel, xt: &DataMatrix) -> Result<Embedding> {
    let mut e = model.dual_coordinates(xt)?;
    for (i, s) in model.singular.iter().enumerate() {
        e.row_mut(i).unscale_mut(*s);
    }
    Ok(Embedding::new(e))
}

/// `X̆ V Σ^{-2} V^T X̆^T x̆_t + μ`.
pub fn reconstruct_oos(model: &DualModel, xt: &DataMatrix) -> Result<DataMatrix> {
    let mut coords = model.dual_coordinates(xt)?;
    for (i, s) in model.singular.iter().enumerate() {
        coords.row_mut(i).unscale_mut(s * s);
    }
    let back = &model.centered_train * (&model.right_vectors * coords);
    DataMatrix::new(add_mean(&back, &model.mean))
}
