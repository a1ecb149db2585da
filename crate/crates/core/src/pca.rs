//! Direct PCA through the scatter matrix or the SVD of centered data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    add_mean, center_data, psd_rank, subtract_mean, svd, sym_eig_sorted, DataMatrix, SvdMode,
};

/// Projection directions plus the statistics needed to embed new data.
///
/// `spectrum` holds the eigenvalues of the scatter matrix (or σ² when
/// fitted by SVD). When `centered` is false the mean is all zero and
/// projections use raw data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSubspaceModel {
    #[serde(with = "crate::linalg::serde_matrix")]
    pub directions: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_vector")]
    pub mean: DVector<f64>,
    #[serde(with = "crate::linalg::serde_vector")]
    pub spectrum: DVector<f64>,
    pub centered: bool,
}

impl LinearSubspaceModel {
    pub fn features(&self) -> usize {
        self.directions.nrows()
    }

    pub fn components(&self) -> usize {
        self.directions.ncols()
    }
}

/// Embedded samples, one column per sample (p×n).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub entries: DMatrix<f64>,
}

impl Embedding {
    pub fn new(entries: DMatrix<f64>) -> Self {
        Embedding { entries }
    }

    pub fn components(&self) -> usize {
        self.entries.nrows()
    }

    pub fn samples(&self) -> usize {
        self.entries.ncols()
    }

    /// Samples as rows.
    pub fn to_sample_rows(&self) -> Vec<Vec<f64>> {
        crate::linalg::matrix_to_rows(&self.entries.transpose())
    }
}

/// Scree data: eigenvalues, their share of the total, and running totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
    pub cumulative: Vec<f64>,
}

/// Options for direct PCA fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcaOptions {
    /// Subtract the training mean (false gives the LSI variant).
    pub center: bool,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions { center: true }
    }
}

/// Unnormalized scatter matrix `S = X H X^T = sum x̆ x̆^T`.
pub fn scatter_matrix(x: &DataMatrix) -> Result<DMatrix<f64>> {
    if x.samples() < 2 {
        return Err(Error::DegenerateInput(
            "scatter matrix needs at least two samples; one point is zero after centering".into(),
        ));
    }
    let c = center_data(x).entries;
    Ok(symmetrize(&c * c.transpose()))
}

/// `a * b` evaluated one column of `b` at a time, so a column gives the same
/// bits whether it is multiplied alone or as part of a batch.
pub(crate) fn columnwise(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for (j, col) in b.column_iter().enumerate() {
        out.set_column(j, &(a * col));
    }
    out
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn second_moment(x: &DataMatrix, opts: PcaOptions) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if opts.center {
        let mean = center_data(x).mean;
        Ok((scatter_matrix(x)?, mean))
    } else {
        let m = x.as_matrix();
        Ok((symmetrize(m * m.transpose()), DVector::zeros(x.features())))
    }
}

/// Top-`p` eigenvectors of a symmetric PSD operator, failing with
/// `RankExceeded` when fewer than `p` eigenvalues are numerically non-zero.
pub(crate) fn leading_psd_eigen(m: &DMatrix<f64>, p: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let dim = m.nrows();
    if p == 0 {
        return Err(Error::RankExceeded {
            requested: 0,
            available: 0,
        });
    }
    if p > dim {
        return Err(Error::RankExceeded {
            requested: p,
            available: dim,
        });
    }
    let all = sym_eig_sorted(m, dim)?;
    let rank = psd_rank(all.values.as_slice(), dim);
    if p > rank {
        return Err(Error::RankExceeded {
            requested: p,
            available: rank,
        });
    }
    Ok((
        all.vectors.columns(0, p).into_owned(),
        all.values.rows(0, p).into_owned(),
    ))
}

/// Number of non-zero principal components of `x`.
pub fn available_components(x: &DataMatrix, opts: PcaOptions) -> Result<usize> {
    let (s, _) = second_moment(x, opts)?;
    let all = sym_eig_sorted(&s, s.nrows())?;
    Ok(psd_rank(all.values.as_slice(), s.nrows()))
}

/// PCA by eigendecomposition of the scatter matrix.
pub fn fit_pca_eig(x: &DataMatrix, p: usize) -> Result<LinearSubspaceModel> {
    fit_pca_eig_with(x, p, PcaOptions::default())
}

pub fn fit_pca_eig_with(x: &DataMatrix, p: usize, opts: PcaOptions) -> Result<LinearSubspaceModel> {
    let (s, mean) = second_moment(x, opts)?;
    let (directions, spectrum) = leading_psd_eigen(&s, p)?;
    Ok(LinearSubspaceModel {
        directions,
        mean,
        spectrum,
        centered: opts.center,
    })
}

/// PCA from the left singular vectors of the centered data.
pub fn fit_pca_svd(x: &DataMatrix, p: usize) -> Result<LinearSubspaceModel> {
    fit_pca_svd_with(x, p, PcaOptions::default())
}

pub fn fit_pca_svd_with(x: &DataMatrix, p: usize, opts: PcaOptions) -> Result<LinearSubspaceModel> {
    let (data, mean) = if opts.center {
        if x.samples() < 2 {
            return Err(Error::DegenerateInput(
                "PCA needs at least two samples".into(),
            ));
        }
        let c = center_data(x);
        (c.entries, c.mean)
    } else {
        (x.as_matrix().clone(), DVector::zeros(x.features()))
    };
    let f = svd(&data, SvdMode::Incomplete);
    let rank = f.singular.len();
    if p == 0 || p > rank {
        return Err(Error::RankExceeded {
            requested: p,
            available: rank,
        });
    }
    Ok(LinearSubspaceModel {
        directions: f.left.columns(0, p).into_owned(),
        mean,
        spectrum: f.singular.rows(0, p).map(|s| s * s),
        centered: opts.center,
    })
}

fn check_features(model: &LinearSubspaceModel, x: &DataMatrix) -> Result<()> {
    if x.features() != model.features() {
        return Err(Error::dim(format!(
            "model expects {} features, data has {}",
            model.features(),
            x.features()
        )));
    }
    Ok(())
}

/// `U^T (X - mean)`; the same formula serves training and out-of-sample data.
pub fn project(model: &LinearSubspaceModel, x: &DataMatrix) -> Result<Embedding> {
    check_features(model, x)?;
    let data = if model.centered {
        subtract_mean(x.as_matrix(), &model.mean)
    } else {
        x.as_matrix().clone()
    };
    Ok(Embedding {
        entries: columnwise(&model.directions.transpose(), &data),
    })
}

/// `U E + mean`.
pub fn reconstruct(model: &LinearSubspaceModel, e: &Embedding) -> Result<DataMatrix> {
    if e.components() != model.components() {
        return Err(Error::dim(format!(
            "model has {} components, embedding has {}",
            model.components(),
            e.components()
        )));
    }
    let back = &model.directions * &e.entries;
    let back = if model.centered {
        add_mean(&back, &model.mean)
    } else {
        back
    };
    DataMatrix::new(back)
}

/// `|X̆ - U U^T X̆|_F^2`.
pub fn reconstruction_error(model: &LinearSubspaceModel, x: &DataMatrix) -> Result<f64> {
    check_features(model, x)?;
    let xc = if model.centered {
        subtract_mean(x.as_matrix(), &model.mean)
    } else {
        x.as_matrix().clone()
    };
    let u = &model.directions;
    let resid = &xc - u * (u.transpose() * &xc);
    Ok(resid.norm_squared())
}

/// Eigenvalue ratios and cumulative ratios for choosing `p`.
pub fn spectrum_report(eigenvalues: &[f64]) -> Result<SpectrumReport> {
    if eigenvalues.is_empty() {
        return Err(Error::EmptyInput("spectrum has no eigenvalues".into()));
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    if !(total.abs() > 0.0) || sorted.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput("spectrum is all zero".into()));
    }
    let ratios: Vec<f64> = sorted.iter().map(|v| v / total).collect();
    let cumulative = ratios
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    Ok(SpectrumReport {
        eigenvalues: sorted,
        ratios,
        cumulative,
    })
}

/// Full scatter-matrix spectrum of `x`, for scree analysis.
pub fn full_spectrum(x: &DataMatrix, opts: PcaOptions) -> Result<Vec<f64>> {
    let (s, _) = second_moment(x, opts)?;
    let e = sym_eig_sorted(&s, s.nrows())?;
    Ok(e.values.iter().map(|v| v.max(0.0)).collect())
}

/// Collapses stacked linear encoder layers `U_1 ... U_m` into one matrix.
pub fn compose_linear_layers(layers: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let (first, rest) = layers
        .split_first()
        .ok_or_else(|| Error::EmptyInput("no layers to compose".into()))?;
    rest.iter().enumerate().try_fold(first.clone(), |acc, (i, layer)| {
        if acc.ncols() != layer.nrows() {
            return Err(Error::dim(format!(
                "layer {} is {}x{} but the product so far has {} columns",
                i + 1,
                layer.nrows(),
                layer.ncols(),
                acc.ncols()
            )));
        }
        Ok(acc * layer)
    })
}
