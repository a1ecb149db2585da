//! Supervised PCA: feature scoring against a single label vector, the HSIC
//! dependence measure, HSIC-maximizing SPCA and its dual form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    add_mean, center_data, double_center, psd_rank, right_center, subtract_mean, svd,
    sym_eig_sorted, DataMatrix, SvdMode,
};
use crate::pca::{self, columnwise, leading_psd_eigen, symmetrize, Embedding, LinearSubspaceModel};

/// Per-feature relevance scores and the features sorted by them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScores {
    pub scores: Vec<f64>,
    /// Feature indices by descending score; ties keep index order.
    pub order: Vec<usize>,
}

/// Options shared by the HSIC-based fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpcaOptions {
    /// Center the training data first and subtract its mean from every
    /// projected sample. Off by default: the objective already centers
    /// through `H`.
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSpcaModel {
    /// Δ with `Δ Δ^T = K_y`.
    #[serde(with = "crate::linalg::serde_matrix")]
    pub delta: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_matrix")]
    pub right_vectors: DMatrix<f64>,
    #[serde(with = "crate::linalg::serde_vector")]
    pub singular: DVector<f64>,
    /// Training data as used in the formulas (already centered when the
    /// model was fitted with pre-centering).
    #[serde(with = "crate::linalg::serde_data")]
    pub train_data: DataMatrix,
    /// Training mean when fitted with pre-centering.
    #[serde(default, with = "optional_vector")]
    pub mean: Option<DVector<f64>>,
}

mod optional_vector {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<DVector<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.as_slice().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DVector<f64>>, D::Error> {
        let v: Option<Vec<f64>> = Deserialize::deserialize(d)?;
        Ok(v.map(DVector::from_vec))
    }
}

/// `s_j = (x^j . y) / |x^j|` for every feature row `x^j`.
///
/// All-zero feature rows score 0.
pub fn score_features(x: &DataMatrix, y: &[f64]) -> Result<FeatureScores> {
    if y.len() != x.samples() {
        return Err(Error::dim(format!(
            "{} labels for {} samples",
            y.len(),
            x.samples()
        )));
    }
    let y = DVector::from_column_slice(y);
    let scores: Vec<f64> = x
        .as_matrix()
        .row_iter()
        .map(|row| {
            let norm = row.norm();
            if norm == 0.0 {
                0.0
            } else {
                row.transpose().dot(&y) / norm
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(FeatureScores { scores, order })
}

/// Keeps the `q` best-scoring feature rows. The returned indices (and the
/// rows) are in original feature order.
pub fn select_features(
    x: &DataMatrix,
    scores: &FeatureScores,
    q: usize,
) -> Result<(DataMatrix, Vec<usize>)> {
    let d = x.features();
    if scores.order.len() != d {
        return Err(Error::dim(format!(
            "scores cover {} features, data has {d}",
            scores.order.len()
        )));
    }
    if q == 0 || q > d {
        return Err(Error::dim(format!("cannot keep {q} of {d} features")));
    }
    let mut keep = scores.order[..q].to_vec();
    keep.sort_unstable();
    Ok((select_rows(x, &keep)?, keep))
}

/// Restricts `x` to the given feature rows.
pub fn select_rows(x: &DataMatrix, rows: &[usize]) -> Result<DataMatrix> {
    let m = x.as_matrix();
    if let Some(&bad) = rows.iter().find(|&&r| r >= m.nrows()) {
        return Err(Error::dim(format!("feature index {bad} out of range")));
    }
    DataMatrix::new(DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)]))
}

/// Scoring SPCA: PCA on the `q` features that score highest against `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringSpcaModel {
    pub scores: FeatureScores,
    /// Retained feature indices in original order.
    pub selected: Vec<usize>,
    /// PCA fitted on the retained feature rows.
    pub pca: LinearSubspaceModel,
}

impl ScoringSpcaModel {
    pub fn features(&self) -> usize {
        self.scores.scores.len()
    }

    pub fn components(&self) -> usize {
        self.pca.components()
    }
}

pub fn fit_scoring_spca(
    x: &DataMatrix,
    y: &[f64],
    q: usize,
    p: usize,
    opts: pca::PcaOptions,
) -> Result<ScoringSpcaModel> {
    let scores = score_features(x, y)?;
    let (reduced, selected) = select_features(x, &scores, q)?;
    let pca = pca::fit_pca_eig_with(&reduced, p, opts)?;
    Ok(ScoringSpcaModel {
        scores,
        selected,
        pca,
    })
}

/// Restricts `x` to the retained features and projects with the inner PCA.
pub fn scoring_spca_project(model: &ScoringSpcaModel, x: &DataMatrix) -> Result<Embedding> {
    if x.features() != model.features() {
        return Err(Error::dim(format!(
            "model expects {} features, data has {}",
            model.features(),
            x.features()
        )));
    }
    pca::project(&model.pca, &select_rows(x, &model.selected)?)
}

/// Always fails: discarded features cannot be recovered.
pub fn scoring_spca_reconstruct(_model: &ScoringSpcaModel) -> Result<DataMatrix> {
    Err(Error::ReconstructionUnsupported {
        method: "scoring SPCA".into(),
        reason: "features dropped by the selection step are not modelled".into(),
    })
}

/// Empirical HSIC `tr(Kx H Ky H) / (n-1)^2`.
pub fn hsic(kx: &DMatrix<f64>, ky: &DMatrix<f64>) -> Result<f64> {
    if !kx.is_square() || kx.shape() != ky.shape() {
        return Err(Error::dim(format!(
            "HSIC needs two square kernels of equal size, got {:?} and {:?}",
            kx.shape(),
            ky.shape()
        )));
    }
    let n = kx.nrows();
    if n < 2 {
        return Err(Error::DegenerateInput("HSIC needs at least two samples".into()));
    }
    // tr(Kx H Ky H) = sum_ij Kx_ij (H Ky H)_ji
    let hkyh = double_center(ky)?;
    let tr = kx.component_mul(&hkyh.transpose()).sum();
    Ok(tr / ((n - 1) * (n - 1)) as f64)
}

fn check_label_kernel(x: &DataMatrix, ky: &DMatrix<f64>) -> Result<()> {
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

/// The SPCA operator `X H Ky H X^T`.
pub fn spca_operator(x: &DataMatrix, ky: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_label_kernel(x, ky)?;
    let xh = right_center(x.as_matrix());
    Ok(symmetrize(&xh * ky * xh.transpose()))
}

/// Directions maximizing HSIC between the projected data and the labels.
pub fn fit_spca(x: &DataMatrix, ky: &DMatrix<f64>, p: usize) -> Result<LinearSubspaceModel> {
    fit_spca_with(x, ky, p, SpcaOptions::default())
}

pub fn fit_spca_with(
    x: &DataMatrix,
    ky: &DMatrix<f64>,
    p: usize,
    opts: SpcaOptions,
) -> Result<LinearSubspaceModel> {
    let op = spca_operator(x, ky)?;
    let (directions, spectrum) = leading_psd_eigen(&op, p)?;
    let mean = if opts.center {
        center_data(x).mean
    } else {
        DVector::zeros(x.features())
    };
    Ok(LinearSubspaceModel {
        directions,
        mean,
        spectrum,
        centered: opts.center,
    })
}

/// `U^T X` (or `U^T (X - mean)` with pre-centering); training and
/// out-of-sample data share the formula.
pub fn spca_project(model: &LinearSubspaceModel, x: &DataMatrix) -> Result<Embedding> {
    pca::project(model, x)
}

/// `U U^T X`.
pub fn spca_reconstruct(model: &LinearSubspaceModel, x: &DataMatrix) -> Result<DataMatrix> {
    pca::reconstruct(model, &pca::project(model, x)?)
}

/// Factors `Ky = Δ Δ^T` with `Δ = Q Ω^{1/2}`.
///
/// Eigenvalues in `[-1e-8 λ_max, 0)` and those below the rank tolerance are
/// treated as zero.
pub fn decompose_label_kernel(ky: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = ky.nrows();
    if n == 0 || !ky.is_square() {
        return Err(Error::dim(format!(
            "label kernel must be square and non-empty, got {}x{}",
            ky.nrows(),
            ky.ncols()
        )));
    }
    let e = sym_eig_sorted(ky, n)?;
    let largest = e.values[0].max(0.0);
    let lowest = e.values[n - 1];
    if lowest < -1e-8 * largest || (largest == 0.0 && lowest < 0.0) {
        return Err(Error::NotPositiveSemidefinite {
            value: lowest,
            largest,
        });
    }
    let rank = psd_rank(e.values.as_slice(), n);
    let mut delta = e.vectors;
    for j in 0..n {
        let w = if j < rank { e.values[j].sqrt() } else { 0.0 };
        delta.column_mut(j).scale_mut(w);
    }
    Ok(delta)
}

/// Dual SPCA: incomplete SVD of `Ψ = X H Δ`.
pub fn fit_dual_spca(x: &DataMatrix, ky: &DMatrix<f64>, p: usize) -> Result<DualSpcaModel> {
    fit_dual_spca_with(x, ky, p, SpcaOptions::default())
}

pub fn fit_dual_spca_with(
    x: &DataMatrix,
    ky: &DMatrix<f64>,
    p: usize,
    opts: SpcaOptions,
) -> Result<DualSpcaModel> {
    check_label_kernel(x, ky)?;
    let (train, mean) = if opts.center {
        let c = center_data(x);
        (DataMatrix::new(c.entries)?, Some(c.mean))
    } else {
        (x.clone(), None)
    };
    let delta = decompose_label_kernel(ky)?;
    let psi = right_center(train.as_matrix()) * &delta;
    let f = svd(&psi, SvdMode::Incomplete);
    let rank = f.singular.len();
    if p == 0 || p > rank {
        return Err(Error::RankExceeded {
            requested: p,
            available: rank,
        });
    }
    Ok(DualSpcaModel {
        delta,
        right_vectors: f.right.columns(0, p).into_owned(),
        singular: f.singular.rows(0, p).into_owned(),
        train_data: train,
        mean,
    })
}

impl DualSpcaModel {
    pub fn components(&self) -> usize {
        self.singular.len()
    }

    /// `Ψ = X H Δ`.
    pub fn psi(&self) -> DMatrix<f64> {
        right_center(self.train_data.as_matrix()) * &self.delta
    }

    /// Directions `U = Ψ V Σ^{-1}`.
    pub fn directions(&self) -> DMatrix<f64> {
        let mut u = self.psi() * &self.right_vectors;
        for (j, s) in self.singular.iter().enumerate() {
            u.column_mut(j).unscale_mut(*s);
        }
        u
    }

    fn argument(&self, x: &DataMatrix) -> Result<DMatrix<f64>> {
        if x.features() != self.train_data.features() {
            return Err(Error::dim(format!(
                "model expects {} features, data has {}",
                self.train_data.features(),
                x.features()
            )));
        }
        Ok(match &self.mean {
            Some(mean) => subtract_mean(x.as_matrix(), mean),
            None => x.as_matrix().clone(),
        })
    }

    /// `V^T Δ^T H X^T x` per column.
    fn coordinates(&self, x: &DataMatrix) -> Result<DMatrix<f64>> {
        let arg = self.argument(x)?;
        let inner = columnwise(&self.psi().transpose(), &arg);
        Ok(columnwise(&self.right_vectors.transpose(), &inner))
    }
}

/// `Σ^{-1} V^T Δ^T H X^T X_arg`, for training or out-of-sample data.
pub fn dual_spca_project(model: &DualSpcaModel, x: &DataMatrix) -> Result<Embedding> {
    let mut e = model.coordinates(x)?;
    for (i, s) in model.singular.iter().enumerate() {
        e.row_mut(i).unscale_mut(*s);
    }
    Ok(Embedding::new(e))
}

/// `X H Δ V Σ^{-2} V^T Δ^T H X^T X_arg`.
pub fn dual_spca_reconstruct(model: &DualSpcaModel, x: &DataMatrix) -> Result<DataMatrix> {
    let mut coords = model.coordinates(x)?;
    for (i, s) in model.singular.iter().enumerate() {
        coords.row_mut(i).unscale_mut(s * s);
    }
    let back = model.psi() * (&model.right_vectors * coords);
    let back = match &model.mean {
        Some(mean) => add_mean(&back, mean),
        None => back,
    };
    DataMatrix::new(back)
}
