//! Dense matrix primitives: centering, least-squares projection, sorted
//! SVD / symmetric eigendecomposition, numerical rank and sign convention.
//!
//! Matrices follow the one-sample-per-column layout throughout.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// A d×n data matrix with one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    /// Wraps a matrix, rejecting empty shapes and non-finite entries.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::dim(format!(
                "data matrix must be non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "non-finite entry at row {}, column {}",
                i % entries.nrows(),
                i / entries.nrows()
            )));
        }
        Ok(DataMatrix(entries))
    }

    /// Builds from a list of samples (each inner vector is one sample).
    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let n = samples.len();
        let d = samples.first().map_or(0, Vec::len);
        if let Some(bad) = samples.iter().position(|s| s.len() != d) {
            return Err(Error::dim(format!(
                "sample {bad} has {} features, expected {d}",
                samples[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(d, n, |i, j| samples[j][i]))
    }

    /// Builds from a row-major feature table (each inner vector is one feature).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::dim("ragged feature rows"));
        }
        Self::new(DMatrix::from_fn(d, n, |i, j| rows[i][j]))
    }

    pub fn features(&self) -> usize {
        self.0.nrows()
    }

    pub fn samples(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Samples as rows, the layout used at I/O boundaries.
    pub fn to_sample_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.0.transpose())
    }
}

/// Data with the per-feature mean removed from every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredData {
    pub entries: DMatrix<f64>,
    pub mean: DVector<f64>,
}

/// Singular value decomposition `A = left * diag(singular) * right^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub left: DMatrix<f64>,
    pub singular: DVector<f64>,
    pub right: DMatrix<f64>,
    pub mode: SvdMode,
}

/// `Complete` keeps all `min(rows, cols)` singular triples, zeros included.
/// `Incomplete` keeps only values above the numerical-rank tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvdMode {
    Complete,
    Incomplete,
}

/// Leading eigenpairs of a symmetric matrix, sorted by descending value.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

/// The m×m centering matrix `I - (1/m) 1 1^T`.
pub fn centering_matrix(m: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::dim("centering matrix needs m >= 1"));
    }
    let off = -1.0 / m as f64;
    Ok(DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 + off } else { off }))
}

/// Row means of a matrix (the mean sample when columns are samples).
pub fn row_means(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.ncols() as f64;
    DVector::from_iterator(a.nrows(), a.row_iter().map(|r| r.sum() / n))
}

/// Column means of a matrix.
pub fn column_means(a: &DMatrix<f64>) -> DVector<f64> {
    let m = a.nrows() as f64;
    DVector::from_iterator(a.ncols(), a.column_iter().map(|c| c.sum() / m))
}

/// `X H`: subtracts the mean sample from every column.
pub fn center_data(x: &DataMatrix) -> CenteredData {
    let mean = row_means(x.as_matrix());
    CenteredData {
        entries: subtract_mean(x.as_matrix(), &mean),
        mean,
    }
}

/// Subtracts `mean` from every column of `x`.
pub fn subtract_mean(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        col -= mean;
    }
    out
}

/// Adds `mean` to every column of `x`.
pub fn add_mean(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        col += mean;
    }
    out
}

/// `H A` for any shape: removes the mean of the rows from every row.
pub fn left_center(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mu = column_means(a);
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - mu[j])
}

/// `A H` for any shape: removes the mean of the columns from every column.
pub fn right_center(a: &DMatrix<f64>) -> DMatrix<f64> {
    subtract_mean(a, &row_means(a))
}

/// `H A H` for any shape, with the left and right centering matrices sized
/// to the row and column counts.
pub fn double_center_rect(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mu_rows = column_means(a);
    let mu_cols = row_means(a);
    let mu_all = a.sum() / (a.nrows() * a.ncols()) as f64;
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        a[(i, j)] - mu_rows[j] - mu_cols[i] + mu_all
    })
}

/// `H A H` for a square matrix.
pub fn double_center(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::dim(format!(
            "double centering needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(double_center_rect(a))
}

/// Least-squares coefficients `(U^T U)^{-1} U^T x`.
pub fn projection_coefficients(u: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    if u.nrows() != x.len() {
        return Err(Error::dim(format!(
            "basis has {} rows but vector has length {}",
            u.nrows(),
            x.len()
        )));
    }
    let f = full_column_svd(u)?;
    let coords = f.left.transpose() * x;
    let scaled = coords.component_div(&f.singular);
    Ok(&f.right * scaled)
}

/// The hat matrix `U (U^T U)^{-1} U^T`.
pub fn hat_matrix(u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let f = full_column_svd(u)?;
    Ok(&f.left * f.left.transpose())
}

fn full_column_svd(u: &DMatrix<f64>) -> Result<SvdFactors> {
    if u.ncols() == 0 || u.ncols() > u.nrows() {
        return Err(Error::SingularSystem(format!(
            "{}x{} basis cannot have independent columns",
            u.nrows(),
            u.ncols()
        )));
    }
    let f = svd(u, SvdMode::Incomplete);
    if f.singular.len() < u.ncols() {
        return Err(Error::SingularSystem(format!(
            "basis has rank {} < {} columns",
            f.singular.len(),
            u.ncols()
        )));
    }
    Ok(f)
}

/// Sorted SVD with the canonical sign convention applied to the left vectors
/// (right vectors flipped in step, so the product is unchanged).
pub fn svd(a: &DMatrix<f64>, mode: SvdMode) -> SvdFactors {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return SvdFactors {
            left: DMatrix::zeros(rows, 0),
            singular: DVector::zeros(0),
            right: DMatrix::zeros(cols, 0),
            mode,
        };
    }
    let (u, s, v) = thin_svd(a);

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sorted_s: Vec<f64> = order.iter().map(|&i| s[i]).collect();

    let keep = match mode {
        SvdMode::Complete => k,
        SvdMode::Incomplete => effective_rank(&sorted_s, rows, cols),
    };
    let mut left = DMatrix::from_fn(rows, keep, |i, j| u[(i, order[j])]);
    let mut right = DMatrix::from_fn(cols, keep, |i, j| v[(i, order[j])]);
    for (j, flip) in sign_flips(&left).into_iter().enumerate() {
        if flip {
            left.column_mut(j).neg_mut();
            right.column_mut(j).neg_mut();
        }
    }
    SvdFactors {
        left,
        singular: DVector::from_vec(sorted_s[..keep].to_vec()),
        right,
        mode,
    }
}

// nalgebra's bidiagonal SVD loses accuracy on some small tall or wide
// inputs, so the factorization itself runs through faer.
fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    let m = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let f = m.thin_svd().expect("SVD of a finite matrix converges");
    let (u, s, v) = (f.U(), f.S().column_vector(), f.V());
    let k = s.nrows();
    (
        DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        DVector::from_fn(k, |i, _| s[i]),
        DMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
    )
}

/// Largest absolute asymmetry `max |A - A^T|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Top-`p` eigenpairs of a symmetric matrix, descending, sign-canonicalized.
pub fn sym_eig_sorted(a: &DMatrix<f64>, p: usize) -> Result<EigenPairs> {
    if !a.is_square() {
        return Err(Error::dim(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let dim = a.nrows();
    if p == 0 || p > dim {
        return Err(Error::dim(format!(
            "requested {p} eigenpairs of a {dim}x{dim} matrix"
        )));
    }
    let scale = a.amax();
    let asym = asymmetry(a);
    if asym > 1e-9 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..dim).collect();
    // stable: exact ties keep the routine's order
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    order.truncate(p);

    let values = DVector::from_iterator(p, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = canonical_sign(&DMatrix::from_fn(dim, p, |r, c| {
        eig.eigenvectors[(r, order[c])]
    }));
    Ok(EigenPairs { vectors, values })
}

/// Number of singular values above `max(rows, cols) * eps * sigma_max`.
pub fn effective_rank(singular: &[f64], rows: usize, cols: usize) -> usize {
    let Some(&top) = singular.first() else {
        return 0;
    };
    if !(top > 0.0) {
        return 0;
    }
    let tol = rows.max(cols) as f64 * f64::EPSILON * top;
    singular.iter().take_while(|&&s| s > tol).count()
}

/// Rank of a symmetric positive semidefinite matrix from its descending
/// eigenvalues (negative values count as zero).
pub fn psd_rank(values: &[f64], dim: usize) -> usize {
    let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    effective_rank(&clamped, dim, dim)
}

fn sign_flips(m: &DMatrix<f64>) -> Vec<bool> {
    m.column_iter()
        .map(|col| {
            let mut best = 0usize;
            for (i, v) in col.iter().enumerate() {
                if v.abs() > col[best].abs() {
                    best = i;
                }
            }
            !col.is_empty() && col[best] < 0.0
        })
        .collect()
}

/// Negates every column whose largest-magnitude entry is negative (lowest
/// index wins magnitude ties).
pub fn canonical_sign(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, flip) in sign_flips(m).into_iter().enumerate() {
        if flip {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

/// Rows of `m` as nested vectors.
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Serde adapter storing a matrix as row-major nested arrays.
pub(crate) mod serde_matrix {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows = super::matrix_to_rows(m);
        (m.nrows(), m.ncols(), rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let (nrows, ncols, rows): (usize, usize, Vec<Vec<f64>>) = Deserialize::deserialize(d)?;
        if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("matrix shape does not match its rows"));
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

pub(crate) mod serde_vector {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let v: Vec<f64> = Deserialize::deserialize(d)?;
        Ok(DVector::from_vec(v))
    }
}

pub(crate) mod serde_data {
    use super::DataMatrix;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &DataMatrix, s: S) -> Result<S::Ok, S::Error> {
        super::serde_matrix::serialize(m.as_matrix(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DataMatrix, D::Error> {
        let m = super::serde_matrix::deserialize(d)?;
        DataMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
