// Shared test helpers and independent oracles. Compiled into the unit tests
// through a #[path] include and into each integration test as a module, so
// it only depends on nalgebra and rand.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Standard normal matrix via Box-Muller.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random d×p matrix with orthonormal columns (modified Gram-Schmidt).
pub fn orthonormal(rng: &mut ChaCha8Rng, d: usize, p: usize) -> DMatrix<f64> {
    gram_schmidt(&random_matrix(rng, d, p))
}

pub fn gram_schmidt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = a.clone();
    for j in 0..q.ncols() {
        for k in 0..j {
            let proj = q.column(k).dot(&q.column(j));
            let qk = q.column(k).clone_owned();
            q.column_mut(j).axpy(-proj, &qk, 1.0);
        }
        let norm = q.column(j).norm();
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    q
}

/// Eigenvalues of a symmetric 3×3 matrix from the characteristic cubic
/// (trigonometric solution), descending.
pub fn symmetric_cubic_roots(a: &DMatrix<f64>) -> [f64; 3] {
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let q = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]) / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (a - DMatrix::identity(3, 3) * q) / p;
    let det_b = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
        - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Eigenpairs of a symmetric 2×2 matrix by the quadratic formula, descending.
pub fn symmetric_2x2_eig(a: &DMatrix<f64>) -> ([f64; 2], DMatrix<f64>) {
    let (p, q, r) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
    let mean = (p + r) / 2.0;
    let rad = (((p - r) / 2.0).powi(2) + q * q).sqrt();
    let l1 = mean + rad;
    let l2 = mean - rad;
    let vec_for = |l: f64| {
        let v = if q.abs() > 1e-300 {
            DVector::from_vec(vec![q, l - p])
        } else if (l - p).abs() <= (l - r).abs() {
            DVector::from_vec(vec![1.0, 0.0])
        } else {
            DVector::from_vec(vec![0.0, 1.0])
        };
        v.normalize()
    };
    let v1 = vec_for(l1);
    let v2 = DVector::from_vec(vec![-v1[1], v1[0]]);
    ([l1, l2], DMatrix::from_columns(&[v1, v2]))
}

/// Power iteration with Hotelling deflation on a shifted matrix, so the
/// algebraically largest eigenvalues come first.
pub fn power_iteration_deflation(a: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let shift = a.norm();
    let mut m = a + DMatrix::identity(n, n) * shift;
    let mut vals = Vec::new();
    let mut vecs = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * (i as f64 + j as f64).sin());
        v.normalize_mut();
        for _ in 0..20000 {
            let w = &m * &v;
            let nw = w.normalize();
            if (&nw - &v).norm() < 1e-15 || (&nw + &v).norm() < 1e-15 {
                v = nw;
                break;
            }
            v = nw;
        }
        let lam = v.dot(&(&m * &v));
        vals.push(lam - shift);
        m -= &v * v.transpose() * lam;
        vecs.set_column(j, &v);
    }
    (vals, vecs)
}

/// Flips each column of `m` to agree in sign with the matching column of
/// `reference` (sign of their inner product).
pub fn sign_match(m: &DMatrix<f64>, reference: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        if m.column(j).dot(&reference.column(j)) < 0.0 {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

/// Same as `sign_match` but for embeddings, whose components are rows.
pub fn sign_match_rows(m: &DMatrix<f64>, reference: &DMatrix<f64>) -> DMatrix<f64> {
    sign_match(&m.transpose(), &reference.transpose()).transpose()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).amax()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Mean canonical correlation between two embeddings (components as rows,
/// samples as columns).
pub fn mean_canonical_correlation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let center = |m: &DMatrix<f64>| {
        let mut t = m.transpose();
        for mut c in t.column_iter_mut() {
            let mean = c.sum() / c.len() as f64;
            c.add_scalar_mut(-mean);
        }
        gram_schmidt(&t)
    };
    let qa = center(a);
    let qb = center(b);
    // singular values of the small cross product via its Gram matrix
    let c = qa.transpose() * qb;
    let s = (c.transpose() * &c).symmetric_eigen().eigenvalues;
    s.iter().map(|v| v.max(0.0).sqrt().min(1.0)).sum::<f64>() / s.len() as f64
}

/// Between-class over within-class scatter of an embedding.
pub fn scatter_ratio(embedding: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let p = embedding.nrows();
    let classes = labels.iter().copied().max().unwrap() + 1;
    let overall = DVector::from_fn(p, |i, _| embedding.row(i).mean());
    let mut between = 0.0;
    let mut within = 0.0;
    for c in 0..classes {
        let idx: Vec<usize> = (0..labels.len()).filter(|&j| labels[j] == c).collect();
        let mut mean = DVector::zeros(p);
        for &j in &idx {
            mean += embedding.column(j);
        }
        mean /= idx.len() as f64;
        between += idx.len() as f64 * (&mean - &overall).norm_squared();
        for &j in &idx {
            within += (embedding.column(j) - &mean).norm_squared();
        }
    }
    between / within
}

/// Projector `U U^T` onto the column span of an orthonormal basis.
pub fn projector(u: &DMatrix<f64>) -> DMatrix<f64> {
    u * u.transpose()
}

/// Centered data with a prescribed scatter spectrum: `X = Q diag(sigma) W^T
/// + mu 1^T` with orthonormal `Q` (d×r) and `W` (n×r, columns orthogonal to
/// the ones vector). The scatter matrix is `Q diag(sigma^2) Q^T`.
pub struct Planted {
    pub x: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub mean: DVector<f64>,
}

pub fn planted(rng: &mut ChaCha8Rng, d: usize, n: usize, r: usize) -> Planted {
    assert!(r <= d && r < n);
    let q = orthonormal(rng, d, r);
    let mut w = random_matrix(rng, n, r);
    for mut c in w.column_iter_mut() {
        let m = c.mean();
        c.add_scalar_mut(-m);
    }
    let w = gram_schmidt(&w);
    // well separated, descending: 10, ..., down to about 1
    let sigma: Vec<f64> = (0..r)
        .map(|i| 10.0 * (1.0 - 0.9 * i as f64 / r.max(1) as f64) * (1.0 + 0.005 * rng.random::<f64>()))
        .collect();
    let mean = DVector::from_fn(d, |_, _| 5.0 * gaussian(rng));
    let core = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&sigma)) * w.transpose();
    let x = DMatrix::from_fn(d, n, |i, j| core[(i, j)] + mean[i]);
    Planted { x, q, w, sigma, mean }
}
