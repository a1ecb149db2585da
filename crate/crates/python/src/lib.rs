//! Python bindings. Matrices cross the boundary as nested lists with one
//! sample per row.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pcakit_core::cli::commands::{self, embedding_hsic, label_kernel, LabelKernel};
use pcakit_core::cli::{KernelArgs, KernelName, LabelKernelName, Method, ModelFile, Standardization};
use pcakit_core::kernels::{self, KernelSpec};
use pcakit_core::linalg::{self, DataMatrix};
use pcakit_core::{pca, spca, Error};

create_exception!(pcakit, PcakitError, PyException);
create_exception!(pcakit, ReconstructionUnsupportedError, PcakitError);

fn to_py(e: Error) -> PyErr {
    match e.root() {
        Error::ReconstructionUnsupported { .. } => ReconstructionUnsupportedError::new_err(e.to_string()),
        _ => PcakitError::new_err(e.to_string()),
    }
}

fn samples(rows: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
    DataMatrix::from_samples(&rows).map_err(to_py)
}

fn label_strings(labels: &[Bound<'_, PyAny>]) -> PyResult<Vec<String>> {
    labels.iter().map(|l| Ok(l.str()?.to_string())).collect()
}

fn method_named(name: &str) -> PyResult<Method> {
    Ok(match name {
        "pca" => Method::Pca,
        "dual-pca" => Method::DualPca,
        "kpca" => Method::Kpca,
        "spca-scoring" => Method::SpcaScoring,
        "spca" => Method::Spca,
        "dual-spca" => Method::DualSpca,
        "kspca-direct" => Method::KspcaDirect,
        "kspca-dual" => Method::KspcaDual,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    })
}

fn kernel_named(name: &str) -> PyResult<KernelName> {
    Ok(match name {
        "linear" => KernelName::Linear,
        "polynomial" => KernelName::Polynomial,
        "rbf" => KernelName::Rbf,
        "sigmoid" => KernelName::Sigmoid,
        "cosine" => KernelName::Cosine,
        other => return Err(PyValueError::new_err(format!("unknown kernel {other:?}"))),
    })
}

fn label_kernel_named(name: &str) -> PyResult<LabelKernelName> {
    match name {
        "delta" => Ok(LabelKernelName::Delta),
        "linear" => Ok(LabelKernelName::Linear),
        other => Err(PyValueError::new_err(format!("unknown label kernel {other:?}"))),
    }
}

fn build_kernel(
    kernel: Option<&str>,
    gamma: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
    features: usize,
) -> PyResult<KernelSpec> {
    let args = KernelArgs {
        kernel: kernel.map(kernel_named).transpose()?,
        gamma,
        c1,
        c2,
        c3,
    };
    commands::kernel_spec(&args, features).map_err(to_py)
}

/// A fitted model of any supported method, compatible with the CLI's
/// model files.
#[pyclass(module = "pcakit")]
struct Model {
    file: ModelFile,
}

impl Model {
    fn prepared(&self, x: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
        let x = samples(x)?;
        match &self.file.standardization {
            Some(s) => s.apply(&x).map_err(to_py),
            None => Ok(x),
        }
    }

    fn training_data(&self) -> PyResult<DataMatrix> {
        use pcakit_core::cli::FittedModel::*;
        match &self.file.fitted {
            Kpca(m) => Ok(m.train_data.clone()),
            KspcaDirect(m) => Ok(m.train_data.clone()),
            KspcaDual(m) => Ok(m.train_data.clone()),
            DualPca(m) => {
                DataMatrix::new(linalg::add_mean(&m.centered_train, &m.mean)).map_err(to_py)
            }
            _ => Err(PyValueError::new_err(
                "this model does not keep its training data; pass the samples explicitly",
            )),
        }
    }
}

#[pymethods]
impl Model {
    /// Fits `method` on `x` (samples as rows).
    #[staticmethod]
    #[pyo3(signature = (
        x, method = "pca", components = 2, labels = None, kernel = None, gamma = None,
        c1 = None, c2 = None, c3 = None, label_kernel = "delta", top_q = None,
        center = true, standardize = false
    ))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        x: Vec<Vec<f64>>,
        method: &str,
        components: usize,
        labels: Option<Vec<Bound<'_, PyAny>>>,
        kernel: Option<&str>,
        gamma: Option<f64>,
        c1: Option<f64>,
        c2: Option<f64>,
        c3: Option<f64>,
        label_kernel: &str,
        top_q: Option<usize>,
        center: bool,
        standardize: bool,
    ) -> PyResult<Self> {
        let method = method_named(method)?;
        let mut x = samples(x)?;
        let standardization = if standardize {
            let s = Standardization::fit(&x);
            x = s.apply(&x).map_err(to_py)?;
            Some(s)
        } else {
            None
        };
        let labels = labels.as_deref().map(label_strings).transpose()?;
        let spec = if method.uses_kernel() {
            Some(build_kernel(kernel, gamma, c1, c2, c3, x.features())?)
        } else {
            None
        };
        let (fitted, ky) = commands::fit_model(
            method,
            &x,
            labels.as_deref(),
            components,
            spec,
            label_kernel_named(label_kernel)?,
            top_q,
            center,
        )
        .map_err(to_py)?;
        let mut file = ModelFile::new(fitted);
        file.label_kernel = ky.map(|(_, spec)| spec);
        file.standardization = standardization;
        Ok(Model { file })
    }

    /// Embeds samples; with no argument, the training embedding of models
    /// that keep their training data.
    #[pyo3(signature = (x = None))]
    fn transform(&self, x: Option<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<f64>>> {
        let x = match x {
            Some(x) => self.prepared(x)?,
            None => self.training_data()?,
        };
        let e = commands::apply_embedding(&self.file.fitted, &x).map_err(to_py)?;
        Ok(e.to_sample_rows())
    }

    /// Projects and reconstructs samples in their original units.
    #[pyo3(signature = (x = None))]
    fn reconstruct(&self, x: Option<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<f64>>> {
        let x = match x {
            Some(x) => self.prepared(x)?,
            None => self.training_data()?,
        };
        let r = commands::apply_reconstruction(&self.file.fitted, &x).map_err(to_py)?;
        let mut rows = r.to_sample_rows();
        if let Some(s) = &self.file.standardization {
            for row in &mut rows {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = *v * s.scale[j] + s.mean[j];
                }
            }
        }
        Ok(rows)
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.file.method().name()
    }

    /// Eigenvalues of the retained components.
    #[getter]
    fn spectrum(&self) -> Vec<f64> {
        self.file.spectrum.clone()
    }

    #[getter]
    fn kernel(&self) -> Option<String> {
        self.file.kernel.map(|k| k.to_string())
    }

    fn to_json(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.file.to_writer(&mut buf).map_err(to_py)?;
        Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Model {
            file: ModelFile::from_reader(text.as_bytes()).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.file.save(path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Model {
            file: ModelFile::load(path).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(method={:?}, components={})",
            self.file.method().name(),
            self.file.spectrum.len()
        )
    }
}

/// Empirical HSIC between samples `x` and their labels.
#[pyfunction]
#[pyo3(signature = (x, labels, kernel = None, gamma = None, c1 = None, c2 = None, c3 = None, label_kernel = "delta"))]
#[allow(clippy::too_many_arguments)]
fn hsic(
    x: Vec<Vec<f64>>,
    labels: Vec<Bound<'_, PyAny>>,
    kernel: Option<&str>,
    gamma: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
    label_kernel: &str,
) -> PyResult<f64> {
    let x = samples(x)?;
    let spec = build_kernel(kernel, gamma, c1, c2, c3, x.features())?;
    let kx = kernels::kernel_matrix(&spec, &x, &x).map_err(to_py)?.entries;
    let (ky, _) = label_kernel_for(&label_strings(&labels)?, label_kernel)?;
    spca::hsic(&kx, &ky).map_err(to_py)
}

fn label_kernel_for(labels: &[String], kind: &str) -> PyResult<LabelKernel> {
    label_kernel(labels, label_kernel_named(kind)?).map_err(to_py)
}

/// HSIC between a model's embedding of `x` and the labels, with a linear
/// kernel on the embedding.
#[pyfunction]
#[pyo3(signature = (model, x, labels, label_kernel = "delta"))]
fn embedding_dependence(
    model: &Model,
    x: Vec<Vec<f64>>,
    labels: Vec<Bound<'_, PyAny>>,
    label_kernel: &str,
) -> PyResult<f64> {
    let x = model.prepared(x)?;
    let e = commands::apply_embedding(&model.file.fitted, &x).map_err(to_py)?;
    let (ky, _) = label_kernel_for(&label_strings(&labels)?, label_kernel)?;
    embedding_hsic(&e, &ky).map_err(to_py)
}

/// Per-feature scores against real labels, and the feature order by
/// descending score.
#[pyfunction]
fn score_features(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let s = spca::score_features(&samples(x)?, &y).map_err(to_py)?;
    Ok((s.scores, s.order))
}

/// Eigenvalues, ratios, and cumulative ratios of a spectrum.
#[pyfunction]
fn spectrum_report<'py>(py: Python<'py>, eigenvalues: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = pca::spectrum_report(&eigenvalues).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("eigenvalues", r.eigenvalues)?;
    d.set_item("ratios", r.ratios)?;
    d.set_item("cumulative", r.cumulative)?;
    Ok(d)
}

/// Full scatter-matrix spectrum of `x`.
#[pyfunction]
#[pyo3(signature = (x, center = true))]
fn full_spectrum(x: Vec<Vec<f64>>, center: bool) -> PyResult<Vec<f64>> {
    pca::full_spectrum(&samples(x)?, pca::PcaOptions { center }).map_err(to_py)
}

/// Kernel matrix between two sample sets.
#[pyfunction]
#[pyo3(signature = (x1, x2, kernel = "linear", gamma = None, c1 = None, c2 = None, c3 = None))]
#[allow(clippy::too_many_arguments)]
fn kernel_matrix(
    x1: Vec<Vec<f64>>,
    x2: Vec<Vec<f64>>,
    kernel: &str,
    gamma: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    let (x1, x2) = (samples(x1)?, samples(x2)?);
    let spec = build_kernel(Some(kernel), gamma, c1, c2, c3, x1.features())?;
    let k = kernels::kernel_matrix(&spec, &x1, &x2).map_err(to_py)?.entries;
    Ok(linalg::matrix_to_rows(&k))
}

/// `H A H` for a rectangular matrix given as rows.
#[pyfunction]
fn double_center(a: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let m = DataMatrix::from_rows(&a).map_err(to_py)?;
    Ok(linalg::matrix_to_rows(&linalg::double_center_rect(m.as_matrix())))
}

#[pymodule(name = "pcakit")]
fn pcakit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PcakitError", m.py().get_type::<PcakitError>())?;
    m.add("ReconstructionUnsupportedError", m.py().get_type::<ReconstructionUnsupportedError>())?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(hsic, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_dependence, m)?)?;
    m.add_function(wrap_pyfunction!(score_features, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_report, m)?)?;
    m.add_function(wrap_pyfunction!(full_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(double_center, m)?)?;
    Ok(())
}
