use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use clap::ValueEnum;
use serde::Serialize;

use super::dataset::{
    format_f64, load_csv, numeric_labels, split, standardize, write_dataset, write_table, CsvOptions,
    Dataset, Standardization,
};
use super::model_file::{write_json, FittedModel, Method, ModelFile};
use super::{
    ApplyArgs, Command, FitArgs, HsicArgs, KernelArgs, KernelName, LabelKernelName, ScoreArgs,
    SpectrumArgs, SplitArgs,
};
use crate::error::{Error, Result};
use crate::kernels::{self, KernelSpec};
use crate::linalg::{subtract_mean, DataMatrix};
use crate::pca::{self, Embedding, PcaOptions, SpectrumReport};
use crate::{dual_pca, kernel_pca, kernel_spca, spca};

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Fit(a) => fit(&a, out),
        Command::Transform(a) => transform(&a, out),
        Command::Reconstruct(a) => reconstruct(&a, out),
        Command::Spectrum(a) => spectrum(&a, out),
        Command::ScoreFeatures(a) => score(&a, out),
        Command::Hsic(a) => hsic(&a, out),
        Command::Split(a) => split_files(&a, out),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn with_output(
    path: Option<&Path>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::from(e).context(p.display().to_string()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

fn kernel_flags_given(k: &KernelArgs) -> bool {
    k.kernel.is_some() || k.gamma.is_some() || k.c1.is_some() || k.c2.is_some() || k.c3.is_some()
}

/// Builds the data kernel from the flags; defaults follow the family.
pub fn kernel_spec(k: &KernelArgs, features: usize) -> Result<KernelSpec> {
    let family = k.kernel.unwrap_or(KernelName::Linear);
    let allowed: &[&str] = match family {
        KernelName::Linear => &["c1"],
        KernelName::Polynomial => &["c1", "c2", "c3"],
        KernelName::Rbf => &["gamma"],
        KernelName::Sigmoid => &["c1", "c2"],
        KernelName::Cosine => &[],
    };
    for (name, given) in [
        ("gamma", k.gamma.is_some()),
        ("c1", k.c1.is_some()),
        ("c2", k.c2.is_some()),
        ("c3", k.c3.is_some()),
    ] {
        if given && !allowed.contains(&name) {
            return Err(usage(format!(
                "--{name} does not apply to the {} kernel",
                family.to_possible_value().map_or_else(String::new, |v| v.get_name().to_string())
            )));
        }
    }
    let spec = match family {
        KernelName::Linear => KernelSpec::Linear { c1: k.c1.unwrap_or(0.0) },
        KernelName::Polynomial => {
            let d = KernelSpec::polynomial_default();
            let KernelSpec::Polynomial { c1, c2, c3 } = d else { unreachable!() };
            KernelSpec::Polynomial {
                c1: k.c1.unwrap_or(c1),
                c2: k.c2.unwrap_or(c2),
                c3: k.c3.unwrap_or(c3),
            }
        }
        KernelName::Rbf => match k.gamma {
            Some(gamma) => KernelSpec::Rbf { gamma },
            None => KernelSpec::rbf_default(features),
        },
        KernelName::Sigmoid => {
            let KernelSpec::Sigmoid { c1, c2 } = KernelSpec::sigmoid_default(features) else {
                unreachable!()
            };
            KernelSpec::Sigmoid {
                c1: k.c1.unwrap_or(c1),
                c2: k.c2.unwrap_or(c2),
            }
        }
        KernelName::Cosine => KernelSpec::Cosine,
    };
    spec.validate()?;
    Ok(spec)
}

/// Labels as reals; non-numeric labels become class indices in
/// first-appearance order.
pub fn label_values(labels: &[String]) -> Vec<f64> {
    numeric_labels(labels)
        .unwrap_or_else(|| kernels::class_indices(labels).0.into_iter().map(|c| c as f64).collect())
}

/// The label kernel and the spec recorded for it.
pub fn label_kernel(labels: &[String], kind: LabelKernelName) -> Result<LabelKernel> {
    Ok(match kind {
        LabelKernelName::Delta => (kernels::delta_kernel(labels)?.entries, KernelSpec::Delta),
        LabelKernelName::Linear => {
            let y = match numeric_labels(labels) {
                Some(v) => DMatrix::from_row_slice(1, v.len(), &v),
                None => kernels::one_hot(labels)?.entries,
            };
            (y.transpose() * y, KernelSpec::linear())
        }
    })
}

fn check_fit_flags(a: &FitArgs) -> Result<()> {
    let m = a.method;
    let name = m.name();
    if m.supervised() && a.input.labels.is_none() {
        return Err(usage(format!("--method {name} needs --labels")));
    }
    if !m.uses_kernel() && kernel_flags_given(&a.kernel) {
        return Err(usage(format!("--method {name} does not take kernel flags")));
    }
    if !m.uses_label_kernel() && a.label_kernel.is_some() {
        return Err(usage(format!("--method {name} does not take --label-kernel")));
    }
    match (m, a.top_q) {
        (Method::SpcaScoring, None) => return Err(usage("--method spca-scoring needs --top-q")),
        (Method::SpcaScoring, Some(_)) => {}
        (_, Some(_)) => return Err(usage(format!("--top-q does not apply to --method {name}"))),
        _ => {}
    }
    if a.no_center && !matches!(m, Method::Pca | Method::SpcaScoring) {
        return Err(usage(format!("--no-center does not apply to --method {name}")));
    }
    if a.components == 0 {
        return Err(usage("--components must be positive"));
    }
    Ok(())
}

fn prepare(ds: Dataset, standardize_flag: bool) -> Result<(Dataset, Option<Standardization>)> {
    if standardize_flag {
        let (ds, params) = standardize(&ds)?;
        Ok((ds, Some(params)))
    } else {
        Ok((ds, None))
    }
}

/// The label kernel matrix and the spec recorded for it.
pub type LabelKernel = (DMatrix<f64>, KernelSpec);

/// Runs the selected fit route.
#[allow(clippy::too_many_arguments)]
pub fn fit_model(
    method: Method,
    x: &DataMatrix,
    labels: Option<&[String]>,
    p: usize,
    kernel: Option<KernelSpec>,
    label_kind: LabelKernelName,
    top_q: Option<usize>,
    center: bool,
) -> Result<(FittedModel, Option<LabelKernel>)> {
    let need_labels = || labels.ok_or_else(|| usage(format!("--method {} needs labels", method.name())));
    let kernel = || kernel.ok_or_else(|| usage("missing data kernel"));
    let ky = if method.uses_label_kernel() {
        Some(label_kernel(need_labels()?, label_kind)?)
    } else {
        None
    };
    let ky_m = || &ky.as_ref().expect("label kernel built above").0;
    let fitted = match method {
        Method::Pca => FittedModel::Pca(pca::fit_pca_eig_with(x, p, PcaOptions { center })?),
        Method::DualPca => FittedModel::DualPca(dual_pca::fit_dual(x, p)?),
        Method::Kpca => FittedModel::Kpca(kernel_pca::fit_kpca(x, &kernel()?, p)?),
        Method::SpcaScoring => {
            let y = label_values(need_labels()?);
            let q = top_q.ok_or_else(|| usage("--method spca-scoring needs --top-q"))?;
            FittedModel::SpcaScoring(spca::fit_scoring_spca(x, &y, q, p, PcaOptions { center })?)
        }
        Method::Spca => FittedModel::Spca(spca::fit_spca(x, ky_m(), p)?),
        Method::DualSpca => FittedModel::DualSpca(spca::fit_dual_spca(x, ky_m(), p)?),
        Method::KspcaDirect => {
            FittedModel::KspcaDirect(kernel_spca::fit_kspca_direct(x, &kernel()?, ky_m(), p)?)
        }
        Method::KspcaDual => {
            FittedModel::KspcaDual(kernel_spca::fit_kspca_dual(x, &kernel()?, ky_m(), p)?)
        }
    };
    Ok((fitted, ky))
}

/// Embedding of the data the model was fitted on.
pub fn training_embedding(fitted: &FittedModel, x: &DataMatrix) -> Result<Embedding> {
    Ok(match fitted {
        FittedModel::Pca(m) => pca::project(m, x)?,
        FittedModel::DualPca(m) => dual_pca::project_train(m),
        FittedModel::Kpca(m) => kernel_pca::project_train(m),
        FittedModel::SpcaScoring(m) => spca::scoring_spca_project(m, x)?,
        FittedModel::Spca(m) => spca::spca_project(m, x)?,
        FittedModel::DualSpca(m) => spca::dual_spca_project(m, x)?,
        FittedModel::KspcaDirect(m) => kernel_spca::project_direct_train(m),
        FittedModel::KspcaDual(m) => kernel_spca::project_dual_train(m),
    })
}

/// True when `x` is bit-for-bit the training data of a model that has a
/// separate training formula.
fn is_training_data(fitted: &FittedModel, x: &DataMatrix) -> bool {
    match fitted {
        FittedModel::DualPca(m) => {
            x.features() == m.features() && subtract_mean(x.as_matrix(), &m.mean) == m.centered_train
        }
        FittedModel::Kpca(m) => &m.train_data == x,
        FittedModel::KspcaDirect(m) => &m.train_data == x,
        FittedModel::KspcaDual(m) => &m.train_data == x,
        _ => false,
    }
}

/// Embeds arbitrary samples. The training data itself goes through the
/// training formula so that a transform of the fit input reproduces the
/// fit-time embedding exactly.
pub fn apply_embedding(fitted: &FittedModel, x: &DataMatrix) -> Result<Embedding> {
    if is_training_data(fitted, x) {
        return training_embedding(fitted, x);
    }
    Ok(match fitted {
        FittedModel::Pca(m) => pca::project(m, x)?,
        FittedModel::DualPca(m) => dual_pca::project_oos(m, x)?,
        FittedModel::Kpca(m) => kernel_pca::project_oos(m, x)?,
        FittedModel::SpcaScoring(m) => spca::scoring_spca_project(m, x)?,
        FittedModel::Spca(m) => spca::spca_project(m, x)?,
        FittedModel::DualSpca(m) => spca::dual_spca_project(m, x)?,
        FittedModel::KspcaDirect(m) => kernel_spca::project_direct(m, x)?,
        FittedModel::KspcaDual(m) => kernel_spca::project_dual(m, x)?,
    })
}

pub fn apply_reconstruction(fitted: &FittedModel, x: &DataMatrix) -> Result<DataMatrix> {
    match fitted {
        FittedModel::Pca(m) => pca::reconstruct(m, &pca::project(m, x)?),
        FittedModel::DualPca(m) if is_training_data(fitted, x) => dual_pca::reconstruct_train(m),
        FittedModel::DualPca(m) => dual_pca::reconstruct_oos(m, x),
        FittedModel::Kpca(m) => kernel_pca::reconstruct_any(m),
        FittedModel::SpcaScoring(m) => spca::scoring_spca_reconstruct(m),
        FittedModel::Spca(m) => spca::spca_reconstruct(m, x),
        FittedModel::DualSpca(m) => spca::dual_spca_reconstruct(m, x),
        FittedModel::KspcaDirect(m) => kernel_spca::reconstruct_direct(m),
        FittedModel::KspcaDual(m) => kernel_spca::reconstruct_dual(m),
    }
}

/// Id column name and values for output tables.
fn id_header<'a>(input: &'a super::InputArgs, ds: &'a Dataset) -> Option<(&'a str, &'a [String])> {
    let name = match (&input.id_column, input.no_header) {
        (Some(col), false) => col.as_str(),
        _ => "id",
    };
    ds.sample_ids.as_deref().map(|ids| (name, ids))
}

fn component_header(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("component_{j}")).collect()
}

fn write_embedding(out: &mut dyn Write, e: &Embedding, ids: Option<(&str, &[String])>) -> Result<()> {
    write_table(out, &component_header(e.components()), ids, &e.to_sample_rows(), None)
}

#[derive(Serialize)]
struct FitSummary<'a> {
    method: &'a str,
    components: usize,
    features: usize,
    samples: usize,
    kernel: Option<KernelSpec>,
    label_kernel: Option<KernelSpec>,
    spectrum: SpectrumReport,
    hsic: Option<f64>,
}

fn fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    check_fit_flags(a)?;
    let ds = load_csv(&a.input.input, &a.input.csv_options()?)?;
    let (ds, params) = prepare(ds, a.standardize)?;
    let x = &ds.features;
    let kernel = if a.method.uses_kernel() {
        Some(kernel_spec(&a.kernel, x.features())?)
    } else {
        None
    };
    let method = a.method;
    let context = |e: Error| e.context(format!("fitting {}", method.name()));
    let (fitted, ky) = fit_model(
        method,
        x,
        ds.labels.as_deref(),
        a.components,
        kernel,
        a.label_kernel.unwrap_or_default(),
        a.top_q,
        !a.no_center,
    )
    .map_err(context)?;
    let embedding = training_embedding(&fitted, x).map_err(context)?;

    let hsic = match (method, &ky) {
        (_, Some((k, _))) => Some(embedding_hsic(&embedding, k)?),
        (Method::SpcaScoring, None) => {
            let y = label_values(ds.require_labels()?);
            let y = DMatrix::from_row_slice(1, y.len(), &y);
            Some(embedding_hsic(&embedding, &(y.transpose() * y))?)
        }
        _ => None,
    };

    let mut file = ModelFile::new(fitted);
    file.label_kernel = ky.as_ref().map(|(_, spec)| *spec);
    file.standardization = params;
    file.feature_names = ds.feature_names.clone();
    file.label_column = a.input.labels.clone();
    file.save(&a.model)?;

    if let Some(path) = &a.output {
        with_output(Some(path), out, |w| write_embedding(w, &embedding, id_header(&a.input, &ds)))?;
    }
    let summary = FitSummary {
        method: method.name(),
        components: embedding.components(),
        features: x.features(),
        samples: x.samples(),
        kernel: file.kernel,
        label_kernel: file.label_kernel,
        spectrum: pca::spectrum_report(&file.spectrum)?,
        hsic,
    };
    write_json(out, &summary)
}

/// HSIC between the embedding's linear kernel and a label kernel.
pub fn embedding_hsic(e: &Embedding, ky: &DMatrix<f64>) -> Result<f64> {
    let kz = e.entries.transpose() * &e.entries;
    spca::hsic(&kz, ky)
}

/// Loads data for a saved model, dropping the label column recorded at fit
/// time when the file still carries it.
fn load_for_model(a: &ApplyArgs, file: &ModelFile) -> Result<Dataset> {
    let mut opts: CsvOptions = a.input.csv_options()?;
    if opts.label_column.is_none() && opts.has_header {
        if let Some(col) = &file.label_column {
            opts.label_column = Some(col.clone());
            match load_csv(&a.input.input, &opts) {
                Err(e) if matches!(e.root(), Error::Usage(_)) => opts.label_column = None,
                other => return prepare_for_model(other?, file),
            }
        }
    }
    prepare_for_model(load_csv(&a.input.input, &opts)?, file)
}

fn prepare_for_model(ds: Dataset, file: &ModelFile) -> Result<Dataset> {
    let d = ds.features.features();
    let expected = match &file.fitted {
        FittedModel::Pca(m) | FittedModel::Spca(m) => m.features(),
        FittedModel::DualPca(m) => m.features(),
        FittedModel::Kpca(m) => m.train_data.features(),
        FittedModel::SpcaScoring(m) => m.features(),
        FittedModel::DualSpca(m) => m.train_data.features(),
        FittedModel::KspcaDirect(m) => m.train_data.features(),
        FittedModel::KspcaDual(m) => m.train_data.features(),
    };
    if d != expected {
        return Err(Error::InvalidDimension(format!(
            "model expects {expected} features, data is {} samples x {d} features",
            ds.samples()
        )));
    }
    match &file.standardization {
        Some(params) => Ok(Dataset {
            features: params.apply(&ds.features)?,
            ..ds
        }),
        None => Ok(ds),
    }
}

fn transform(a: &ApplyArgs, out: &mut dyn Write) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let ds = load_for_model(a, &file)?;
    let e = apply_embedding(&file.fitted, &ds.features)?;
    with_output(a.output.as_deref(), out, |w| write_embedding(w, &e, id_header(&a.input, &ds)))
}

fn reconstruct(a: &ApplyArgs, out: &mut dyn Write) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let ds = load_for_model(a, &file)?;
    let rec = apply_reconstruction(&file.fitted, &ds.features)?;
    let rec = match &file.standardization {
        Some(params) => {
            let m = rec.as_matrix();
            DataMatrix::new(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                m[(i, j)] * params.scale[i] + params.mean[i]
            }))?
        }
        None => rec,
    };
    let d = rec.features();
    let names = file
        .feature_names
        .clone()
        .unwrap_or_else(|| (1..=d).map(|j| format!("x{j}")).collect());
    with_output(a.output.as_deref(), out, |w| {
        write_table(w, &names, id_header(&a.input, &ds), &rec.to_sample_rows(), None)
    })
}

/// Writes the `component,eigenvalue,ratio,cumulative` table.
pub fn write_spectrum(out: &mut dyn Write, report: &SpectrumReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["component", "eigenvalue", "ratio", "cumulative"])?;
    for i in 0..report.eigenvalues.len() {
        w.write_record([
            (i + 1).to_string(),
            format_f64(report.eigenvalues[i]),
            format_f64(report.ratios[i]),
            format_f64(report.cumulative[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    let values = match (&a.input, &a.model) {
        (Some(_), Some(_)) => return Err(usage("give either an input file or --model, not both")),
        (None, None) => return Err(usage("spectrum needs an input file or --model")),
        (None, Some(model)) => {
            if a.standardize || a.no_center {
                return Err(usage("--standardize and --no-center apply to input data only"));
            }
            ModelFile::load(model)?.spectrum
        }
        (Some(path), None) => {
            let input = super::InputArgs {
                input: path.clone(),
                no_header: a.no_header,
                delimiter: a.delimiter,
                labels: a.labels.clone(),
                id_column: a.id_column.clone(),
            };
            let ds = load_csv(path, &input.csv_options()?)?;
            let (ds, _) = prepare(ds, a.standardize)?;
            pca::full_spectrum(&ds.features, PcaOptions { center: !a.no_center })?
        }
    };
    let report = pca::spectrum_report(&values)?;
    with_output(a.output.as_deref(), out, |w| write_spectrum(w, &report))
}

fn score(a: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    if a.input.labels.is_none() {
        return Err(usage("score-features needs --labels"));
    }
    let ds = load_csv(&a.input.input, &a.input.csv_options()?)?;
    let (ds, _) = prepare(ds, a.standardize)?;
    let y = label_values(ds.require_labels()?);
    let scores = spca::score_features(&ds.features, &y)?;
    with_output(a.output.as_deref(), out, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["rank", "feature", "name", "score"])?;
        for (rank, &j) in scores.order.iter().enumerate() {
            let name = ds
                .feature_names
                .as_ref()
                .map_or_else(|| format!("x{}", j + 1), |n| n[j].clone());
            w.write_record([
                (rank + 1).to_string(),
                j.to_string(),
                name,
                format_f64(scores.scores[j]),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

fn hsic(a: &HsicArgs, out: &mut dyn Write) -> Result<()> {
    if a.input.labels.is_none() {
        return Err(usage("hsic needs --labels"));
    }
    let ds = load_csv(&a.input.input, &a.input.csv_options()?)?;
    let (ds, _) = prepare(ds, a.standardize)?;
    let spec = kernel_spec(&a.kernel, ds.features.features())?;
    let kx = kernels::kernel_matrix(&spec, &ds.features, &ds.features)?.entries;
    let (ky, _) = label_kernel(ds.require_labels()?, a.label_kernel.unwrap_or_default())?;
    let value = spca::hsic(&kx, &ky)?;
    writeln!(out, "{}", format_f64(value))?;
    Ok(())
}

fn split_files(a: &SplitArgs, out: &mut dyn Write) -> Result<()> {
    let ds = load_csv(&a.input.input, &a.input.csv_options()?)?;
    let (train, test) = split(&ds, a.test_fraction, a.seed)?;
    let named = |col: &Option<String>, fallback| {
        col.clone().filter(|_| !a.input.no_header).unwrap_or_else(|| String::from(fallback))
    };
    let label_name = named(&a.input.labels, "label");
    let id_name = named(&a.input.id_column, "id");
    for (path, part) in [(&a.train_output, &train), (&a.test_output, &test)] {
        with_output(Some(path), out, |w| write_dataset(w, part, &id_name, &label_name))?;
    }
    #[derive(Serialize)]
    struct Sizes {
        train: usize,
        test: usize,
    }
    write_json(out, &Sizes {
        train: train.samples(),
        test: test.samples(),
    })
}
