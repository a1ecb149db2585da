//! Versioned JSON model files.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::dataset::{format_f64, Standardization};
use crate::dual_pca::DualModel;
use crate::error::{Error, Result};
use crate::kernel_pca::KernelModel;
use crate::kernel_spca::{KernelSpcaDirectModel, KernelSpcaDualModel};
use crate::kernels::KernelSpec;
use crate::pca::LinearSubspaceModel;
use crate::spca::{DualSpcaModel, ScoringSpcaModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pca,
    DualPca,
    Kpca,
    SpcaScoring,
    Spca,
    DualSpca,
    KspcaDirect,
    KspcaDual,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::DualPca => "dual-pca",
            Method::Kpca => "kpca",
            Method::SpcaScoring => "spca-scoring",
            Method::Spca => "spca",
            Method::DualSpca => "dual-spca",
            Method::KspcaDirect => "kspca-direct",
            Method::KspcaDual => "kspca-dual",
        }
    }

    pub fn uses_kernel(self) -> bool {
        matches!(self, Method::Kpca | Method::KspcaDirect | Method::KspcaDual)
    }

    pub fn supervised(self) -> bool {
        !matches!(self, Method::Pca | Method::DualPca | Method::Kpca)
    }

    pub fn uses_label_kernel(self) -> bool {
        self.supervised() && self != Method::SpcaScoring
    }
}

/// The fitted model, tagged by the route that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "model", rename_all = "kebab-case")]
pub enum FittedModel {
    Pca(LinearSubspaceModel),
    DualPca(DualModel),
    Kpca(KernelModel),
    SpcaScoring(ScoringSpcaModel),
    Spca(LinearSubspaceModel),
    DualSpca(DualSpcaModel),
    KspcaDirect(KernelSpcaDirectModel),
    KspcaDual(KernelSpcaDualModel),
}

impl FittedModel {
    pub fn method(&self) -> Method {
        match self {
            FittedModel::Pca(_) => Method::Pca,
            FittedModel::DualPca(_) => Method::DualPca,
            FittedModel::Kpca(_) => Method::Kpca,
            FittedModel::SpcaScoring(_) => Method::SpcaScoring,
            FittedModel::Spca(_) => Method::Spca,
            FittedModel::DualSpca(_) => Method::DualSpca,
            FittedModel::KspcaDirect(_) => Method::KspcaDirect,
            FittedModel::KspcaDual(_) => Method::KspcaDual,
        }
    }

    /// Eigenvalues of the retained components.
    pub fn spectrum(&self) -> Vec<f64> {
        let squares = |s: &nalgebra::DVector<f64>| s.iter().map(|v| v * v).collect();
        match self {
            FittedModel::Pca(m) | FittedModel::Spca(m) => m.spectrum.as_slice().to_vec(),
            FittedModel::SpcaScoring(m) => m.pca.spectrum.as_slice().to_vec(),
            FittedModel::DualPca(m) => squares(&m.singular),
            FittedModel::Kpca(m) => squares(&m.singular),
            FittedModel::DualSpca(m) => squares(&m.singular),
            FittedModel::KspcaDual(m) => squares(&m.singular),
            FittedModel::KspcaDirect(m) => m.eigenvalues.as_slice().to_vec(),
        }
    }

    pub fn kernel(&self) -> Option<KernelSpec> {
        match self {
            FittedModel::Kpca(m) => Some(m.spec),
            FittedModel::KspcaDirect(m) => Some(m.spec),
            FittedModel::KspcaDual(m) => Some(m.spec),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub fitted: FittedModel,
    /// Data kernel, for the kernel routes.
    pub kernel: Option<KernelSpec>,
    /// Label kernel, for the HSIC-based routes.
    pub label_kernel: Option<KernelSpec>,
    pub spectrum: Vec<f64>,
    pub standardization: Option<Standardization>,
    pub feature_names: Option<Vec<String>>,
    pub label_column: Option<String>,
}

impl ModelFile {
    pub fn new(fitted: FittedModel) -> Self {
        ModelFile {
            schema_version: SCHEMA_VERSION,
            kernel: fitted.kernel(),
            spectrum: fitted.spectrum(),
            fitted,
            label_kernel: None,
            standardization: None,
            feature_names: None,
            label_column: None,
        }
    }

    pub fn method(&self) -> Method {
        self.fitted.method()
    }

    pub fn to_writer<W: Write>(&self, out: W) -> Result<()> {
        write_json(out, self)
    }

    pub fn from_reader<R: Read>(input: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(input)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                line: 1,
                column: None,
                message: format!(
                    "unsupported schema version {} (expected {SCHEMA_VERSION})",
                    file.schema_version
                ),
            });
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut w = BufWriter::new(file);
        self.to_writer(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::from_reader(BufReader::new(file)).map_err(|e| e.context(path.display().to_string()))
    }
}

/// Compact JSON whose floats carry 17 significant digits.
struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn write_json<W: Write, T: Serialize>(out: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(out, ExactFloats);
    value.serialize(&mut ser)?;
    let mut out = ser.into_inner();
    out.write_all(b"\n")?;
    Ok(())
}
