//! The `pcakit` command-line tool: argument parsing and dispatch.

pub mod commands;
pub mod dataset;
pub mod model_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
pub use dataset::{load_csv, split, standardize, CsvOptions, Dataset, Standardization};
pub use model_file::{FittedModel, Method, ModelFile};

#[derive(Debug, Parser)]
#[command(name = "pcakit", version, about = "PCA-family dimensionality reduction on CSV data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and save it.
    Fit(FitArgs),
    /// Embed samples with a saved model.
    Transform(ApplyArgs),
    /// Project and reconstruct samples with a saved model.
    Reconstruct(ApplyArgs),
    /// Write the eigenvalue spectrum (scree data) as CSV.
    Spectrum(SpectrumArgs),
    /// Score every feature against a real-valued label column.
    ScoreFeatures(ScoreArgs),
    /// Print the empirical HSIC between the data and the labels.
    Hsic(HsicArgs),
    /// Shuffle a dataset into train and test files.
    Split(SplitArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input CSV, one sample per row.
    pub input: PathBuf,
    /// The first row holds data, not column names.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Label column (name, or zero-based index without a header).
    #[arg(long, value_name = "COLUMN")]
    pub labels: Option<String>,
    /// Column of sample identifiers carried into outputs.
    #[arg(long, value_name = "COLUMN")]
    pub id_column: Option<String>,
}

impl InputArgs {
    pub fn csv_options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Usage(format!("delimiter {:?} is not ASCII", self.delimiter)));
        }
        Ok(CsvOptions {
            has_header: !self.no_header,
            label_column: self.labels.clone(),
            id_column: self.id_column.clone(),
            delimiter: self.delimiter as u8,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    Linear,
    Polynomial,
    Rbf,
    Sigmoid,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum LabelKernelName {
    #[default]
    Delta,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub kernel: Option<KernelName>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub c3: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "pca")]
    pub method: Method,
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub label_kernel: Option<LabelKernelName>,
    /// Standardize features; the parameters are stored in the model.
    #[arg(long)]
    pub standardize: bool,
    /// Skip mean subtraction (latent semantic indexing).
    #[arg(long)]
    pub no_center: bool,
    /// Features kept by scoring SPCA.
    #[arg(long, value_name = "INT")]
    pub top_q: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Also write the training embedding here.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Output CSV (standard output when omitted).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Input CSV; omit when reading the spectrum of a saved model.
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long, value_name = "COLUMN")]
    pub labels: Option<String>,
    #[arg(long, value_name = "COLUMN")]
    pub id_column: Option<String>,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub no_center: bool,
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HsicArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub label_kernel: Option<LabelKernelName>,
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub train_output: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub test_output: PathBuf,
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out`. Help and version requests succeed.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{}", e.render())?;
                    Ok(())
                }
                _ => Err(Error::Usage(e.render().to_string())),
            };
        }
    };
    commands::execute(cli.command, out)
}
