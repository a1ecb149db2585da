//! Dimensionality reduction with the PCA family: PCA, dual PCA, kernel PCA,
//! supervised PCA (feature scoring and HSIC), dual SPCA and kernel SPCA.
//!
//! Data matrices are d×n with one sample per column.

// Negated float comparisons in this crate are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod linalg;
pub mod cli;
pub mod dual_pca;
pub mod kernel_pca;
pub mod kernel_spca;
pub mod pca;
pub mod spca;

pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use linalg::DataMatrix;
pub use pca::{Embedding, LinearSubspaceModel};

#[cfg(test)]
#[path = "../tests/common/mod.rs"]
mod testutil;
