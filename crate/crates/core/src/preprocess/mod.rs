//! Yield detrending, design matrices and dimensionality reduction.

pub mod bspline;
mod design;
mod detrend;
mod fpca;
mod pca;

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use design::{all_model_specs, build_design_matrix, model_spec, DesignMatrix, ModelSpec, N_SPECS};
pub use detrend::{
    default_max_lag, detrend_gated, linear_detrend, no_detrend, ols_trend, remove_linear_trend, DetrendResult,
};
pub use fpca::{default_basis_size, fpca, fpca_matrix, FpcaOptions, MAX_DEFAULT_BASIS};
pub use pca::pca;

use crate::error::{Error, Result};

/// Components kept by both reducers.
pub const N_COMPONENTS: usize = 4;

pub const SIGN_CONVENTION: &str = "largest-magnitude loading entry is positive";

/// How design-matrix columns are turned into model features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    Pca,
    Fpca,
    /// No reduction; the seasonal columns are used directly (tree models only).
    Raw,
}

impl Reducer {
    pub fn as_str(self) -> &'static str {
        match self {
            Reducer::Pca => "pca",
            Reducer::Fpca => "fpca",
            Reducer::Raw => "raw",
        }
    }
}

impl std::str::FromStr for Reducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(Reducer::Pca),
            "fpca" => Ok(Reducer::Fpca),
            "raw" => Ok(Reducer::Raw),
            _ => Err(Error::InvalidInput(format!("unknown reducer {s:?}"))),
        }
    }
}

impl std::fmt::Display for Reducer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Component scores plus explained-variance ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct PcResult {
    pub method: Reducer,
    /// N × k scores.
    pub scores: DMatrix<f64>,
    /// Ratios of the retained components, non-increasing.
    pub explained_ratio: Vec<f64>,
    /// Ratios of every component; sums to 1.
    pub explained_ratio_all: Vec<f64>,
    /// PCA: p × k loadings. FPCA: basis × k eigenfunction coefficients.
    pub loadings: DMatrix<f64>,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub basis_size: Option<usize>,
}

/// JSON audit record accompanying a score CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PcSidecar {
    pub method: Reducer,
    pub n_components: usize,
    pub explained_ratio: Vec<f64>,
    pub explained_ratio_all: Vec<f64>,
    pub total_explained: f64,
    pub basis_size: Option<usize>,
    pub sign_convention: String,
    pub loadings: Vec<Vec<f64>>,
}

impl PcResult {
    pub fn n_components(&self) -> usize {
        self.scores.ncols()
    }

    pub fn total_explained(&self) -> f64 {
        self.explained_ratio.iter().sum()
    }

    pub fn sidecar(&self) -> PcSidecar {
        PcSidecar {
            method: self.method,
            n_components: self.n_components(),
            explained_ratio: self.explained_ratio.clone(),
            explained_ratio_all: self.explained_ratio_all.clone(),
            total_explained: self.total_explained(),
            basis_size: self.basis_size,
            sign_convention: SIGN_CONVENTION.to_string(),
            loadings: (0..self.loadings.nrows())
                .map(|r| self.loadings.row(r).iter().copied().collect())
                .collect(),
        }
    }

    /// `year,PC1,..,PCk` rows.
    pub fn write_scores_csv<W: Write>(&self, years: &[i32], writer: W) -> Result<()> {
        if years.len() != self.scores.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.scores.nrows(),
                got: years.len(),
            });
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["year".to_string()];
        header.extend((1..=self.n_components()).map(|j| format!("PC{j}")));
        w.write_record(&header)?;
        for (r, year) in years.iter().enumerate() {
            let mut rec = vec![year.to_string()];
            rec.extend(self.scores.row(r).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Flip a component so its largest-magnitude entry is positive (first wins ties).
pub(crate) fn sign_of_largest(values: impl Iterator<Item = f64>) -> f64 {
    let mut best = 0.0f64;
    for v in values {
        if v.abs() > best.abs() {
            best = v;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Reduce a design matrix with the requested method.
pub fn reduce(x: &DesignMatrix, method: Reducer, basis_size: Option<usize>) -> Result<PcResult> {
    match method {
        Reducer::Pca => pca(&x.data, N_COMPONENTS),
        Reducer::Fpca => fpca(
            x,
            N_COMPONENTS,
            FpcaOptions {
                basis_size,
                ..FpcaOptions::default()
            },
        ),
        Reducer::Raw => Err(Error::Unsupported("raw mode does not reduce".into())),
    }
}
