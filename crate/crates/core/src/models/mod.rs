//! Yield models: log-link GLM and GAM, and boosted regression trees.

pub mod gam;
pub mod gbt;
pub mod glm;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use gam::{fit_gam, predict_gam, GamFit, GamParams, Smooth};
pub use gbt::{fit_gbt, predict_gbt, GbtEnsemble, GbtParams, Growth, Node, Tree, LEAFWISE_MIN_CHILD_WEIGHT};
pub use glm::{fit_glm, predict_glm, GlmFit};

use crate::error::{Error, Result};
use crate::ingest::Crop;

/// Response distribution for the log-link models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlmFamily {
    Normal,
    Gamma,
}

impl GlmFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GlmFamily::Normal => "normal",
            GlmFamily::Gamma => "gamma",
        }
    }
}

impl fmt::Display for GlmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GlmFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(GlmFamily::Normal),
            "gamma" => Ok(GlmFamily::Gamma),
            other => Err(Error::InvalidInput(format!("unknown GLM family '{other}'"))),
        }
    }
}

/// Best-fitting yield family per crop and region used by the reference
/// pipeline. `None` where the crop is not analysed in that region.
pub fn reference_family(crop: Crop, region: &str) -> Option<GlmFamily> {
    use GlmFamily::{Gamma as G, Normal as N};
    let (corn, wheat, soy) = match region {
        "CEA" => (G, N, Some(G)),
        "CWP" => (G, N, None),
        "MID" => (G, G, Some(G)),
        "SEA" => (N, N, Some(G)),
        "SPL" => (N, G, Some(G)),
        "SWP" => (N, N, None),
        _ => return None,
    };
    match crop {
        Crop::Corn => Some(corn),
        Crop::Wheat => Some(wheat),
        Crop::Soybeans => soy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "GLM")]
    Glm,
    #[serde(rename = "GAM")]
    Gam,
    /// Boosted trees, level-wise growth.
    #[serde(rename = "XGB")]
    Xgb,
    /// Boosted trees, leaf-wise growth.
    #[serde(rename = "LGBM")]
    Lgbm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Glm, Method::Gam, Method::Xgb, Method::Lgbm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Glm => "GLM",
            Method::Gam => "GAM",
            Method::Xgb => "XGB",
            Method::Lgbm => "LGBM",
        }
    }

    pub fn is_tree(self) -> bool {
        matches!(self, Method::Xgb | Method::Lgbm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}'")))
    }
}

/// Hyperparameters for every method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub family: GlmFamily,
    pub gam: GamParams,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    pub reg_gamma: f64,
    /// Overrides the per-growth default minimum child hessian.
    #[serde(default)]
    pub min_child_weight: Option<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        let g = GbtParams::new(Growth::Levelwise);
        Self {
            family: GlmFamily::Normal,
            gam: GamParams::default(),
            n_estimators: g.n_estimators,
            max_depth: g.max_depth,
            learning_rate: g.learning_rate,
            reg_lambda: g.reg_lambda,
            reg_gamma: g.reg_gamma,
            min_child_weight: None,
        }
    }
}

impl ModelParams {
    pub fn gbt(&self, growth: Growth) -> GbtParams {
        let defaults = GbtParams::new(growth);
        GbtParams {
            n_estimators: self.n_estimators,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            reg_lambda: self.reg_lambda,
            reg_gamma: self.reg_gamma,
            min_child_weight: self.min_child_weight.unwrap_or(defaults.min_child_weight),
            ..defaults
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FittedModel {
    Glm(GlmFit),
    Gam(GamFit),
    Gbt(GbtEnsemble),
}

pub fn fit(method: Method, features: &DMatrix<f64>, dy: &[f64], params: &ModelParams) -> Result<FittedModel> {
    Ok(match method {
        Method::Glm => FittedModel::Glm(fit_glm(features, dy, params.family)?),
        Method::Gam => FittedModel::Gam(fit_gam(features, dy, params.family, params.gam)?),
        Method::Xgb => FittedModel::Gbt(fit_gbt(features, dy, params.gbt(Growth::Levelwise))?),
        Method::Lgbm => FittedModel::Gbt(fit_gbt(features, dy, params.gbt(Growth::Leafwise))?),
    })
}

impl FittedModel {
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<f64>> {
        match self {
            FittedModel::Glm(m) => predict_glm(m, features),
            FittedModel::Gam(m) => predict_gam(m, features),
            FittedModel::Gbt(m) => predict_gbt(m, features),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format_version: FORMAT_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "model format version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        Ok(doc.model)
    }
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub model: FittedModel,
}
