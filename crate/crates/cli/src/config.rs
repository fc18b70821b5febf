//! Run configuration (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use climidx_core::indices::{TemperatureUnit, REFERENCE_END, REFERENCE_START};
use climidx_core::ingest::{Crop, Season, Variable};
use climidx_core::models::{GlmFamily, Method, ModelParams};
use climidx_core::preprocess::{Reducer, N_SPECS};
use climidx_core::pricing::{DetrendMode, PricingMethod, DEFAULT_ALPHA, DEFAULT_SIMS};
use climidx_core::stats::Family;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "CLIMIDX_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "data/synthetic";
pub const DEFAULT_OUTPUT_DIR: &str = "climidx-out";

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub output: OutputConfig,
    pub indices: IndicesConfig,
    pub predict: PredictConfig,
    pub pricing: PricingConfig,
    pub plotdata: PlotConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Base directory for relative data paths.
    pub dir: Option<PathBuf>,
    pub seasonal: Option<PathBuf>,
    pub yields: Option<PathBuf>,
    /// Directory of `<STATE>.csv` daily station files.
    pub daily_dir: Option<PathBuf>,
    pub region_map: Option<PathBuf>,
    /// Monthly raw ACI component values (`region,variable,year,month,value`).
    pub aci_monthly: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndicesConfig {
    /// Regions to emit; all mapped regions when absent.
    pub regions: Option<Vec<String>>,
    pub unit: TemperatureUnit,
    /// Compute T90/T10/P from the daily files and standardize over this window.
    pub aci: bool,
    pub reference: [i32; 2],
}

impl Default for IndicesConfig {
    fn default() -> Self {
        Self {
            regions: None,
            unit: TemperatureUnit::Fahrenheit,
            aci: false,
            reference: [REFERENCE_START, REFERENCE_END],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    pub reg_gamma: f64,
    /// Per-growth default (1 level-wise, 20 leaf-wise) when absent.
    pub min_child_weight: Option<f64>,
}

impl Default for GbtConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            n_estimators: p.n_estimators,
            max_depth: p.max_depth,
            learning_rate: p.learning_rate,
            reg_lambda: p.reg_lambda,
            reg_gamma: p.reg_gamma,
            min_child_weight: p.min_child_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GamConfig {
    pub smoothing_lambda: f64,
    pub basis_size: usize,
}

impl Default for GamConfig {
    fn default() -> Self {
        let p = ModelParams::default().gam;
        Self {
            smoothing_lambda: p.smoothing_lambda,
            basis_size: p.basis_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub crops: Vec<Crop>,
    pub regions: Vec<String>,
    pub models: Vec<u8>,
    /// Defaults to all four methods (tree methods only for `raw`).
    pub methods: Option<Vec<Method>>,
    pub reducer: Reducer,
    pub folds: usize,
    /// `round(0.1·N)` when absent.
    pub test_len: Option<usize>,
    /// Overrides the reference family table.
    pub family: Option<GlmFamily>,
    /// FPCA basis size; `min(grid, 12)` when absent.
    pub basis_size: Option<usize>,
    pub redetrend_per_split: bool,
    pub gbt: GbtConfig,
    pub gam: GamConfig,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self {
            crops: vec![Crop::Corn],
            regions: vec!["MID".into()],
            models: (1..=N_SPECS).collect(),
            methods: None,
            reducer: Reducer::Fpca,
            folds: 5,
            test_len: Some(6),
            family: None,
            basis_size: None,
            redetrend_per_split: false,
            gbt: GbtConfig::default(),
            gam: GamConfig::default(),
        }
    }
}

impl PredictConfig {
    pub fn methods(&self) -> Vec<Method> {
        match &self.methods {
            Some(m) => m.clone(),
            None if self.reducer == Reducer::Raw => vec![Method::Xgb, Method::Lgbm],
            None => Method::ALL.to_vec(),
        }
    }

    pub fn model_params(&self) -> ModelParams {
        let mut p = ModelParams::default();
        p.gam.smoothing_lambda = self.gam.smoothing_lambda;
        p.gam.basis_size = self.gam.basis_size;
        p.n_estimators = self.gbt.n_estimators;
        p.max_depth = self.gbt.max_depth;
        p.learning_rate = self.gbt.learning_rate;
        p.reg_lambda = self.gbt.reg_lambda;
        p.reg_gamma = self.gbt.reg_gamma;
        p.min_child_weight = self.gbt.min_child_weight;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub name: String,
    pub index: Variable,
    pub region: String,
    pub season: Season,
    pub alpha: Option<f64>,
    /// First and last year, inclusive; every available year when absent.
    pub years: Option<[i32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PricingConfig {
    pub alpha: f64,
    pub n_sims: usize,
    pub seed: u64,
    pub method: PricingMethod,
    pub detrend: DetrendMode,
    pub families: Vec<Family>,
    pub discount_factor: f64,
    pub contracts: Vec<ContractConfig>,
    pub comparisons: Vec<ComparisonConfig>,
}

impl Default for PricingConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            n_sims: DEFAULT_SIMS,
            seed: 0,
            method: PricingMethod::Both,
            detrend: DetrendMode::Auto,
            families: Family::ALL.to_vec(),
            discount_factor: 1.0,
            contracts: Vec::new(),
            comparisons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    /// Region for the explained-variance bars; first predict region when absent.
    pub region: Option<String>,
    /// FPCA basis size override for the explained-variance bars.
    pub basis_size: Option<usize>,
    /// Reuse an existing predict `reports.json` instead of rerunning the matrix.
    pub reuse_reports: bool,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            region: None,
            basis_size: None,
            reuse_reports: true,
        }
    }
}

/// Which input files a command needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Daily,
    Seasonal,
    SeasonalAndYields,
    Everything,
}

/// A parsed config together with where its relative paths resolve.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub base: PathBuf,
    pub data_dir: PathBuf,
}

impl Loaded {
    /// Parse `path`, or use defaults when absent. `data_dir_env` is the value
    /// of [`DATA_DIR_ENV`], if set.
    pub fn load(path: Option<&Path>, data_dir_env: Option<PathBuf>) -> Result<Self, ConfigError> {
        let (config, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| cfg_err(format!("cannot read config {}: {e}", p.display())))?;
                let config: RunConfig = toml::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", p.display())))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (config, base)
            }
            None => (RunConfig::default(), PathBuf::new()),
        };
        let data_dir = match &config.data.dir {
            Some(d) => base.join(d),
            None => data_dir_env.unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR)),
        };
        Ok(Self { config, base, data_dir })
    }

    fn data_path(&self, p: &Option<PathBuf>, default: &str) -> PathBuf {
        self.data_dir.join(p.as_deref().unwrap_or(Path::new(default)))
    }

    pub fn seasonal_path(&self) -> PathBuf {
        self.data_path(&self.config.data.seasonal, "seasonal.csv")
    }

    pub fn yields_path(&self) -> PathBuf {
        self.data_path(&self.config.data.yields, "yields.csv")
    }

    pub fn daily_dir(&self) -> PathBuf {
        self.data_path(&self.config.data.daily_dir, "daily")
    }

    pub fn region_map_path(&self) -> PathBuf {
        self.data_path(&self.config.data.region_map, "regions.csv")
    }

    pub fn aci_monthly_path(&self) -> Option<PathBuf> {
        self.config.data.aci_monthly.as_ref().map(|p| self.data_dir.join(p))
    }

    pub fn output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        match cli_override {
            Some(p) => p.to_path_buf(),
            None => self.base.join(&self.config.output.dir),
        }
    }

    /// SHA-256 of the canonical JSON form of the effective config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&self.config).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn validate(&self, needs: Needs) -> Result<(), ConfigError> {
        self.validate_settings()?;
        self.check_files(needs)
    }

    fn check_files(&self, needs: Needs) -> Result<(), ConfigError> {
        let c = &self.config;
        let must_exist = |p: PathBuf, what: &str| -> Result<(), ConfigError> {
            if p.exists() {
                Ok(())
            } else {
                Err(cfg_err(format!("{what} not found: {}", p.display())))
            }
        };
        match needs {
            Needs::Daily => {
                must_exist(self.daily_dir(), "daily weather directory")?;
                must_exist(self.region_map_path(), "region map")?;
            }
            Needs::Seasonal => must_exist(self.seasonal_path(), "seasonal index file")?,
            Needs::SeasonalAndYields => {
                must_exist(self.seasonal_path(), "seasonal index file")?;
                must_exist(self.yields_path(), "yield file")?;
            }
            Needs::Everything => {
                must_exist(self.seasonal_path(), "seasonal index file")?;
                must_exist(self.yields_path(), "yield file")?;
                if c.data.daily_dir.is_some() {
                    must_exist(self.daily_dir(), "daily weather directory")?;
                }
                if c.data.region_map.is_some() {
                    must_exist(self.region_map_path(), "region map")?;
                }
            }
        }
        if let Some(p) = self.aci_monthly_path() {
            if matches!(needs, Needs::Daily | Needs::Everything) {
                must_exist(p, "ACI component file")?;
            }
        }
        Ok(())
    }

    pub fn validate_settings(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        if let Some(r) = &c.indices.regions {
            if r.is_empty() {
                return Err(cfg_err("indices.regions: empty region selection"));
            }
        }
        let [lo, hi] = c.indices.reference;
        if lo > hi {
            return Err(cfg_err(format!("indices.reference: {lo} is after {hi}")));
        }

        let p = &c.predict;
        if p.crops.is_empty() {
            return Err(cfg_err("predict.crops: empty crop selection"));
        }
        if p.regions.is_empty() {
            return Err(cfg_err("predict.regions: empty region selection"));
        }
        if p.models.is_empty() {
            return Err(cfg_err("predict.models: empty model selection"));
        }
        if let Some(id) = p.models.iter().find(|id| !(1..=N_SPECS).contains(*id)) {
            return Err(cfg_err(format!("predict.models: model id {id} outside 1..={N_SPECS}")));
        }
        let methods = p.methods();
        if methods.is_empty() {
            return Err(cfg_err("predict.methods: empty method selection"));
        }
        if p.reducer == Reducer::Raw {
            if let Some(m) = methods.iter().find(|m| !m.is_tree()) {
                return Err(cfg_err(format!(
                    "predict: reducer 'raw' is only available for tree methods, not {m}"
                )));
            }
        }
        if p.folds == 0 || p.test_len == Some(0) {
            return Err(cfg_err("predict: folds and test_len must be positive"));
        }
        if !(p.gbt.learning_rate > 0.0) || p.gbt.max_depth == 0 {
            return Err(cfg_err("predict.gbt: learning_rate and max_depth must be positive"));
        }
        if !(p.gbt.reg_lambda >= 0.0 && p.gbt.reg_gamma >= 0.0) {
            return Err(cfg_err("predict.gbt: reg_lambda and reg_gamma must be non-negative"));
        }
        if !(p.gam.smoothing_lambda >= 0.0) || p.gam.basis_size < 4 {
            return Err(cfg_err("predict.gam: smoothing_lambda ≥ 0 and basis_size ≥ 4 required"));
        }

        let pr = &c.pricing;
        if !(pr.alpha > 0.0 && pr.alpha.is_finite()) {
            return Err(cfg_err(format!("pricing.alpha must be positive, got {}", pr.alpha)));
        }
        if pr.n_sims == 0 {
            return Err(cfg_err("pricing.n_sims must be positive"));
        }
        if pr.families.is_empty() {
            return Err(cfg_err("pricing.families: empty family list"));
        }
        if !(pr.discount_factor > 0.0) {
            return Err(cfg_err("pricing.discount_factor must be positive"));
        }
        let mut names = BTreeSet::new();
        for k in &pr.contracts {
            if k.name.is_empty() || k.name.contains(['/', '\\']) {
                return Err(cfg_err(format!("pricing.contracts: bad name {:?}", k.name)));
            }
            if !names.insert(k.name.as_str()) {
                return Err(cfg_err(format!("pricing.contracts: duplicate name {:?}", k.name)));
            }
            if let Some(a) = k.alpha {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(cfg_err(format!("pricing.contracts.{}: alpha must be positive", k.name)));
                }
            }
            if let Some([lo, hi]) = k.years {
                if lo > hi {
                    return Err(cfg_err(format!("pricing.contracts.{}: {lo} is after {hi}", k.name)));
                }
            }
        }
        for cmp in &pr.comparisons {
            for n in [&cmp.a, &cmp.b] {
                if !names.contains(n.as_str()) {
                    return Err(cfg_err(format!("pricing.comparisons: unknown contract {n:?}")));
                }
            }
        }
        Ok(())
    }
}
