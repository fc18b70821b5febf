//! Call options on climate indices: historical burn analysis (HBA) and index
//! modeling (IM).

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean, sample_sd};
use crate::preprocess::{default_max_lag, remove_linear_trend};
use crate::stats::{
    ad_two_sample, adf_test, sample_from_fit, select_best_distribution, spearman_rho, DistributionFit, Family,
    HypothesisResult, ADF_MIN_LENGTH,
};

pub const DEFAULT_ALPHA: f64 = 100.0;
pub const DEFAULT_SIMS: usize = 1000;
pub const STRIKE_SD_MULTIPLE: f64 = 0.2;
pub const MIN_SERIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionContract {
    pub name: String,
    pub years: Vec<i32>,
    pub index: Vec<f64>,
    pub tick_alpha: f64,
}

impl OptionContract {
    pub fn new(name: impl Into<String>, years: Vec<i32>, index: Vec<f64>, tick_alpha: f64) -> Result<Self> {
        if years.len() != index.len() {
            return Err(Error::DimensionMismatch {
                expected: years.len(),
                got: index.len(),
            });
        }
        if index.len() < MIN_SERIES {
            return Err(Error::InvalidInput(format!(
                "index series needs at least {MIN_SERIES} values, got {}",
                index.len()
            )));
        }
        if !(tick_alpha > 0.0 && tick_alpha.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tick size must be positive, got {tick_alpha}"
            )));
        }
        if index.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("index series contains non-finite values".into()));
        }
        Ok(Self {
            name: name.into(),
            years,
            index,
            tick_alpha,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetrendMode {
    /// Detrend only when ADF does not already reject a unit root.
    #[default]
    Auto,
    On,
    Off,
}

impl FromStr for DetrendMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(DetrendMode::Auto),
            "on" => Ok(DetrendMode::On),
            "off" => Ok(DetrendMode::Off),
            _ => Err(Error::InvalidInput(format!("unknown detrend mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PricingMethod {
    Hba,
    Im,
    #[default]
    Both,
}

impl FromStr for PricingMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hba" => Ok(PricingMethod::Hba),
            "im" => Ok(PricingMethod::Im),
            "both" => Ok(PricingMethod::Both),
            _ => Err(Error::InvalidInput(format!("unknown pricing method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingOptions {
    pub method: PricingMethod,
    pub detrend: DetrendMode,
    pub families: Vec<Family>,
    pub n_sims: usize,
    pub seed: u64,
    /// Multiplies every fair price; 1 means no discounting.
    pub discount_factor: f64,
}

impl Default for PricingOptions {
    fn default() -> Self {
        Self {
            method: PricingMethod::Both,
            detrend: DetrendMode::Auto,
            families: Family::ALL.to_vec(),
            n_sims: DEFAULT_SIMS,
            seed: 0,
            discount_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingReport {
    pub name: String,
    pub years: Vec<i32>,
    /// Index values the strike and payoffs were computed from.
    pub index_used: Vec<f64>,
    pub detrended: bool,
    pub tick_alpha: f64,
    pub strike: f64,
    pub payoffs_hba: Vec<f64>,
    pub fair_price_hba: f64,
    pub fit: Option<DistributionFit>,
    pub payoffs_im: Vec<f64>,
    pub fair_price_im: Option<f64>,
    pub n_sims: usize,
    pub seed: u64,
    pub discount_factor: f64,
}

/// `mean + 0.2·sd` with the sample sd.
pub fn fair_strike(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InvalidInput("strike needs at least two values".into()));
    }
    let sd = sample_sd(series);
    if !(sd > 0.0) {
        return Err(Error::Degenerate("index series has zero standard deviation".into()));
    }
    Ok(mean(series) + STRIKE_SD_MULTIPLE * sd)
}

/// `α · max(i − k, 0)`.
pub fn call_payoff(i: f64, k: f64, alpha: f64) -> f64 {
    alpha * (i - k).max(0.0)
}

/// Plain arithmetic mean; the fair price under both methods.
pub fn mean_payoff(payoffs: &[f64]) -> f64 {
    payoffs.iter().sum::<f64>() / payoffs.len() as f64
}

/// Deterministic per-stream seed derived from a base seed (SplitMix64).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn prepare_index(contract: &OptionContract, mode: DetrendMode) -> Result<(Vec<f64>, bool)> {
    let raw = &contract.index;
    let detrend = match mode {
        DetrendMode::Off => false,
        DetrendMode::On => true,
        DetrendMode::Auto => {
            if raw.len() < ADF_MIN_LENGTH {
                false
            } else {
                match adf_test(raw, default_max_lag(raw.len())) {
                    Ok(r) => !r.reject_at_05,
                    Err(_) => false,
                }
            }
        }
    };
    if detrend {
        Ok((remove_linear_trend(raw)?.dy, true))
    } else {
        Ok((raw.clone(), false))
    }
}

/// Price one contract with HBA and/or IM. The strike always comes from the
/// historical (possibly detrended) series.
pub fn price(contract: &OptionContract, opts: &PricingOptions) -> Result<PricingReport> {
    if !(opts.discount_factor > 0.0) {
        return Err(Error::InvalidInput("discount factor must be positive".into()));
    }
    let (index_used, detrended) = prepare_index(contract, opts.detrend)?;
    let strike = fair_strike(&index_used)?;
    let alpha = contract.tick_alpha;
    let payoffs_hba: Vec<f64> = index_used.iter().map(|&i| call_payoff(i, strike, alpha)).collect();
    let fair_price_hba = opts.discount_factor * mean_payoff(&payoffs_hba);

    let (fit, payoffs_im, fair_price_im) = if opts.method == PricingMethod::Hba {
        (None, Vec::new(), None)
    } else {
        let fit = select_best_distribution(&index_used, &opts.families)?;
        let sims = sample_from_fit(&fit, opts.n_sims, opts.seed)?;
        let payoffs: Vec<f64> = sims.iter().map(|&i| call_payoff(i, strike, alpha)).collect();
        let price = opts.discount_factor * mean_payoff(&payoffs);
        (Some(fit), payoffs, Some(price))
    };
    Ok(PricingReport {
        name: contract.name.clone(),
        years: contract.years.clone(),
        index_used,
        detrended,
        tick_alpha: alpha,
        strike,
        payoffs_hba,
        fair_price_hba,
        fit,
        payoffs_im,
        fair_price_im,
        n_sims: if opts.method == PricingMethod::Hba {
            0
        } else {
            opts.n_sims
        },
        seed: opts.seed,
        discount_factor: opts.discount_factor,
    })
}

pub fn hba_price(contract: &OptionContract, detrend: bool) -> Result<PricingReport> {
    let opts = PricingOptions {
        method: PricingMethod::Hba,
        detrend: if detrend { DetrendMode::On } else { DetrendMode::Off },
        ..Default::default()
    };
    price(contract, &opts)
}

pub fn im_price(
    contract: &OptionContract,
    families: &[Family],
    n_sims: usize,
    seed: u64,
    detrend: bool,
) -> Result<PricingReport> {
    let opts = PricingOptions {
        method: PricingMethod::Both,
        detrend: if detrend { DetrendMode::On } else { DetrendMode::Off },
        families: families.to_vec(),
        n_sims,
        seed,
        discount_factor: 1.0,
    };
    price(contract, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffComparison {
    /// Spearman correlation of the year-aligned HBA payoffs.
    pub rho: f64,
    pub ad_hba: HypothesisResult,
    /// A-D on the simulated payoffs, when both reports carry IM results.
    pub ad_im: Option<HypothesisResult>,
}

pub fn compare_payoffs(a: &PricingReport, b: &PricingReport) -> Result<PayoffComparison> {
    if a.years != b.years {
        return Err(Error::InvalidInput(format!(
            "payoff years differ between {} and {}",
            a.name, b.name
        )));
    }
    let rho = spearman_rho(&a.payoffs_hba, &b.payoffs_hba)?;
    let ad_hba = ad_two_sample(&a.payoffs_hba, &b.payoffs_hba)?;
    let ad_im = if a.payoffs_im.is_empty() || b.payoffs_im.is_empty() {
        None
    } else {
        Some(ad_two_sample(&a.payoffs_im, &b.payoffs_im)?)
    };
    Ok(PayoffComparison { rho, ad_hba, ad_im })
}

/// `payoffs.csv`: `year,index,payoff`.
pub fn write_payoffs_csv<W: Write>(report: &PricingReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["year", "index", "payoff"])?;
    for ((y, i), p) in report.years.iter().zip(&report.index_used).zip(&report.payoffs_hba) {
        w.write_record([y.to_string(), i.to_string(), p.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<payoffs.csv>", e))?;
    Ok(())
}
