//! Statistical primitives shared by the yield and pricing pipelines.

mod adf;
mod anderson;
mod dist;
mod ecdf;
mod rank;
pub(crate) mod special;

use serde::{Deserialize, Serialize};

pub use adf::{adf_test, adf_test_detail, mackinnon_p_value, AdfDetail, MIN_LENGTH as ADF_MIN_LENGTH};
pub use anderson::{ad_k_sample_statistic, ad_two_sample};
pub use dist::{fit_distribution, sample_from_fit, select_best_distribution, DistributionFit, Family};
pub use ecdf::{ecdf, Ecdf};
pub use rank::{mid_ranks, pearson, spearman_rho};

/// Outcome of a hypothesis test at the conventional 5% level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at_05: bool,
}

impl HypothesisResult {
    pub fn new(statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            reject_at_05: p_value < 0.05,
        }
    }
}
