//! Augmented Dickey–Fuller unit-root test, constant-only regression.
//!
//! The lag order is chosen by AIC over `0..=max_lag` on a common sample (the
//! first `max_lag` differences are held out for every candidate), then the
//! chosen model is refit on the largest sample it allows. p-values come from
//! MacKinnon's (1994) response surface for one variable with a constant.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::special::norm_cdf;
use super::HypothesisResult;
use crate::error::{Error, Result};
use crate::linalg::ols;

pub const MIN_LENGTH: usize = 15;

const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

/// Approximate p-value of a constant-only ADF statistic.
pub fn mackinnon_p_value(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let z = if stat <= TAU_STAR {
        TAU_SMALLP[0] + TAU_SMALLP[1] * stat + TAU_SMALLP[2] * stat * stat
    } else {
        TAU_LARGEP[0] + stat * (TAU_LARGEP[1] + stat * (TAU_LARGEP[2] + stat * TAU_LARGEP[3]))
    };
    norm_cdf(z)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdfDetail {
    pub result: HypothesisResult,
    pub used_lag: usize,
    pub nobs: usize,
    pub aic: f64,
}

/// Regression of Δy_t on [1, y_{t−1}, Δy_{t−1}, …, Δy_{t−lags}] using the last
/// `nobs` usable differences.
fn design(y: &[f64], lags: usize, nobs: usize) -> (DMatrix<f64>, DVector<f64>) {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let start = dy.len() - nobs;
    let x = DMatrix::from_fn(nobs, 2 + lags, |i, j| {
        let t = start + i;
        match j {
            0 => 1.0,
            1 => y[t],
            l => dy[t - (l - 1)],
        }
    });
    let target = DVector::from_iterator(nobs, dy[start..].iter().copied());
    (x, target)
}

fn aic(ssr: f64, nobs: usize, k: usize) -> f64 {
    let n = nobs as f64;
    n * ((2.0 * std::f64::consts::PI).ln() + (ssr / n).ln() + 1.0) + 2.0 * k as f64
}

pub fn adf_test(y: &[f64], max_lag: usize) -> Result<HypothesisResult> {
    adf_test_detail(y, max_lag).map(|d| d.result)
}

pub fn adf_test_detail(y: &[f64], max_lag: usize) -> Result<AdfDetail> {
    let n = y.len();
    if n < MIN_LENGTH {
        return Err(Error::InvalidInput(format!(
            "ADF needs at least {MIN_LENGTH} observations, got {n}"
        )));
    }
    if 3 * max_lag >= n {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} must be below n/3 for n = {n}"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in series".into()));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::Degenerate("ADF on a constant series".into()));
    }

    let common = n - 1 - max_lag;
    let mut best: Option<(f64, usize)> = None;
    for lags in 0..=max_lag {
        let (x, t) = design(y, lags, common);
        let fit = ols(&x, &t)?;
        let score = aic(fit.ssr.max(f64::MIN_POSITIVE), common, fit.rank);
        if best.is_none_or(|(b, _)| score < b) {
            best = Some((score, lags));
        }
    }
    let (best_aic, used_lag) = best.expect("at least one lag candidate");

    let nobs = n - 1 - used_lag;
    let (x, t) = design(y, used_lag, nobs);
    let fit = ols(&x, &t)?;
    let se = fit.std_errors();
    let mut stat = fit.beta[1] / se[1];
    if !stat.is_finite() {
        // Exact fit (deterministic differences): nothing stochastic to test.
        stat = 0.0;
    }
    Ok(AdfDetail {
        result: HypothesisResult::new(stat, mackinnon_p_value(stat)),
        used_lag,
        nobs,
        aic: best_aic,
    })
}
