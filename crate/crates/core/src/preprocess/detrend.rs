//! Linear yield detrending re-levelled to the first fitted value.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{adf_test, HypothesisResult};

/// Output of [`linear_detrend`]. `dy[t] + tt[t] == y[t]` holds bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetrendResult {
    pub dy: Vec<f64>,
    pub tt: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Whether a trend was removed (false when ADF already indicated stationarity).
    pub applied: bool,
    /// ADF results; absent for series shorter than the ADF minimum.
    pub adf_before: Option<HypothesisResult>,
    pub adf_after: Option<HypothesisResult>,
}

/// Default ADF lag cap, `⌊12 (n/100)^¼⌋`, kept below `n/3`.
pub fn default_max_lag(n: usize) -> usize {
    let lag = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    lag.min(n.saturating_sub(1) / 3)
}

fn adf_or_none(y: &[f64]) -> Option<HypothesisResult> {
    if y.len() < crate::stats::ADF_MIN_LENGTH {
        return None;
    }
    adf_test(y, default_max_lag(y.len())).ok()
}

/// OLS of `y` on `t = 1..N`, returning `(intercept, slope)`.
pub fn ols_trend(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let t_mean = (n + 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dt = (i + 1) as f64 - t_mean;
        sxy += dt * (v - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    (y_mean - slope * t_mean, slope)
}

/// Split `y` into `(dy, tt)` with `dy + tt == y` exactly in floating point,
/// keeping `tt` within a few ulps of `trend`. `None` when no such split
/// exists, which happens once `|trend|` dwarfs `y`.
fn exact_split(y: f64, trend: f64) -> Option<(f64, f64)> {
    let try_at = |t: f64| {
        let dy = y - t;
        let tt = y - dy;
        (dy + tt == y).then_some((dy, tt))
    };
    if let Some(s) = try_at(trend) {
        return Some(s);
    }
    let (mut up, mut down) = (trend, trend);
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        if let Some(s) = try_at(up).or_else(|| try_at(down)) {
            return Some(s);
        }
    }
    None
}

/// Remove an OLS linear trend: `dy_t = y_t − ŷ_t + ŷ_1`, `tt_t = ŷ_t − ŷ_1`.
///
/// Runs ADF on the series before and after (when long enough). Errors if any
/// detrended value is not strictly positive or cannot be split exactly.
pub fn linear_detrend(y: &[f64]) -> Result<DetrendResult> {
    if y.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("yields must be positive and finite".into()));
    }
    let r = remove_linear_trend(y)?;
    if let Some((i, v)) = r.dy.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Degenerate(format!(
            "detrended value {v} at index {i} is not positive"
        )));
    }
    Ok(r)
}

/// [`linear_detrend`] without the positivity requirement, for index series
/// such as standardized anomalies.
pub fn remove_linear_trend(y: &[f64]) -> Result<DetrendResult> {
    if y.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "detrending needs at least 3 observations, got {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    let (intercept, slope) = ols_trend(y);
    let fitted_first = intercept + slope;
    let mut dy = Vec::with_capacity(y.len());
    let mut tt = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        let fitted = intercept + slope * (i + 1) as f64;
        let (d, t) = exact_split(v, fitted - fitted_first)
            .ok_or_else(|| Error::Degenerate(format!("trend at index {i} too steep to split {v} exactly")))?;
        dy.push(d);
        tt.push(t);
    }
    Ok(DetrendResult {
        adf_before: adf_or_none(y),
        adf_after: adf_or_none(&dy),
        dy,
        tt,
        slope,
        intercept,
        applied: true,
    })
}

/// Identity "detrend" (used when the raw series is already stationary).
pub fn no_detrend(y: &[f64], adf_before: Option<HypothesisResult>) -> DetrendResult {
    DetrendResult {
        dy: y.to_vec(),
        tt: vec![0.0; y.len()],
        slope: 0.0,
        intercept: 0.0,
        applied: false,
        adf_after: adf_before,
        adf_before,
    }
}

/// Detrend unless ADF on the raw series already rejects a unit root; a
/// detrend that would produce non-positive values also falls back to the
/// raw series.
pub fn detrend_gated(y: &[f64]) -> Result<DetrendResult> {
    let before = adf_or_none(y);
    if before.is_some_and(|r| r.reject_at_05) {
        return Ok(no_detrend(y, before));
    }
    match linear_detrend(y) {
        Ok(d) => Ok(d),
        Err(Error::Degenerate(msg)) => {
            log::warn!("detrending skipped: {msg}");
            Ok(no_detrend(y, before))
        }
        Err(e) => Err(e),
    }
}
