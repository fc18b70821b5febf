use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::GlmFamily;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

pub const MAX_ITER: usize = 100;
pub const TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub family: GlmFamily,
    /// Intercept followed by one coefficient per predictor.
    pub beta: Vec<f64>,
    pub dispersion: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Deviance after each IRLS iteration.
    pub deviance_path: Vec<f64>,
}

impl GlmFit {
    pub fn n_predictors(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn deviance(&self) -> f64 {
        *self.deviance_path.last().expect("at least one iteration")
    }
}

pub(crate) fn deviance(family: GlmFamily, y: &[f64], mu: &[f64]) -> f64 {
    let d: f64 = match family {
        GlmFamily::Normal => y.iter().zip(mu).map(|(y, m)| (y - m).powi(2)).sum(),
        GlmFamily::Gamma => 2.0 * y.iter().zip(mu).map(|(y, m)| -(y / m).ln() + (y - m) / m).sum::<f64>(),
    };
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

fn pearson_dispersion(family: GlmFamily, y: &[f64], mu: &[f64], n_params: usize) -> f64 {
    let chi2: f64 = y
        .iter()
        .zip(mu)
        .map(|(y, m)| match family {
            GlmFamily::Normal => (y - m).powi(2),
            GlmFamily::Gamma => ((y - m) / m).powi(2),
        })
        .sum();
    let dof = y.len().saturating_sub(n_params).max(1) as f64;
    (chi2 / dof).max(f64::MIN_POSITIVE)
}

pub(crate) struct IrlsOutcome {
    pub beta: DVector<f64>,
    pub mu: Vec<f64>,
    pub deviance_path: Vec<f64>,
    pub converged: bool,
}

fn linear_predictor(x: &DMatrix<f64>, beta: &DVector<f64>) -> Vec<f64> {
    (x * beta).iter().map(|e| e.exp()).collect()
}

/// Penalized IRLS for a log link. The objective `deviance + βᵀPβ` never
/// increases between recorded iterations (step halving).
pub(crate) fn irls(
    x: &DMatrix<f64>,
    y: &[f64],
    family: GlmFamily,
    penalty: Option<&DMatrix<f64>>,
) -> Result<IrlsOutcome> {
    let objective = |beta: &DVector<f64>, mu: &[f64]| {
        let pen = penalty.map_or(0.0, |p| beta.dot(&(p * beta)));
        deviance(family, y, mu) + pen
    };
    let mut mu: Vec<f64> = y.to_vec();
    let mut eta: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mut beta: Option<DVector<f64>> = None;
    let mut path = Vec::new();
    let mut converged = false;

    for _ in 0..MAX_ITER {
        let w: Vec<f64> = match family {
            GlmFamily::Normal => mu.iter().map(|m| m * m).collect(),
            GlmFamily::Gamma => vec![1.0; y.len()],
        };
        let z: Vec<f64> = (0..y.len()).map(|i| eta[i] + (y[i] - mu[i]) / mu[i]).collect();
        let mut xtwx = DMatrix::zeros(x.ncols(), x.ncols());
        let mut xtwz = DVector::zeros(x.ncols());
        for i in 0..x.nrows() {
            let row = x.row(i);
            xtwx += row.transpose() * row * w[i];
            xtwz += row.transpose() * (w[i] * z[i]);
        }
        if let Some(p) = penalty {
            xtwx += p;
        }
        let candidate = solve_spd(&xtwx, &xtwz)?;
        if candidate.iter().any(|b| !b.is_finite()) {
            return Err(Error::Singular("IRLS produced non-finite coefficients".into()));
        }

        let (next, next_mu, next_obj) = match (&beta, path.last()) {
            (Some(old), Some(&old_obj)) => {
                let mut step = candidate.clone();
                let mut m = linear_predictor(x, &step);
                let mut obj = objective(&step, &m);
                let mut halvings = 0;
                while !(obj <= old_obj) && halvings < MAX_HALVINGS {
                    step = (old + &step) * 0.5;
                    m = linear_predictor(x, &step);
                    obj = objective(&step, &m);
                    halvings += 1;
                }
                if !(obj <= old_obj) {
                    // No descent direction left: stay put.
                    converged = true;
                    break;
                }
                (step, m, obj)
            }
            _ => {
                let m = linear_predictor(x, &candidate);
                let obj = objective(&candidate, &m);
                (candidate, m, obj)
            }
        };
        let prev = path.last().copied();
        path.push(next_obj);
        eta = (x * &next).iter().copied().collect();
        mu = next_mu;
        beta = Some(next);
        if let Some(prev) = prev {
            if (prev - next_obj).abs() / (next_obj.abs() + 0.1) < TOLERANCE {
                converged = true;
                break;
            }
        }
    }
    let beta = beta.ok_or_else(|| Error::Singular("IRLS made no progress".into()))?;
    if !path.last().is_some_and(|d| d.is_finite()) {
        return Err(Error::Singular("IRLS diverged".into()));
    }
    Ok(IrlsOutcome {
        beta,
        mu,
        deviance_path: path,
        converged,
    })
}

pub(crate) fn check_response(y: &[f64], min_len: usize) -> Result<()> {
    if y.len() < min_len {
        return Err(Error::InvalidInput(format!(
            "need at least {min_len} observations, got {}",
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "log-link models need a positive response, found {v}"
        )));
    }
    Ok(())
}

fn with_intercept(scores: &DMatrix<f64>) -> DMatrix<f64> {
    scores.clone().insert_column(0, 1.0)
}

/// Log-link GLM fitted by IRLS.
pub fn fit_glm(scores: &DMatrix<f64>, dy: &[f64], family: GlmFamily) -> Result<GlmFit> {
    check_response(dy, 6)?;
    if scores.nrows() != dy.len() {
        return Err(Error::DimensionMismatch {
            expected: dy.len(),
            got: scores.nrows(),
        });
    }
    let x = with_intercept(scores);
    let out = irls(&x, dy, family, None)?;
    Ok(GlmFit {
        family,
        dispersion: pearson_dispersion(family, dy, &out.mu, x.ncols()),
        beta: out.beta.iter().copied().collect(),
        converged: out.converged,
        iterations: out.deviance_path.len(),
        deviance_path: out.deviance_path,
    })
}

pub fn predict_glm(fit: &GlmFit, scores: &DMatrix<f64>) -> Result<Vec<f64>> {
    if scores.ncols() != fit.n_predictors() {
        return Err(Error::DimensionMismatch {
            expected: fit.n_predictors(),
            got: scores.ncols(),
        });
    }
    Ok((0..scores.nrows())
        .map(|i| {
            let eta = fit.beta[0]
                + (0..scores.ncols())
                    .map(|j| fit.beta[j + 1] * scores[(i, j)])
                    .sum::<f64>();
            eta.exp()
        })
        .collect())
}
