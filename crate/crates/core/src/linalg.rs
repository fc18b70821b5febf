//! Small dense least-squares helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordinary least squares solved through the SVD, tolerating rank deficiency
/// (minimum-norm solution).
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub ssr: f64,
    pub rank: usize,
    /// Pseudo-inverse of `XᵀX`.
    pub xtx_pinv: DMatrix<f64>,
}

impl OlsFit {
    /// Classical standard errors, `sqrt(σ² (XᵀX)⁺_jj)` with `σ² = ssr/(n − rank)`.
    pub fn std_errors(&self) -> DVector<f64> {
        let n = self.residuals.len();
        let dof = n.saturating_sub(self.rank).max(1) as f64;
        let sigma2 = self.ssr / dof;
        DVector::from_iterator(
            self.beta.len(),
            (0..self.beta.len()).map(|j| (sigma2 * self.xtx_pinv[(j, j)]).max(0.0).sqrt()),
        )
    }
}

pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let svd = x.clone().svd(true, true);
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Singular("svd failed".into())),
    };
    let s_max = svd.singular_values.max();
    if !(s_max > 0.0) {
        return Err(Error::Singular("design matrix is zero".into()));
    }
    let tol = s_max * f64::EPSILON * x.nrows().max(x.ncols()) as f64;
    let inv: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s > tol { 1.0 / s } else { 0.0 })
        .collect();
    let rank = inv.iter().filter(|v| **v != 0.0).count();
    let uty = u.transpose() * y;
    let scaled = DVector::from_iterator(inv.len(), uty.iter().zip(&inv).map(|(a, b)| a * b));
    let v = v_t.transpose();
    let beta = &v * scaled;
    let residuals = y - x * &beta;
    let ssr = residuals.norm_squared();
    let d2 = DMatrix::from_diagonal(&DVector::from_iterator(inv.len(), inv.iter().map(|s| s * s)));
    let xtx_pinv = &v * d2 * v.transpose();
    Ok(OlsFit {
        beta,
        residuals,
        ssr,
        rank,
        xtx_pinv,
    })
}

/// Solve the symmetric positive (semi-)definite system `a x = b` by Cholesky,
/// retrying once with a `1e-10` ridge on the diagonal.
pub fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    let scale = a.diagonal().amax().max(1.0);
    let jittered = a + DMatrix::identity(a.nrows(), a.ncols()) * (1e-10 * scale);
    jittered
        .cholesky()
        .map(|ch| ch.solve(b))
        .ok_or_else(|| Error::Singular("working matrix is not positive definite".into()))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (denominator n − 1).
pub fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn sample_sd(x: &[f64]) -> f64 {
    sample_var(x).sqrt()
}
