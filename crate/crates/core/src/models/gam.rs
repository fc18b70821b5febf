use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::glm::{check_response, irls};
use super::GlmFamily;
use crate::error::{Error, Result};
use crate::preprocess::bspline::{difference_penalty, BSplineBasis};

pub const DEFAULT_BASIS_SIZE: usize = 6;
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// One centered cubic-spline smooth. Outside `[lo, hi]` it continues linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smooth {
    pub lo: f64,
    pub hi: f64,
    pub basis_size: usize,
    /// Coefficients on the unconstrained basis (already mapped through the
    /// sum-to-zero constraint). Empty when the predictor was constant.
    pub coef: Vec<f64>,
}

impl Smooth {
    fn basis(&self) -> BSplineBasis {
        BSplineBasis::uniform_unclamped(self.lo, self.hi, self.basis_size, 3).expect("validated at fit")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.coef.is_empty() {
            return 0.0;
        }
        basis_row(&self.basis(), x)
            .iter()
            .zip(&self.coef)
            .map(|(b, c)| b * c)
            .sum()
    }
}

fn basis_row(basis: &BSplineBasis, x: f64) -> Vec<f64> {
    let (lo, hi) = basis.domain();
    let edge = x.clamp(lo, hi);
    let mut row = basis.eval(edge);
    if x != edge {
        let d = basis.eval_deriv(edge);
        for (r, dv) in row.iter_mut().zip(d) {
            *r += (x - edge) * dv;
        }
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamFit {
    pub family: GlmFamily,
    pub intercept: f64,
    pub smooths: Vec<Smooth>,
    pub smoothing_lambda: f64,
    pub dispersion: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Penalized deviance after each IRLS iteration.
    pub deviance_path: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamParams {
    pub smoothing_lambda: f64,
    pub basis_size: usize,
}

impl Default for GamParams {
    fn default() -> Self {
        Self {
            smoothing_lambda: DEFAULT_LAMBDA,
            basis_size: DEFAULT_BASIS_SIZE,
        }
    }
}

/// Additive log-link model with one penalized cubic B-spline smooth per
/// predictor, fitted by penalized IRLS.
///
/// Each smooth is made identifiable with a sum-to-zero constraint over the
/// training rows: with `c` the basis column means, the constrained basis is
/// `B Z` where column `j` of `Z` is `e_j − (c_j / c_last) e_last`.
pub fn fit_gam(scores: &DMatrix<f64>, dy: &[f64], family: GlmFamily, params: GamParams) -> Result<GamFit> {
    check_response(dy, 6)?;
    let (n, p) = scores.shape();
    if n != dy.len() {
        return Err(Error::DimensionMismatch {
            expected: dy.len(),
            got: n,
        });
    }
    if !(params.smoothing_lambda >= 0.0) {
        return Err(Error::InvalidInput("smoothing_lambda must be non-negative".into()));
    }
    if params.basis_size < 4 {
        return Err(Error::InvalidInput(
            "cubic smooths need at least 4 basis functions".into(),
        ));
    }
    let k = params.basis_size;

    struct Block {
        basis: BSplineBasis,
        z: DMatrix<f64>,
        offset: usize,
    }
    let mut blocks: Vec<Option<Block>> = Vec::with_capacity(p);
    let mut columns: Vec<DMatrix<f64>> = vec![DMatrix::from_element(n, 1, 1.0)];
    let mut offset = 1;
    for j in 0..p {
        let col = scores.column(j);
        let (lo, hi) = (col.min(), col.max());
        if !(hi > lo) {
            blocks.push(None);
            continue;
        }
        let basis = BSplineBasis::uniform_unclamped(lo, hi, k, 3)?;
        let xs: Vec<f64> = col.iter().copied().collect();
        let b = basis.design(&xs);
        let c: Vec<f64> = (0..k).map(|m| b.column(m).mean()).collect();
        let mut z = DMatrix::zeros(k, k - 1);
        for m in 0..k - 1 {
            z[(m, m)] = 1.0;
            z[(k - 1, m)] = -c[m] / c[k - 1];
        }
        columns.push(&b * &z);
        blocks.push(Some(Block { basis, z, offset }));
        offset += k - 1;
    }
    let width = offset;
    let mut x = DMatrix::zeros(n, width);
    let mut at = 0;
    for c in &columns {
        x.view_mut((0, at), (n, c.ncols())).copy_from(c);
        at += c.ncols();
    }
    let mut penalty = DMatrix::zeros(width, width);
    let s = difference_penalty(k, 2);
    for b in blocks.iter().flatten() {
        let local = b.z.transpose() * &s * &b.z * params.smoothing_lambda;
        penalty.view_mut((b.offset, b.offset), (k - 1, k - 1)).copy_from(&local);
    }

    let out = irls(&x, dy, family, Some(&penalty))?;
    let smooths: Vec<Smooth> = blocks
        .iter()
        .enumerate()
        .map(|(j, b)| match b {
            Some(b) => {
                let theta = out.beta.rows(b.offset, k - 1).into_owned();
                let coef = &b.z * theta;
                let (lo, hi) = b.basis.domain();
                Smooth {
                    lo,
                    hi,
                    basis_size: k,
                    coef: coef.iter().copied().collect(),
                }
            }
            None => {
                let v = scores[(0, j)];
                Smooth {
                    lo: v,
                    hi: v,
                    basis_size: k,
                    coef: Vec::new(),
                }
            }
        })
        .collect();

    let fit = GamFit {
        family,
        intercept: out.beta[0],
        smooths,
        smoothing_lambda: params.smoothing_lambda,
        dispersion: 0.0,
        converged: out.converged,
        iterations: out.deviance_path.len(),
        deviance_path: out.deviance_path,
    };
    let mu = predict_gam(&fit, scores)?;
    let edf = width as f64;
    let chi2: f64 = dy
        .iter()
        .zip(&mu)
        .map(|(y, m)| match family {
            GlmFamily::Normal => (y - m).powi(2),
            GlmFamily::Gamma => ((y - m) / m).powi(2),
        })
        .sum();
    let dispersion = (chi2 / (n as f64 - edf).max(1.0)).max(f64::MIN_POSITIVE);
    Ok(GamFit { dispersion, ..fit })
}

pub fn predict_gam(fit: &GamFit, scores: &DMatrix<f64>) -> Result<Vec<f64>> {
    if scores.ncols() != fit.smooths.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.smooths.len(),
            got: scores.ncols(),
        });
    }
    Ok((0..scores.nrows())
        .map(|i| {
            let eta = fit.intercept
                + fit
                    .smooths
                    .iter()
                    .enumerate()
                    .map(|(j, s)| s.eval(scores[(i, j)]))
                    .sum::<f64>();
            eta.exp()
        })
        .collect())
}
