use nalgebra::DMatrix;

use super::{sign_of_largest, PcResult, Reducer};
use crate::error::{Error, Result};

/// Column-standardize: mean 0, sample sd 1. Constant columns are rejected.
pub(crate) fn standardize(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, Vec<f64>)> {
    let n = x.nrows() as f64;
    let mut z = x.clone();
    let mut means = Vec::with_capacity(x.ncols());
    let mut sds = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col = x.column(j);
        let m = col.sum() / n;
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if !(sd > 1e-12 * m.abs().max(1.0)) {
            return Err(Error::Degenerate(format!("column {j} is constant")));
        }
        for i in 0..x.nrows() {
            z[(i, j)] = (x[(i, j)] - m) / sd;
        }
        means.push(m);
        sds.push(sd);
    }
    Ok((z, means, sds))
}

/// Principal components of the standardized columns of `x` via the SVD.
///
/// Eigenvalues are `s²/(n−1)`; scores are `Z·V_k`; each loading vector is
/// signed so its largest-magnitude entry is positive.
pub fn pca(x: &DMatrix<f64>, n_components: usize) -> Result<PcResult> {
    let (n, p) = x.shape();
    if n <= n_components {
        return Err(Error::InvalidInput(format!(
            "PCA needs more than {n_components} rows, got {n}"
        )));
    }
    if p < n_components {
        return Err(Error::InvalidInput(format!(
            "{n_components} components requested from {p} columns"
        )));
    }
    let (z, center, scale) = standardize(x)?;
    let svd = z.clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Singular("svd failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let eig: Vec<f64> = order
        .iter()
        .map(|&i| svd.singular_values[i].powi(2) / (n as f64 - 1.0))
        .collect();
    let total: f64 = eig.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("zero total variance".into()));
    }
    let explained_ratio_all: Vec<f64> = eig.iter().map(|l| l / total).collect();

    let mut loadings = DMatrix::zeros(p, n_components);
    for (k, &i) in order.iter().take(n_components).enumerate() {
        let row = v_t.row(i);
        let s = sign_of_largest(row.iter().copied());
        for j in 0..p {
            loadings[(j, k)] = s * row[j];
        }
    }
    let scores = &z * &loadings;
    Ok(PcResult {
        method: Reducer::Pca,
        scores,
        explained_ratio: explained_ratio_all[..n_components].to_vec(),
        explained_ratio_all,
        loadings,
        center,
        scale,
        basis_size: None,
    })
}
