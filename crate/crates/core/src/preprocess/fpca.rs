//! Functional PCA with a cubic B-spline basis.
//!
//! Each row of the design matrix is read as one curve sampled on an equally
//! spaced grid over `[0, 1]` (one grid point per column). Curves are centered
//! by the mean curve, projected onto the basis by (optionally penalized) least
//! squares, and the functional eigenproblem is solved in coefficient space
//! with the basis Gram matrix `W` as metric:
//!
//! `W^½ Σ_c W^½ u = λ u`, eigenfunction coefficients `b = W^-½ u`,
//! scores `c_iᵀ W b`.
//!
//! Columns belonging to different variables are put on a common scale by
//! dividing each variable block by its pooled standard deviation, which keeps
//! the seasonal shape within a variable intact.

use nalgebra::{DMatrix, SymmetricEigen};

use super::bspline::{difference_penalty, BSplineBasis};
use super::{sign_of_largest, DesignMatrix, PcResult, Reducer};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

/// Cap applied to the default basis size.
pub const MAX_DEFAULT_BASIS: usize = 12;
const CUBIC: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpcaOptions {
    /// Number of basis functions; defaults to the grid length capped at 12.
    pub basis_size: Option<usize>,
    /// Second-difference roughness penalty on the basis coefficients.
    pub penalty: f64,
}

impl Default for FpcaOptions {
    fn default() -> Self {
        Self {
            basis_size: None,
            penalty: 0.0,
        }
    }
}

pub fn default_basis_size(grid_len: usize) -> usize {
    grid_len.min(MAX_DEFAULT_BASIS)
}

/// FPCA of a design matrix, scaling each variable block separately.
pub fn fpca(x: &DesignMatrix, n_components: usize, opts: FpcaOptions) -> Result<PcResult> {
    fpca_matrix(&x.data, &x.variable_blocks(), n_components, opts)
}

/// FPCA of a raw matrix; `blocks[j]` names the scaling block of column `j`.
pub fn fpca_matrix(x: &DMatrix<f64>, blocks: &[usize], n_components: usize, opts: FpcaOptions) -> Result<PcResult> {
    let (n, grid_len) = x.shape();
    if blocks.len() != grid_len {
        return Err(Error::DimensionMismatch {
            expected: grid_len,
            got: blocks.len(),
        });
    }
    if grid_len < CUBIC + 1 {
        return Err(Error::InvalidInput(format!(
            "grid of {grid_len} points is too short for a cubic basis"
        )));
    }
    let basis_size = opts.basis_size.unwrap_or_else(|| default_basis_size(grid_len));
    if basis_size < CUBIC + 1 {
        return Err(Error::InvalidInput(format!(
            "basis_size {basis_size} below the cubic minimum of {}",
            CUBIC + 1
        )));
    }
    if basis_size > grid_len {
        return Err(Error::InvalidInput(format!(
            "basis_size {basis_size} exceeds grid length {grid_len}"
        )));
    }
    if n <= n_components || n_components > basis_size {
        return Err(Error::InvalidInput(format!(
            "{n_components} components need more than {n_components} curves and at most \
             {basis_size} basis functions (have {n} curves)"
        )));
    }

    // Center on the mean curve, then scale each block by its pooled sd.
    let center: Vec<f64> = (0..grid_len).map(|j| x.column(j).mean()).collect();
    let mut xc = DMatrix::from_fn(n, grid_len, |i, j| x[(i, j)] - center[j]);
    let n_blocks = blocks.iter().copied().max().map_or(0, |b| b + 1);
    let mut block_sd = vec![0.0; n_blocks];
    for (b, sd) in block_sd.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..grid_len).filter(|&j| blocks[j] == b).collect();
        let ss: f64 = cols.iter().map(|&j| xc.column(j).norm_squared()).sum();
        let count = (cols.len() * (n - 1)) as f64;
        *sd = if count > 0.0 { (ss / count).sqrt() } else { 0.0 };
    }
    let scale: Vec<f64> = blocks.iter().map(|&b| block_sd[b]).collect();
    if scale.iter().any(|s| !(*s > 1e-300)) {
        return Err(Error::Degenerate("degenerate covariance: constant curves".into()));
    }
    for (mut col, s) in xc.column_iter_mut().zip(&scale) {
        col.iter_mut().for_each(|v| *v /= s);
    }

    let grid: Vec<f64> = (0..grid_len).map(|j| j as f64 / (grid_len - 1) as f64).collect();
    let basis = BSplineBasis::uniform(0.0, 1.0, basis_size, CUBIC)?;
    let phi = basis.design(&grid);
    let mut normal = phi.transpose() * &phi;
    if opts.penalty > 0.0 {
        normal += difference_penalty(basis_size, 2) * opts.penalty;
    }
    // Coefficients: rows of C solve (ΦᵀΦ + λR) cᵢ = Φᵀ xᵢ.
    let rhs = phi.transpose() * xc.transpose();
    let mut coef_t = DMatrix::zeros(basis_size, n);
    for i in 0..n {
        let c = solve_spd(&normal, &rhs.column(i).into_owned())?;
        coef_t.set_column(i, &c);
    }
    let coef = coef_t.transpose();

    let w = basis.gram();
    let w_eig = SymmetricEigen::new(w.clone());
    if w_eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Singular("basis Gram matrix is not positive definite".into()));
    }
    let q = &w_eig.eigenvectors;
    let w_half = q * DMatrix::from_diagonal(&w_eig.eigenvalues.map(f64::sqrt)) * q.transpose();
    let w_inv_half = q * DMatrix::from_diagonal(&w_eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * q.transpose();

    let cov = coef.transpose() * &coef / (n as f64 - 1.0);
    let m = &w_half * cov * &w_half;
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..basis_size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = lambdas.iter().sum();
    if !(total > 1e-14) {
        return Err(Error::Degenerate("degenerate covariance".into()));
    }
    let explained_ratio_all: Vec<f64> = lambdas.iter().map(|l| l / total).collect();

    let mut eigfun = DMatrix::zeros(basis_size, n_components);
    for (k, &i) in order.iter().take(n_components).enumerate() {
        let b = &w_inv_half * eig.eigenvectors.column(i);
        let on_grid = &phi * &b;
        let s = sign_of_largest(on_grid.iter().copied());
        eigfun.set_column(k, &(b * s));
    }
    let scores = &coef * &w * &eigfun;

    Ok(PcResult {
        method: Reducer::Fpca,
        scores,
        explained_ratio: explained_ratio_all[..n_components].to_vec(),
        explained_ratio_all,
        loadings: eigfun,
        center,
        scale,
        basis_size: Some(basis_size),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves(n: usize, g: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, g, |i, j| {
            let t = j as f64 / (g - 1) as f64;
            let a = ((i * 7919) % 101) as f64 / 50.0 - 1.0;
            let b = ((i * 104729) % 89) as f64 / 44.0 - 1.0;
            a * (std::f64::consts::PI * t).sin() + b * (2.0 * std::f64::consts::PI * t).cos()
        })
    }

    #[test]
    fn rank_one_rows_give_single_component() {
        let g = 6;
        let x = DMatrix::from_fn(20, g, |i, j| (i as f64 - 9.5) * (1.0 + j as f64));
        let r = fpca_matrix(
            &x,
            &[0; 6],
            4,
            FpcaOptions {
                basis_size: Some(g),
                penalty: 0.0,
            },
        )
        .unwrap();
        assert!((r.explained_ratio[0] - 1.0).abs() < 1e-9, "{:?}", r.explained_ratio);
    }

    #[test]
    fn constant_functions_are_degenerate() {
        let x = DMatrix::from_element(10, 8, 3.0);
        let err = fpca_matrix(&x, &[0; 8], 4, FpcaOptions::default()).unwrap_err();
        assert!(err.to_string().contains("degenerate covariance"), "{err}");
    }

    #[test]
    fn basis_size_limits() {
        let x = curves(30, 8);
        assert!(fpca_matrix(
            &x,
            &[0; 8],
            2,
            FpcaOptions {
                basis_size: Some(3),
                penalty: 0.0
            }
        )
        .is_err());
        assert!(fpca_matrix(
            &x,
            &[0; 8],
            2,
            FpcaOptions {
                basis_size: Some(9),
                penalty: 0.0
            }
        )
        .is_err());
        let short = curves(30, 3);
        assert!(fpca_matrix(&short, &[0; 3], 2, FpcaOptions::default()).is_err());
    }

    #[test]
    fn ratios_ordered_and_sum_to_one() {
        let x = curves(40, 10);
        let r = fpca_matrix(&x, &[0; 10], 4, FpcaOptions::default()).unwrap();
        assert!(r.explained_ratio.windows(2).all(|w| w[0] >= w[1] - 1e-15));
        assert!((r.explained_ratio_all.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // two modes generate the data
        assert!(r.explained_ratio[0] + r.explained_ratio[1] > 0.999);
        for j in 0..4 {
            assert!(r.scores.column(j).mean().abs() < 1e-10);
        }
        assert_eq!(r.basis_size, Some(10));
    }

    #[test]
    fn penalty_smooths() {
        let x = curves(40, 12);
        let plain = fpca_matrix(&x, &[0; 12], 4, FpcaOptions::default()).unwrap();
        let smooth = fpca_matrix(
            &x,
            &[0; 12],
            4,
            FpcaOptions {
                basis_size: None,
                penalty: 10.0,
            },
        )
        .unwrap();
        assert!(smooth.explained_ratio_all.iter().all(|v| v.is_finite()));
        assert_ne!(plain.scores, smooth.scores);
    }
    #[test]
    fn smooth_curves_concentrate_at_least_as_much_as_pca() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(64);
        let noise = Normal::new(0.0, 0.15).unwrap();
        let pi = std::f64::consts::PI;
        let mut x = DMatrix::zeros(64, 8);
        for i in 0..64 {
            let a = noise.sample(&mut rng) / 0.15;
            let b = 0.6 * noise.sample(&mut rng) / 0.15;
            for j in 0..8 {
                let t = j as f64 / 7.0;
                x[(i, j)] = a * (pi * t).sin() + b * (2.0 * pi * t).cos() + noise.sample(&mut rng);
            }
        }
        let f = fpca_matrix(&x, &[0; 8], 4, FpcaOptions::default()).unwrap();
        let p = super::super::pca::pca(&x, 4).unwrap();
        let (f2, p2) = (
            f.explained_ratio[0] + f.explained_ratio[1],
            p.explained_ratio[0] + p.explained_ratio[1],
        );
        assert!(f2 >= p2, "fpca {f2} pca {p2}");
    }
}
