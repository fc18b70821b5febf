//! Clamped B-spline bases on a closed interval.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// B-spline basis of a given degree with equally spaced interior knots and
/// `degree + 1`-fold boundary knots.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    knots: Vec<f64>,
    degree: usize,
    n_basis: usize,
    lo: f64,
    hi: f64,
}

// 4-point Gauss–Legendre on [-1, 1]; exact for the degree-6 products of cubics.
const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

impl BSplineBasis {
    pub fn uniform(lo: f64, hi: f64, n_basis: usize, degree: usize) -> Result<Self> {
        if n_basis < degree + 1 {
            return Err(Error::InvalidInput(format!(
                "a degree-{degree} basis needs at least {} functions, got {n_basis}",
                degree + 1
            )));
        }
        if !(hi > lo) {
            return Err(Error::Degenerate(format!("empty basis interval [{lo}, {hi}]")));
        }
        let interior = n_basis - degree - 1;
        let mut knots = vec![lo; degree + 1];
        for i in 1..=interior {
            knots.push(lo + (hi - lo) * i as f64 / (interior + 1) as f64);
        }
        knots.extend(std::iter::repeat_n(hi, degree + 1));
        Ok(Self {
            knots,
            degree,
            n_basis,
            lo,
            hi,
        })
    }

    /// Equally spaced knots continued `degree` intervals past each end
    /// (P-spline layout). Linear coefficients then give a linear function.
    pub fn uniform_unclamped(lo: f64, hi: f64, n_basis: usize, degree: usize) -> Result<Self> {
        if n_basis < degree + 1 {
            return Err(Error::InvalidInput(format!(
                "a degree-{degree} basis needs at least {} functions, got {n_basis}",
                degree + 1
            )));
        }
        if !(hi > lo) {
            return Err(Error::Degenerate(format!("empty basis interval [{lo}, {hi}]")));
        }
        let intervals = n_basis - degree;
        let h = (hi - lo) / intervals as f64;
        let mut knots: Vec<f64> = (0..=n_basis + degree)
            .map(|i| lo + (i as f64 - degree as f64) * h)
            .collect();
        knots[degree] = lo;
        knots[n_basis] = hi;
        Ok(Self {
            knots,
            degree,
            n_basis,
            lo,
            hi,
        })
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// All basis functions of degree `p` at `x` (Cox–de Boor).
    fn eval_degree(&self, x: f64, p: usize) -> Vec<f64> {
        let t = &self.knots;
        let x = x.clamp(self.lo, self.hi);
        let m = t.len() - 1;
        let mut b = vec![0.0; m];
        // Right end belongs to the last non-empty interval.
        let last = (0..m).rev().find(|&i| t[i] < t[i + 1]).unwrap_or(0);
        for i in 0..m {
            if (t[i] <= x && x < t[i + 1]) || (i == last && x == t[i + 1]) {
                b[i] = 1.0;
            }
        }
        for d in 1..=p {
            for i in 0..(m - d) {
                let left = if t[i + d] > t[i] {
                    (x - t[i]) / (t[i + d] - t[i]) * b[i]
                } else {
                    0.0
                };
                let right = if t[i + d + 1] > t[i + 1] {
                    (t[i + d + 1] - x) / (t[i + d + 1] - t[i + 1]) * b[i + 1]
                } else {
                    0.0
                };
                b[i] = left + right;
            }
        }
        b.truncate(t.len() - p - 1);
        b
    }

    /// Basis values at `x` (clamped into the domain).
    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.eval_degree(x, self.degree)
    }

    /// First derivatives of the basis functions at `x`.
    pub fn eval_deriv(&self, x: f64) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return vec![0.0; self.n_basis];
        }
        let lower = self.eval_degree(x, p - 1);
        let t = &self.knots;
        (0..self.n_basis)
            .map(|i| {
                let a = if t[i + p] > t[i] {
                    p as f64 / (t[i + p] - t[i]) * lower[i]
                } else {
                    0.0
                };
                let b = if t[i + p + 1] > t[i + 1] {
                    p as f64 / (t[i + p + 1] - t[i + 1]) * lower[i + 1]
                } else {
                    0.0
                };
                a - b
            })
            .collect()
    }

    /// `len(xs) × n_basis` evaluation matrix.
    pub fn design(&self, xs: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(xs.len(), self.n_basis);
        for (r, &x) in xs.iter().enumerate() {
            for (c, v) in self.eval(x).into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Gram matrix `∫ B_i(t) B_j(t) dt` over the domain.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.n_basis, self.n_basis);
        for w in self.knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let v = self.eval(mid + half * node);
                for i in 0..self.n_basis {
                    if v[i] == 0.0 {
                        continue;
                    }
                    for j in 0..self.n_basis {
                        g[(i, j)] += weight * half * v[i] * v[j];
                    }
                }
            }
        }
        g
    }
}

/// `DᵀD` for the `order`-th difference operator on `n` coefficients.
pub fn difference_penalty(n: usize, order: usize) -> DMatrix<f64> {
    if order >= n {
        return DMatrix::zeros(n, n);
    }
    let mut d = DMatrix::<f64>::identity(n, n);
    for _ in 0..order {
        let rows = d.nrows() - 1;
        d = DMatrix::from_fn(rows, n, |i, j| d[(i + 1, j)] - d[(i, j)]);
    }
    d.transpose() * d
}
