//! Gradient-boosted regression trees with exact greedy splits.
//!
//! Squared-error loss, so every row has gradient `ŷ − y` and hessian 1. A
//! leaf holding gradient sum `G` and hessian sum `H` gets weight
//! `−G / (H + λ)`; a split is taken only if
//!
//! `½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ > 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    /// Expand every node of a depth level before moving deeper.
    Levelwise,
    /// Expand the single best-gain leaf until the leaf budget is spent.
    Leafwise,
}

/// Default minimum hessian per child under leaf-wise growth (20 rows at h = 1).
pub const LEAFWISE_MIN_CHILD_WEIGHT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    pub reg_gamma: f64,
    pub min_child_weight: f64,
    pub growth: Growth,
}

impl GbtParams {
    pub fn new(growth: Growth) -> Self {
        Self {
            n_estimators: 500,
            max_depth: 2,
            learning_rate: 0.01,
            reg_lambda: 1.0,
            reg_gamma: 0.0,
            min_child_weight: match growth {
                Growth::Levelwise => 1.0,
                Growth::Leafwise => LEAFWISE_MIN_CHILD_WEIGHT,
            },
            growth,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidInput("learning_rate must lie in (0, 1]".into()));
        }
        if !(self.reg_lambda >= 0.0 && self.reg_gamma >= 0.0 && self.min_child_weight >= 0.0) {
            return Err(Error::InvalidInput("regularization terms must be non-negative".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidInput("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Binary regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: impl Fn(usize) -> f64) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { weight } => return *weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row(*feature) < *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { weight } => Some(*weight),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtEnsemble {
    pub params: GbtParams,
    pub base_score: f64,
    pub n_features: usize,
    pub trees: Vec<Tree>,
    /// No feature had two distinct values: the ensemble is base-score only.
    pub degenerate: bool,
    /// Training objective before boosting and after each round:
    /// `½ Σ (y − ŷ)² + Σ_trees (γ T + ½ λ ‖lr·w‖²)`.
    pub objective_path: Vec<f64>,
}

impl GbtEnsemble {
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<f64>> {
        predict_gbt(self, features)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Grower<'a> {
    x: &'a DMatrix<f64>,
    grad: &'a [f64],
    params: &'a GbtParams,
    /// Row indices per feature, sorted by that feature's value.
    order: &'a [Vec<usize>],
}

impl Grower<'_> {
    fn sums(&self, rows: &[usize]) -> (f64, f64) {
        (rows.iter().map(|&i| self.grad[i]).sum(), rows.len() as f64)
    }

    fn leaf_weight(&self, rows: &[usize]) -> f64 {
        let (g, h) = self.sums(rows);
        -g / (h + self.params.reg_lambda)
    }

    fn best_split(&self, rows: &[usize], in_node: &[bool]) -> Option<Candidate> {
        let lambda = self.params.reg_lambda;
        let (g, h) = self.sums(rows);
        let parent = g * g / (h + lambda);
        let mut best: Option<Candidate> = None;
        for (feature, sorted) in self.order.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            let members: Vec<usize> = sorted.iter().copied().filter(|&i| in_node[i]).collect();
            for w in 0..members.len().saturating_sub(1) {
                let i = members[w];
                gl += self.grad[i];
                hl += 1.0;
                let (a, b) = (self.x[(i, feature)], self.x[(members[w + 1], feature)]);
                if !(b > a) {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < self.params.min_child_weight || hr < self.params.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent) - self.params.reg_gamma;
                if gain > 0.0 && best.is_none_or(|c| gain > c.gain) {
                    let mid = a + (b - a) * 0.5;
                    let threshold = if mid > a { mid } else { b };
                    best = Some(Candidate {
                        gain,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn partition(&self, rows: &[usize], c: &Candidate) -> (Vec<usize>, Vec<usize>) {
        rows.iter().partition(|&&i| self.x[(i, c.feature)] < c.threshold)
    }

    fn grow(&self) -> Tree {
        let n = self.x.nrows();
        let all: Vec<usize> = (0..n).collect();
        // Open leaves: (node index, depth, rows).
        let mut nodes = vec![Node::Leaf {
            weight: self.leaf_weight(&all),
        }];
        let mut open: Vec<(usize, usize, Vec<usize>)> = vec![(0, 0, all)];
        let mut mask = vec![false; n];
        let split_into =
            |nodes: &mut Vec<Node>, at: usize, c: &Candidate, left_rows: &[usize], right_rows: &[usize]| {
                let left = nodes.len();
                nodes.push(Node::Leaf {
                    weight: self.leaf_weight(left_rows),
                });
                nodes.push(Node::Leaf {
                    weight: self.leaf_weight(right_rows),
                });
                nodes[at] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right: left + 1,
                };
                left
            };
        let mut candidate_for = |rows: &[usize]| {
            rows.iter().for_each(|&i| mask[i] = true);
            let c = self.best_split(rows, &mask);
            rows.iter().for_each(|&i| mask[i] = false);
            c
        };

        match self.params.growth {
            Growth::Levelwise => {
                for _ in 0..self.params.max_depth {
                    let mut next = Vec::new();
                    for (at, depth, rows) in open.drain(..) {
                        if let Some(c) = candidate_for(&rows) {
                            let (l, r) = self.partition(&rows, &c);
                            let left = split_into(&mut nodes, at, &c, &l, &r);
                            next.push((left, depth + 1, l));
                            next.push((left + 1, depth + 1, r));
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    open = next;
                }
            }
            Growth::Leafwise => {
                let budget = 1usize << self.params.max_depth.min(30);
                let mut leaves = 1;
                let mut scored: Vec<(usize, usize, Vec<usize>, Option<Candidate>)> = open
                    .drain(..)
                    .map(|(at, d, rows)| {
                        let c = candidate_for(&rows);
                        (at, d, rows, c)
                    })
                    .collect();
                while leaves < budget {
                    let pick = scored
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.1 < self.params.max_depth && s.3.is_some())
                        .fold(None::<(usize, f64)>, |acc, (k, s)| {
                            let g = s.3.expect("filtered").gain;
                            match acc {
                                Some((_, best)) if best >= g => acc,
                                _ => Some((k, g)),
                            }
                        });
                    let Some((k, _)) = pick else { break };
                    let (at, depth, rows, c) = scored.swap_remove(k);
                    let c = c.expect("filtered");
                    let (l, r) = self.partition(&rows, &c);
                    let left = split_into(&mut nodes, at, &c, &l, &r);
                    let cl = candidate_for(&l);
                    let cr = candidate_for(&r);
                    scored.push((left, depth + 1, l, cl));
                    scored.push((left + 1, depth + 1, r, cr));
                    // Keep creation order so equal gains resolve to the oldest leaf.
                    scored.sort_by_key(|s| s.0);
                    leaves += 1;
                }
            }
        }
        Tree { nodes }
    }
}

fn squared_loss(y: &[f64], pred: &[f64]) -> f64 {
    0.5 * y.iter().zip(pred).map(|(y, p)| (y - p).powi(2)).sum::<f64>()
}

/// Boosted trees on squared-error loss.
pub fn fit_gbt(features: &DMatrix<f64>, dy: &[f64], params: GbtParams) -> Result<GbtEnsemble> {
    params.validate()?;
    let (n, p) = features.shape();
    if n != dy.len() {
        return Err(Error::DimensionMismatch {
            expected: dy.len(),
            got: n,
        });
    }
    if n < 10 {
        return Err(Error::InvalidInput(format!("boosting needs at least 10 rows, got {n}")));
    }
    if dy.iter().chain(features.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training value".into()));
    }
    let base_score = dy.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let degenerate = (0..p).all(|j| {
        let c = features.column(j);
        c.max() == c.min()
    });
    let mut ensemble = GbtEnsemble {
        params,
        base_score,
        n_features: p,
        trees: Vec::new(),
        degenerate,
        objective_path: vec![squared_loss(dy, &pred)],
    };
    if degenerate {
        log::warn!("all features constant; boosting skipped");
        return Ok(ensemble);
    }
    let order: Vec<Vec<usize>> = (0..p)
        .map(|j| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| features[(a, j)].total_cmp(&features[(b, j)]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let lr = params.learning_rate;
    let mut penalty = 0.0;
    let mut grad = vec![0.0; n];
    for _ in 0..params.n_estimators {
        for i in 0..n {
            grad[i] = pred[i] - dy[i];
        }
        let tree = Grower {
            x: features,
            grad: &grad,
            params: &params,
            order: &order,
        }
        .grow();
        for (i, p) in pred.iter_mut().enumerate() {
            *p += lr * tree.predict_row(|j| features[(i, j)]);
        }
        let leaves: Vec<f64> = tree.leaves().collect();
        penalty += params.reg_gamma * leaves.len() as f64
            + 0.5 * params.reg_lambda * leaves.iter().map(|w| (lr * w).powi(2)).sum::<f64>();
        ensemble.objective_path.push(squared_loss(dy, &pred) + penalty);
        ensemble.trees.push(tree);
    }
    Ok(ensemble)
}

pub fn predict_gbt(ens: &GbtEnsemble, features: &DMatrix<f64>) -> Result<Vec<f64>> {
    if features.ncols() != ens.n_features {
        return Err(Error::DimensionMismatch {
            expected: ens.n_features,
            got: features.ncols(),
        });
    }
    let lr = ens.params.learning_rate;
    Ok((0..features.nrows())
        .map(|i| {
            let sum: f64 = ens.trees.iter().map(|t| t.predict_row(|j| features[(i, j)])).sum();
            ens.base_score + lr * sum
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-2.0f64..2.0));
        let y = (0..n)
            .map(|i| 100.0 + 10.0 * x[(i, 0)].sin() + 3.0 * x[(i, 1 % p)] + rng.random_range(-1.0..1.0))
            .collect();
        (x, y)
    }

    #[test]
    fn empty_ensemble_predicts_mean() {
        let (x, y) = data(20, 3, 1);
        let mut params = GbtParams::new(Growth::Levelwise);
        params.n_estimators = 0;
        let ens = fit_gbt(&x, &y, params).unwrap();
        let mean = y.iter().sum::<f64>() / 20.0;
        assert!(predict_gbt(&ens, &x).unwrap().iter().all(|p| *p == mean));
    }

    #[test]
    fn two_clusters_converge_to_means() {
        let n = 40;
        let x = DMatrix::from_fn(n, 1, |i, _| {
            if i < n / 2 {
                i as f64 * 0.01
            } else {
                5.0 + i as f64 * 0.01
            }
        });
        let y: Vec<f64> = (0..n).map(|i| if i < n / 2 { 10.0 } else { 30.0 }).collect();
        for growth in [Growth::Levelwise, Growth::Leafwise] {
            let ens = fit_gbt(&x, &y, GbtParams::new(growth)).unwrap();
            for (p, t) in predict_gbt(&ens, &x).unwrap().iter().zip(&y) {
                assert!((p / t - 1.0).abs() < 0.01, "{p} vs {t}");
            }
        }
    }

    #[test]
    fn objective_non_increasing_without_gamma() {
        let (x, y) = data(64, 4, 2);
        for growth in [Growth::Levelwise, Growth::Leafwise] {
            let mut params = GbtParams::new(growth);
            params.reg_lambda = 0.0;
            let ens = fit_gbt(&x, &y, params).unwrap();
            assert!(ens.objective_path.windows(2).all(|w| w[1] <= w[0]));
            let ens = fit_gbt(&x, &y, GbtParams::new(growth)).unwrap();
            assert!(ens.objective_path.windows(2).all(|w| w[1] <= w[0]));
            assert!(ens.trees.iter().all(|t| t.depth() <= 2));
        }
    }

    #[test]
    fn growth_strategies_agree_at_depth_one() {
        let (x, y) = data(50, 3, 3);
        let mut a = GbtParams::new(Growth::Levelwise);
        a.max_depth = 1;
        let b = GbtParams {
            growth: Growth::Leafwise,
            ..a
        };
        assert_eq!(fit_gbt(&x, &y, a).unwrap().trees, fit_gbt(&x, &y, b).unwrap().trees);
    }

    #[test]
    fn leafwise_can_build_unbalanced_trees() {
        let (x, y) = data(80, 3, 4);
        let mut params = GbtParams::new(Growth::Leafwise);
        params.max_depth = 3;
        params.n_estimators = 20;
        let ens = fit_gbt(&x, &y, params).unwrap();
        assert!(ens.trees.iter().all(|t| t.leaves().count() <= 8 && t.depth() <= 3));
    }

    #[test]
    fn deterministic_and_row_independent() {
        let (x, y) = data(30, 2, 5);
        let ens = fit_gbt(&x, &y, GbtParams::new(Growth::Leafwise)).unwrap();
        assert_eq!(ens, fit_gbt(&x, &y, GbtParams::new(Growth::Leafwise)).unwrap());
        let p = predict_gbt(&ens, &x).unwrap();
        let rev: Vec<usize> = (0..30).rev().collect();
        let xr = x.select_rows(rev.iter());
        let pr = predict_gbt(&ens, &xr).unwrap();
        assert!(pr.iter().rev().zip(&p).all(|(a, b)| a == b));
    }

    #[test]
    fn last_round_bookkeeping() {
        let (x, y) = data(25, 2, 6);
        let mut params = GbtParams::new(Growth::Levelwise);
        params.n_estimators = 7;
        let full = fit_gbt(&x, &y, params).unwrap();
        params.n_estimators = 6;
        let before = predict_gbt(&fit_gbt(&x, &y, params).unwrap(), &x).unwrap();
        let after = predict_gbt(&full, &x).unwrap();
        let last = full.trees.last().unwrap();
        for i in 0..25 {
            let expect = before[i] + 0.01 * last.predict_row(|j| x[(i, j)]);
            assert!((after[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_features_flagged() {
        let x = DMatrix::from_element(12, 2, 1.0);
        let y: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let ens = fit_gbt(&x, &y, GbtParams::new(Growth::Levelwise)).unwrap();
        assert!(ens.degenerate && ens.trees.is_empty());
        assert!(fit_gbt(&DMatrix::zeros(5, 1), &[1.0; 5], GbtParams::new(Growth::Levelwise)).is_err());
    }

    #[test]
    fn threshold_ties_go_right() {
        let tree = Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 1.0,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { weight: -1.0 },
                Node::Leaf { weight: 1.0 },
            ],
        };
        assert_eq!(tree.predict_row(|_| 1.0), 1.0);
        assert_eq!(tree.predict_row(|_| 0.999), -1.0);
    }
}
