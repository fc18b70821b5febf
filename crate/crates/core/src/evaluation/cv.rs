use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest training block any split may use.
pub const MIN_TRAIN: usize = 10;

/// M-split leave-k-out plan over `n` time-ordered observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl CvPlan {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        let plan = Self { n, m, k };
        plan.validate()?;
        Ok(plan)
    }

    /// `k = round(0.1·n)`.
    pub fn auto(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, ((n as f64) * 0.1).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(Error::InfeasiblePlan(format!(
                "M={} and k={} must both be positive",
                self.m, self.k
            )));
        }
        let held_out = self.m.saturating_mul(self.k);
        if held_out > self.n || self.n - held_out < MIN_TRAIN {
            return Err(Error::InfeasiblePlan(format!(
                "N={} M={} k={} leaves fewer than {MIN_TRAIN} training observations",
                self.n, self.m, self.k
            )));
        }
        Ok(())
    }
}

/// One split, with zero-based row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// 1-based split number `m`.
    pub index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Split `m` trains on observations `1..=N−mk` and tests on
/// `N−mk+1..=N−mk+k` (1-based), so training always precedes testing.
pub fn make_splits(plan: &CvPlan) -> Result<Vec<Split>> {
    plan.validate()?;
    Ok((1..=plan.m)
        .map(|m| {
            let cut = plan.n - m * plan.k;
            Split {
                index: m,
                train: (0..cut).collect(),
                test: (cut..cut + plan.k).collect(),
            }
        })
        .collect())
}

/// Mean of `|y_t − (dy_hat_t + tt_t)| / y_t` over `indices`.
pub fn mape_with_trend(y: &[f64], dy_hat: &[f64], tt: &[f64], indices: &[usize]) -> Result<f64> {
    if dy_hat.len() != y.len() || tt.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: if dy_hat.len() != y.len() {
                dy_hat.len()
            } else {
                tt.len()
            },
        });
    }
    if indices.is_empty() {
        return Err(Error::InvalidInput("MAPE over an empty index set".into()));
    }
    let mut total = 0.0;
    for &t in indices {
        let obs = *y
            .get(t)
            .ok_or_else(|| Error::InvalidInput(format!("index {t} out of range")))?;
        if !(obs > 0.0) {
            return Err(Error::InvalidInput(format!("observed value {obs} is not positive")));
        }
        total += (obs - (dy_hat[t] + tt[t])).abs() / obs;
    }
    Ok(total / indices.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bounds(s: &Split) -> ((usize, usize), (usize, usize)) {
        (
            (s.train[0] + 1, *s.train.last().unwrap() + 1),
            (s.test[0] + 1, *s.test.last().unwrap() + 1),
        )
    }

    #[test]
    fn reference_plan() {
        let splits = make_splits(&CvPlan::new(64, 5, 6).unwrap()).unwrap();
        let b: Vec<_> = splits.iter().map(bounds).collect();
        assert_eq!(
            b,
            vec![
                ((1, 58), (59, 64)),
                ((1, 52), (53, 58)),
                ((1, 46), (47, 52)),
                ((1, 40), (41, 46)),
                ((1, 34), (35, 40)),
            ]
        );
    }

    #[test]
    fn small_plan() {
        let splits = make_splits(&CvPlan::new(20, 2, 2).unwrap()).unwrap();
        assert_eq!(bounds(&splits[0]), ((1, 18), (19, 20)));
        assert_eq!(bounds(&splits[1]), ((1, 16), (17, 18)));
    }

    #[test]
    fn infeasible_plans() {
        assert!(CvPlan::new(20, 3, 4).is_err());
        assert!(CvPlan::new(64, 0, 6).is_err());
        assert!(CvPlan::new(10, 1, 1).is_err());
        assert_eq!(CvPlan::auto(64, 5).unwrap().k, 6);
    }

    #[test]
    fn mape_examples() {
        let y = [100.0, 200.0];
        assert_eq!(mape_with_trend(&y, &[100.0, 200.0], &[0.0, 0.0], &[0, 1]).unwrap(), 0.0);
        let m = mape_with_trend(&y, &[80.0, 200.0], &[10.0, 20.0], &[0, 1]).unwrap();
        assert!((m - 0.10).abs() < 1e-15);
        assert!(mape_with_trend(&y, &[1.0], &[0.0, 0.0], &[0]).is_err());
    }

    proptest! {
        #[test]
        fn splits_never_leak(n in 11usize..200, m in 1usize..10, k in 1usize..20) {
            if let Ok(plan) = CvPlan::new(n, m, k) {
                let splits = make_splits(&plan).unwrap();
                let mut tested: Vec<usize> = Vec::new();
                for s in &splits {
                    prop_assert!(s.train.len() >= MIN_TRAIN);
                    prop_assert!(s.train.last().unwrap() < &s.test[0]);
                    tested.extend(&s.test);
                }
                tested.sort_unstable();
                let expect: Vec<usize> = (n - m * k..n).collect();
                prop_assert_eq!(tested, expect);
            }
        }

        #[test]
        fn mape_scale_invariant(
            y in prop::collection::vec(1.0f64..100.0, 5),
            p in prop::collection::vec(0.0f64..100.0, 5),
            c in 0.1f64..10.0,
        ) {
            let idx: Vec<usize> = (0..5).collect();
            let tt = vec![0.0; 5];
            let a = mape_with_trend(&y, &p, &tt, &idx).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
            let ps: Vec<f64> = p.iter().map(|v| v * c).collect();
            let b = mape_with_trend(&ys, &ps, &tt, &idx).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
