use serde::Serialize;

/// Sorted sample with step-function cumulative probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ecdf {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Ecdf {
    /// `F(x)`: fraction of sample values ≤ x.
    pub fn eval(&self, x: f64) -> f64 {
        match self.values.partition_point(|v| *v <= x) {
            0 => 0.0,
            i => self.probs[i - 1],
        }
    }
}

/// Empirical CDF; tied values collapse to one step at their upper probability.
pub fn ecdf(sample: &[f64]) -> Ecdf {
    let mut sorted: Vec<f64> = sample.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut values = Vec::new();
    let mut probs = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        if i + 1 < sorted.len() && sorted[i + 1] == *v {
            continue;
        }
        values.push(*v);
        probs.push((i + 1) as f64 / n);
    }
    Ecdf { values, probs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_and_ends_at_one() {
        let e = ecdf(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.probs, vec![0.25, 0.75, 1.0]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert!(e.probs.windows(2).all(|w| w[0] <= w[1]));
    }
}
