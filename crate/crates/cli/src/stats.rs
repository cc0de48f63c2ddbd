//! Summary statistics over replications.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sample mean with a two-sided t confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `mean ± t(1 - (1 - level) / 2, n - 1) · sd / sqrt(n)`; the bounds are
/// NaN with fewer than two values.
pub fn t_interval(xs: &[f64], level: f64) -> Interval {
    let n = xs.len();
    let mean = if n == 0 { f64::NAN } else { xs.iter().sum::<f64>() / n as f64 };
    if n < 2 {
        return Interval {
            n,
            mean,
            sd: f64::NAN,
            lower: f64::NAN,
            upper: f64::NAN,
        };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let half = t * sd / (n as f64).sqrt();
    Interval {
        n,
        mean,
        sd,
        lower: mean - half,
        upper: mean + half,
    }
}

/// Plain arithmetic mean, NaN when empty.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_interval() {
        // mean 3, sd sqrt(2.5), t(0.975, 4) = 2.776445
        let ci = t_interval(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.95);
        assert_eq!(ci.mean, 3.0);
        let half = 2.7764451051977987 * 2.5f64.sqrt() / 5f64.sqrt();
        assert!((ci.upper - (3.0 + half)).abs() < 1e-9);
        assert!((ci.lower - (3.0 - half)).abs() < 1e-9);
    }

    #[test]
    fn degenerate_samples() {
        assert!(t_interval(&[], 0.95).mean.is_nan());
        let one = t_interval(&[2.0], 0.95);
        assert_eq!(one.mean, 2.0);
        assert!(one.lower.is_nan());
        let flat = t_interval(&[1.0, 1.0, 1.0], 0.95);
        assert_eq!((flat.lower, flat.upper), (1.0, 1.0));
    }
}
