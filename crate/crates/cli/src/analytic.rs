//! Closed-form M/M/1 results.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mm1 {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    /// Mean number in system and mean sojourn time; `None` when unstable.
    pub steady: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("rates must be positive and finite (lambda = {lambda}, mu = {mu})")]
pub struct RateError {
    pub lambda: f64,
    pub mu: f64,
}

pub fn mm1(lambda: f64, mu: f64) -> Result<Mm1, RateError> {
    if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(RateError { lambda, mu });
    }
    let rho = lambda / mu;
    let steady = (rho < 1.0).then(|| {
        let n = rho / (1.0 - rho);
        (n, n / lambda)
    });
    Ok(Mm1 {
        lambda,
        mu,
        rho,
        steady,
    })
}

impl Mm1 {
    pub fn n(&self) -> Option<f64> {
        self.steady.map(|s| s.0)
    }

    pub fn t(&self) -> Option<f64> {
        self.steady.map(|s| s.1)
    }
}

impl fmt::Display for Mm1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = |x| trajsim::format::general(x, 7);
        write!(f, "M/M/1 lambda = {} mu = {}: rho = {}", g(self.lambda), g(self.mu), g(self.rho))?;
        match self.steady {
            Some((n, t)) => write!(f, " | N = {} | T = {}", g(n), g(t)),
            None => f.write_str(" | the system is unstable"),
        }
    }
}
