//! Active entities other than arrivals: generators and their interarrival
//! distributions, plus the prioritization values they hand out.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution as _, Exp};

use crate::error::SimError;
use crate::sim::Ctx;
use crate::trajectory::Trajectory;

/// `(priority, preemptible, restart)` used when seizing resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Prioritization {
    pub priority: i64,
    pub preemptible: i64,
    pub restart: bool,
}

impl Prioritization {
    pub fn new(priority: i64, preemptible: i64, restart: bool) -> Result<Self, SimError> {
        if priority < 0 || preemptible < priority {
            return Err(SimError::InvalidPrioritization {
                priority,
                preemptible,
            });
        }
        Ok(Prioritization {
            priority,
            preemptible,
            restart,
        })
    }

    /// Priority `p`, preemptible only by higher priorities.
    pub fn priority(p: i64) -> Self {
        Prioritization {
            priority: p,
            preemptible: p,
            restart: false,
        }
    }
}

/// Interarrival time source. Each call yields one or more gaps; a negative
/// gap stops the generator.
#[derive(Clone)]
pub enum Distribution {
    /// Absolute creation times, all returned by the first call.
    At(Vec<f64>),
    /// `start` on the first call, then the inner distribution.
    From(f64, Box<Distribution>),
    Constant(f64),
    Exponential(f64),
    Uniform(f64, f64),
    /// The inner distribution drawn `m` times per call.
    Batched(usize, Box<Distribution>),
    Custom(Arc<dyn Fn(&mut Ctx<'_>) -> Vec<f64> + Send + Sync>),
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::At(t) => f.debug_tuple("At").field(t).finish(),
            Distribution::From(s, d) => f.debug_tuple("From").field(s).field(d).finish(),
            Distribution::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Distribution::Exponential(r) => f.debug_tuple("Exponential").field(r).finish(),
            Distribution::Uniform(a, b) => f.debug_tuple("Uniform").field(a).field(b).finish(),
            Distribution::Batched(m, d) => f.debug_tuple("Batched").field(m).field(d).finish(),
            Distribution::Custom(_) => f.write_str("Custom(function())"),
        }
    }
}

pub fn at(times: impl IntoIterator<Item = f64>) -> Distribution {
    Distribution::At(times.into_iter().collect())
}

pub fn from(start: f64, dist: Distribution) -> Distribution {
    Distribution::From(start, Box::new(dist))
}

pub fn constant(c: f64) -> Distribution {
    Distribution::Constant(c)
}

pub fn exponential(rate: f64) -> Distribution {
    Distribution::Exponential(rate)
}

pub fn uniform(a: f64, b: f64) -> Distribution {
    Distribution::Uniform(a, b)
}

impl Distribution {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&mut Ctx<'_>) -> Vec<f64> + Send + Sync + 'static,
    {
        Distribution::Custom(Arc::new(f))
    }

    /// Draws this distribution `m` times per generator call.
    pub fn batched(self, m: usize) -> Self {
        Distribution::Batched(m, Box::new(self))
    }

    /// Values for the `call`-th invocation (zero based).
    pub(crate) fn draw(&self, call: u64, ctx: &mut Ctx<'_>, out: &mut Vec<f64>) {
        match self {
            Distribution::At(times) => {
                if call == 0 {
                    let mut prev = 0.0;
                    for &t in times {
                        out.push(t - prev);
                        prev = t;
                    }
                }
                out.push(-1.0);
            }
            Distribution::From(start, inner) => {
                if call == 0 {
                    out.push(*start);
                } else {
                    inner.draw(call - 1, ctx, out);
                }
            }
            Distribution::Constant(c) => out.push(*c),
            Distribution::Exponential(rate) => out.push(sample_exp(ctx.rng(), *rate)),
            Distribution::Uniform(a, b) => out.push(sample_unif(ctx.rng(), *a, *b)),
            Distribution::Batched(m, inner) => {
                for i in 0..*m {
                    inner.draw(call * (*m as u64) + i as u64, ctx, out);
                    if out.last().is_some_and(|v| *v < 0.0) {
                        break;
                    }
                }
            }
            Distribution::Custom(f) => out.extend(f(ctx)),
        }
    }
}

pub(crate) fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    match Exp::new(rate) {
        Ok(d) => d.sample(rng),
        Err(_) => f64::NAN,
    }
}

pub(crate) fn sample_unif<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    a + (b - a) * rng.random::<f64>()
}

/// Static definition of a generator.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub name: String,
    pub trajectory: Trajectory,
    pub distribution: Distribution,
    /// 0: nothing, 1: arrivals, 2: arrivals and attributes.
    pub mon: u8,
    pub prioritization: Prioritization,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, trajectory: Trajectory, distribution: Distribution) -> Self {
        GeneratorSpec {
            name: name.into(),
            trajectory,
            distribution,
            mon: 1,
            prioritization: Prioritization::default(),
        }
    }

    pub fn mon(mut self, level: u8) -> Self {
        self.mon = level.min(2);
        self
    }

    pub fn prioritization(mut self, p: Prioritization) -> Self {
        self.prioritization = p;
        self
    }
}
