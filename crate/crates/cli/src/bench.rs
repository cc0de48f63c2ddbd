//! Timing harness for the relative performance suites.
//!
//! Cases of a suite are run interleaved (case 1, case 2, ..., case 1, ...)
//! so that slow drifts of the machine affect all of them alike. Only ratios
//! between cases are meaningful.

use std::fmt;
use std::time::Instant;

use trajsim::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub case: String,
    pub runs: usize,
    /// Seconds.
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Mm1Scaling,
    BatchMSweep,
    ThunkVsConstant,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Mm1Scaling, Suite::BatchMSweep, Suite::ThunkVsConstant];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mm1Scaling => "mm1_scaling",
            Suite::BatchMSweep => "batch_m_sweep",
            Suite::ThunkVsConstant => "thunk_vs_constant",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Default problem size: mean arrivals for the M/M/1 suites, arrivals
    /// for the thunk test.
    pub fn default_n(self) -> u64 {
        match self {
            Suite::Mm1Scaling | Suite::BatchMSweep => 10_000,
            Suite::ThunkVsConstant => 100_000,
        }
    }
}

/// Nearly saturated M/M/1 (rho = 1/1.1) run to `n`, i.e. about `n`
/// arrivals, with the generator drawing `m` gaps per call.
pub fn mm1_saturation(n: u64, m: usize, mon: bool, seed: u64) -> usize {
    let mut env = Environment::with_seed(seed);
    env.add_resource(ResourceSpec::new("server").monitored(mon))
        .expect("fresh environment");
    let t = Trajectory::new()
        .seize("server", 1)
        .timeout(Param::dynamic(|ctx| ctx.exponential(1.1)))
        .release("server", 1);
    env.add_generator(
        GeneratorSpec::new("customer", t, exponential(1.0).batched(m)).mon(u8::from(mon)),
    )
    .expect("fresh environment");
    env.run(n as f64).expect("valid model");
    env.get_n_generated("customer").unwrap_or(0) as usize
}

/// `n` arrivals at 1, 2, ..., n through a single timeout of 1, with the
/// delay fixed or computed by a function; returns the arrival table size.
pub fn timeout_test(n: u64, thunk: bool) -> usize {
    let delay: Param<f64> = if thunk {
        Param::dynamic(|_| 1.0)
    } else {
        Param::Const(1.0)
    };
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new(
        "test",
        Trajectory::new().timeout(delay),
        at((1..=n).map(|i| i as f64)),
    ))
    .expect("fresh environment");
    env.run(f64::INFINITY).expect("valid model");
    get_mon_arrivals(&[&env], false).len()
}

type Case<'a> = (String, Box<dyn Fn() + 'a>);

/// Runs every case `runs` times, interleaved, after one warm-up round.
pub fn time_cases(cases: &[Case<'_>], runs: usize) -> Vec<Timing> {
    for (_, f) in cases {
        f();
    }
    let mut samples = vec![Vec::with_capacity(runs); cases.len()];
    for _ in 0..runs {
        for (i, (_, f)) in cases.iter().enumerate() {
            let start = Instant::now();
            f();
            samples[i].push(start.elapsed().as_secs_f64());
        }
    }
    cases
        .iter()
        .zip(samples)
        .map(|((name, _), mut s)| {
            s.sort_by(f64::total_cmp);
            let k = s.len();
            let median = if k == 0 {
                f64::NAN
            } else if k % 2 == 1 {
                s[k / 2]
            } else {
                (s[k / 2 - 1] + s[k / 2]) / 2.0
            };
            Timing {
                case: name.clone(),
                runs: k,
                min: s.first().copied().unwrap_or(f64::NAN),
                mean: if k == 0 { f64::NAN } else { s.iter().sum::<f64>() / k as f64 },
                median,
                max: s.last().copied().unwrap_or(f64::NAN),
            }
        })
        .collect()
}

pub const BATCH_SIZES: [usize; 5] = [1, 10, 20, 50, 100];

/// Timings of `suite` at size `n`; `n = 0` yields no rows.
pub fn run_suite(suite: Suite, n: u64, runs: usize) -> Vec<Timing> {
    if n == 0 {
        return Vec::new();
    }
    let cases: Vec<Case<'_>> = match suite {
        Suite::Mm1Scaling => [n / 100, n / 10, n]
            .into_iter()
            .filter(|&k| k > 0)
            .map(|k| -> Case<'_> {
                (
                    format!("n={k}"),
                    Box::new(move || {
                        std::hint::black_box(mm1_saturation(k, 1, true, 1));
                    }),
                )
            })
            .collect(),
        Suite::BatchMSweep => BATCH_SIZES
            .into_iter()
            .map(|m| -> Case<'_> {
                (
                    format!("m={m}"),
                    Box::new(move || {
                        std::hint::black_box(mm1_saturation(n, m, false, 1));
                    }),
                )
            })
            .collect(),
        Suite::ThunkVsConstant => vec![
            (
                "constant".to_string(),
                Box::new(move || {
                    std::hint::black_box(timeout_test(n, false));
                }),
            ),
            (
                "thunk".to_string(),
                Box::new(move || {
                    std::hint::black_box(timeout_test(n, true));
                }),
            ),
        ],
    };
    time_cases(&cases, runs)
}

pub struct Table<'a>(pub &'a [Timing]);

impl fmt::Display for Table<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>5} {:>12} {:>12} {:>12} {:>12}",
            "case", "runs", "min", "mean", "median", "max"
        )?;
        for t in self.0 {
            writeln!(
                f,
                "{:<12} {:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                t.case, t.runs, t.min, t.mean, t.median, t.max
            )?;
        }
        Ok(())
    }
}
