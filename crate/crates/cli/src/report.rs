//! Replicated runs of a model and their summary.

use std::fmt;

use trajsim::format::general;
use trajsim::monitor::{time_average_server, time_average_system};
use trajsim::replicate::replicate;
use trajsim::*;

use crate::analytic::{self, Mm1};
use crate::model::ast::Analytic;
use crate::model::Model;
use crate::stats::{mean, t_interval, Interval};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub reps: usize,
    pub until: f64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

#[derive(Debug, thiserror::Error)]
#[error("replication {replication}: {source}")]
pub struct RunError {
    pub replication: usize,
    pub source: SimError,
}

/// Figures of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepStats {
    pub finished: usize,
    pub mean_sojourn: f64,
    pub mean_activity: f64,
    /// Finished arrivals per unit of time.
    pub throughput: f64,
    pub resources: Vec<ResourceStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceStats {
    pub name: String,
    pub server: f64,
    pub queue: f64,
    pub system: f64,
    /// Plain averages over the recorded rows.
    pub row_server: f64,
    pub row_queue: f64,
}

pub struct RunReport {
    pub name: String,
    pub options: RunOptions,
    pub snapshots: Vec<Snapshot>,
    pub replications: Vec<RepStats>,
    pub analytic: Option<Mm1>,
}

/// Runs `opts.reps` replications; replication `i` uses stream `i` of the
/// seed, so the result does not depend on `opts.jobs`.
pub fn run_model(model: &Model, opts: RunOptions) -> Result<RunReport, RunError> {
    let runs = replicate(opts.reps, opts.jobs, |i| -> Result<Snapshot, RunError> {
        let err = |source| RunError {
            replication: i + 1,
            source,
        };
        let mut env = model.environment(opts.seed, i as u64).map_err(err)?;
        env.run(opts.until).map_err(err)?;
        Ok(env.wrap())
    });
    let snapshots = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let replications = snapshots.iter().map(|s| rep_stats(s, opts.until)).collect();
    let analytic = model.meta().analytic.and_then(|a| match a {
        Analytic::Mm1 { lambda, mu } => analytic::mm1(lambda, mu).ok(),
    });
    Ok(RunReport {
        name: model.meta().name.clone(),
        options: opts,
        snapshots,
        replications,
        analytic,
    })
}

fn rep_stats(s: &Snapshot, until: f64) -> RepStats {
    let arrivals = get_mon_arrivals(&[s], false);
    let done: Vec<&ArrivalRow> = arrivals.iter().filter(|r| r.finished).collect();
    let sojourn: Vec<f64> = done.iter().map(|r| r.end_time - r.start_time).collect();
    let activity: Vec<f64> = done.iter().map(|r| r.activity_time).collect();
    // the horizon may be infinite; then the clock at the end is the span
    let span = if until.is_finite() { until } else { s.now };
    let rows = get_mon_resources(&[s]);
    let resources = s
        .resources
        .iter()
        .map(|r| {
            let own: Vec<&ResourceRow> = rows.iter().filter(|x| x.resource == r.name).collect();
            let server = time_average_server(&rows, &r.name, span);
            let system = time_average_system(&rows, &r.name, span);
            ResourceStats {
                name: r.name.clone(),
                server,
                queue: system - server,
                system,
                row_server: mean(&own.iter().map(|x| x.server as f64).collect::<Vec<_>>()),
                row_queue: mean(&own.iter().map(|x| x.queue as f64).collect::<Vec<_>>()),
            }
        })
        .collect();
    RepStats {
        finished: done.len(),
        mean_sojourn: mean(&sojourn),
        mean_activity: mean(&activity),
        throughput: if span > 0.0 { done.len() as f64 / span } else { f64::NAN },
        resources,
    }
}

impl RunReport {
    pub fn arrivals(&self, per_resource: bool) -> Vec<ArrivalRow> {
        let refs: Vec<&Snapshot> = self.snapshots.iter().collect();
        get_mon_arrivals(&refs, per_resource)
    }

    pub fn resources(&self) -> Vec<ResourceRow> {
        let refs: Vec<&Snapshot> = self.snapshots.iter().collect();
        get_mon_resources(&refs)
    }

    pub fn attributes(&self) -> Vec<AttributeRow> {
        let refs: Vec<&Snapshot> = self.snapshots.iter().collect();
        get_mon_attributes(&refs)
    }

    fn across(&self, f: impl Fn(&RepStats) -> f64) -> Interval {
        let xs: Vec<f64> = self.replications.iter().map(f).filter(|x| !x.is_nan()).collect();
        t_interval(&xs, 0.95)
    }

    pub fn sojourn(&self) -> Interval {
        self.across(|r| r.mean_sojourn)
    }

    pub fn activity(&self) -> Interval {
        self.across(|r| r.mean_activity)
    }

    pub fn throughput(&self) -> Interval {
        self.across(|r| r.throughput)
    }

    /// Interval of a per-resource figure, e.g. `|r| r.server`.
    pub fn resource(&self, name: &str, f: impl Fn(&ResourceStats) -> f64) -> Interval {
        self.across(|r| {
            r.resources
                .iter()
                .find(|x| x.name == name)
                .map_or(f64::NAN, &f)
        })
    }

    pub fn resource_names(&self) -> Vec<String> {
        self.snapshots
            .first()
            .map(|s| s.resources.iter().map(|r| r.name.clone()).collect())
            .unwrap_or_default()
    }
}

fn show(ci: &Interval) -> String {
    let g = |x| general(x, 7);
    if ci.lower.is_nan() {
        g(ci.mean)
    } else {
        format!("{} (95% CI {} {})", g(ci.mean), g(ci.lower), g(ci.upper))
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.options;
        writeln!(
            f,
            "model: {} | seed: {} | replications: {} | horizon: {}",
            self.name,
            o.seed,
            o.reps,
            general(o.until, 15)
        )?;
        let finished = self.across(|r| r.finished as f64);
        writeln!(f, "finished arrivals: {}", show(&finished))?;
        writeln!(f, "throughput: {}", show(&self.throughput()))?;
        writeln!(f, "mean sojourn time: {}", show(&self.sojourn()))?;
        writeln!(f, "mean activity time: {}", show(&self.activity()))?;
        for name in self.resource_names() {
            writeln!(f, "resource {name}")?;
            writeln!(f, "  in service: {}", show(&self.resource(&name, |r| r.server)))?;
            writeln!(f, "  in queue: {}", show(&self.resource(&name, |r| r.queue)))?;
            writeln!(f, "  in system: {}", show(&self.resource(&name, |r| r.system)))?;
        }
        if let Some(a) = &self.analytic {
            writeln!(f, "analytic {a}")?;
        }
        Ok(())
    }
}
