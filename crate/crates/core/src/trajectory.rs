//! Trajectories: ordered chains of activities that arrivals walk through.
//!
//! A trajectory is immutable once attached to a generator. Activities that
//! fork (seize, branch, clone, trap, renege) own their sub-trajectories.
//! Composition (`join`, `subset`, `replace`) always deep-copies nodes so the
//! pieces stay independent.

use std::fmt;
use std::sync::Arc;

use crate::error::SimError;
use crate::event::EventPriority;
use crate::format;
use crate::param::{show, Param};
use crate::process::{Distribution, Prioritization};
use crate::resource::Limit;
use crate::sim::Ctx;

/// Which resource an activity acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResourceRef {
    Named(String),
    /// The resource previously chosen by `select` under this id.
    Selected(usize),
}

impl From<&str> for ResourceRef {
    fn from(s: &str) -> Self {
        ResourceRef::Named(s.to_string())
    }
}

impl From<String> for ResourceRef {
    fn from(s: String) -> Self {
        ResourceRef::Named(s)
    }
}

impl fmt::Display for ResourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceRef::Named(n) => f.write_str(n),
            ResourceRef::Selected(id) => write!(f, "selected[{id}]"),
        }
    }
}

#[derive(Clone)]
pub enum SelectPolicy {
    ShortestQueue,
    RoundRobin,
    FirstAvailable,
    Random,
    /// Returns an index into the candidate list.
    Custom(Arc<dyn Fn(&mut Ctx<'_>, &[String]) -> usize + Send + Sync>),
}

impl fmt::Debug for SelectPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl SelectPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SelectPolicy::ShortestQueue => "shortest-queue",
            SelectPolicy::RoundRobin => "round-robin",
            SelectPolicy::FirstAvailable => "first-available",
            SelectPolicy::Random => "random",
            SelectPolicy::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "shortest-queue" => SelectPolicy::ShortestQueue,
            "round-robin" => SelectPolicy::RoundRobin,
            "first-available" => SelectPolicy::FirstAvailable,
            "random" => SelectPolicy::Random,
            _ => return None,
        })
    }
}

/// Options of a `batch` activity.
#[derive(Clone, Debug)]
pub struct BatchSpec {
    pub n: u64,
    pub timeout: Param<f64>,
    pub permanent: bool,
    pub name: Option<String>,
    pub rule: Option<Param<bool>>,
}

impl BatchSpec {
    pub fn new(n: u64) -> Self {
        BatchSpec {
            n,
            timeout: Param::Const(0.0),
            permanent: false,
            name: None,
            rule: None,
        }
    }

    pub fn timeout(mut self, t: impl Into<Param<f64>>) -> Self {
        self.timeout = t.into();
        self
    }

    pub fn permanent(mut self, p: bool) -> Self {
        self.permanent = p;
        self
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn rule(mut self, rule: Param<bool>) -> Self {
        self.rule = Some(rule);
        self
    }
}

/// Optional parts of a `seize`.
#[derive(Clone, Debug, Default)]
pub struct SeizeOptions {
    pub post_seize: Option<Trajectory>,
    pub reject: Option<Trajectory>,
    /// Continue in the main chain after `post_seize` / `reject`.
    pub continue_post: bool,
    pub continue_reject: bool,
}

impl SeizeOptions {
    pub fn new() -> Self {
        SeizeOptions {
            continue_post: true,
            continue_reject: true,
            ..Default::default()
        }
    }

    pub fn post_seize(mut self, t: Trajectory) -> Self {
        self.post_seize = Some(t);
        self
    }

    pub fn reject(mut self, t: Trajectory) -> Self {
        self.reject = Some(t);
        self
    }

    pub fn continue_(mut self, post: bool, reject: bool) -> Self {
        self.continue_post = post;
        self.continue_reject = reject;
        self
    }
}

/// One node of a trajectory.
#[derive(Clone, Debug)]
pub enum Activity {
    Log {
        message: Param<String>,
    },
    Timeout {
        delay: Param<f64>,
    },
    SetAttribute {
        key: Param<String>,
        value: Param<f64>,
        global: bool,
    },
    SetPrioritization {
        values: Param<Prioritization>,
    },
    Seize {
        resource: ResourceRef,
        amount: Param<u64>,
        post_seize: Option<Arc<Trajectory>>,
        reject: Option<Arc<Trajectory>>,
        continue_post: bool,
        continue_reject: bool,
    },
    /// `amount: None` releases everything held.
    Release {
        resource: ResourceRef,
        amount: Option<Param<u64>>,
    },
    Select {
        resources: Param<Vec<String>>,
        policy: SelectPolicy,
        id: usize,
    },
    SetCapacity {
        resource: ResourceRef,
        value: Param<f64>,
    },
    SetQueueSize {
        resource: ResourceRef,
        value: Param<f64>,
    },
    Activate {
        generator: Param<String>,
    },
    Deactivate {
        generator: Param<String>,
    },
    SetTrajectory {
        generator: Param<String>,
        trajectory: Arc<Trajectory>,
    },
    SetDistribution {
        generator: Param<String>,
        distribution: Distribution,
    },
    Branch {
        option: Param<i64>,
        continues: Vec<bool>,
        subs: Vec<Arc<Trajectory>>,
    },
    Clone {
        n: Param<i64>,
        subs: Vec<Arc<Trajectory>>,
    },
    Synchronize {
        wait: bool,
    },
    Rollback {
        amount: Param<i64>,
        /// `None` loops forever.
        times: Option<u64>,
        check: Option<Param<bool>>,
    },
    Batch(BatchSpec),
    Separate,
    Send {
        signals: Param<Vec<String>>,
        delay: Param<f64>,
    },
    Trap {
        signals: Param<Vec<String>>,
        handler: Option<Arc<Trajectory>>,
        interruptible: bool,
    },
    Untrap {
        signals: Param<Vec<String>>,
    },
    Wait,
    Leave {
        prob: Param<f64>,
    },
    RenegeIn {
        t: Param<f64>,
        out: Option<Arc<Trajectory>>,
    },
    RenegeIf {
        signal: Param<String>,
        out: Option<Arc<Trajectory>>,
    },
    RenegeAbort,
}

impl Activity {
    pub fn tag(&self) -> &'static str {
        match self {
            Activity::Log { .. } => "Log",
            Activity::Timeout { .. } => "Timeout",
            Activity::SetAttribute { .. } => "SetAttribute",
            Activity::SetPrioritization { .. } => "SetPrior",
            Activity::Seize {
                resource: ResourceRef::Selected(_),
                ..
            } => "SeizeSelected",
            Activity::Seize { .. } => "Seize",
            Activity::Release {
                resource: ResourceRef::Selected(_),
                ..
            } => "ReleaseSelected",
            Activity::Release { .. } => "Release",
            Activity::Select { .. } => "Select",
            Activity::SetCapacity { .. } => "SetCapacity",
            Activity::SetQueueSize { .. } => "SetQueue",
            Activity::Activate { .. } => "Activate",
            Activity::Deactivate { .. } => "Deactivate",
            Activity::SetTrajectory { .. } => "SetTraj",
            Activity::SetDistribution { .. } => "SetDist",
            Activity::Branch { .. } => "Branch",
            Activity::Clone { .. } => "Clone",
            Activity::Synchronize { .. } => "Synchronize",
            Activity::Rollback { .. } => "Rollback",
            Activity::Batch(_) => "Batch",
            Activity::Separate => "Separate",
            Activity::Send { .. } => "Send",
            Activity::Trap { .. } => "Trap",
            Activity::Untrap { .. } => "UnTrap",
            Activity::Wait => "Wait",
            Activity::Leave { .. } => "Leave",
            Activity::RenegeIn { .. } => "RenegeIn",
            Activity::RenegeIf { .. } => "RenegeIf",
            Activity::RenegeAbort => "RenegeAbort",
        }
    }

    /// Event priority with which an arrival is scheduled to execute this
    /// activity after a delay.
    pub fn priority(&self) -> EventPriority {
        match self {
            Activity::Activate { .. }
            | Activity::Deactivate { .. }
            | Activity::SetTrajectory { .. }
            | Activity::SetDistribution { .. } => EventPriority::Max,
            Activity::Release { .. } => EventPriority::Release,
            Activity::SetCapacity { .. } | Activity::SetQueueSize { .. } => EventPriority::Manager,
            _ => EventPriority::General,
        }
    }

    /// Sub-trajectories owned by this node.
    pub fn subs(&self) -> Vec<&Arc<Trajectory>> {
        match self {
            Activity::Seize {
                post_seize, reject, ..
            } => post_seize.iter().chain(reject.iter()).collect(),
            Activity::Branch { subs, .. } | Activity::Clone { subs, .. } => subs.iter().collect(),
            Activity::Trap { handler, .. } => handler.iter().collect(),
            Activity::RenegeIn { out, .. } | Activity::RenegeIf { out, .. } => out.iter().collect(),
            Activity::SetTrajectory { trajectory, .. } => vec![trajectory],
            _ => Vec::new(),
        }
    }

    fn params(&self) -> String {
        let num = |v: &f64| format::general(*v, 15);
        let strs = |v: &Vec<String>| v.join(", ");
        match self {
            Activity::Log { .. } => "message".into(),
            Activity::Timeout { delay } => format!("delay: {}", show(delay, num)),
            Activity::SetAttribute { key, value, global } => format!(
                "key: {}, value: {}, global: {}",
                show(key, |k| k.clone()),
                show(value, num),
                upper(*global)
            ),
            Activity::SetPrioritization { values } => format!(
                "values: {}",
                show(values, |p| format!(
                    "[{}, {}, {}]",
                    p.priority,
                    p.preemptible,
                    upper(p.restart)
                ))
            ),
            Activity::Seize {
                resource, amount, ..
            } => format!(
                "resource: {resource}, amount: {}",
                show(amount, |a| a.to_string())
            ),
            Activity::Release { resource, amount } => match amount {
                Some(a) => format!(
                    "resource: {resource}, amount: {}",
                    show(a, |a| a.to_string())
                ),
                None => format!("resource: {resource}, amount: all"),
            },
            Activity::Select {
                resources, policy, ..
            } => format!(
                "resources: [{}], policy: {}",
                show(resources, strs),
                policy.name()
            ),
            Activity::SetCapacity { resource, value } | Activity::SetQueueSize { resource, value } => {
                format!("resource: {resource}, value: {}", show(value, num))
            }
            Activity::Activate { generator } | Activity::Deactivate { generator } => {
                format!("generator: {}", show(generator, |g| g.clone()))
            }
            Activity::SetTrajectory { generator, .. } => {
                format!("generator: {}, trajectory", show(generator, |g| g.clone()))
            }
            Activity::SetDistribution { generator, .. } => {
                format!("generator: {}, distribution", show(generator, |g| g.clone()))
            }
            Activity::Branch { option, continues, .. } => format!(
                "option: {}, continue: [{}]",
                show(option, |o| o.to_string()),
                continues.iter().map(|c| upper(*c)).collect::<Vec<_>>().join(", ")
            ),
            Activity::Clone { n, .. } => format!("n: {}", show(n, |n| n.to_string())),
            Activity::Synchronize { wait } => format!("wait: {}", upper(*wait)),
            Activity::Rollback {
                amount,
                times,
                check,
            } => match check {
                Some(_) => format!("amount: {}, check: function()", show(amount, |a| a.to_string())),
                None => format!(
                    "amount: {}, times: {}",
                    show(amount, |a| a.to_string()),
                    times.map_or("Inf".to_string(), |t| t.to_string())
                ),
            },
            Activity::Batch(b) => format!(
                "n: {}, timeout: {}, permanent: {}, name: {}",
                b.n,
                show(&b.timeout, num),
                upper(b.permanent),
                b.name.as_deref().unwrap_or("")
            ),
            Activity::Send { signals, delay } => format!(
                "signals: [{}], delay: {}",
                show(signals, strs),
                show(delay, num)
            ),
            Activity::Trap {
                signals,
                interruptible,
                ..
            } => format!(
                "signals: [{}], interruptible: {}",
                show(signals, strs),
                upper(*interruptible)
            ),
            Activity::Untrap { signals } => format!("signals: [{}]", show(signals, strs)),
            Activity::Leave { prob } => format!("prob: {}", show(prob, num)),
            Activity::RenegeIn { t, .. } => format!("t: {}", show(t, num)),
            Activity::RenegeIf { signal, .. } => format!("signal: {}", show(signal, |s| s.clone())),
            Activity::Separate | Activity::Wait | Activity::RenegeAbort => String::new(),
        }
    }

    fn deep_copy(&self) -> Activity {
        let copy = |t: &Arc<Trajectory>| Arc::new(t.deep_copy());
        let mut a = self.clone();
        match &mut a {
            Activity::Seize {
                post_seize, reject, ..
            } => {
                *post_seize = post_seize.as_ref().map(copy);
                *reject = reject.as_ref().map(copy);
            }
            Activity::Branch { subs, .. } | Activity::Clone { subs, .. } => {
                *subs = subs.iter().map(copy).collect();
            }
            Activity::Trap { handler, .. } => *handler = handler.as_ref().map(copy),
            Activity::RenegeIn { out, .. } | Activity::RenegeIf { out, .. } => {
                *out = out.as_ref().map(copy)
            }
            _ => {}
        }
        a
    }
}

fn upper(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

/// An ordered chain of activities.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    name: Option<String>,
    activities: Vec<Activity>,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory::default()
    }

    pub fn named(name: impl Into<String>) -> Self {
        Trajectory {
            name: Some(name.into()),
            activities: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("anonymous")
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn get(&self, i: usize) -> Option<&Activity> {
        self.activities.get(i)
    }

    /// Number of activities including those in sub-trajectories.
    pub fn total_activities(&self) -> usize {
        self.activities
            .iter()
            .map(|a| 1 + a.subs().iter().map(|s| s.total_activities()).sum::<usize>())
            .sum()
    }

    pub fn deep_copy(&self) -> Trajectory {
        Trajectory {
            name: self.name.clone(),
            activities: self.activities.iter().map(Activity::deep_copy).collect(),
        }
    }

    /// Appends a node.
    pub fn push(mut self, activity: Activity) -> Self {
        self.activities.push(activity);
        self
    }

    /// Standalone trajectory made of the nodes at `indices` (zero based), in
    /// the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Trajectory, SimError> {
        let mut out = Trajectory {
            name: self.name.clone(),
            activities: Vec::with_capacity(indices.len()),
        };
        for &i in indices {
            let a = self.activities.get(i).ok_or(SimError::IndexOutOfRange {
                index: i,
                len: self.len(),
            })?;
            out.activities.push(a.deep_copy());
        }
        Ok(out)
    }

    /// Overwrites node `slot` with a copy of node `from`.
    pub fn replace(&mut self, slot: usize, from: usize) -> Result<(), SimError> {
        let len = self.len();
        let src = self
            .activities
            .get(from)
            .ok_or(SimError::IndexOutOfRange { index: from, len })?
            .deep_copy();
        let dst = self
            .activities
            .get_mut(slot)
            .ok_or(SimError::IndexOutOfRange { index: slot, len })?;
        *dst = src;
        Ok(())
    }

    /// Concatenation of deep copies of `parts`.
    pub fn join<'a>(parts: impl IntoIterator<Item = &'a Trajectory>) -> Trajectory {
        let mut out = Trajectory::new();
        for p in parts {
            out.activities
                .extend(p.activities.iter().map(Activity::deep_copy));
        }
        out
    }

    // Builder methods, one per activity.

    pub fn log(self, message: impl Into<Param<String>>) -> Self {
        self.push(Activity::Log {
            message: message.into(),
        })
    }

    pub fn timeout(self, delay: impl Into<Param<f64>>) -> Self {
        self.push(Activity::Timeout {
            delay: delay.into(),
        })
    }

    pub fn set_attribute(self, key: impl Into<Param<String>>, value: impl Into<Param<f64>>) -> Self {
        self.push(Activity::SetAttribute {
            key: key.into(),
            value: value.into(),
            global: false,
        })
    }

    pub fn set_global(self, key: impl Into<Param<String>>, value: impl Into<Param<f64>>) -> Self {
        self.push(Activity::SetAttribute {
            key: key.into(),
            value: value.into(),
            global: true,
        })
    }

    pub fn set_prioritization(self, values: impl Into<Param<Prioritization>>) -> Self {
        self.push(Activity::SetPrioritization {
            values: values.into(),
        })
    }

    pub fn seize(self, resource: impl Into<ResourceRef>, amount: impl Into<Param<u64>>) -> Self {
        self.seize_with(resource, amount, SeizeOptions::new())
    }

    pub fn seize_with(
        self,
        resource: impl Into<ResourceRef>,
        amount: impl Into<Param<u64>>,
        opts: SeizeOptions,
    ) -> Self {
        self.push(Activity::Seize {
            resource: resource.into(),
            amount: amount.into(),
            post_seize: opts.post_seize.map(Arc::new),
            reject: opts.reject.map(Arc::new),
            continue_post: opts.continue_post,
            continue_reject: opts.continue_reject,
        })
    }

    pub fn seize_selected(self, id: usize, amount: impl Into<Param<u64>>) -> Self {
        self.seize(ResourceRef::Selected(id), amount)
    }

    pub fn release(self, resource: impl Into<ResourceRef>, amount: impl Into<Param<u64>>) -> Self {
        self.push(Activity::Release {
            resource: resource.into(),
            amount: Some(amount.into()),
        })
    }

    pub fn release_all(self, resource: impl Into<ResourceRef>) -> Self {
        self.push(Activity::Release {
            resource: resource.into(),
            amount: None,
        })
    }

    pub fn release_selected(self, id: usize, amount: impl Into<Param<u64>>) -> Self {
        self.release(ResourceRef::Selected(id), amount)
    }

    pub fn select(self, resources: impl Into<Param<Vec<String>>>, policy: SelectPolicy) -> Self {
        self.select_id(resources, policy, 0)
    }

    pub fn select_id(
        self,
        resources: impl Into<Param<Vec<String>>>,
        policy: SelectPolicy,
        id: usize,
    ) -> Self {
        self.push(Activity::Select {
            resources: resources.into(),
            policy,
            id,
        })
    }

    pub fn set_capacity(self, resource: impl Into<ResourceRef>, value: impl Into<Param<f64>>) -> Self {
        self.push(Activity::SetCapacity {
            resource: resource.into(),
            value: value.into(),
        })
    }

    pub fn set_queue_size(
        self,
        resource: impl Into<ResourceRef>,
        value: impl Into<Param<f64>>,
    ) -> Self {
        self.push(Activity::SetQueueSize {
            resource: resource.into(),
            value: value.into(),
        })
    }

    pub fn activate(self, generator: impl Into<Param<String>>) -> Self {
        self.push(Activity::Activate {
            generator: generator.into(),
        })
    }

    pub fn deactivate(self, generator: impl Into<Param<String>>) -> Self {
        self.push(Activity::Deactivate {
            generator: generator.into(),
        })
    }

    pub fn set_trajectory(self, generator: impl Into<Param<String>>, trajectory: Trajectory) -> Self {
        self.push(Activity::SetTrajectory {
            generator: generator.into(),
            trajectory: Arc::new(trajectory),
        })
    }

    pub fn set_distribution(
        self,
        generator: impl Into<Param<String>>,
        distribution: Distribution,
    ) -> Self {
        self.push(Activity::SetDistribution {
            generator: generator.into(),
            distribution,
        })
    }

    /// Routes the arrival to sub-trajectory `option` (1 based; 0 skips).
    pub fn branch(
        self,
        option: impl Into<Param<i64>>,
        continues: &[bool],
        subs: Vec<Trajectory>,
    ) -> Self {
        let mut continues = continues.to_vec();
        continues.resize(subs.len(), continues.last().copied().unwrap_or(true));
        self.push(Activity::Branch {
            option: option.into(),
            continues,
            subs: subs.into_iter().map(Arc::new).collect(),
        })
    }

    /// Splits the arrival into `n` copies, copy `i` following `subs[i]`.
    pub fn clone_n(self, n: impl Into<Param<i64>>, subs: Vec<Trajectory>) -> Self {
        self.push(Activity::Clone {
            n: n.into(),
            subs: subs.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn synchronize(self, wait: bool) -> Self {
        self.push(Activity::Synchronize { wait })
    }

    pub fn rollback(self, amount: impl Into<Param<i64>>, times: Option<u64>) -> Self {
        self.push(Activity::Rollback {
            amount: amount.into(),
            times,
            check: None,
        })
    }

    pub fn rollback_if(self, amount: impl Into<Param<i64>>, check: Param<bool>) -> Self {
        self.push(Activity::Rollback {
            amount: amount.into(),
            times: None,
            check: Some(check),
        })
    }

    pub fn batch(self, spec: BatchSpec) -> Self {
        self.push(Activity::Batch(spec))
    }

    pub fn separate(self) -> Self {
        self.push(Activity::Separate)
    }

    pub fn send(self, signals: impl Into<Param<Vec<String>>>, delay: impl Into<Param<f64>>) -> Self {
        self.push(Activity::Send {
            signals: signals.into(),
            delay: delay.into(),
        })
    }

    pub fn trap(
        self,
        signals: impl Into<Param<Vec<String>>>,
        handler: Option<Trajectory>,
        interruptible: bool,
    ) -> Self {
        self.push(Activity::Trap {
            signals: signals.into(),
            handler: handler.map(Arc::new),
            interruptible,
        })
    }

    pub fn untrap(self, signals: impl Into<Param<Vec<String>>>) -> Self {
        self.push(Activity::Untrap {
            signals: signals.into(),
        })
    }

    pub fn wait(self) -> Self {
        self.push(Activity::Wait)
    }

    pub fn leave(self, prob: impl Into<Param<f64>>) -> Self {
        self.push(Activity::Leave { prob: prob.into() })
    }

    pub fn renege_in(self, t: impl Into<Param<f64>>, out: Option<Trajectory>) -> Self {
        self.push(Activity::RenegeIn {
            t: t.into(),
            out: out.map(Arc::new),
        })
    }

    pub fn renege_if(self, signal: impl Into<Param<String>>, out: Option<Trajectory>) -> Self {
        self.push(Activity::RenegeIf {
            signal: signal.into(),
            out: out.map(Arc::new),
        })
    }

    pub fn renege_abort(self) -> Self {
        self.push(Activity::RenegeAbort)
    }

    fn fmt_indent(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let pad = " ".repeat(indent);
        for a in &self.activities {
            let params = a.params();
            if params.is_empty() {
                writeln!(f, "{pad}{{ Activity: {:<12} }}", a.tag())?;
            } else {
                writeln!(f, "{pad}{{ Activity: {:<12} | {} }}", a.tag(), params)?;
            }
            for (i, sub) in a.subs().iter().enumerate() {
                writeln!(
                    f,
                    "{pad}  Fork {}, trajectory: {}, {} activities",
                    i + 1,
                    sub.name(),
                    sub.total_activities()
                )?;
                sub.fmt_indent(f, indent + 2)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trajectory: {}, {} activities",
            self.name(),
            self.total_activities()
        )?;
        self.fmt_indent(f, 0)
    }
}

impl From<Prioritization> for Param<Prioritization> {
    fn from(p: Prioritization) -> Self {
        Param::Const(p)
    }
}

impl From<Limit> for Param<f64> {
    fn from(l: Limit) -> Self {
        Param::Const(l.as_f64())
    }
}
