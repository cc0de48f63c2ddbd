//! The user-facing simulation environment and its immutable snapshot.

use std::fmt;
use std::mem;

use crate::error::SimError;
use crate::event::EventPriority;
use crate::format;
use crate::monitor::{Monitor, Monitored};
use crate::process::GeneratorSpec;
use crate::resource::{Limit, Resource, ResourceSpec};
use crate::sim::{Core, Ctx, NullTrace, Pid, TraceSink};
use crate::trajectory::{Activity, ResourceRef, Trajectory};

/// A simulation: resources, generators, the event loop and the monitor.
pub struct Environment {
    name: String,
    seed: u64,
    stream: u64,
    resources: Vec<ResourceSpec>,
    generators: Vec<GeneratorSpec>,
    core: Core,
    validated: bool,
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Environment")
            .field("name", &self.name)
            .field("now", &self.now())
            .finish()
    }
}

impl Default for Environment {
    fn default() -> Self {
        Environment::new()
    }
}

impl Environment {
    pub fn new() -> Self {
        Environment::with_seed(0)
    }

    pub fn with_seed(seed: u64) -> Self {
        Environment {
            name: "anonymous".to_string(),
            seed,
            stream: 0,
            resources: Vec::new(),
            generators: Vec::new(),
            core: Core::new(seed, 0, Box::new(NullTrace)),
            validated: false,
        }
    }

    pub fn named(name: impl Into<String>, seed: u64) -> Self {
        let mut env = Environment::with_seed(seed);
        env.name = name.into();
        env
    }

    /// Selects an independent random stream of the same seed; replication
    /// runners give every replication its own stream.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self.rebuild();
        self
    }

    pub fn with_trace(mut self, sink: impl TraceSink + 'static) -> Self {
        self.core.trace = Box::new(sink);
        self
    }

    pub fn set_trace(&mut self, sink: impl TraceSink + 'static) {
        self.core.trace = Box::new(sink);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn add_resource(&mut self, spec: ResourceSpec) -> Result<&mut Self, SimError> {
        self.core.add_resource(Resource::new(spec.clone()))?;
        self.resources.push(spec);
        self.validated = false;
        Ok(self)
    }

    pub fn add_generator(&mut self, spec: GeneratorSpec) -> Result<&mut Self, SimError> {
        self.core.add_generator(&spec)?;
        self.generators.push(spec);
        self.validated = false;
        Ok(self)
    }

    fn rebuild(&mut self) {
        let trace = mem::replace(&mut self.core.trace, Box::new(NullTrace));
        let mut core = Core::new(self.seed, self.stream, trace);
        for r in &self.resources {
            core.add_resource(Resource::new(r.clone()))
                .expect("names were checked when added");
        }
        for g in &self.generators {
            core.add_generator(g).expect("names were checked when added");
        }
        self.core = core;
    }

    /// Checks that every resource named by a trajectory exists.
    pub fn validate(&mut self) -> Result<(), SimError> {
        if self.validated {
            return Ok(());
        }
        for g in &self.generators {
            check_names(&g.trajectory, &self.core)?;
        }
        self.validated = true;
        Ok(())
    }

    /// Runs until the next event would happen at or after `until`.
    /// Returns the final clock.
    pub fn run(&mut self, until: f64) -> Result<f64, SimError> {
        if until.is_nan() || until < self.now() {
            return Err(SimError::InvalidParameter {
                activity: "run",
                message: format!("cannot run until {until} from {}", self.now()),
            });
        }
        self.validate()?;
        while let Some((_, pid)) = self.core.events.pop_before(until) {
            self.core.dispatch(pid)?;
        }
        if until.is_finite() && !self.core.events.is_empty() {
            self.core.events.advance_to(until);
        }
        Ok(self.now())
    }

    /// Processes one event. Returns `false` when nothing is left.
    pub fn step(&mut self) -> Result<bool, SimError> {
        self.validate()?;
        match self.core.events.pop() {
            Some((_, pid)) => {
                self.core.dispatch(pid)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    pub fn stepn(&mut self, n: usize) -> Result<usize, SimError> {
        for i in 0..n {
            if !self.step()? {
                return Ok(i);
            }
        }
        Ok(n)
    }

    /// Back to time zero with cleared monitors, replaying the same random
    /// stream.
    pub fn reset(&mut self) {
        self.rebuild();
    }

    /// Like [`reset`](Self::reset) but with a new seed.
    pub fn reset_with_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.rebuild();
    }

    /// Freezes the final state and monitored data.
    pub fn wrap(self) -> Snapshot {
        let (resources, generators) = self.status();
        Snapshot {
            name: self.name.clone(),
            now: self.now(),
            next: self.core.events.next_time(),
            resources,
            generators,
            monitor: self.core.monitor,
        }
    }

    pub fn now(&self) -> f64 {
        self.core.now()
    }

    /// The next `k` events as `(time, process name)`.
    pub fn peek(&self, k: usize) -> Vec<(f64, String)> {
        self.core
            .events
            .peek(k)
            .into_iter()
            .map(|(key, pid)| (key.at, self.core.process_name(pid)))
            .collect()
    }

    pub fn next_time(&self) -> Option<f64> {
        self.core.events.next_time()
    }

    /// Arrivals currently in the system.
    pub fn live_arrivals(&self) -> usize {
        self.core.live_arrivals()
    }

    fn resource(&self, name: &str) -> Result<&Resource, SimError> {
        Ok(&self.core.resources[self.core.resource_id(name)?])
    }

    pub fn get_capacity(&self, resource: &str) -> Result<Limit, SimError> {
        self.resource(resource).map(Resource::capacity)
    }

    pub fn get_queue_size(&self, resource: &str) -> Result<Limit, SimError> {
        self.resource(resource).map(Resource::queue_size)
    }

    pub fn get_server_count(&self, resource: &str) -> Result<u64, SimError> {
        self.resource(resource).map(Resource::server_count)
    }

    pub fn get_queue_count(&self, resource: &str) -> Result<u64, SimError> {
        self.resource(resource).map(Resource::queue_count)
    }

    pub fn get_n_generated(&self, generator: &str) -> Result<u64, SimError> {
        Ok(self.core.generators[self.core.generator_id(generator)?].count)
    }

    pub fn get_global(&self, key: &str) -> Option<f64> {
        self.core.global(key)
    }

    pub fn set_global(&mut self, key: &str, value: f64) {
        self.core.set_global(key, value, None);
    }

    pub fn set_capacity(&mut self, resource: &str, value: impl Into<Limit>) -> Result<(), SimError> {
        let r = self.core.resource_id(resource)?;
        self.core.apply_capacity(r, value.into())
    }

    pub fn set_queue_size(&mut self, resource: &str, value: impl Into<Limit>) -> Result<(), SimError> {
        let r = self.core.resource_id(resource)?;
        self.core.apply_queue_size(r, value.into())
    }

    /// Schedules a capacity and/or queue size change `delay` from now, run
    /// with manager priority.
    pub fn schedule_change(
        &mut self,
        delay: f64,
        resource: &str,
        capacity: Option<Limit>,
        queue_size: Option<Limit>,
    ) -> Result<(), SimError> {
        let r = self.core.resource_id(resource)?;
        self.core.schedule_change(delay, r, capacity, queue_size)
    }

    /// Schedules a one-shot routine.
    pub fn schedule<F>(&mut self, delay: f64, priority: EventPriority, f: F) -> Result<(), SimError>
    where
        F: FnOnce(&mut Ctx<'_>) + Send + 'static,
    {
        self.core.schedule_custom(delay, priority, Box::new(f))
    }

    pub fn activate(&mut self, generator: &str) -> Result<(), SimError> {
        let g = self.core.generator_id(generator)?;
        self.core.activate(g)
    }

    pub fn deactivate(&mut self, generator: &str) -> Result<(), SimError> {
        let g = self.core.generator_id(generator)?;
        self.core.deactivate(g);
        Ok(())
    }

    pub fn send(&mut self, signals: &[&str]) -> Result<(), SimError> {
        let s: Vec<String> = signals.iter().map(|s| s.to_string()).collect();
        self.core.broadcast(&s)
    }

    pub fn resource_names(&self) -> Vec<String> {
        self.core.resources.iter().map(|r| r.name().to_string()).collect()
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.core.generators.iter().map(|g| g.name.clone()).collect()
    }

    fn status(&self) -> (Vec<ResourceState>, Vec<GeneratorState>) {
        let r = self
            .core
            .resources
            .iter()
            .map(|r| ResourceState {
                name: r.name().to_string(),
                monitored: r.spec.monitored,
                capacity: r.capacity(),
                queue_size: r.queue_size(),
                server: r.server_count(),
                queue: r.queue_count(),
            })
            .collect();
        let g = self
            .core
            .generators
            .iter()
            .map(|g| GeneratorState {
                name: g.name.clone(),
                mon: g.mon,
                n_generated: g.count,
            })
            .collect();
        (r, g)
    }
}

fn check_names(t: &Trajectory, core: &Core) -> Result<(), SimError> {
    for a in t.activities() {
        match a {
            Activity::Seize {
                resource: ResourceRef::Named(n),
                ..
            }
            | Activity::Release {
                resource: ResourceRef::Named(n),
                ..
            }
            | Activity::SetCapacity {
                resource: ResourceRef::Named(n),
                ..
            }
            | Activity::SetQueueSize {
                resource: ResourceRef::Named(n),
                ..
            } => {
                core.resource_id(n)?;
            }
            _ => {}
        }
        for s in a.subs() {
            check_names(s, core)?;
        }
    }
    Ok(())
}

impl Monitored for Environment {
    fn monitor(&self) -> &Monitor {
        &self.core.monitor
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, g) = self.status();
        write_status(f, &self.name, self.now(), self.next_time(), &r, &g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceState {
    pub name: String,
    pub monitored: bool,
    pub capacity: Limit,
    pub queue_size: Limit,
    pub server: u64,
    pub queue: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorState {
    pub name: String,
    pub mon: u8,
    pub n_generated: u64,
}

fn write_status(
    f: &mut fmt::Formatter<'_>,
    name: &str,
    now: f64,
    next: Option<f64>,
    resources: &[ResourceState],
    generators: &[GeneratorState],
) -> fmt::Result {
    let next = next.map(format::long_time).unwrap_or_default();
    writeln!(
        f,
        "simmer environment: {name} | now: {} | next: {next}",
        format::long_time(now)
    )?;
    for r in resources {
        writeln!(
            f,
            "{{ Resource: {} | monitored: {} | server status: {}({}) | queue status: {}({}) }}",
            r.name,
            if r.monitored { "TRUE" } else { "FALSE" },
            r.server,
            r.capacity,
            r.queue,
            r.queue_size
        )?;
    }
    for g in generators {
        writeln!(
            f,
            "{{ Generator: {} | monitored: {} | n_generated: {} }}",
            g.name, g.mon, g.n_generated
        )?;
    }
    Ok(())
}

/// Final state and monitor of a finished environment. Getters work; running
/// and resetting do not.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub name: String,
    pub now: f64,
    pub next: Option<f64>,
    pub resources: Vec<ResourceState>,
    pub generators: Vec<GeneratorState>,
    monitor: Monitor,
}

impl Snapshot {
    pub fn run(&mut self, _until: f64) -> Result<f64, SimError> {
        Err(SimError::Wrapped)
    }

    pub fn reset(&mut self) -> Result<(), SimError> {
        Err(SimError::Wrapped)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    fn resource(&self, name: &str) -> Result<&ResourceState, SimError> {
        self.resources
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| SimError::UnknownResource(name.to_string()))
    }

    pub fn get_capacity(&self, resource: &str) -> Result<Limit, SimError> {
        self.resource(resource).map(|r| r.capacity)
    }

    pub fn get_queue_size(&self, resource: &str) -> Result<Limit, SimError> {
        self.resource(resource).map(|r| r.queue_size)
    }

    pub fn get_server_count(&self, resource: &str) -> Result<u64, SimError> {
        self.resource(resource).map(|r| r.server)
    }

    pub fn get_queue_count(&self, resource: &str) -> Result<u64, SimError> {
        self.resource(resource).map(|r| r.queue)
    }

    pub fn get_n_generated(&self, generator: &str) -> Result<u64, SimError> {
        self.generators
            .iter()
            .find(|g| g.name == generator)
            .map(|g| g.n_generated)
            .ok_or_else(|| SimError::UnknownGenerator(generator.to_string()))
    }
}

impl Monitored for Snapshot {
    fn monitor(&self) -> &Monitor {
        &self.monitor
    }
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_status(f, &self.name, self.now, self.next, &self.resources, &self.generators)
    }
}

#[allow(dead_code)]
fn _assert_send() {
    fn is_send<T: Send>() {}
    is_send::<Environment>();
    is_send::<Pid>();
}
