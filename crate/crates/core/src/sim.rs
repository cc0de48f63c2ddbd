//! The simulation core: arrivals walking trajectories, generators, one-shot
//! tasks and the interactions between them and the resources.

use std::collections::BTreeSet;
use std::mem;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::error::SimError;
use crate::event::{EventPriority, EventSet};
use crate::format;
use crate::monitor::Monitor;
use crate::param::Param;
use crate::process::{sample_exp, sample_unif, Distribution, GeneratorSpec, Prioritization};
use crate::resource::{Admission, Limit, Resource};
use crate::trajectory::{Activity, BatchSpec, ResourceRef, SelectPolicy, Trajectory};

const HISTORY_CAP: usize = 1 << 16;

/// Destination of `log` activity output.
pub trait TraceSink: Send {
    fn log(&mut self, time: f64, arrival: &str, message: &str);
}

/// Prints trace lines to standard output.
#[derive(Debug, Default, Clone, Copy)]
pub struct StdoutTrace;

impl TraceSink for StdoutTrace {
    fn log(&mut self, time: f64, arrival: &str, message: &str) {
        println!("{}", trace_line(time, arrival, message));
    }
}

/// Discards all trace output.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullTrace;

impl TraceSink for NullTrace {
    fn log(&mut self, _: f64, _: &str, _: &str) {}
}

/// Collects trace lines in memory; clones share the buffer.
#[derive(Debug, Default, Clone)]
pub struct MemoryTrace(Arc<Mutex<Vec<String>>>);

impl MemoryTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lines(&self) -> Vec<String> {
        self.0.lock().map(|l| l.clone()).unwrap_or_default()
    }

    pub fn clear(&self) {
        if let Ok(mut l) = self.0.lock() {
            l.clear();
        }
    }
}

impl TraceSink for MemoryTrace {
    fn log(&mut self, time: f64, arrival: &str, message: &str) {
        if let Ok(mut l) = self.0.lock() {
            l.push(trace_line(time, arrival, message));
        }
    }
}

pub fn trace_line(time: f64, arrival: &str, message: &str) -> String {
    format!("{}: {}: {}", format::trace_time(time), arrival, message)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Pid {
    Generator(u32),
    Arrival(u64),
    Task(u64),
    /// Serves waiting arrivals of a resource after a release.
    Post(u32),
}

pub(crate) struct Frame {
    traj: Arc<Trajectory>,
    parent: Option<Cursor>,
    /// Return to `parent` at the end of this frame.
    cont: bool,
    handler: bool,
}

#[derive(Clone)]
pub(crate) struct Cursor {
    frame: Arc<Frame>,
    idx: usize,
}

type NodeKey = (usize, usize);

impl Cursor {
    fn root(traj: Arc<Trajectory>) -> Cursor {
        Cursor {
            frame: Arc::new(Frame {
                traj,
                parent: None,
                cont: false,
                handler: false,
            }),
            idx: 0,
        }
    }

    fn after(&self) -> Cursor {
        Cursor {
            frame: Arc::clone(&self.frame),
            idx: self.idx + 1,
        }
    }

    fn enter(&self, sub: &Arc<Trajectory>, cont: bool) -> Cursor {
        Cursor {
            frame: Arc::new(Frame {
                traj: Arc::clone(sub),
                parent: Some(self.after()),
                cont,
                handler: false,
            }),
            idx: 0,
        }
    }

    fn node(&self) -> NodeKey {
        (Arc::as_ptr(&self.frame.traj) as *const () as usize, self.idx)
    }

    fn priority(&self) -> EventPriority {
        self.frame
            .traj
            .get(self.idx)
            .map_or(EventPriority::General, Activity::priority)
    }
}

#[derive(Clone)]
enum Status {
    Running,
    Busy { since: f64, until: f64, timeout: Cursor },
    Queued,
    Waiting,
    Batched,
    Suspended { remaining: f64, timeout: Option<Cursor> },
    Collecting,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Wake {
    Served,
    Enqueued,
    Rejected,
}

#[derive(Clone)]
enum Sub {
    Trap {
        handler: Option<Arc<Trajectory>>,
        interruptible: bool,
    },
    Renege {
        out: Option<Arc<Trajectory>>,
    },
}

#[derive(Clone)]
struct HandlerState {
    interruptible: bool,
}

#[derive(Clone, Copy)]
struct Held {
    res: usize,
    start: f64,
    activity: f64,
}

#[derive(Clone)]
struct Arrival {
    name: Arc<str>,
    mon: u8,
    start: f64,
    activity: f64,
    prio: Prioritization,
    cursor: Cursor,
    status: Status,
    attrs: FxHashMap<String, f64>,
    held: Vec<Held>,
    selected: FxHashMap<usize, usize>,
    history: Vec<Cursor>,
    rollbacks: FxHashMap<NodeKey, u64>,
    clone_group: Option<u64>,
    subs: FxHashMap<String, Sub>,
    handler: Option<HandlerState>,
    renege_task: Option<u64>,
    reneged: bool,
    wake: Option<Wake>,
    suspensions: u32,
    batch: Option<u64>,
    is_batch: bool,
    members: Vec<u64>,
    permanent: bool,
    batch_timer: Option<u64>,
    batch_key: Option<BatchKey>,
}

impl Arrival {
    fn new(name: Arc<str>, mon: u8, start: f64, prio: Prioritization, cursor: Cursor) -> Self {
        Arrival {
            name,
            mon,
            start,
            activity: 0.0,
            prio,
            cursor,
            status: Status::Running,
            attrs: FxHashMap::default(),
            held: Vec::new(),
            selected: FxHashMap::default(),
            history: Vec::new(),
            rollbacks: FxHashMap::default(),
            clone_group: None,
            subs: FxHashMap::default(),
            handler: None,
            renege_task: None,
            reneged: false,
            wake: None,
            suspensions: 0,
            batch: None,
            is_batch: false,
            members: Vec::new(),
            permanent: false,
            batch_timer: None,
            batch_key: None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum BatchKey {
    Named(String),
    Node(NodeKey),
}

struct CloneGroup {
    live: u64,
    passed: BTreeSet<NodeKey>,
}

enum Change {
    Capacity(Limit),
    QueueSize(Limit),
}

enum Task {
    Renege {
        arrival: u64,
        out: Option<Arc<Trajectory>>,
    },
    BatchTimeout {
        batch: u64,
    },
    Broadcast {
        signals: Vec<String>,
    },
    Manage {
        resource: usize,
        change: Change,
    },
    Custom(Box<dyn FnOnce(&mut Ctx<'_>) + Send>),
}

pub(crate) struct Generator {
    pub(crate) name: String,
    pub(crate) mon: u8,
    prio: Prioritization,
    root: Arc<Trajectory>,
    dist: Arc<Distribution>,
    pub(crate) count: u64,
    calls: u64,
    pub(crate) active: bool,
}

enum Flow {
    Next,
    Goto(Cursor),
    Delay(f64),
    Stop,
}

/// Mutable simulation state of one environment.
pub(crate) struct Core {
    pub(crate) events: EventSet<Pid>,
    rng: ChaCha8Rng,
    pub(crate) resources: Vec<Resource>,
    resource_index: FxHashMap<String, usize>,
    pub(crate) generators: Vec<Generator>,
    generator_index: FxHashMap<String, usize>,
    arrivals: FxHashMap<u64, Arrival>,
    next_arrival: u64,
    tasks: FxHashMap<u64, Task>,
    next_task: u64,
    globals: FxHashMap<String, f64>,
    signals: FxHashMap<String, BTreeSet<u64>>,
    pending_batches: FxHashMap<BatchKey, u64>,
    batch_count: u64,
    clone_groups: FxHashMap<u64, CloneGroup>,
    next_group: u64,
    round_robin: FxHashMap<NodeKey, usize>,
    pub(crate) monitor: Monitor,
    pub(crate) trace: Box<dyn TraceSink>,
    track_history: bool,
    executing: Option<u64>,
    scratch: Vec<f64>,
}

fn contains_rollback(t: &Trajectory) -> bool {
    t.activities().iter().any(|a| {
        matches!(a, Activity::Rollback { .. }) || a.subs().iter().any(|s| contains_rollback(s))
    })
}

fn invalid(activity: &'static str, message: impl Into<String>) -> SimError {
    SimError::InvalidParameter {
        activity,
        message: message.into(),
    }
}

impl Core {
    pub(crate) fn new(seed: u64, stream: u64, trace: Box<dyn TraceSink>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Core {
            events: EventSet::new(),
            rng,
            resources: Vec::new(),
            resource_index: FxHashMap::default(),
            generators: Vec::new(),
            generator_index: FxHashMap::default(),
            arrivals: FxHashMap::default(),
            next_arrival: 0,
            tasks: FxHashMap::default(),
            next_task: 0,
            globals: FxHashMap::default(),
            signals: FxHashMap::default(),
            pending_batches: FxHashMap::default(),
            batch_count: 0,
            clone_groups: FxHashMap::default(),
            next_group: 0,
            round_robin: FxHashMap::default(),
            monitor: Monitor::new(),
            trace,
            track_history: false,
            executing: None,
            scratch: Vec::new(),
        }
    }

    pub(crate) fn now(&self) -> f64 {
        self.events.now()
    }

    fn name_taken(&self, name: &str) -> bool {
        self.resource_index.contains_key(name) || self.generator_index.contains_key(name)
    }

    pub(crate) fn add_resource(&mut self, res: Resource) -> Result<usize, SimError> {
        if self.name_taken(res.name()) {
            return Err(SimError::DuplicateName(res.name().to_string()));
        }
        let idx = self.resources.len();
        self.resource_index.insert(res.name().to_string(), idx);
        self.resources.push(res);
        Ok(idx)
    }

    pub(crate) fn add_generator(&mut self, spec: &GeneratorSpec) -> Result<usize, SimError> {
        if self.name_taken(&spec.name) {
            return Err(SimError::DuplicateName(spec.name.clone()));
        }
        let idx = self.generators.len();
        let root = Arc::new(spec.trajectory.clone());
        self.track_history |= contains_rollback(&root);
        self.generators.push(Generator {
            name: spec.name.clone(),
            mon: spec.mon,
            prio: spec.prioritization,
            root,
            dist: Arc::new(spec.distribution.clone()),
            count: 0,
            calls: 0,
            active: true,
        });
        self.generator_index.insert(spec.name.clone(), idx);
        self.events
            .schedule(0.0, Pid::Generator(idx as u32), EventPriority::Generator)?;
        Ok(idx)
    }

    pub(crate) fn resource_id(&self, name: &str) -> Result<usize, SimError> {
        self.resource_index
            .get(name)
            .copied()
            .ok_or_else(|| SimError::UnknownResource(name.to_string()))
    }

    pub(crate) fn generator_id(&self, name: &str) -> Result<usize, SimError> {
        self.generator_index
            .get(name)
            .copied()
            .ok_or_else(|| SimError::UnknownGenerator(name.to_string()))
    }

    /// Display name of the process behind an event.
    pub(crate) fn process_name(&self, pid: Pid) -> String {
        match pid {
            Pid::Generator(g) => self.generators[g as usize].name.clone(),
            Pid::Arrival(a) => self
                .arrivals
                .get(&a)
                .map_or_else(String::new, |a| a.name.to_string()),
            Pid::Task(_) => "task".to_string(),
            Pid::Post(r) => self.resources[r as usize].name().to_string(),
        }
    }

    pub(crate) fn live_arrivals(&self) -> usize {
        self.arrivals.len()
    }

    pub(crate) fn global(&self, key: &str) -> Option<f64> {
        self.globals.get(key).copied()
    }

    pub(crate) fn set_global(&mut self, key: &str, value: f64, who: Option<u64>) {
        self.globals.insert(key.to_string(), value);
        let (name, mon) = match who.and_then(|id| self.arrivals.get(&id)) {
            Some(a) => (a.name.to_string(), a.mon),
            None => (String::new(), 2),
        };
        if mon >= 2 {
            self.monitor.record_attribute(self.now(), &name, key, value);
        }
    }

    // ----- event dispatch -----

    pub(crate) fn dispatch(&mut self, pid: Pid) -> Result<(), SimError> {
        match pid {
            Pid::Generator(g) => self.fire_generator(g as usize),
            Pid::Arrival(a) => self.resume_arrival(a),
            Pid::Task(t) => match self.tasks.remove(&t) {
                Some(task) => self.run_task(task),
                None => Ok(()),
            },
            Pid::Post(r) => self.serve_waiting(r as usize),
        }
    }

    fn eval<T: Clone>(&mut self, p: &Param<T>, arrival: Option<u64>) -> T {
        match p {
            Param::Const(v) => v.clone(),
            Param::Dyn(f) => f(&mut Ctx {
                core: self,
                arrival,
            }),
        }
    }

    fn fire_generator(&mut self, g: usize) -> Result<(), SimError> {
        if !self.generators[g].active {
            return Ok(());
        }
        let dist = Arc::clone(&self.generators[g].dist);
        let call = self.generators[g].calls;
        self.generators[g].calls += 1;
        let mut gaps = mem::take(&mut self.scratch);
        gaps.clear();
        dist.draw(
            call,
            &mut Ctx {
                core: self,
                arrival: None,
            },
            &mut gaps,
        );
        let mut t = self.now();
        let mut stopped = gaps.is_empty();
        for &d in &gaps {
            if d.is_nan() || d < 0.0 {
                stopped = true;
                break;
            }
            t += d;
            self.create_arrival(g, t)?;
        }
        self.scratch = gaps;
        if stopped {
            self.generators[g].active = false;
        } else {
            self.events
                .schedule_at(t, Pid::Generator(g as u32), EventPriority::Generator)?;
        }
        Ok(())
    }

    fn create_arrival(&mut self, g: usize, at: f64) -> Result<(), SimError> {
        let gen = &mut self.generators[g];
        let name: Arc<str> = format!("{}{}", gen.name, gen.count).into();
        gen.count += 1;
        let cursor = Cursor::root(Arc::clone(&gen.root));
        let prio = cursor.priority();
        let arrival = Arrival::new(name, gen.mon, at, gen.prio, cursor);
        let id = self.next_arrival;
        self.next_arrival += 1;
        self.arrivals.insert(id, arrival);
        self.events.schedule_at(at, Pid::Arrival(id), prio)?;
        Ok(())
    }

    pub(crate) fn activate(&mut self, g: usize) -> Result<(), SimError> {
        self.generators[g].active = true;
        self.events
            .schedule(0.0, Pid::Generator(g as u32), EventPriority::Generator)?;
        Ok(())
    }

    pub(crate) fn deactivate(&mut self, g: usize) {
        self.generators[g].active = false;
        self.events.unschedule(Pid::Generator(g as u32));
    }

    pub(crate) fn set_generator_trajectory(&mut self, g: usize, traj: Arc<Trajectory>) {
        self.track_history |= contains_rollback(&traj);
        self.generators[g].root = traj;
    }

    pub(crate) fn set_generator_distribution(&mut self, g: usize, dist: Distribution) {
        let gen = &mut self.generators[g];
        gen.dist = Arc::new(dist);
        gen.calls = 0;
    }

    // ----- tasks -----

    fn add_task(&mut self, delay: f64, prio: EventPriority, task: Task) -> Result<u64, SimError> {
        let id = self.next_task;
        self.next_task += 1;
        self.events.schedule(delay, Pid::Task(id), prio)?;
        self.tasks.insert(id, task);
        Ok(id)
    }

    fn cancel_task(&mut self, id: u64) {
        self.tasks.remove(&id);
        self.events.unschedule(Pid::Task(id));
    }

    pub(crate) fn schedule_custom(
        &mut self,
        delay: f64,
        prio: EventPriority,
        f: Box<dyn FnOnce(&mut Ctx<'_>) + Send>,
    ) -> Result<(), SimError> {
        self.add_task(delay, prio, Task::Custom(f)).map(|_| ())
    }

    pub(crate) fn schedule_change(
        &mut self,
        delay: f64,
        resource: usize,
        capacity: Option<Limit>,
        queue_size: Option<Limit>,
    ) -> Result<(), SimError> {
        if let Some(c) = capacity {
            self.add_task(
                delay,
                EventPriority::Manager,
                Task::Manage {
                    resource,
                    change: Change::Capacity(c),
                },
            )?;
        }
        if let Some(q) = queue_size {
            self.add_task(
                delay,
                EventPriority::Manager,
                Task::Manage {
                    resource,
                    change: Change::QueueSize(q),
                },
            )?;
        }
        Ok(())
    }

    fn run_task(&mut self, task: Task) -> Result<(), SimError> {
        match task {
            Task::Renege { arrival, out } => {
                if let Some(a) = self.arrivals.get_mut(&arrival) {
                    a.renege_task = None;
                }
                self.renege(arrival, out)
            }
            Task::BatchTimeout { batch } => {
                let Some(b) = self.arrivals.get_mut(&batch) else {
                    return Ok(());
                };
                b.batch_timer = None;
                if matches!(b.status, Status::Collecting) && !b.members.is_empty() {
                    self.trigger_batch(batch)?;
                }
                Ok(())
            }
            Task::Broadcast { signals } => self.broadcast(&signals),
            Task::Manage { resource, change } => match change {
                Change::Capacity(c) => self.apply_capacity(resource, c),
                Change::QueueSize(q) => self.apply_queue_size(resource, q),
            },
            Task::Custom(f) => {
                f(&mut Ctx {
                    core: self,
                    arrival: None,
                });
                Ok(())
            }
        }
    }

    // ----- arrival execution -----

    fn arr(&mut self, id: u64) -> &mut Arrival {
        self.arrivals.get_mut(&id).expect("live arrival")
    }

    fn resume_arrival(&mut self, id: u64) -> Result<(), SimError> {
        let now = self.now();
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return Ok(());
        };
        if let Status::Busy { since, .. } = arr.status {
            self.account(id, now - since);
        }
        self.arr(id).status = Status::Running;
        self.executing = Some(id);
        let out = self.advance(id);
        self.executing = None;
        out
    }

    /// Adds busy time to an arrival, the resources it holds and, for a
    /// batch, to its members.
    fn account(&mut self, id: u64, dt: f64) {
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return;
        };
        arr.activity += dt;
        for h in &mut arr.held {
            h.activity += dt;
        }
        if arr.is_batch {
            let members = arr.members.clone();
            for m in members {
                if let Some(a) = self.arrivals.get_mut(&m) {
                    a.activity += dt;
                }
            }
        }
    }

    fn advance(&mut self, id: u64) -> Result<(), SimError> {
        loop {
            let Some(arr) = self.arrivals.get_mut(&id) else {
                return Ok(());
            };
            let cursor = arr.cursor.clone();
            if cursor.idx >= cursor.frame.traj.len() {
                if cursor.frame.handler {
                    arr.handler = None;
                }
                match (&cursor.frame.parent, cursor.frame.cont) {
                    (Some(p), true) => {
                        arr.cursor = p.clone();
                        continue;
                    }
                    _ => {
                        let finished = !arr.reneged;
                        return self.depart(id, finished);
                    }
                }
            }
            if self.track_history {
                arr.history.push(cursor.clone());
                if arr.history.len() > HISTORY_CAP {
                    return Err(SimError::HistoryOverflow(arr.name.to_string()));
                }
            }
            let act = &cursor.frame.traj.activities()[cursor.idx];
            let flow = self.exec(id, &cursor, act).map_err(|e| self.context(id, act, e))?;
            match flow {
                Flow::Next => {
                    if let Some(arr) = self.arrivals.get_mut(&id) {
                        arr.cursor = cursor.after();
                    }
                }
                Flow::Goto(c) => {
                    if let Some(arr) = self.arrivals.get_mut(&id) {
                        arr.cursor = c;
                    }
                }
                Flow::Delay(d) => {
                    let now = self.now();
                    let arr = self.arr(id);
                    arr.cursor = cursor.after();
                    let prio = arr.cursor.priority();
                    arr.status = Status::Busy {
                        since: now,
                        until: now + d,
                        timeout: cursor,
                    };
                    self.events.schedule(d, Pid::Arrival(id), prio)?;
                    return Ok(());
                }
                Flow::Stop => return Ok(()),
            }
        }
    }

    fn context(&self, id: u64, act: &Activity, e: SimError) -> SimError {
        match e {
            SimError::NegativeTimeout { .. }
            | SimError::ReleaseExceedsHeld { .. }
            | SimError::NothingSelected { .. }
            | SimError::BranchOutOfRange { .. }
            | SimError::HistoryOverflow(_)
            | SimError::InArrival { .. } => e,
            other => SimError::InArrival {
                arrival: self
                    .arrivals
                    .get(&id)
                    .map_or_else(String::new, |a| a.name.to_string()),
                activity: act.tag(),
                source: Box::new(other),
            },
        }
    }

    fn exec(&mut self, id: u64, cursor: &Cursor, act: &Activity) -> Result<Flow, SimError> {
        let me = Some(id);
        match act {
            Activity::Log { message } => {
                let msg = self.eval(message, me);
                let name = Arc::clone(&self.arr(id).name);
                let now = self.now();
                self.trace.log(now, &name, &msg);
                Ok(Flow::Next)
            }
            Activity::Timeout { delay } => {
                let d = self.eval(delay, me);
                if d.is_nan() || d < 0.0 {
                    return Err(SimError::NegativeTimeout {
                        arrival: self.arr(id).name.to_string(),
                        activity: act.tag(),
                        delay: d,
                    });
                }
                Ok(Flow::Delay(d))
            }
            Activity::SetAttribute { key, value, global } => {
                let k = self.eval(key, me);
                let v = self.eval(value, me);
                if *global {
                    self.set_global(&k, v, me);
                } else {
                    let now = self.now();
                    let arr = self.arr(id);
                    arr.attrs.insert(k.clone(), v);
                    if arr.mon >= 2 {
                        let name = Arc::clone(&arr.name);
                        self.monitor.record_attribute(now, &name, &k, v);
                    }
                }
                Ok(Flow::Next)
            }
            Activity::SetPrioritization { values } => {
                let p = self.eval(values, me);
                let p = Prioritization::new(p.priority, p.preemptible, p.restart)?;
                self.arr(id).prio = p;
                Ok(Flow::Next)
            }
            Activity::Seize {
                resource,
                amount,
                post_seize,
                reject,
                continue_post,
                continue_reject,
            } => {
                let outcome = match self.arr(id).wake.take() {
                    Some(w) => w,
                    None => {
                        let res = self.resolve(resource, id)?;
                        let amount = self.eval(amount, me);
                        if amount == 0 {
                            return Err(invalid(act.tag(), "amount must be positive"));
                        }
                        self.request(id, res, amount)?
                    }
                };
                Ok(match outcome {
                    Wake::Served => match post_seize {
                        Some(s) => Flow::Goto(cursor.enter(s, *continue_post)),
                        None => Flow::Next,
                    },
                    Wake::Enqueued => Flow::Stop,
                    Wake::Rejected => match reject {
                        Some(s) => Flow::Goto(cursor.enter(s, *continue_reject)),
                        None => {
                            self.depart(id, false)?;
                            Flow::Stop
                        }
                    },
                })
            }
            Activity::Release { resource, amount } => {
                let res = self.resolve(resource, id)?;
                let held = self.resources[res].held(id);
                let amount = match amount {
                    Some(p) => self.eval(p, me),
                    None => held,
                };
                if amount > held {
                    return Err(SimError::ReleaseExceedsHeld {
                        arrival: self.arr(id).name.to_string(),
                        resource: self.resources[res].name().to_string(),
                        amount,
                        held,
                    });
                }
                self.release_units(id, res, amount, true)?;
                Ok(Flow::Next)
            }
            Activity::Select {
                resources,
                policy,
                id: slot,
            } => {
                let names = self.eval(resources, me);
                if names.is_empty() {
                    return Err(invalid(act.tag(), "no candidate resources"));
                }
                let res = self.pick(id, &names, policy, cursor.node())?;
                self.arr(id).selected.insert(*slot, res);
                Ok(Flow::Next)
            }
            Activity::SetCapacity { resource, value } => {
                let res = self.resolve(resource, id)?;
                let v = self.eval(value, me);
                self.apply_capacity(res, Limit::from_f64(v, "capacity")?)?;
                Ok(Flow::Next)
            }
            Activity::SetQueueSize { resource, value } => {
                let res = self.resolve(resource, id)?;
                let v = self.eval(value, me);
                self.apply_queue_size(res, Limit::from_f64(v, "queue_size")?)?;
                Ok(Flow::Next)
            }
            Activity::Activate { generator } => {
                let name = self.eval(generator, me);
                let g = self.generator_id(&name)?;
                self.activate(g)?;
                Ok(Flow::Next)
            }
            Activity::Deactivate { generator } => {
                let name = self.eval(generator, me);
                let g = self.generator_id(&name)?;
                self.deactivate(g);
                Ok(Flow::Next)
            }
            Activity::SetTrajectory {
                generator,
                trajectory,
            } => {
                let name = self.eval(generator, me);
                let g = self.generator_id(&name)?;
                self.set_generator_trajectory(g, Arc::clone(trajectory));
                Ok(Flow::Next)
            }
            Activity::SetDistribution {
                generator,
                distribution,
            } => {
                let name = self.eval(generator, me);
                let g = self.generator_id(&name)?;
                self.set_generator_distribution(g, distribution.clone());
                Ok(Flow::Next)
            }
            Activity::Branch {
                option,
                continues,
                subs,
            } => {
                let opt = self.eval(option, me);
                if opt == 0 {
                    return Ok(Flow::Next);
                }
                if opt < 0 || opt as usize > subs.len() {
                    return Err(SimError::BranchOutOfRange {
                        arrival: self.arr(id).name.to_string(),
                        activity: act.tag(),
                        option: opt,
                        max: subs.len(),
                    });
                }
                let i = opt as usize - 1;
                Ok(Flow::Goto(cursor.enter(&subs[i], continues[i])))
            }
            Activity::Clone { n, subs } => {
                let n = self.eval(n, me);
                if n < 1 {
                    return Err(invalid(act.tag(), format!("n must be at least 1, got {n}")));
                }
                self.clone_arrival(id, cursor, n as u64, subs)
            }
            Activity::Synchronize { wait } => self.synchronize(id, cursor, *wait),
            Activity::Rollback {
                amount,
                times,
                check,
            } => {
                let go = match check {
                    Some(c) => self.eval(c, me),
                    None => {
                        let cnt = self.arr(id).rollbacks.entry(cursor.node()).or_insert(0);
                        match times {
                            None => true,
                            Some(t) if *cnt < *t => {
                                *cnt += 1;
                                true
                            }
                            Some(_) => {
                                *cnt = 0;
                                false
                            }
                        }
                    }
                };
                if !go {
                    return Ok(Flow::Next);
                }
                let amount = self.eval(amount, me).max(0) as usize;
                let arr = self.arr(id);
                if arr.history.is_empty() {
                    return Ok(Flow::Next);
                }
                let target = (arr.history.len() - 1).saturating_sub(amount);
                let c = arr.history[target].clone();
                arr.history.truncate(target);
                Ok(Flow::Goto(c))
            }
            Activity::Batch(spec) => self.join_batch(id, cursor, spec),
            Activity::Separate => self.separate(id, cursor),
            Activity::Send { signals, delay } => {
                let signals = self.eval(signals, me);
                let delay = self.eval(delay, me);
                if delay.is_nan() || delay < 0.0 {
                    return Err(SimError::NegativeTimeout {
                        arrival: self.arr(id).name.to_string(),
                        activity: act.tag(),
                        delay,
                    });
                }
                if delay == 0.0 {
                    self.broadcast(&signals)?;
                } else {
                    self.add_task(delay, EventPriority::General, Task::Broadcast { signals })?;
                }
                Ok(Flow::Next)
            }
            Activity::Trap {
                signals,
                handler,
                interruptible,
            } => {
                let signals = self.eval(signals, me);
                for s in signals {
                    self.signals.entry(s.clone()).or_default().insert(id);
                    self.arr(id).subs.insert(
                        s,
                        Sub::Trap {
                            handler: handler.clone(),
                            interruptible: *interruptible,
                        },
                    );
                }
                Ok(Flow::Next)
            }
            Activity::Untrap { signals } => {
                let signals = self.eval(signals, me);
                for s in signals {
                    let arr = self.arr(id);
                    if matches!(arr.subs.get(&s), Some(Sub::Trap { .. })) {
                        arr.subs.remove(&s);
                        if let Some(set) = self.signals.get_mut(&s) {
                            set.remove(&id);
                        }
                    }
                }
                Ok(Flow::Next)
            }
            Activity::Wait => {
                let arr = self.arr(id);
                arr.cursor = cursor.after();
                arr.status = Status::Waiting;
                Ok(Flow::Stop)
            }
            Activity::Leave { prob } => {
                let p = self.eval(prob, me);
                let u: f64 = self.rng.random();
                if u < p {
                    self.depart(id, false)?;
                    Ok(Flow::Stop)
                } else {
                    Ok(Flow::Next)
                }
            }
            Activity::RenegeIn { t, out } => {
                let t = self.eval(t, me);
                if t.is_nan() || t < 0.0 {
                    return Err(SimError::NegativeTimeout {
                        arrival: self.arr(id).name.to_string(),
                        activity: act.tag(),
                        delay: t,
                    });
                }
                if let Some(old) = self.arr(id).renege_task.take() {
                    self.cancel_task(old);
                }
                let task = self.add_task(
                    t,
                    EventPriority::Min,
                    Task::Renege {
                        arrival: id,
                        out: out.clone(),
                    },
                )?;
                self.arr(id).renege_task = Some(task);
                Ok(Flow::Next)
            }
            Activity::RenegeIf { signal, out } => {
                let s = self.eval(signal, me);
                self.signals.entry(s.clone()).or_default().insert(id);
                self.arr(id).subs.insert(s, Sub::Renege { out: out.clone() });
                Ok(Flow::Next)
            }
            Activity::RenegeAbort => {
                if let Some(t) = self.arr(id).renege_task.take() {
                    self.cancel_task(t);
                }
                let arr = self.arrivals.get_mut(&id).expect("live arrival");
                let gone: Vec<String> = arr
                    .subs
                    .iter()
                    .filter(|(_, s)| matches!(s, Sub::Renege { .. }))
                    .map(|(k, _)| k.clone())
                    .collect();
                for s in gone {
                    arr.subs.remove(&s);
                    if let Some(set) = self.signals.get_mut(&s) {
                        set.remove(&id);
                    }
                }
                Ok(Flow::Next)
            }
        }
    }

    // ----- resources -----

    fn resolve(&mut self, r: &ResourceRef, id: u64) -> Result<usize, SimError> {
        match r {
            ResourceRef::Named(n) => self.resource_id(n),
            ResourceRef::Selected(slot) => {
                let arr = self.arr(id);
                arr.selected
                    .get(slot)
                    .copied()
                    .ok_or_else(|| SimError::NothingSelected {
                        arrival: arr.name.to_string(),
                        id: *slot,
                    })
            }
        }
    }

    fn pick(
        &mut self,
        id: u64,
        names: &[String],
        policy: &SelectPolicy,
        node: NodeKey,
    ) -> Result<usize, SimError> {
        let idxs = names
            .iter()
            .map(|n| self.resource_id(n))
            .collect::<Result<Vec<_>, _>>()?;
        let k = match policy {
            SelectPolicy::ShortestQueue => {
                let mut best = 0;
                for (i, &r) in idxs.iter().enumerate() {
                    if self.resources[r].queue_count() < self.resources[idxs[best]].queue_count() {
                        best = i;
                    }
                }
                best
            }
            SelectPolicy::RoundRobin => {
                let c = self.round_robin.entry(node).or_insert(0);
                let k = *c % idxs.len();
                *c += 1;
                k
            }
            SelectPolicy::FirstAvailable => idxs
                .iter()
                .position(|&r| self.resources[r].has_room_in_server())
                .or_else(|| {
                    idxs.iter()
                        .position(|&r| self.resources[r].has_room_in_queue())
                })
                .unwrap_or(0),
            SelectPolicy::Random => self.rng.random_range(0..idxs.len()),
            SelectPolicy::Custom(f) => {
                let k = f(
                    &mut Ctx {
                        core: self,
                        arrival: Some(id),
                    },
                    names,
                );
                if k >= idxs.len() {
                    return Err(invalid(
                        "Select",
                        format!("policy returned {k} for {} candidates", idxs.len()),
                    ));
                }
                k
            }
        };
        Ok(idxs[k])
    }

    fn record_resource(&mut self, r: usize) {
        let res = &self.resources[r];
        if res.spec.monitored {
            self.monitor.record_resource(
                res.name(),
                self.events.now(),
                res.server_count(),
                res.queue_count(),
                res.capacity(),
                res.queue_size(),
            );
        }
    }

    fn leave_row(&mut self, id: u64, held: Held, finished: bool) {
        let now = self.now();
        let res = &self.resources[held.res];
        if !res.spec.monitored {
            return;
        }
        if let Some(arr) = self.arrivals.get(&id) {
            if arr.mon >= 1 {
                self.monitor.record_leave_resource(
                    &arr.name,
                    res.name(),
                    held.start,
                    now,
                    held.activity,
                    finished,
                );
            }
        }
    }

    fn take_held(&mut self, id: u64, r: usize) -> Option<Held> {
        let arr = self.arrivals.get_mut(&id)?;
        let pos = arr.held.iter().position(|h| h.res == r)?;
        Some(arr.held.remove(pos))
    }

    fn add_held(&mut self, id: u64, r: usize) {
        let now = self.now();
        let arr = self.arr(id);
        if !arr.held.iter().any(|h| h.res == r) {
            arr.held.push(Held {
                res: r,
                start: now,
                activity: 0.0,
            });
        }
    }

    fn request(&mut self, id: u64, r: usize, amount: u64) -> Result<Wake, SimError> {
        let prio = self.arr(id).prio;
        match self.resources[r].request(id, amount, prio.priority, prio.preemptible) {
            Admission::Served => {
                self.add_held(id, r);
                self.record_resource(r);
                Ok(Wake::Served)
            }
            Admission::Preempting(victims) => {
                self.add_held(id, r);
                for v in victims {
                    self.preempt(v)?;
                }
                self.record_resource(r);
                Ok(Wake::Served)
            }
            Admission::Enqueued(dropped) => {
                self.add_held(id, r);
                self.arr(id).status = Status::Queued;
                self.record_resource(r);
                for d in dropped {
                    self.drop_from_queue(d, r)?;
                }
                Ok(Wake::Enqueued)
            }
            Admission::Rejected => {
                let now = self.now();
                self.leave_row(
                    id,
                    Held {
                        res: r,
                        start: now,
                        activity: 0.0,
                    },
                    false,
                );
                Ok(Wake::Rejected)
            }
        }
    }

    /// A queued arrival lost its place and continues through its reject path.
    fn drop_from_queue(&mut self, id: u64, r: usize) -> Result<(), SimError> {
        if let Some(h) = self.take_held(id, r) {
            self.leave_row(id, h, false);
        }
        let arr = self.arr(id);
        arr.wake = Some(Wake::Rejected);
        arr.status = Status::Running;
        self.events
            .schedule(0.0, Pid::Arrival(id), EventPriority::General)?;
        Ok(())
    }

    /// Suspends an arrival that lost its server units.
    fn preempt(&mut self, id: u64) -> Result<(), SimError> {
        let now = self.now();
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return Ok(());
        };
        arr.suspensions += 1;
        if arr.suspensions > 1 {
            return Ok(());
        }
        match arr.status.clone() {
            Status::Busy {
                since,
                until,
                timeout,
            } => {
                self.account(id, now - since);
                self.events.unschedule(Pid::Arrival(id));
                let arr = self.arr(id);
                arr.status = Status::Suspended {
                    remaining: until - now,
                    timeout: arr.prio.restart.then_some(timeout),
                };
            }
            Status::Running | Status::Waiting if self.events.is_pending(Pid::Arrival(id)) => {
                self.events.unschedule(Pid::Arrival(id));
                self.arr(id).status = Status::Suspended {
                    remaining: 0.0,
                    timeout: None,
                };
            }
            _ => {}
        }
        Ok(())
    }

    fn resume(&mut self, id: u64) -> Result<(), SimError> {
        let now = self.now();
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return Ok(());
        };
        arr.suspensions = arr.suspensions.saturating_sub(1);
        if arr.suspensions > 0 {
            return Ok(());
        }
        if let Status::Suspended { remaining, timeout } = arr.status.clone() {
            match timeout {
                Some(c) => {
                    let prio = c.priority();
                    arr.cursor = c;
                    arr.status = Status::Running;
                    self.events.schedule(0.0, Pid::Arrival(id), prio)?;
                }
                None => {
                    let prio = arr.cursor.priority();
                    let timeout = arr.cursor.clone();
                    arr.status = Status::Busy {
                        since: now,
                        until: now + remaining,
                        timeout,
                    };
                    self.events.schedule(remaining, Pid::Arrival(id), prio)?;
                }
            }
        }
        Ok(())
    }

    fn release_units(&mut self, id: u64, r: usize, amount: u64, finished: bool) -> Result<(), SimError> {
        let left = self.resources[r].release(id, amount);
        if left == 0 && !self.resources[r].is_queued(id) && !self.resources[r].is_preempted(id) {
            if let Some(h) = self.take_held(id, r) {
                self.leave_row(id, h, finished);
            }
        }
        self.record_resource(r);
        self.post_release(r)
    }

    fn post_release(&mut self, r: usize) -> Result<(), SimError> {
        if self.resources[r].queue_count() > 0 {
            self.events
                .schedule(0.0, Pid::Post(r as u32), EventPriority::ReleasePost)?;
        }
        Ok(())
    }

    fn serve_waiting(&mut self, r: usize) -> Result<(), SimError> {
        let served = self.resources[r].serve_waiting();
        for (a, was_preempted) in served {
            self.record_resource(r);
            if was_preempted {
                self.resume(a)?;
            } else if let Some(arr) = self.arrivals.get_mut(&a) {
                arr.wake = Some(Wake::Served);
                arr.status = Status::Running;
                let prio = arr.cursor.priority();
                self.events.schedule(0.0, Pid::Arrival(a), prio)?;
            }
        }
        Ok(())
    }

    pub(crate) fn apply_capacity(&mut self, r: usize, cap: Limit) -> Result<(), SimError> {
        let victims = self.resources[r].set_capacity(cap);
        for v in victims {
            self.preempt(v)?;
        }
        self.record_resource(r);
        self.serve_waiting(r)
    }

    pub(crate) fn apply_queue_size(&mut self, r: usize, size: Limit) -> Result<(), SimError> {
        let dropped = self.resources[r].set_queue_size(size);
        self.record_resource(r);
        for d in dropped {
            self.drop_from_queue(d, r)?;
        }
        Ok(())
    }

    // ----- clones -----

    fn clone_arrival(
        &mut self,
        id: u64,
        cursor: &Cursor,
        n: u64,
        subs: &[Arc<Trajectory>],
    ) -> Result<Flow, SimError> {
        let path = |i: usize| match subs.get(i) {
            Some(s) => cursor.enter(s, true),
            None => cursor.after(),
        };
        if n > 1 {
            let group = match self.arr(id).clone_group {
                Some(g) => g,
                None => {
                    let g = self.next_group;
                    self.next_group += 1;
                    self.clone_groups.insert(
                        g,
                        CloneGroup {
                            live: 1,
                            passed: BTreeSet::new(),
                        },
                    );
                    self.arr(id).clone_group = Some(g);
                    g
                }
            };
            if let Some(g) = self.clone_groups.get_mut(&group) {
                g.live += n - 1;
            }
            for i in 1..n as usize {
                let src = self.arr(id);
                let mut copy = Arrival::new(
                    Arc::clone(&src.name),
                    src.mon,
                    src.start,
                    src.prio,
                    path(i),
                );
                copy.activity = src.activity;
                copy.attrs = src.attrs.clone();
                copy.selected = src.selected.clone();
                copy.history = src.history.clone();
                copy.rollbacks = src.rollbacks.clone();
                copy.clone_group = Some(group);
                let prio = copy.cursor.priority();
                let cid = self.next_arrival;
                self.next_arrival += 1;
                self.arrivals.insert(cid, copy);
                self.events.schedule(0.0, Pid::Arrival(cid), prio)?;
            }
        }
        Ok(Flow::Goto(path(0)))
    }

    fn synchronize(&mut self, id: u64, cursor: &Cursor, wait: bool) -> Result<Flow, SimError> {
        let Some(g) = self.arr(id).clone_group else {
            return Ok(Flow::Next);
        };
        let Some(group) = self.clone_groups.get_mut(&g) else {
            return Ok(Flow::Next);
        };
        if wait {
            if group.live <= 1 {
                self.clone_groups.remove(&g);
                self.arr(id).clone_group = None;
                return Ok(Flow::Next);
            }
        } else if group.passed.insert(cursor.node()) {
            return Ok(Flow::Next);
        }
        self.discard(id)?;
        Ok(Flow::Stop)
    }

    fn leave_group(&mut self, id: u64) {
        let Some(g) = self.arrivals.get_mut(&id).and_then(|a| a.clone_group.take()) else {
            return;
        };
        if let Some(group) = self.clone_groups.get_mut(&g) {
            group.live = group.live.saturating_sub(1);
            if group.live == 0 {
                self.clone_groups.remove(&g);
            }
        }
    }

    // ----- batches -----

    fn join_batch(&mut self, id: u64, cursor: &Cursor, spec: &BatchSpec) -> Result<Flow, SimError> {
        if let Some(rule) = &spec.rule {
            if !self.eval(rule, Some(id)) {
                return Ok(Flow::Next);
            }
        }
        let key = match &spec.name {
            Some(n) => BatchKey::Named(n.clone()),
            None => BatchKey::Node(cursor.node()),
        };
        let batch = match self.pending_batches.get(&key) {
            Some(&b) => b,
            None => {
                let now = self.now();
                let name: Arc<str> = format!("batch_{}", self.batch_count).into();
                let src = self.arr(id);
                let mut b = Arrival::new(name, src.mon, now, src.prio, cursor.after());
                self.batch_count += 1;
                b.is_batch = true;
                b.permanent = spec.permanent;
                b.status = Status::Collecting;
                b.batch_key = Some(key.clone());
                let bid = self.next_arrival;
                self.next_arrival += 1;
                self.arrivals.insert(bid, b);
                let timeout = self.eval(&spec.timeout, Some(id));
                if timeout > 0.0 {
                    let t = self.add_task(timeout, EventPriority::Min, Task::BatchTimeout { batch: bid })?;
                    self.arr(bid).batch_timer = Some(t);
                }
                self.pending_batches.insert(key, bid);
                bid
            }
        };
        let arr = self.arr(id);
        arr.status = Status::Batched;
        arr.batch = Some(batch);
        let b = self.arr(batch);
        b.members.push(id);
        if b.members.len() as u64 >= spec.n {
            self.trigger_batch(batch)?;
        }
        Ok(Flow::Stop)
    }

    fn trigger_batch(&mut self, batch: u64) -> Result<(), SimError> {
        let b = self.arr(batch);
        let key = b.batch_key.take();
        let timer = b.batch_timer.take();
        b.status = Status::Running;
        let prio = b.cursor.priority();
        if let Some(k) = key {
            if self.pending_batches.get(&k) == Some(&batch) {
                self.pending_batches.remove(&k);
            }
        }
        if let Some(t) = timer {
            self.cancel_task(t);
        }
        self.events.schedule(0.0, Pid::Arrival(batch), prio)?;
        Ok(())
    }

    fn separate(&mut self, id: u64, cursor: &Cursor) -> Result<Flow, SimError> {
        let arr = self.arr(id);
        if !arr.is_batch || arr.permanent {
            return Ok(Flow::Next);
        }
        let members = mem::take(&mut arr.members);
        let next = cursor.after();
        for m in members {
            if let Some(a) = self.arrivals.get_mut(&m) {
                a.batch = None;
                a.status = Status::Running;
                a.cursor = next.clone();
                a.history.clear();
                let prio = next.priority();
                self.events.schedule(0.0, Pid::Arrival(m), prio)?;
            }
        }
        self.discard(id)?;
        Ok(Flow::Stop)
    }

    /// Removes a member from the batch it is waiting in or travelling with.
    fn leave_batch(&mut self, id: u64) -> Result<(), SimError> {
        let Some(b) = self.arrivals.get_mut(&id).and_then(|a| a.batch.take()) else {
            return Ok(());
        };
        let Some(batch) = self.arrivals.get_mut(&b) else {
            return Ok(());
        };
        batch.members.retain(|&m| m != id);
        if batch.members.is_empty() {
            self.discard(b)?;
        }
        Ok(())
    }

    // ----- signals and reneging -----

    pub(crate) fn broadcast(&mut self, signals: &[String]) -> Result<(), SimError> {
        let mut targets: Vec<(u64, String)> = Vec::new();
        for s in signals {
            if let Some(set) = self.signals.get(s) {
                for &id in set {
                    if !targets.iter().any(|(t, _)| *t == id) {
                        targets.push((id, s.clone()));
                    }
                }
            }
        }
        targets.sort_by_key(|(id, _)| *id);
        for (id, s) in targets {
            self.deliver(id, &s)?;
        }
        Ok(())
    }

    fn deliver(&mut self, id: u64, signal: &str) -> Result<(), SimError> {
        let Some(arr) = self.arrivals.get(&id) else {
            return Ok(());
        };
        let Some(sub) = arr.subs.get(signal).cloned() else {
            return Ok(());
        };
        match sub {
            Sub::Renege { out } => {
                if self.executing == Some(id) {
                    self.add_task(0.0, EventPriority::General, Task::Renege { arrival: id, out })?;
                    Ok(())
                } else {
                    self.renege(id, out)
                }
            }
            Sub::Trap {
                handler,
                interruptible,
            } => {
                if self.executing == Some(id) {
                    return Ok(());
                }
                match arr.status {
                    Status::Queued
                    | Status::Batched
                    | Status::Collecting
                    | Status::Suspended { .. } => return Ok(()),
                    Status::Running if !self.events.is_pending(Pid::Arrival(id)) => return Ok(()),
                    _ => {}
                }
                if arr.handler.as_ref().is_some_and(|h| !h.interruptible) {
                    return Ok(());
                }
                if let Status::Busy { since, .. } = arr.status {
                    let now = self.now();
                    self.account(id, now - since);
                }
                self.events.unschedule(Pid::Arrival(id));
                let arr = self.arr(id);
                // Interrupting a handler resumes where the first signal struck.
                let mut cont = arr.cursor.clone();
                if arr.handler.is_some() {
                    let mut c = arr.cursor.clone();
                    loop {
                        if c.frame.handler {
                            if let Some(p) = &c.frame.parent {
                                cont = p.clone();
                            }
                            break;
                        }
                        match &c.frame.parent {
                            Some(p) => c = p.clone(),
                            None => break,
                        }
                    }
                }
                arr.status = Status::Running;
                match handler {
                    Some(h) => {
                        arr.cursor = Cursor {
                            frame: Arc::new(Frame {
                                traj: h,
                                parent: Some(cont),
                                cont: true,
                                handler: true,
                            }),
                            idx: 0,
                        };
                        arr.handler = Some(HandlerState { interruptible });
                    }
                    None => {
                        arr.cursor = cont;
                        arr.handler = None;
                    }
                }
                let prio = arr.cursor.priority();
                self.events.schedule(0.0, Pid::Arrival(id), prio)?;
                Ok(())
            }
        }
    }

    fn renege(&mut self, id: u64, out: Option<Arc<Trajectory>>) -> Result<(), SimError> {
        let now = self.now();
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return Ok(());
        };
        if arr.is_batch {
            return Ok(());
        }
        if let Status::Busy { since, .. } = arr.status {
            self.account(id, now - since);
        }
        self.events.unschedule(Pid::Arrival(id));
        self.leave_batch(id)?;
        self.leave_waiting_lines(id);
        let arr = self.arr(id);
        if let Some(t) = arr.renege_task.take() {
            self.cancel_task(t);
        }
        self.unsubscribe(id);
        let arr = self.arr(id);
        arr.reneged = true;
        arr.wake = None;
        arr.handler = None;
        arr.suspensions = 0;
        match out {
            Some(o) => {
                arr.cursor = Cursor::root(o);
                arr.status = Status::Running;
                let prio = arr.cursor.priority();
                self.events.schedule(0.0, Pid::Arrival(id), prio)?;
                Ok(())
            }
            None => self.depart(id, false),
        }
    }

    /// Takes an arrival out of every main and preempted queue it sits in.
    fn leave_waiting_lines(&mut self, id: u64) {
        let Some(arr) = self.arrivals.get(&id) else {
            return;
        };
        let held: Vec<usize> = arr.held.iter().map(|h| h.res).collect();
        for r in held {
            let queued = self.resources[r].remove_queued(id).is_some();
            let preempted = self.resources[r].remove_preempted(id).is_some();
            if queued || preempted {
                if !self.resources[r].in_service(id) {
                    if let Some(h) = self.take_held(id, r) {
                        self.leave_row(id, h, false);
                    }
                }
                self.record_resource(r);
            }
        }
    }

    fn unsubscribe(&mut self, id: u64) {
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return;
        };
        for (s, _) in arr.subs.drain() {
            if let Some(set) = self.signals.get_mut(&s) {
                set.remove(&id);
            }
        }
    }

    // ----- departure -----

    /// Releases everything the arrival holds and drops its bookkeeping.
    fn cleanup(&mut self, id: u64, finished: bool) -> Result<(), SimError> {
        self.events.unschedule(Pid::Arrival(id));
        let Some(arr) = self.arrivals.get_mut(&id) else {
            return Ok(());
        };
        let timers = [arr.renege_task.take(), arr.batch_timer.take()];
        if let Some(k) = arr.batch_key.take() {
            if self.pending_batches.get(&k) == Some(&id) {
                self.pending_batches.remove(&k);
            }
        }
        for t in timers.into_iter().flatten() {
            self.cancel_task(t);
        }
        self.unsubscribe(id);
        self.leave_group(id);
        self.leave_waiting_lines(id);
        let held = mem::take(&mut self.arr(id).held);
        for h in held {
            let amount = self.resources[h.res].held(id);
            if amount > 0 {
                self.resources[h.res].release(id, amount);
                self.record_resource(h.res);
                self.post_release(h.res)?;
            }
            self.leave_row(id, h, finished);
        }
        Ok(())
    }

    fn depart(&mut self, id: u64, finished: bool) -> Result<(), SimError> {
        self.cleanup(id, finished)?;
        let Some(arr) = self.arrivals.remove(&id) else {
            return Ok(());
        };
        if arr.is_batch {
            for m in arr.members {
                if let Some(a) = self.arrivals.get_mut(&m) {
                    a.batch = None;
                }
                self.depart(m, finished)?;
            }
        } else if arr.mon >= 1 {
            let now = self.now();
            self.monitor
                .record_departure(&arr.name, arr.start, now, arr.activity, finished);
        }
        Ok(())
    }

    /// Removes an arrival without a monitoring row.
    fn discard(&mut self, id: u64) -> Result<(), SimError> {
        self.cleanup(id, false)?;
        self.arrivals.remove(&id);
        Ok(())
    }
}

/// View of the simulation handed to dynamic parameters, custom
/// distributions, selection policies and scheduled tasks.
pub struct Ctx<'a> {
    pub(crate) core: &'a mut Core,
    pub(crate) arrival: Option<u64>,
}

impl Ctx<'_> {
    pub fn now(&self) -> f64 {
        self.core.now()
    }

    /// Name of the arrival being processed.
    pub fn name(&self) -> Option<&str> {
        let id = self.arrival?;
        self.core.arrivals.get(&id).map(|a| &*a.name)
    }

    pub fn attribute(&self, key: &str) -> Option<f64> {
        let id = self.arrival?;
        self.core.arrivals.get(&id)?.attrs.get(key).copied()
    }

    /// The arrival's attribute, `NaN` when it is unset.
    pub fn get_attribute(&self, key: &str) -> f64 {
        self.attribute(key).unwrap_or(f64::NAN)
    }

    /// A global attribute, `NaN` when it is unset.
    pub fn get_global(&self, key: &str) -> f64 {
        self.core.global(key).unwrap_or(f64::NAN)
    }

    pub fn set_global(&mut self, key: &str, value: f64) {
        let who = self.arrival;
        self.core.set_global(key, value, who);
    }

    pub fn prioritization(&self) -> Option<Prioritization> {
        let id = self.arrival?;
        self.core.arrivals.get(&id).map(|a| a.prio)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.core.rng
    }

    pub fn runif(&mut self) -> f64 {
        self.core.rng.random()
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        sample_exp(&mut self.core.rng, rate)
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        sample_unif(&mut self.core.rng, a, b)
    }

    fn res(&self, name: &str) -> Result<&Resource, SimError> {
        Ok(&self.core.resources[self.core.resource_id(name)?])
    }

    pub fn server_count(&self, resource: &str) -> Result<u64, SimError> {
        self.res(resource).map(Resource::server_count)
    }

    pub fn queue_count(&self, resource: &str) -> Result<u64, SimError> {
        self.res(resource).map(Resource::queue_count)
    }

    pub fn capacity(&self, resource: &str) -> Result<Limit, SimError> {
        self.res(resource).map(Resource::capacity)
    }

    pub fn queue_size(&self, resource: &str) -> Result<Limit, SimError> {
        self.res(resource).map(Resource::queue_size)
    }

    pub fn n_generated(&self, generator: &str) -> Result<u64, SimError> {
        Ok(self.core.generators[self.core.generator_id(generator)?].count)
    }

    /// Resource chosen by this arrival's `select` under `id`.
    pub fn selected(&self, id: usize) -> Option<&str> {
        let a = self.core.arrivals.get(&self.arrival?)?;
        a.selected.get(&id).map(|&r| self.core.resources[r].name())
    }

    pub fn set_capacity(&mut self, resource: &str, value: Limit) -> Result<(), SimError> {
        let r = self.core.resource_id(resource)?;
        self.core.apply_capacity(r, value)
    }

    pub fn set_queue_size(&mut self, resource: &str, value: Limit) -> Result<(), SimError> {
        let r = self.core.resource_id(resource)?;
        self.core.apply_queue_size(r, value)
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
}
