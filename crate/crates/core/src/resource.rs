//! Passive entities: a capacity-limited server in front of a size-limited
//! priority queue, with optional preemption.
//!
//! This module only does the bookkeeping. Rescheduling, rejection paths and
//! monitoring are driven by the simulator from the returned outcomes.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::SimError;

/// A capacity or queue size: finite or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Finite(u64),
    Infinite,
}

impl Limit {
    pub fn from_f64(v: f64, what: &'static str) -> Result<Limit, SimError> {
        if v.is_nan() || v < 0.0 {
            Err(SimError::NegativeLimit { what, value: v })
        } else if v.is_infinite() {
            Ok(Limit::Infinite)
        } else {
            Ok(Limit::Finite(v.round() as u64))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Limit::Finite(v) => v as f64,
            Limit::Infinite => f64::INFINITY,
        }
    }

    /// `used + extra <= self`
    pub fn admits(self, used: u64, extra: u64) -> bool {
        match self {
            Limit::Finite(cap) => used.saturating_add(extra) <= cap,
            Limit::Infinite => true,
        }
    }

    /// Sum with infinity absorbing.
    pub fn plus(self, other: Limit) -> Limit {
        match (self, other) {
            (Limit::Finite(a), Limit::Finite(b)) => Limit::Finite(a + b),
            _ => Limit::Infinite,
        }
    }
}

impl From<u64> for Limit {
    fn from(v: u64) -> Self {
        Limit::Finite(v)
    }
}

impl From<u32> for Limit {
    fn from(v: u32) -> Self {
        Limit::Finite(v as u64)
    }
}

impl From<i32> for Limit {
    fn from(v: i32) -> Self {
        Limit::Finite(v.max(0) as u64)
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(v) => write!(f, "{v}"),
            Limit::Infinite => f.write_str("Inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreemptOrder {
    #[default]
    Fifo,
    Lifo,
}

/// Static definition of a resource.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSpec {
    pub name: String,
    pub capacity: Limit,
    pub queue_size: Limit,
    pub monitored: bool,
    pub preemptive: bool,
    pub preempt_order: PreemptOrder,
    pub queue_size_strict: bool,
}

impl ResourceSpec {
    /// Capacity 1, unbounded queue, monitored, non-preemptive.
    pub fn new(name: impl Into<String>) -> Self {
        ResourceSpec {
            name: name.into(),
            capacity: Limit::Finite(1),
            queue_size: Limit::Infinite,
            monitored: true,
            preemptive: false,
            preempt_order: PreemptOrder::Fifo,
            queue_size_strict: false,
        }
    }

    pub fn capacity(mut self, c: impl Into<Limit>) -> Self {
        self.capacity = c.into();
        self
    }

    pub fn queue_size(mut self, q: impl Into<Limit>) -> Self {
        self.queue_size = q.into();
        self
    }

    pub fn monitored(mut self, m: bool) -> Self {
        self.monitored = m;
        self
    }

    pub fn preemptive(mut self, p: bool) -> Self {
        self.preemptive = p;
        self
    }

    pub fn preempt_order(mut self, o: PreemptOrder) -> Self {
        self.preempt_order = o;
        self
    }

    pub fn queue_size_strict(mut self, s: bool) -> Self {
        self.queue_size_strict = s;
        self
    }
}

/// What a request ended in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admission {
    Served,
    /// Served after suspending the listed in-service arrivals.
    Preempting(Vec<u64>),
    /// Enqueued; the listed arrivals were pushed out of the queue tail to
    /// make room and are now rejected.
    Enqueued(Vec<u64>),
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct QueueKey {
    priority: Reverse<i64>,
    seq: u64,
}

#[derive(Debug, Clone, Copy)]
struct Waiter {
    arrival: u64,
    amount: u64,
    preemptible: i64,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    amount: u64,
    priority: i64,
    preemptible: i64,
    seq: u64,
}

/// Runtime state of a resource.
#[derive(Debug, Clone)]
pub struct Resource {
    pub spec: ResourceSpec,
    capacity: Limit,
    queue_size: Limit,
    server_count: u64,
    main_count: u64,
    preempted_count: u64,
    server: FxHashMap<u64, Slot>,
    queue: BTreeMap<QueueKey, Waiter>,
    queue_keys: FxHashMap<u64, QueueKey>,
    preempted: BTreeMap<QueueKey, Waiter>,
    preempted_keys: FxHashMap<u64, QueueKey>,
    seq: u64,
}

impl Resource {
    pub fn new(spec: ResourceSpec) -> Self {
        Resource {
            capacity: spec.capacity,
            queue_size: spec.queue_size,
            spec,
            server_count: 0,
            main_count: 0,
            preempted_count: 0,
            server: FxHashMap::default(),
            queue: BTreeMap::new(),
            queue_keys: FxHashMap::default(),
            preempted: BTreeMap::new(),
            preempted_keys: FxHashMap::default(),
            seq: 0,
        }
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn capacity(&self) -> Limit {
        self.capacity
    }

    pub fn queue_size(&self) -> Limit {
        self.queue_size
    }

    pub fn server_count(&self) -> u64 {
        self.server_count
    }

    /// Units waiting, including arrivals suspended by preemption.
    pub fn queue_count(&self) -> u64 {
        self.main_count + self.preempted_count
    }

    pub fn system_count(&self) -> u64 {
        self.server_count + self.queue_count()
    }

    pub fn limit(&self) -> Limit {
        self.capacity.plus(self.queue_size)
    }

    pub fn in_service(&self, arrival: u64) -> bool {
        self.server.contains_key(&arrival)
    }

    pub fn is_queued(&self, arrival: u64) -> bool {
        self.queue_keys.contains_key(&arrival)
    }

    pub fn is_preempted(&self, arrival: u64) -> bool {
        self.preempted_keys.contains_key(&arrival)
    }

    pub fn has_room_in_server(&self) -> bool {
        self.capacity.admits(self.server_count, 1)
    }

    pub fn has_room_in_queue(&self) -> bool {
        self.queue_size.admits(self.counted_queue(), 1)
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn counted_queue(&self) -> u64 {
        if self.spec.queue_size_strict {
            self.main_count + self.preempted_count
        } else {
            self.main_count
        }
    }

    fn head_priority(&self) -> Option<i64> {
        let main = self.queue.keys().next().map(|k| k.priority.0);
        let pre = self.preempted.keys().next().map(|k| k.priority.0);
        main.max(pre)
    }

    fn insert_server(&mut self, arrival: u64, amount: u64, priority: i64, preemptible: i64) {
        let seq = self.next_seq();
        self.server_count += amount;
        self.server
            .entry(arrival)
            .and_modify(|s| s.amount += amount)
            .or_insert(Slot {
                amount,
                priority,
                preemptible,
                seq,
            });
    }

    /// Attempts to seize `amount` units for `arrival`.
    pub fn request(
        &mut self,
        arrival: u64,
        amount: u64,
        priority: i64,
        preemptible: i64,
    ) -> Admission {
        if let Limit::Finite(cap) = self.capacity {
            if amount > cap {
                return Admission::Rejected;
            }
        }
        let first_in_line = self.head_priority().is_none_or(|head| priority > head);
        if first_in_line && self.capacity.admits(self.server_count, amount) {
            self.insert_server(arrival, amount, priority, preemptible);
            return Admission::Served;
        }
        if self.spec.preemptive && first_in_line {
            if let Some(victims) = self.pick_victims(amount, priority) {
                for v in &victims {
                    self.suspend(*v);
                }
                self.insert_server(arrival, amount, priority, preemptible);
                return Admission::Preempting(victims);
            }
        }
        if self.queue_size.admits(self.counted_queue(), amount) {
            self.enqueue(arrival, amount, priority, preemptible);
            return Admission::Enqueued(Vec::new());
        }
        if let Limit::Finite(size) = self.queue_size {
            // Lower-priority arrivals at the tail may be pushed out.
            let mut freed = 0;
            let mut dropped = Vec::new();
            let needed = (self.counted_queue() + amount).saturating_sub(size);
            for (key, w) in self.queue.iter().rev() {
                if freed >= needed || key.priority.0 >= priority {
                    break;
                }
                freed += w.amount;
                dropped.push(w.arrival);
            }
            if freed >= needed && needed > 0 && amount <= size {
                for d in &dropped {
                    self.remove_queued(*d);
                }
                self.enqueue(arrival, amount, priority, preemptible);
                return Admission::Enqueued(dropped);
            }
        }
        Admission::Rejected
    }

    fn enqueue(&mut self, arrival: u64, amount: u64, priority: i64, preemptible: i64) {
        let key = QueueKey {
            priority: Reverse(priority),
            seq: self.next_seq(),
        };
        self.queue.insert(
            key,
            Waiter {
                arrival,
                amount,
                preemptible,
            },
        );
        self.queue_keys.insert(arrival, key);
        self.main_count += amount;
    }

    fn pick_victims(&self, amount: u64, priority: i64) -> Option<Vec<u64>> {
        let Limit::Finite(cap) = self.capacity else {
            return None;
        };
        let mut candidates: Vec<(u64, Slot)> = self
            .server
            .iter()
            .filter(|(_, s)| s.preemptible < priority)
            .map(|(a, s)| (*a, *s))
            .collect();
        let order = self.spec.preempt_order;
        candidates.sort_by(|(_, a), (_, b)| {
            a.preemptible.cmp(&b.preemptible).then(match order {
                PreemptOrder::Fifo => a.seq.cmp(&b.seq),
                PreemptOrder::Lifo => b.seq.cmp(&a.seq),
            })
        });
        let mut free = cap.saturating_sub(self.server_count);
        let mut victims = Vec::new();
        for (arrival, slot) in candidates {
            if free >= amount {
                break;
            }
            free += slot.amount;
            victims.push(arrival);
        }
        (free >= amount).then_some(victims)
    }

    /// Moves an in-service arrival to the preempted queue.
    fn suspend(&mut self, arrival: u64) {
        let slot = self.server.remove(&arrival).expect("victim in service");
        self.server_count -= slot.amount;
        let key = QueueKey {
            priority: Reverse(slot.priority),
            seq: slot.seq,
        };
        self.preempted.insert(
            key,
            Waiter {
                arrival,
                amount: slot.amount,
                preemptible: slot.preemptible,
            },
        );
        self.preempted_keys.insert(arrival, key);
        self.preempted_count += slot.amount;
    }

    /// Returns units to the server. Returns the amount still held.
    pub fn release(&mut self, arrival: u64, amount: u64) -> u64 {
        let Some(slot) = self.server.get_mut(&arrival) else {
            return 0;
        };
        let amount = amount.min(slot.amount);
        slot.amount -= amount;
        self.server_count -= amount;
        let left = slot.amount;
        if left == 0 {
            self.server.remove(&arrival);
        }
        left
    }

    /// Units currently in service for `arrival`.
    pub fn held(&self, arrival: u64) -> u64 {
        self.server.get(&arrival).map_or(0, |s| s.amount)
    }

    /// Removes `arrival` from the main queue. Returns the amount it asked for.
    pub fn remove_queued(&mut self, arrival: u64) -> Option<u64> {
        let key = self.queue_keys.remove(&arrival)?;
        let w = self.queue.remove(&key).expect("queue index consistent");
        self.main_count -= w.amount;
        Some(w.amount)
    }

    /// Removes `arrival` from the preempted queue.
    pub fn remove_preempted(&mut self, arrival: u64) -> Option<u64> {
        let key = self.preempted_keys.remove(&arrival)?;
        let w = self.preempted.remove(&key).expect("preempted index consistent");
        self.preempted_count -= w.amount;
        Some(w.amount)
    }

    /// Serves waiting arrivals while capacity allows: the preempted queue
    /// strictly before the main queue. Returns `(arrival, was_preempted)`.
    pub fn serve_waiting(&mut self) -> Vec<(u64, bool)> {
        let mut served = Vec::new();
        loop {
            if let Some((&key, &w)) = self.preempted.iter().next() {
                if !self.capacity.admits(self.server_count, w.amount) {
                    break;
                }
                self.preempted.remove(&key);
                self.preempted_keys.remove(&w.arrival);
                self.preempted_count -= w.amount;
                self.server_count += w.amount;
                self.server.insert(
                    w.arrival,
                    Slot {
                        amount: w.amount,
                        priority: key.priority.0,
                        preemptible: w.preemptible,
                        seq: key.seq,
                    },
                );
                served.push((w.arrival, true));
                continue;
            }
            if let Some((&key, &w)) = self.queue.iter().next() {
                if !self.capacity.admits(self.server_count, w.amount) {
                    break;
                }
                self.remove_queued(w.arrival);
                let seq = self.next_seq();
                self.server_count += w.amount;
                self.server.insert(
                    w.arrival,
                    Slot {
                        amount: w.amount,
                        priority: key.priority.0,
                        preemptible: w.preemptible,
                        seq,
                    },
                );
                served.push((w.arrival, false));
                continue;
            }
            break;
        }
        served
    }

    /// Applies a new capacity. On a preemptive resource, in-service
    /// arrivals beyond the new capacity are suspended (chosen by the
    /// preemption order) and returned.
    pub fn set_capacity(&mut self, capacity: Limit) -> Vec<u64> {
        self.capacity = capacity;
        let mut victims = Vec::new();
        if !self.spec.preemptive {
            return victims;
        }
        let Limit::Finite(cap) = capacity else {
            return victims;
        };
        if self.server_count <= cap {
            return victims;
        }
        let mut slots: Vec<(u64, Slot)> = self.server.iter().map(|(a, s)| (*a, *s)).collect();
        match self.spec.preempt_order {
            PreemptOrder::Fifo => slots.sort_by_key(|(_, s)| s.seq),
            PreemptOrder::Lifo => slots.sort_by_key(|(_, s)| Reverse(s.seq)),
        }
        for (arrival, _) in slots {
            if self.server_count <= cap {
                break;
            }
            self.suspend(arrival);
            victims.push(arrival);
        }
        victims
    }

    /// Applies a new queue size. Waiting arrivals that no longer fit are
    /// dropped from the tail of the main queue (lowest priority, newest
    /// first) and returned.
    pub fn set_queue_size(&mut self, queue_size: Limit) -> Vec<u64> {
        self.queue_size = queue_size;
        let mut dropped = Vec::new();
        let Limit::Finite(size) = queue_size else {
            return dropped;
        };
        while self.counted_queue() > size {
            let Some((_, w)) = self.queue.iter().next_back() else {
                break;
            };
            let arrival = w.arrival;
            self.remove_queued(arrival);
            dropped.push(arrival);
        }
        dropped
    }
}
