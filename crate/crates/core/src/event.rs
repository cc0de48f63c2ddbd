//! Future event set and simulation clock.
//!
//! Events are kept in a balanced tree ordered by `(time, priority, seq)`:
//! earlier times first, then higher priority, then insertion order. A side
//! index maps every process to its single pending event so that it can be
//! unscheduled in logarithmic time.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::SimError;

/// Priority of an event among those scheduled for the same instant.
///
/// Higher ranks run first. The ladder guarantees that releases happen
/// before resource managers, managers before post-release queue service,
/// and all of them before new arrivals try to seize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventPriority {
    Min,
    General,
    Generator,
    ReleasePost,
    Manager,
    Release,
    Max,
}

impl EventPriority {
    pub const fn rank(self) -> u8 {
        match self {
            EventPriority::Max => 6,
            EventPriority::Release => 5,
            EventPriority::Manager => 4,
            EventPriority::ReleasePost => 3,
            EventPriority::Generator => 2,
            EventPriority::General => 1,
            EventPriority::Min => 0,
        }
    }

    pub const ALL: [EventPriority; 7] = [
        EventPriority::Min,
        EventPriority::General,
        EventPriority::Generator,
        EventPriority::ReleasePost,
        EventPriority::Manager,
        EventPriority::Release,
        EventPriority::Max,
    ];
}

/// Ordering key of a scheduled event. Unique because `seq` is never reused.
#[derive(Debug, Clone, Copy)]
pub struct EventKey {
    pub at: f64,
    pub priority: EventPriority,
    pub seq: u64,
}

impl PartialEq for EventKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EventKey {}

impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EventKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.at
            .total_cmp(&other.at)
            .then_with(|| other.priority.rank().cmp(&self.priority.rank()))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Ordered set of pending events, at most one per process.
pub struct EventSet<P> {
    now: f64,
    seq: u64,
    events: BTreeMap<EventKey, P>,
    index: FxHashMap<P, EventKey>,
}

impl<P: fmt::Debug> fmt::Debug for EventSet<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSet")
            .field("now", &self.now)
            .field("pending", &self.events.len())
            .finish()
    }
}

impl<P: Copy + Eq + Hash> Default for EventSet<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Copy + Eq + Hash> EventSet<P> {
    pub fn new() -> Self {
        EventSet {
            now: 0.0,
            seq: 0,
            events: BTreeMap::new(),
            index: FxHashMap::default(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Schedules `process` at `now + delay`. A process that already has a
    /// pending event has it replaced.
    pub fn schedule(
        &mut self,
        delay: f64,
        process: P,
        priority: EventPriority,
    ) -> Result<EventKey, SimError> {
        if delay.is_nan() || delay < 0.0 {
            return Err(SimError::NegativeDelay(delay));
        }
        self.unschedule(process);
        let key = EventKey {
            at: self.now + delay,
            priority,
            seq: self.seq,
        };
        self.seq += 1;
        self.events.insert(key, process);
        self.index.insert(process, key);
        Ok(key)
    }

    /// Schedules `process` at absolute time `at` (not before now).
    pub fn schedule_at(
        &mut self,
        at: f64,
        process: P,
        priority: EventPriority,
    ) -> Result<EventKey, SimError> {
        if at.is_nan() || at < self.now {
            return Err(SimError::NegativeDelay(at - self.now));
        }
        self.unschedule(process);
        let key = EventKey {
            at,
            priority,
            seq: self.seq,
        };
        self.seq += 1;
        self.events.insert(key, process);
        self.index.insert(process, key);
        Ok(key)
    }

    /// Removes the pending event of `process`, if any.
    pub fn unschedule(&mut self, process: P) -> bool {
        match self.index.remove(&process) {
            Some(key) => {
                self.events.remove(&key);
                true
            }
            None => false,
        }
    }

    pub fn is_pending(&self, process: P) -> bool {
        self.index.contains_key(&process)
    }

    pub fn pending_key(&self, process: P) -> Option<EventKey> {
        self.index.get(&process).copied()
    }

    /// Time of the next event, if any.
    pub fn next_time(&self) -> Option<f64> {
        self.events.first_key_value().map(|(k, _)| k.at)
    }

    /// Extracts the next event and advances the clock to it.
    pub fn pop(&mut self) -> Option<(EventKey, P)> {
        let (key, process) = self.events.pop_first()?;
        self.index.remove(&process);
        self.now = key.at;
        Some((key, process))
    }

    /// Extracts the next event only if it occurs strictly before `horizon`.
    pub fn pop_before(&mut self, horizon: f64) -> Option<(EventKey, P)> {
        match self.next_time() {
            Some(t) if t < horizon => self.pop(),
            _ => None,
        }
    }

    /// Up to `k` next events in extraction order.
    pub fn peek(&self, k: usize) -> Vec<(EventKey, P)> {
        self.events.iter().take(k).map(|(k, p)| (*k, *p)).collect()
    }

    /// Moves the clock forward without running anything.
    pub fn advance_to(&mut self, t: f64) {
        if t > self.now {
            self.now = t;
        }
    }

    pub fn clear(&mut self) {
        self.now = 0.0;
        self.seq = 0;
        self.events.clear();
        self.index.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_set_pops_nothing() {
        let mut set: EventSet<u32> = EventSet::new();
        assert!(set.pop().is_none());
        assert_eq!(set.now(), 0.0);
        assert!(set.peek(3).is_empty());
    }

    #[test]
    fn single_event_advances_clock() {
        let mut set = EventSet::new();
        set.schedule(5.0, 1u32, EventPriority::General).unwrap();
        let (key, p) = set.pop().unwrap();
        assert_eq!((key.at, p), (5.0, 1));
        assert_eq!(set.now(), 5.0);
    }

    #[test]
    fn higher_priority_first_at_same_time() {
        let mut set = EventSet::new();
        set.schedule(0.0, 2u32, EventPriority::Min).unwrap();
        set.schedule(0.0, 1u32, EventPriority::Max).unwrap();
        assert_eq!(set.pop().unwrap().1, 1);
        assert_eq!(set.pop().unwrap().1, 2);
    }

    #[test]
    fn negative_delay_rejected() {
        let mut set = EventSet::new();
        let err = set.schedule(-1.0, 1u32, EventPriority::General).unwrap_err();
        assert_eq!(err.to_string(), "negative schedule delay: -1");
    }

    #[test]
    fn reschedule_replaces_pending_event() {
        let mut set = EventSet::new();
        set.schedule(3.0, 7u32, EventPriority::General).unwrap();
        set.schedule(1.0, 7u32, EventPriority::General).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.pop().unwrap().0.at, 1.0);
    }

    #[test]
    fn unschedule_reports_presence() {
        let mut set = EventSet::new();
        assert!(!set.unschedule(9u32));
        set.schedule(1.0, 9u32, EventPriority::General).unwrap();
        assert!(set.unschedule(9));
        assert!(set.pop().is_none());
    }

    #[test]
    fn horizon_is_exclusive() {
        let mut set = EventSet::new();
        set.schedule(1.0, 1u32, EventPriority::General).unwrap();
        assert!(set.pop_before(1.0).is_none());
        assert!(set.pop_before(0.0).is_none());
        assert!(set.pop_before(1.5).is_some());
    }

    #[test]
    fn priority_ranks_are_total() {
        let ranks: Vec<u8> = EventPriority::ALL.iter().map(|p| p.rank()).collect();
        assert_eq!(ranks, vec![0, 1, 2, 3, 4, 5, 6]);
        assert!(EventPriority::Release > EventPriority::Manager);
        assert!(EventPriority::Manager > EventPriority::ReleasePost);
    }

    proptest! {
        #[test]
        fn peek_prefixes_extraction(ops in prop::collection::vec((0u8..20, 0usize..7), 1..60), k in 1usize..10) {
            let mut set = EventSet::new();
            for (i, (d, p)) in ops.iter().enumerate() {
                set.schedule(*d as f64, i, EventPriority::ALL[*p]).unwrap();
            }
            let peeked: Vec<usize> = set.peek(k).into_iter().map(|(_, p)| p).collect();
            let mut popped = Vec::new();
            for _ in 0..peeked.len() {
                popped.push(set.pop().unwrap().1);
            }
            prop_assert_eq!(peeked, popped);
        }

        #[test]
        fn clock_never_decreases(ops in prop::collection::vec((0u8..50, 0usize..7), 1..80)) {
            let mut set = EventSet::new();
            for (i, (d, p)) in ops.iter().enumerate() {
                set.schedule(*d as f64 / 4.0, i, EventPriority::ALL[*p]).unwrap();
            }
            let mut last = 0.0;
            while let Some((k, p)) = set.pop() {
                prop_assert!(k.at >= last);
                last = k.at;
                // reinsert some events in the future to interleave scheduling and popping
                if p % 5 == 0 && p < 1000 {
                    set.schedule(1.0, p + 1000, EventPriority::General).unwrap();
                }
            }
        }
    }
}
