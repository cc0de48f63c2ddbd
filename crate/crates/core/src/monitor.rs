//! Append-only recording of state changes and tabular retrieval.
//!
//! Three tables are kept per environment: arrival lifetimes (whole-life and
//! per-resource), resource counter changes and attribute writes. Rows do not
//! carry the replication index; it is attached at retrieval time.

use crate::resource::Limit;

pub const ARRIVAL_COLUMNS: [&str; 6] = [
    "name",
    "start_time",
    "end_time",
    "activity_time",
    "finished",
    "replication",
];

pub const ARRIVAL_RESOURCE_COLUMNS: [&str; 7] = [
    "name",
    "start_time",
    "end_time",
    "activity_time",
    "finished",
    "replication",
    "resource",
];

pub const RESOURCE_COLUMNS: [&str; 9] = [
    "resource",
    "time",
    "server",
    "queue",
    "capacity",
    "queue_size",
    "system",
    "limit",
    "replication",
];

pub const ATTRIBUTE_COLUMNS: [&str; 5] = ["time", "name", "key", "value", "replication"];

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalRow {
    pub name: String,
    pub start_time: f64,
    pub end_time: f64,
    pub activity_time: f64,
    pub finished: bool,
    pub replication: u32,
    /// Only set in the per-resource form.
    pub resource: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceRow {
    pub resource: String,
    pub time: f64,
    pub server: u64,
    pub queue: u64,
    pub capacity: Limit,
    pub queue_size: Limit,
    pub system: u64,
    pub limit: Limit,
    pub replication: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRow {
    pub time: f64,
    /// Empty for writes made outside any arrival.
    pub name: String,
    pub key: String,
    pub value: f64,
    pub replication: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ArrivalColumns {
    name: Vec<String>,
    start: Vec<f64>,
    end: Vec<f64>,
    activity: Vec<f64>,
    finished: Vec<bool>,
    resource: Vec<String>,
}

impl ArrivalColumns {
    fn push(&mut self, name: &str, start: f64, end: f64, activity: f64, finished: bool) {
        self.name.push(name.to_string());
        self.start.push(start);
        self.end.push(end);
        self.activity.push(activity);
        self.finished.push(finished);
    }

    fn rows(&self, replication: u32, with_resource: bool) -> impl Iterator<Item = ArrivalRow> + '_ {
        (0..self.name.len()).map(move |i| ArrivalRow {
            name: self.name[i].clone(),
            start_time: self.start[i],
            end_time: self.end[i],
            activity_time: self.activity[i],
            finished: self.finished[i],
            replication,
            resource: with_resource.then(|| self.resource[i].clone()),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ResourceColumns {
    resource: Vec<String>,
    time: Vec<f64>,
    server: Vec<u64>,
    queue: Vec<u64>,
    capacity: Vec<Limit>,
    queue_size: Vec<Limit>,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct AttributeColumns {
    time: Vec<f64>,
    name: Vec<String>,
    key: Vec<String>,
    value: Vec<f64>,
}

/// In-memory monitor of one environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monitor {
    arrivals: ArrivalColumns,
    per_resource: ArrivalColumns,
    resources: ResourceColumns,
    attributes: AttributeColumns,
}

impl Monitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        *self = Monitor::default();
    }

    /// An arrival left its trajectory.
    pub fn record_departure(&mut self, name: &str, start: f64, end: f64, activity: f64, finished: bool) {
        self.arrivals.push(name, start, end, activity, finished);
    }

    /// An arrival left a resource (or was rejected by it).
    pub fn record_leave_resource(
        &mut self,
        name: &str,
        resource: &str,
        start: f64,
        end: f64,
        activity: f64,
        finished: bool,
    ) {
        self.per_resource.push(name, start, end, activity, finished);
        self.per_resource.resource.push(resource.to_string());
    }

    /// Resource counters after an accept, a leave or a modification.
    pub fn record_resource(
        &mut self,
        resource: &str,
        time: f64,
        server: u64,
        queue: u64,
        capacity: Limit,
        queue_size: Limit,
    ) {
        let r = &mut self.resources;
        r.resource.push(resource.to_string());
        r.time.push(time);
        r.server.push(server);
        r.queue.push(queue);
        r.capacity.push(capacity);
        r.queue_size.push(queue_size);
    }

    pub fn record_attribute(&mut self, time: f64, name: &str, key: &str, value: f64) {
        let a = &mut self.attributes;
        a.time.push(time);
        a.name.push(name.to_string());
        a.key.push(key.to_string());
        a.value.push(value);
    }

    pub fn arrival_count(&self) -> usize {
        self.arrivals.name.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.time.len()
    }

    pub fn arrivals(&self, per_resource: bool, replication: u32) -> Vec<ArrivalRow> {
        if per_resource {
            self.per_resource.rows(replication, true).collect()
        } else {
            self.arrivals.rows(replication, false).collect()
        }
    }

    pub fn resources(&self, replication: u32) -> Vec<ResourceRow> {
        let r = &self.resources;
        (0..r.time.len())
            .map(|i| ResourceRow {
                resource: r.resource[i].clone(),
                time: r.time[i],
                server: r.server[i],
                queue: r.queue[i],
                capacity: r.capacity[i],
                queue_size: r.queue_size[i],
                system: r.server[i] + r.queue[i],
                limit: r.capacity[i].plus(r.queue_size[i]),
                replication,
            })
            .collect()
    }

    pub fn attributes(&self, replication: u32) -> Vec<AttributeRow> {
        let a = &self.attributes;
        (0..a.time.len())
            .map(|i| AttributeRow {
                time: a.time[i],
                name: a.name[i].clone(),
                key: a.key[i].clone(),
                value: a.value[i],
                replication,
            })
            .collect()
    }
}

/// Anything that exposes monitored data: live environments and snapshots.
pub trait Monitored {
    fn monitor(&self) -> &Monitor;
}

/// Arrival rows of several environments; environment `i` becomes
/// replication `i + 1`.
pub fn get_mon_arrivals<M: Monitored + ?Sized>(envs: &[&M], per_resource: bool) -> Vec<ArrivalRow> {
    envs.iter()
        .enumerate()
        .flat_map(|(i, e)| e.monitor().arrivals(per_resource, i as u32 + 1))
        .collect()
}

pub fn get_mon_resources<M: Monitored + ?Sized>(envs: &[&M]) -> Vec<ResourceRow> {
    envs.iter()
        .enumerate()
        .flat_map(|(i, e)| e.monitor().resources(i as u32 + 1))
        .collect()
}

pub fn get_mon_attributes<M: Monitored + ?Sized>(envs: &[&M]) -> Vec<AttributeRow> {
    envs.iter()
        .enumerate()
        .flat_map(|(i, e)| e.monitor().attributes(i as u32 + 1))
        .collect()
}

/// Time-weighted average of `system` for one resource over `[0, horizon]`.
pub fn time_average_system(rows: &[ResourceRow], resource: &str, horizon: f64) -> f64 {
    time_average(rows, resource, horizon, |r| r.system as f64)
}

/// Time-weighted average of `server` for one resource over `[0, horizon]`.
pub fn time_average_server(rows: &[ResourceRow], resource: &str, horizon: f64) -> f64 {
    time_average(rows, resource, horizon, |r| r.server as f64)
}

fn time_average(rows: &[ResourceRow], resource: &str, horizon: f64, value: impl Fn(&ResourceRow) -> f64) -> f64 {
    if horizon <= 0.0 {
        return 0.0;
    }
    let mut area = 0.0;
    let mut last_t = 0.0;
    let mut last_v = 0.0;
    for r in rows.iter().filter(|r| r.resource == resource) {
        let t = r.time.min(horizon);
        area += last_v * (t - last_t);
        last_t = t;
        last_v = value(r);
    }
    area += last_v * (horizon - last_t);
    area / horizon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_monitor_yields_empty_tables() {
        let m = Monitor::new();
        assert!(m.arrivals(false, 1).is_empty());
        assert!(m.arrivals(true, 1).is_empty());
        assert!(m.resources(1).is_empty());
        assert!(m.attributes(1).is_empty());
        assert_eq!(ARRIVAL_COLUMNS.len(), 6);
    }

    #[test]
    fn derived_columns() {
        let mut m = Monitor::new();
        m.record_resource("r", 1.0, 1, 2, Limit::Finite(1), Limit::Infinite);
        let rows = m.resources(3);
        assert_eq!(rows[0].system, 3);
        assert_eq!(rows[0].limit, Limit::Infinite);
        assert_eq!(rows[0].replication, 3);
    }

    #[test]
    fn time_average_of_step_function() {
        let mut m = Monitor::new();
        m.record_resource("r", 0.0, 1, 0, Limit::Finite(1), Limit::Infinite);
        m.record_resource("r", 2.0, 0, 0, Limit::Finite(1), Limit::Infinite);
        m.record_resource("q", 1.0, 5, 0, Limit::Finite(5), Limit::Infinite);
        let rows = m.resources(1);
        assert!((time_average_system(&rows, "r", 4.0) - 0.5).abs() < 1e-12);
        assert!((time_average_server(&rows, "q", 2.0) - 2.5).abs() < 1e-12);
    }
}
