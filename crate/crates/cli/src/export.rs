//! CSV export of monitor tables, and reading them back.

use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use trajsim::format::exact;
use trajsim::monitor::{
    ARRIVAL_COLUMNS, ARRIVAL_RESOURCE_COLUMNS, ATTRIBUTE_COLUMNS, RESOURCE_COLUMNS,
};
use trajsim::resource::Limit;
use trajsim::*;

use crate::report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}, record {record}: {message}")]
    Parse {
        path: PathBuf,
        record: usize,
        message: String,
    },
}

pub const FILES: [&str; 4] = [
    "arrivals.csv",
    "arrivals_per_resource.csv",
    "resources.csv",
    "attributes.csv",
];

fn boolean(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

fn limit(l: Limit) -> String {
    l.to_string()
}

fn writer(path: &Path) -> Result<csv::Writer<File>, ExportError> {
    let file = File::create(path).map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(file))
}

fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), ExportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let wrap = |source| ExportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>()).map_err(wrap)?;
    }
    w.flush().map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn arrival_fields(r: &ArrivalRow) -> Vec<String> {
    let mut v = vec![
        r.name.clone(),
        exact(r.start_time),
        exact(r.end_time),
        exact(r.activity_time),
        boolean(r.finished).to_string(),
        r.replication.to_string(),
    ];
    if let Some(res) = &r.resource {
        v.push(res.clone());
    }
    v
}

pub fn resource_fields(r: &ResourceRow) -> Vec<String> {
    vec![
        r.resource.clone(),
        exact(r.time),
        r.server.to_string(),
        r.queue.to_string(),
        limit(r.capacity),
        limit(r.queue_size),
        r.system.to_string(),
        limit(r.limit),
        r.replication.to_string(),
    ]
}

pub fn attribute_fields(r: &AttributeRow) -> Vec<String> {
    vec![
        exact(r.time),
        r.name.clone(),
        r.key.clone(),
        exact(r.value),
        r.replication.to_string(),
    ]
}

/// Writes the four tables of `report` into `dir`, creating it if needed.
pub fn export_csv(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
    std::fs::create_dir_all(dir).map_err(|source| ExportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths: Vec<PathBuf> = FILES.iter().map(|f| dir.join(f)).collect();
    write_table(&paths[0], &ARRIVAL_COLUMNS, report.arrivals(false).iter().map(arrival_fields))?;
    write_table(
        &paths[1],
        &ARRIVAL_RESOURCE_COLUMNS,
        report.arrivals(true).iter().map(arrival_fields),
    )?;
    write_table(&paths[2], &RESOURCE_COLUMNS, report.resources().iter().map(resource_fields))?;
    write_table(&paths[3], &ATTRIBUTE_COLUMNS, report.attributes().iter().map(attribute_fields))?;
    Ok(paths)
}

/// Header and records of a CSV file.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), ExportError> {
    let wrap = |source| ExportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::ReaderBuilder::new().from_path(path).map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(wrap)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "Inf" => Some(f64::INFINITY),
        "-Inf" => Some(f64::NEG_INFINITY),
        "NA" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn parse_limit(s: &str) -> Option<Limit> {
    if s == "Inf" {
        Some(Limit::Infinite)
    } else {
        s.parse().ok().map(Limit::Finite)
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "TRUE" => Some(true),
        "FALSE" => Some(false),
        _ => None,
    }
}

fn bad(path: &Path, record: usize) -> ExportError {
    ExportError::Parse {
        path: path.to_path_buf(),
        record,
        message: "malformed field".to_string(),
    }
}

pub fn read_arrivals(path: &Path) -> Result<Vec<ArrivalRow>, ExportError> {
    let (header, rows) = read_table(path)?;
    let per_resource = header.len() == ARRIVAL_RESOURCE_COLUMNS.len();
    rows.iter()
        .enumerate()
        .map(|(i, f)| {
            let row = || -> Option<ArrivalRow> {
                Some(ArrivalRow {
                    name: f.first()?.clone(),
                    start_time: parse_f64(f.get(1)?)?,
                    end_time: parse_f64(f.get(2)?)?,
                    activity_time: parse_f64(f.get(3)?)?,
                    finished: parse_bool(f.get(4)?)?,
                    replication: f.get(5)?.parse().ok()?,
                    resource: if per_resource { Some(f.get(6)?.clone()) } else { None },
                })
            };
            row().ok_or_else(|| bad(path, i + 1))
        })
        .collect()
}

pub fn read_resources(path: &Path) -> Result<Vec<ResourceRow>, ExportError> {
    let (_, rows) = read_table(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, f)| {
            let row = || -> Option<ResourceRow> {
                Some(ResourceRow {
                    resource: f.first()?.clone(),
                    time: parse_f64(f.get(1)?)?,
                    server: f.get(2)?.parse().ok()?,
                    queue: f.get(3)?.parse().ok()?,
                    capacity: parse_limit(f.get(4)?)?,
                    queue_size: parse_limit(f.get(5)?)?,
                    system: f.get(6)?.parse().ok()?,
                    limit: parse_limit(f.get(7)?)?,
                    replication: f.get(8)?.parse().ok()?,
                })
            };
            row().ok_or_else(|| bad(path, i + 1))
        })
        .collect()
}

pub fn read_attributes(path: &Path) -> Result<Vec<AttributeRow>, ExportError> {
    let (_, rows) = read_table(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, f)| {
            let row = || -> Option<AttributeRow> {
                Some(AttributeRow {
                    time: parse_f64(f.first()?)?,
                    name: f.get(1)?.clone(),
                    key: f.get(2)?.clone(),
                    value: parse_f64(f.get(3)?)?,
                    replication: f.get(4)?.parse().ok()?,
                })
            };
            row().ok_or_else(|| bad(path, i + 1))
        })
        .collect()
}
