use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "protocol",
    "randomized",
    "order_k",
    "j",
    "tau",
    "total_t",
    "seed",
    "trial",
    "error_kind",
    "error",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Hahn,
    Xy4,
    Xy8,
    Cdd,
    Udd,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Hahn => "hahn",
            Protocol::Xy4 => "xy4",
            Protocol::Xy8 => "xy8",
            Protocol::Cdd => "cdd",
            Protocol::Udd => "udd",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hahn" => Ok(Protocol::Hahn),
            "xy4" => Ok(Protocol::Xy4),
            "xy8" => Ok(Protocol::Xy8),
            "cdd" => Ok(Protocol::Cdd),
            "udd" => Ok(Protocol::Udd),
            other => Err(Error::InvalidArgument(format!("unknown protocol {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    JointState,
    Subsystem,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::JointState => "joint_state",
            ErrorKind::Subsystem => "subsystem",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint_state" => Ok(ErrorKind::JointState),
            "subsystem" => Ok(ErrorKind::Subsystem),
            other => Err(Error::InvalidArgument(format!("unknown error kind {other:?}"))),
        }
    }
}

/// One simulated cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub protocol: Protocol,
    pub randomized: bool,
    /// Concatenation or UDD order; 0 for protocols without one.
    pub order_k: u32,
    pub j: f64,
    pub tau: f64,
    pub total_t: f64,
    pub seed: u64,
    pub trial: u64,
    pub error_kind: ErrorKind,
    pub error: f64,
}

impl SweepRecord {
    /// Short curve name such as `xy4`, `rand-xy4`, `cdd3` or `rand-udd2`.
    pub fn label(&self) -> String {
        curve_label(self.protocol, self.randomized, self.order_k)
    }

    fn sort_cmp(&self, other: &Self) -> Ordering {
        (self.protocol, self.randomized, self.order_k)
            .cmp(&(other.protocol, other.randomized, other.order_k))
            .then(self.j.total_cmp(&other.j))
            .then(self.tau.total_cmp(&other.tau))
            .then(self.total_t.total_cmp(&other.total_t))
            .then(self.seed.cmp(&other.seed))
            .then(self.trial.cmp(&other.trial))
            .then(self.error_kind.cmp(&other.error_kind))
    }
}

pub fn curve_label(protocol: Protocol, randomized: bool, order_k: u32) -> String {
    let prefix = if randomized { "rand-" } else { "" };
    match protocol {
        Protocol::Cdd | Protocol::Udd => format!("{prefix}{protocol}{order_k}"),
        _ => format!("{prefix}{protocol}"),
    }
}

/// Sorts into the canonical output order.
pub fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(SweepRecord::sort_cmp);
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::MalformedCsv {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes records (sorted canonically) to any writer.
pub fn write_csv_to<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in &sorted {
        w.write_record([
            r.protocol.to_string(),
            r.randomized.to_string(),
            r.order_k.to_string(),
            format!("{:e}", r.j),
            format!("{:e}", r.tau),
            format!("{:e}", r.total_t),
            r.seed.to_string(),
            r.trial.to_string(),
            r.error_kind.to_string(),
            format!("{:e}", r.error),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(records, std::io::BufWriter::new(file))
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, line: u64) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim().parse().map_err(|_| Error::MalformedCsv {
        line,
        message: format!("bad {} value {raw:?}", CSV_HEADER[idx]),
    })
}

pub fn read_csv_from<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::MalformedCsv {
            line: 1,
            message: format!("expected header {}", CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let protocol: Protocol = field(&rec, 0, line)?;
        let error_kind: ErrorKind = field(&rec, 8, line)?;
        let record = SweepRecord {
            protocol,
            randomized: field(&rec, 1, line)?,
            order_k: field(&rec, 2, line)?,
            j: field(&rec, 3, line)?,
            tau: field(&rec, 4, line)?,
            total_t: field(&rec, 5, line)?,
            seed: field(&rec, 6, line)?,
            trial: field(&rec, 7, line)?,
            error_kind,
            error: field(&rec, 9, line)?,
        };
        if !(0.0..=1.0).contains(&record.error) {
            return Err(Error::MalformedCsv {
                line,
                message: format!("error {} outside [0, 1]", record.error),
            });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    read_csv_from(std::fs::File::open(path)?)
}
