//! IMU session logs (JSON Lines) and per-image orientation lists (CSV).
//!
//! Log lines look like
//!
//! ```text
//! {"t_ms":120,"q":[0.0,0.0,0.0,1.0],"a":[0.01,0.0,-0.02],"w":[0.0,0.1,0.0]}
//! ```
//!
//! with keys always written in that order. Floats are written in shortest
//! round-trip form, so `parse_log(write_log(x)) == x` bit for bit.

use std::collections::HashSet;
use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::MathError;
use crate::gate::ImuSample;
use crate::rotation::Quaternion;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: timestamp {got} ms does not follow {previous} ms")]
    NonMonotonicTimestamp { line: usize, previous: u64, got: u64 },
    #[error("line {line}: non-finite value in {field}")]
    NonFiniteField { line: usize, field: &'static str },
    #[error("line {line}: quaternion norm {norm} is not unit")]
    NonUnitQuaternion { line: usize, norm: f64 },
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
}

impl LogError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LogError::MalformedLine { line, .. }
            | LogError::NonMonotonicTimestamp { line, .. }
            | LogError::NonFiniteField { line, .. }
            | LogError::NonUnitQuaternion { line, .. } => Some(*line),
            LogError::Io(_) => None,
        }
    }
}

/// On-the-wire form of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub t_ms: u64,
    pub q: [f64; 4],
    pub a: [f64; 3],
    pub w: [f64; 3],
}

impl From<&ImuSample> for SampleRecord {
    fn from(s: &ImuSample) -> Self {
        SampleRecord {
            t_ms: s.t_ms,
            q: s.q.to_array(),
            a: s.accel,
            w: s.gyro,
        }
    }
}

impl TryFrom<SampleRecord> for ImuSample {
    type Error = MathError;

    fn try_from(r: SampleRecord) -> Result<Self, MathError> {
        if !r.a.iter().all(|v| v.is_finite()) {
            return Err(MathError::NonFinite("a"));
        }
        if !r.w.iter().all(|v| v.is_finite()) {
            return Err(MathError::NonFinite("w"));
        }
        Ok(ImuSample {
            t_ms: r.t_ms,
            q: Quaternion::from_array(r.q)?,
            accel: r.a,
            gyro: r.w,
        })
    }
}

fn sample_error(line: usize, e: MathError) -> LogError {
    match e {
        MathError::NonUnitQuaternion { norm, .. } => LogError::NonUnitQuaternion { line, norm },
        MathError::NonFinite(field) => LogError::NonFiniteField { line, field },
    }
}

/// Parses one JSONL log. Blank lines are skipped; line numbers are 1-based.
pub fn parse_log(reader: impl BufRead) -> Result<Vec<ImuSample>, LogError> {
    let mut out: Vec<ImuSample> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SampleRecord =
            serde_json::from_str(&line).map_err(|e| LogError::MalformedLine {
                line: line_no,
                reason: e.to_string(),
            })?;
        let sample = ImuSample::try_from(record).map_err(|e| sample_error(line_no, e))?;
        if let Some(prev) = out.last() {
            if sample.t_ms <= prev.t_ms {
                return Err(LogError::NonMonotonicTimestamp {
                    line: line_no,
                    previous: prev.t_ms,
                    got: sample.t_ms,
                });
            }
        }
        out.push(sample);
    }
    Ok(out)
}

pub fn parse_log_str(s: &str) -> Result<Vec<ImuSample>, LogError> {
    parse_log(s.as_bytes())
}

/// One line per sample, canonical key order, trailing newline.
pub fn write_log(samples: &[ImuSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 96);
    for s in samples {
        out.push_str(&serde_json::to_string(&SampleRecord::from(s)).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum OrientationError {
    #[error("duplicate image id {0:?}")]
    DuplicateImageId(String),
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedImage {
    pub image_id: String,
    pub q: Quaternion,
}

pub type OrientationList = Vec<OrientedImage>;

const ORIENTATION_HEADER: [&str; 5] = ["image_id", "qx", "qy", "qz", "qw"];

/// Reads a CSV with header `image_id,qx,qy,qz,qw`. A file with no content
/// at all reads as an empty list.
pub fn import_orientations(reader: impl Read) -> Result<OrientationList, OrientationError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    match records.next() {
        None => return Ok(Vec::new()),
        Some(header) => {
            let header = header.map_err(|e| malformed(1, e))?;
            if header.iter().ne(ORIENTATION_HEADER) {
                return Err(OrientationError::MalformedRow {
                    line: 1,
                    reason: format!("expected header {}", ORIENTATION_HEADER.join(",")),
                });
            }
        }
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            malformed(line, e)
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 5 {
            return Err(OrientationError::MalformedRow {
                line,
                reason: format!("expected 5 fields, got {}", record.len()),
            });
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(OrientationError::MalformedRow {
                line,
                reason: "empty image_id".into(),
            });
        }
        let mut q = [0.0; 4];
        for (slot, field) in q.iter_mut().zip(record.iter().skip(1)) {
            *slot = field.parse().map_err(|_| OrientationError::MalformedRow {
                line,
                reason: format!("not a number: {field:?}"),
            })?;
        }
        let q = Quaternion::from_array(q).map_err(|e| malformed(line, e))?;
        if !seen.insert(id.clone()) {
            return Err(OrientationError::DuplicateImageId(id));
        }
        out.push(OrientedImage { image_id: id, q });
    }
    Ok(out)
}

fn malformed(line: usize, e: impl std::fmt::Display) -> OrientationError {
    OrientationError::MalformedRow {
        line,
        reason: e.to_string(),
    }
}

/// Writes an orientation list in the format read by [`import_orientations`].
pub fn write_orientations(list: &[OrientedImage]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(ORIENTATION_HEADER).expect("in-memory csv");
    for img in list {
        let q = img.q.to_array();
        wtr.write_record([
            img.image_id.clone(),
            q[0].to_string(),
            q[1].to_string(),
            q[2].to_string(),
            q[3].to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory csv")).expect("utf8")
}
