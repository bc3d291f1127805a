//! Wire messages, protocol version 1.
//!
//! Every frame is one JSON object with a `"v"` version field and a `"type"`
//! discriminator. Angles are degrees; coverage matrices travel as row-major
//! bit strings with row `p = 0` (southernmost) first.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use viewsphere::io::SampleRecord;
use viewsphere::session::CaptureRecord;
use viewsphere::{
    ConfigOverrides, FlatConfig, GateStatus, GuidanceHint, Pose, SessionReport,
    Snapshot,
};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ClientMessage {
    Hello(ConfigOverrides),
    Sample(SampleRecord),
    SnapshotRequest,
    Finalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Frame is not a v1 JSON message of a known type.
    BadMessage,
    /// Message not allowed in the current connection state.
    BadOrder,
    /// Sample failed validation or went backwards in time.
    BadSample,
    /// Hello carried overrides that do not form a valid configuration.
    BadConfig,
}

/// A rejected frame: the code to report and a human-readable reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub code: ErrorCode,
    pub message: String,
}

impl Rejection {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Rejection {
            code,
            message: message.into(),
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct HelloBody {
    #[serde(default)]
    config: ConfigOverrides,
}

impl ClientMessage {
    pub fn parse(text: &str) -> Result<ClientMessage, Rejection> {
        let bad = |m: String| Rejection::new(ErrorCode::BadMessage, m);
        let value: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(bad("message must be a JSON object".into()));
        };
        match obj.remove("v") {
            Some(Value::Number(n)) if n.as_u64() == Some(PROTOCOL_VERSION as u64) => {}
            Some(other) => return Err(bad(format!("unsupported protocol version {other}"))),
            None => return Err(bad("missing \"v\" field".into())),
        }
        let kind = match obj.remove("type") {
            Some(Value::String(s)) => s,
            _ => return Err(bad("missing or non-string \"type\" field".into())),
        };
        match kind.as_str() {
            "hello" => {
                let body: HelloBody = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| Rejection::new(ErrorCode::BadConfig, e.to_string()))?;
                Ok(ClientMessage::Hello(body.config))
            }
            "sample" => serde_json::from_value(Value::Object(obj))
                .map(ClientMessage::Sample)
                .map_err(|e| Rejection::new(ErrorCode::BadSample, e.to_string())),
            "snapshot_request" => empty(obj, ClientMessage::SnapshotRequest),
            "finalize" => empty(obj, ClientMessage::Finalize),
            other => Err(bad(format!("unknown message type {other:?}"))),
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, body) = match self {
            ClientMessage::Hello(o) => ("hello", Some(serde_json::json!({ "config": o }))),
            ClientMessage::Sample(s) => ("sample", Some(serde_json::to_value(s).expect("sample"))),
            ClientMessage::SnapshotRequest => ("snapshot_request", None),
            ClientMessage::Finalize => ("finalize", None),
        };
        frame(kind, body)
    }
}

fn empty(obj: Map<String, Value>, msg: ClientMessage) -> Result<ClientMessage, Rejection> {
    match obj.keys().next() {
        None => Ok(msg),
        Some(k) => Err(Rejection::new(
            ErrorCode::BadMessage,
            format!("unexpected field {k:?}"),
        )),
    }
}

fn frame(kind: &str, body: Option<Value>) -> String {
    let mut out = Map::new();
    out.insert("v".into(), PROTOCOL_VERSION.into());
    out.insert("type".into(), kind.into());
    if let Some(Value::Object(fields)) = body {
        out.extend(fields);
    }
    serde_json::to_string(&Value::Object(out)).expect("frame serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellView {
    pub p: usize,
    pub t: usize,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl From<&Pose> for CellView {
    fn from(pose: &Pose) -> Self {
        let (theta_deg, phi_deg) = pose.angles.to_degrees();
        CellView {
            p: pose.cell.p,
            t: pose.cell.t,
            theta_deg,
            phi_deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HintView {
    pub p: usize,
    pub t: usize,
    pub theta_deg: f64,
    pub phi_deg: f64,
    /// Signed yaw change toward the target, in (−180, 180].
    pub yaw_delta_deg: f64,
    pub pitch_delta_deg: f64,
    pub uncovered_area_pct: f64,
}

impl From<&GuidanceHint> for HintView {
    fn from(h: &GuidanceHint) -> Self {
        let (theta_deg, phi_deg) = h.target_angles.to_degrees();
        HintView {
            p: h.target_cell.p,
            t: h.target_cell.t,
            theta_deg,
            phi_deg,
            yaw_delta_deg: h.yaw_delta.to_degrees(),
            pitch_delta_deg: h.pitch_delta.to_degrees(),
            uncovered_area_pct: h.uncovered_area_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMsg {
    pub t_ms: u64,
    pub gate_status: GateStatus,
    pub coverage_pct: f64,
    /// Cell under the latest stable pose.
    pub current_cell: Option<CellView>,
    /// This sample marked a previously empty cell.
    pub newly_covered: bool,
    /// This sample produced a capture event.
    pub captured: bool,
    pub baseline_set: bool,
    pub hint: Option<HintView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMsg {
    pub n_theta: usize,
    pub n_phi: usize,
    pub coverage_pct: f64,
    pub gate_status: GateStatus,
    pub raw: String,
    pub refined: String,
    pub captures: Vec<CaptureRecord>,
}

impl SnapshotMsg {
    pub fn new(snap: &Snapshot, captures: Vec<CaptureRecord>) -> Self {
        let spec = snap.raw.spec();
        SnapshotMsg {
            n_theta: spec.n_theta,
            n_phi: spec.n_phi,
            coverage_pct: snap.coverage_pct,
            gate_status: snap.gate_status,
            raw: snap.raw.to_bit_string(),
            refined: snap.refined.to_bit_string(),
            captures,
        }
    }

    pub fn raw_popcount(&self) -> usize {
        self.raw.bytes().filter(|b| *b == b'1').count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Ready { config: FlatConfig },
    State(StateMsg),
    Snapshot(SnapshotMsg),
    Report { report: SessionReport },
    Error { code: ErrorCode, message: String },
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    v: u32,
    #[serde(flatten)]
    msg: T,
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Versioned {
            v: PROTOCOL_VERSION,
            msg: self,
        })
        .expect("server message serializes")
    }

    /// Client-side decoding; rejects frames from other protocol versions.
    pub fn parse(text: &str) -> Result<ServerMessage, String> {
        let framed: Versioned<ServerMessage> =
            serde_json::from_str(text).map_err(|e| e.to_string())?;
        if framed.v != PROTOCOL_VERSION {
            return Err(format!("unsupported protocol version {}", framed.v));
        }
        Ok(framed.msg)
    }

    pub fn error(r: &Rejection) -> Self {
        ServerMessage::Error {
            code: r.code,
            message: r.message.clone(),
        }
    }

    /// Whether the connection closes after this message.
    pub fn is_terminal(&self) -> bool {
        matches!(self, ServerMessage::Report { .. } | ServerMessage::Error { .. })
    }
}
