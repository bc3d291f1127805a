//! Transport-independent per-connection state machine.
//!
//! Feed it text frames, send back whatever it returns. The socket layer owns
//! nothing but I/O, so tests can drive the whole protocol without a network.

use viewsphere::session::CaptureRecord;
use viewsphere::{ImuSample, Session, SessionConfig, SessionReport};

use crate::protocol::{
    ClientMessage, ErrorCode, HintView, Rejection, ServerMessage, SnapshotMsg, StateMsg,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    AwaitHello,
    Active,
    Closed,
}

/// Reply to one inbound frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub reply: ServerMessage,
    /// The server closes the connection after sending `reply`.
    pub close: bool,
}

pub struct Connection {
    defaults: SessionConfig,
    phase: Phase,
    session: Option<Session>,
}

impl Connection {
    /// `defaults` is the server-side configuration that hello overrides
    /// are layered on.
    pub fn new(defaults: SessionConfig) -> Self {
        Connection {
            defaults,
            phase: Phase::AwaitHello,
            session: None,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.phase == Phase::Closed
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn handle_text(&mut self, text: &str) -> Step {
        match ClientMessage::parse(text) {
            Ok(msg) => self.handle(msg),
            Err(r) => self.reject(r),
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Step {
        match (self.phase, msg) {
            (Phase::Closed, _) => self.reject(Rejection::new(
                ErrorCode::BadOrder,
                "connection already closed",
            )),
            (Phase::AwaitHello, ClientMessage::Hello(overrides)) => {
                match self
                    .defaults
                    .with_overrides(&overrides)
                    .and_then(Session::new)
                {
                    Ok(session) => {
                        let config = session.config().to_flat();
                        self.session = Some(session);
                        self.phase = Phase::Active;
                        ok(ServerMessage::Ready { config })
                    }
                    Err(e) => self.reject(Rejection::new(ErrorCode::BadConfig, e.to_string())),
                }
            }
            (Phase::AwaitHello, _) => {
                self.reject(Rejection::new(ErrorCode::BadOrder, "hello must come first"))
            }
            (Phase::Active, ClientMessage::Hello(_)) => {
                self.reject(Rejection::new(ErrorCode::BadOrder, "duplicate hello"))
            }
            (Phase::Active, ClientMessage::Sample(record)) => {
                let result = ImuSample::try_from(record)
                    .map_err(|e| e.to_string())
                    .and_then(|s| self.active().ingest(&s).map_err(|e| e.to_string()));
                match result {
                    Ok(outcome) => {
                        let session = self.active();
                        let t_ms = session.gate().last_timestamp().unwrap_or_default();
                        ok(ServerMessage::State(StateMsg {
                            t_ms,
                            gate_status: outcome.status,
                            coverage_pct: session.coverage_pct(),
                            current_cell: session.current_pose().map(Into::into),
                            newly_covered: outcome.capture.is_some_and(|c| c.newly_covered),
                            captured: outcome.capture.is_some(),
                            baseline_set: session.baseline().is_some(),
                            hint: session.guidance().as_ref().map(HintView::from),
                        }))
                    }
                    Err(reason) => self.reject(Rejection::new(ErrorCode::BadSample, reason)),
                }
            }
            (Phase::Active, ClientMessage::SnapshotRequest) => {
                let session = self.active();
                let captures = session.captures().iter().map(CaptureRecord::from).collect();
                ok(ServerMessage::Snapshot(SnapshotMsg::new(
                    &session.snapshot(),
                    captures,
                )))
            }
            (Phase::Active, ClientMessage::Finalize) => {
                let report = self.active().finalize();
                self.phase = Phase::Closed;
                Step {
                    reply: ServerMessage::Report { report },
                    close: true,
                }
            }
        }
    }

    pub fn handle_binary(&mut self) -> Step {
        self.reject(Rejection::new(
            ErrorCode::BadMessage,
            "binary frames are not part of the protocol",
        ))
    }

    /// Report for the session as it stands, if hello was accepted.
    pub fn report(&self) -> Option<SessionReport> {
        self.session.as_ref().map(Session::finalize)
    }

    fn active(&mut self) -> &mut Session {
        self.session.as_mut().expect("active phase has a session")
    }

    fn reject(&mut self, r: Rejection) -> Step {
        self.phase = Phase::Closed;
        Step {
            reply: ServerMessage::error(&r),
            close: true,
        }
    }
}

fn ok(reply: ServerMessage) -> Step {
    Step {
        reply,
        close: false,
    }
}
