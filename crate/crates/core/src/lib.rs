//! Viewpoint coverage engine for object-centered mobile capture.
//!
//! A stream of IMU samples is gated for stability, turned into viewing
//! directions relative to the first stable pose, binned on a
//! longitude–latitude grid and summarized as area-weighted coverage.
//!
//! ```
//! use viewsphere::{Quaternion, Session, SessionConfig, ImuSample};
//!
//! let mut session = Session::new(SessionConfig::default()).unwrap();
//! for k in 0..20 {
//!     let sample = ImuSample { t_ms: k * 20, q: Quaternion::IDENTITY, accel: [0.0; 3], gyro: [0.0; 3] };
//!     session.ingest(&sample).unwrap();
//! }
//! assert_eq!(session.coverage().count(), 1);
//! ```

pub mod config;
pub mod error;
pub mod gate;
pub mod grid;
pub mod io;
pub mod offline;
pub mod rotation;
pub mod session;
pub mod synth;

pub use config::{ConfigOverrides, FlatConfig, RecapturePolicy, SessionConfig};
pub use error::{ConfigError, MathError, SessionError};
pub use gate::{gate_reset, gate_update, GateConfig, GateState, GateStatus, ImuSample};
pub use grid::{
    band_report, cell_area, quantize, refine_display, BandRecord, BandReport, CellIndex,
    CoverageMatrix, GridSpec, ThetaBand,
};
pub use rotation::{
    quat_to_dcm, relative_rotation, sat_phi, to_spherical, view_direction, wrap_theta,
    Quaternion, RotationMatrix, SphericalAngles, ViewDirection,
};
pub use session::{
    CaptureEvent, GuidanceHint, IngestOutcome, Pose, Session, SessionReport, Snapshot,
};
