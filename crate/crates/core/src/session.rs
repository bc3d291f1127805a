//! One acquisition run: gate → relative pose → grid cell → coverage.
//!
//! Nothing past the gate runs while the device is moving. The first stable
//! orientation becomes the baseline `R₀`; every later stable sample is
//! expressed as `R₀ᵀ·R(t)`, its forward axis is projected onto the sphere
//! and the matching grid cell is marked.

use serde::{Deserialize, Serialize};

use crate::config::{FlatConfig, RecapturePolicy, SessionConfig};
use crate::error::{ConfigError, MathError, SessionError};
use crate::gate::{gate_update, GateState, GateStatus, ImuSample};
use crate::grid::{
    band_report, refine_display, BandRecord, CellIndex, CoverageMatrix, ThetaBand,
};
use crate::rotation::{
    quat_to_dcm, relative_rotation, to_spherical, view_direction, wrap_theta, RotationMatrix,
    SphericalAngles, ViewDirection,
};

const TIE_EPS: f64 = 1e-12;

/// Latest stable pose on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub t_ms: u64,
    pub direction: ViewDirection,
    pub angles: SphericalAngles,
    pub cell: CellIndex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureEvent {
    pub t_ms: u64,
    pub angles: SphericalAngles,
    pub cell: CellIndex,
    /// The cell went from uncovered to covered at this event.
    pub newly_covered: bool,
    /// Area-weighted coverage (percent) after this capture.
    pub coverage_after: f64,
}

/// Where to move next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceHint {
    pub target_cell: CellIndex,
    /// Center of the target cell.
    pub target_angles: SphericalAngles,
    /// Longitude change from the current pose, wrapped into (−π, π].
    pub yaw_delta: f64,
    pub pitch_delta: f64,
    pub uncovered_area_pct: f64,
}

/// Result of feeding one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOutcome {
    pub status: GateStatus,
    /// Pose computed for this sample; `None` while the gate is not stable.
    pub pose: Option<Pose>,
    pub capture: Option<CaptureEvent>,
    /// This sample established the baseline.
    pub baseline_set: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub coverage_pct: f64,
    pub raw: CoverageMatrix,
    pub refined: CoverageMatrix,
    pub capture_count: usize,
    pub gate_status: GateStatus,
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    baseline: Option<RotationMatrix>,
    gate: GateState,
    coverage: CoverageMatrix,
    coverage_pct: f64,
    captures: Vec<CaptureEvent>,
    sample_count: u64,
    first_visit: Vec<Option<u64>>,
    current: Option<Pose>,
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Session {
            config,
            baseline: None,
            gate: GateState::new(),
            coverage: CoverageMatrix::new(config.grid),
            coverage_pct: 0.0,
            captures: Vec::new(),
            sample_count: 0,
            first_visit: vec![None; config.grid.cell_count()],
            current: None,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn baseline(&self) -> Option<&RotationMatrix> {
        self.baseline.as_ref()
    }

    pub fn gate(&self) -> &GateState {
        &self.gate
    }

    pub fn coverage(&self) -> &CoverageMatrix {
        &self.coverage
    }

    pub fn coverage_pct(&self) -> f64 {
        self.coverage_pct
    }

    pub fn captures(&self) -> &[CaptureEvent] {
        &self.captures
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn current_pose(&self) -> Option<&Pose> {
        self.current.as_ref()
    }

    /// Feeds one sample through the gate and, when stable, the pose chain.
    pub fn ingest(&mut self, sample: &ImuSample) -> Result<IngestOutcome, SessionError> {
        if !sample.accel.iter().all(|v| v.is_finite()) {
            return Err(MathError::NonFinite("acceleration").into());
        }
        if !sample.gyro.iter().all(|v| v.is_finite()) {
            return Err(MathError::NonFinite("angular velocity").into());
        }
        let status = gate_update(&mut self.gate, sample, &self.config.gate)?;
        self.sample_count += 1;

        let mut outcome = IngestOutcome {
            status,
            pose: None,
            capture: None,
            baseline_set: false,
        };
        if status != GateStatus::Stable {
            return Ok(outcome);
        }

        let current = quat_to_dcm(&sample.q);
        let baseline = match self.baseline {
            Some(b) => b,
            None => {
                self.baseline = Some(current);
                outcome.baseline_set = true;
                current
            }
        };
        let direction = view_direction(&relative_rotation(&baseline, &current));
        let angles = to_spherical(&direction);
        let cell = self.config.grid.quantize(angles);
        let pose = Pose {
            t_ms: sample.t_ms,
            direction,
            angles,
            cell,
        };
        self.current = Some(pose);
        outcome.pose = Some(pose);
        if outcome.baseline_set {
            return Ok(outcome);
        }

        let newly_covered = !self.coverage.get(cell);
        if !newly_covered && self.config.recapture_policy == RecapturePolicy::Once {
            return Ok(outcome);
        }
        if newly_covered {
            self.coverage.mark(cell);
            self.coverage_pct = self.coverage.coverage_rate();
            self.first_visit[self.config.grid.index(cell)] = Some(sample.t_ms);
        }
        let event = CaptureEvent {
            t_ms: sample.t_ms,
            angles,
            cell,
            newly_covered,
            coverage_after: self.coverage_pct,
        };
        self.captures.push(event);
        outcome.capture = Some(event);
        Ok(outcome)
    }

    /// Nearest uncovered cell to the current viewing direction.
    ///
    /// Distance is the great-circle angle to the cell center. Ties go to the
    /// larger cell, then to the lexicographically smaller `(p, t)`.
    pub fn guidance(&self) -> Option<GuidanceHint> {
        let pose = self.current?;
        self.baseline?;
        let spec = &self.config.grid;
        let areas = spec.row_areas();
        let mut best: Option<(CellIndex, f64, f64)> = None;
        for cell in self.coverage.uncovered_cells() {
            let d = pose.direction.angle_to(&spec.cell_center_direction(cell));
            let a = areas[cell.p];
            let better = match best {
                None => true,
                Some((_, bd, ba)) => d < bd - TIE_EPS || ((d - bd).abs() <= TIE_EPS && a > ba + TIE_EPS),
            };
            if better {
                best = Some((cell, d, a));
            }
        }
        let (target_cell, _, _) = best?;
        let target_angles = spec.cell_center(target_cell);
        Some(GuidanceHint {
            target_cell,
            target_angles,
            yaw_delta: wrap_theta(target_angles.theta - pose.angles.theta).unwrap_or(0.0),
            pitch_delta: target_angles.phi - pose.angles.phi,
            uncovered_area_pct: 100.0 - self.coverage_pct,
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            coverage_pct: self.coverage_pct,
            raw: self.coverage.clone(),
            refined: refine_display(&self.coverage),
            capture_count: self.captures.len(),
            gate_status: self.gate.status,
        }
    }

    pub fn finalize(&self) -> SessionReport {
        let angles: Vec<_> = self.captures.iter().map(|c| c.angles).collect();
        let bands = band_report(&angles, &ThetaBand::quadrants(), &self.coverage)
            .expect("default quadrants form a partition")
            .bands;
        SessionReport {
            format: REPORT_FORMAT.to_string(),
            version: REPORT_VERSION,
            config: self.config.to_flat(),
            sample_count: self.sample_count,
            capture_count: self.captures.len(),
            coverage_pct: self.coverage_pct,
            final_gate_status: self.gate.status,
            baseline: self.baseline.map(|b| b.0),
            captures: self.captures.iter().map(CaptureRecord::from).collect(),
            bands,
            first_visits: self
                .first_visit
                .iter()
                .enumerate()
                .filter_map(|(i, t)| {
                    t.map(|t_ms| {
                        let cell = self.config.grid.cell_at(i);
                        FirstVisit {
                            p: cell.p,
                            t: cell.t,
                            t_ms,
                        }
                    })
                })
                .collect(),
        }
    }
}

pub const REPORT_FORMAT: &str = "viewsphere-session-report";
pub const REPORT_VERSION: u32 = 1;

/// Serialized end-of-session summary. Angles are degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub format: String,
    pub version: u32,
    pub config: FlatConfig,
    pub sample_count: u64,
    pub capture_count: usize,
    pub coverage_pct: f64,
    pub final_gate_status: GateStatus,
    /// Row-major `R₀`, absent when no stable sample was seen.
    pub baseline: Option<[[f64; 3]; 3]>,
    pub captures: Vec<CaptureRecord>,
    pub bands: Vec<BandRecord>,
    pub first_visits: Vec<FirstVisit>,
}

impl SessionReport {
    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub t_ms: u64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub p: usize,
    pub t: usize,
    pub newly_covered: bool,
    pub coverage_after_pct: f64,
}

impl From<&CaptureEvent> for CaptureRecord {
    fn from(c: &CaptureEvent) -> Self {
        let (theta_deg, phi_deg) = c.angles.to_degrees();
        CaptureRecord {
            t_ms: c.t_ms,
            theta_deg,
            phi_deg,
            p: c.cell.p,
            t: c.cell.t,
            newly_covered: c.newly_covered,
            coverage_after_pct: c.coverage_after,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstVisit {
    pub p: usize,
    pub t: usize,
    pub t_ms: u64,
}
