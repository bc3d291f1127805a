//! Browser bindings for the coverage engine.
//!
//! Three things are exposed to the page: a gated capture session steered by
//! yaw/pitch, display refinement of an arbitrary coverage bit string, and
//! the per-row cell-area profile of a grid. Everything crosses the boundary
//! as numbers or JSON strings.

use serde::Serialize;
use viewsphere::rotation::orientation_looking_at;
use viewsphere::{
    refine_display, ConfigOverrides, CoverageMatrix, GateStatus, GridSpec, ImuSample, Quaternion,
    Session, SessionConfig,
};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoState {
    pub gate_status: GateStatus,
    pub coverage_pct: f64,
    pub captured: bool,
    pub newly_covered: bool,
    pub baseline_set: bool,
    /// Current cell as `[p, t]`.
    pub cell: Option<[usize; 2]>,
    pub hint_yaw_deg: Option<f64>,
    pub hint_pitch_deg: Option<f64>,
}

/// Session driven by a virtual camera.
pub struct DemoCore {
    session: Session,
    last_t: Option<u64>,
}

impl DemoCore {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self, String> {
        let cfg = SessionConfig::default()
            .with_overrides(&ConfigOverrides {
                grid_theta: Some(n_theta),
                grid_phi: Some(n_phi),
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
        Ok(DemoCore {
            session: Session::new(cfg).map_err(|e| e.to_string())?,
            last_t: None,
        })
    }

    /// One sample with the camera looking at (`yaw_deg`, `pitch_deg`) relative
    /// to its starting direction. Timestamps that do not advance are bumped
    /// by one millisecond.
    pub fn step(
        &mut self,
        t_ms: u64,
        yaw_deg: f64,
        pitch_deg: f64,
        accel: f64,
        gyro: f64,
    ) -> Result<DemoState, String> {
        let t_ms = match self.last_t {
            Some(prev) if t_ms <= prev => prev + 1,
            _ => t_ms,
        };
        self.last_t = Some(t_ms);
        let pitch = pitch_deg.clamp(-89.999, 90.0).to_radians();
        let q = orientation_looking_at(Quaternion::IDENTITY, yaw_deg.to_radians(), pitch);
        let out = self
            .session
            .ingest(&ImuSample {
                t_ms,
                q,
                accel: [accel, 0.0, 0.0],
                gyro: [gyro, 0.0, 0.0],
            })
            .map_err(|e| e.to_string())?;
        let hint = self.session.guidance();
        Ok(DemoState {
            gate_status: out.status,
            coverage_pct: self.session.coverage_pct(),
            captured: out.capture.is_some(),
            newly_covered: out.capture.is_some_and(|c| c.newly_covered),
            baseline_set: self.session.baseline().is_some(),
            cell: self.session.current_pose().map(|p| [p.cell.p, p.cell.t]),
            hint_yaw_deg: hint.map(|h| h.yaw_delta.to_degrees()),
            hint_pitch_deg: hint.map(|h| h.pitch_delta.to_degrees()),
        })
    }

    pub fn raw_bits(&self) -> String {
        self.session.coverage().to_bit_string()
    }

    pub fn refined_bits(&self) -> String {
        refine_display(self.session.coverage()).to_bit_string()
    }

    pub fn report_json(&self) -> String {
        self.session.finalize().to_json()
    }
}

/// Refined bit string for a row-major coverage bit string.
pub fn refine_bits(n_theta: usize, n_phi: usize, pole_zone_deg: f64, bits: &str) -> Result<String, String> {
    let spec = GridSpec::new(n_theta, n_phi, pole_zone_deg).map_err(|e| e.to_string())?;
    let raw = CoverageMatrix::from_bit_string(spec, bits)
        .ok_or_else(|| format!("expected {} characters of 0/1", spec.cell_count()))?;
    Ok(refine_display(&raw).to_bit_string())
}

/// Area-weighted coverage of a bit string, percent.
pub fn bits_coverage(n_theta: usize, n_phi: usize, bits: &str) -> Result<f64, String> {
    let spec = GridSpec::new(n_theta, n_phi, 0.0).map_err(|e| e.to_string())?;
    CoverageMatrix::from_bit_string(spec, bits)
        .map(|m| m.coverage_rate())
        .ok_or_else(|| format!("expected {} characters of 0/1", spec.cell_count()))
}

/// Share of the sphere held by one cell of each row, percent, row 0 first.
pub fn area_profile(n_theta: usize, n_phi: usize) -> Result<Vec<f64>, String> {
    let spec = GridSpec::new(n_theta, n_phi, 0.0).map_err(|e| e.to_string())?;
    Ok(spec
        .row_areas()
        .into_iter()
        .map(|a| 100.0 * a / (4.0 * std::f64::consts::PI))
        .collect())
}

#[wasm_bindgen]
pub struct DemoSession {
    inner: DemoCore,
}

#[wasm_bindgen]
impl DemoSession {
    #[wasm_bindgen(constructor)]
    pub fn new(n_theta: usize, n_phi: usize) -> Result<DemoSession, JsError> {
        DemoCore::new(n_theta, n_phi)
            .map(|inner| DemoSession { inner })
            .map_err(|e| JsError::new(&e))
    }

    /// Feeds one sample and returns the resulting state as JSON.
    pub fn step(
        &mut self,
        t_ms: f64,
        yaw_deg: f64,
        pitch_deg: f64,
        accel: f64,
        gyro: f64,
    ) -> Result<String, JsError> {
        let state = self
            .inner
            .step(t_ms.max(0.0) as u64, yaw_deg, pitch_deg, accel, gyro)
            .map_err(|e| JsError::new(&e))?;
        Ok(serde_json::to_string(&state).expect("state serializes"))
    }

    #[wasm_bindgen(js_name = rawBits)]
    pub fn raw_bits(&self) -> String {
        self.inner.raw_bits()
    }

    #[wasm_bindgen(js_name = refinedBits)]
    pub fn refined_bits(&self) -> String {
        self.inner.refined_bits()
    }

    #[wasm_bindgen(js_name = reportJson)]
    pub fn report_json(&self) -> String {
        self.inner.report_json()
    }
}

#[wasm_bindgen(js_name = refineGrid)]
pub fn refine_grid(n_theta: usize, n_phi: usize, pole_zone_deg: f64, bits: &str) -> Result<String, JsError> {
    refine_bits(n_theta, n_phi, pole_zone_deg, bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = gridCoverage)]
pub fn grid_coverage(n_theta: usize, n_phi: usize, bits: &str) -> Result<f64, JsError> {
    bits_coverage(n_theta, n_phi, bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cellAreaProfile)]
pub fn cell_area_profile(n_theta: usize, n_phi: usize) -> Result<Vec<f64>, JsError> {
    area_profile(n_theta, n_phi).map_err(|e| JsError::new(&e))
}
