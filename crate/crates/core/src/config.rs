//! Flat, user-facing session settings.
//!
//! The same keys are used by the config file, command-line flags and the
//! live protocol's `hello` overrides, layered over the built-in defaults.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::gate::GateConfig;
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecapturePolicy {
    /// Capture only when the current cell is not yet covered.
    #[default]
    Once,
    /// Capture on every stable sample.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SessionConfig {
    pub gate: GateConfig,
    pub grid: GridSpec,
    pub recapture_policy: RecapturePolicy,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.gate.validate()?;
        self.grid.validate()
    }

    pub fn with_overrides(&self, o: &ConfigOverrides) -> Result<SessionConfig, ConfigError> {
        let mut c = *self;
        if let Some(v) = o.grid_theta {
            c.grid.n_theta = v;
        }
        if let Some(v) = o.grid_phi {
            c.grid.n_phi = v;
        }
        if let Some(v) = o.pole_zone {
            c.grid.pole_zone_deg = v;
        }
        if let Some(v) = o.alpha {
            c.gate.alpha = v;
        }
        if let Some(v) = o.a_th {
            c.gate.a_th = v;
        }
        if let Some(v) = o.omega_th {
            c.gate.omega_th = v;
        }
        if let Some(v) = o.hold_ms {
            c.gate.hold_ms = v;
        }
        if let Some(v) = o.recapture {
            c.recapture_policy = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_flat(&self) -> FlatConfig {
        FlatConfig {
            grid_theta: self.grid.n_theta,
            grid_phi: self.grid.n_phi,
            pole_zone: self.grid.pole_zone_deg,
            alpha: self.gate.alpha,
            a_th: self.gate.a_th,
            omega_th: self.gate.omega_th,
            hold_ms: self.gate.hold_ms,
            recapture: self.recapture_policy,
        }
    }
}

/// Fully resolved settings in their flat, serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatConfig {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Degrees.
    pub pole_zone: f64,
    pub alpha: f64,
    /// m/s².
    pub a_th: f64,
    /// rad/s.
    pub omega_th: f64,
    pub hold_ms: u64,
    pub recapture: RecapturePolicy,
}

/// Partial settings; unset keys fall through to the layer below.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub grid_theta: Option<usize>,
    pub grid_phi: Option<usize>,
    pub pole_zone: Option<f64>,
    pub alpha: Option<f64>,
    pub a_th: Option<f64>,
    pub omega_th: Option<f64>,
    pub hold_ms: Option<u64>,
    pub recapture: Option<RecapturePolicy>,
}

impl ConfigOverrides {
    /// Keys set in `self` win over keys set in `lower`.
    pub fn over(self, lower: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            grid_theta: self.grid_theta.or(lower.grid_theta),
            grid_phi: self.grid_phi.or(lower.grid_phi),
            pole_zone: self.pole_zone.or(lower.pole_zone),
            alpha: self.alpha.or(lower.alpha),
            a_th: self.a_th.or(lower.a_th),
            omega_th: self.omega_th.or(lower.omega_th),
            hold_ms: self.hold_ms.or(lower.hold_ms),
            recapture: self.recapture.or(lower.recapture),
        }
    }
}
