//! Motion-stability gate.
//!
//! The magnitudes of linear acceleration and angular velocity are smoothed
//! with a per-sample exponential moving average,
//! `â_k = α·â_{k−1} + (1−α)·‖a_k‖`, and a pose counts as stable once both
//! smoothed values have stayed at or below their thresholds for `hold_ms`
//! of sample time. Any excursion above a threshold drops the streak.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SessionError};
use crate::rotation::Quaternion;

/// One timestamped IMU reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Milliseconds since session start.
    pub t_ms: u64,
    pub q: Quaternion,
    /// Linear acceleration with gravity removed, m/s².
    pub accel: [f64; 3],
    /// Angular velocity, rad/s.
    pub gyro: [f64; 3],
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl ImuSample {
    pub fn accel_norm(&self) -> f64 {
        norm3(self.accel)
    }

    pub fn gyro_norm(&self) -> f64 {
        norm3(self.gyro)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// EMA retention factor in [0, 1).
    pub alpha: f64,
    /// Smoothed acceleration threshold, m/s².
    pub a_th: f64,
    /// Smoothed angular-velocity threshold, rad/s.
    pub omega_th: f64,
    pub hold_ms: u64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            alpha: 0.9,
            a_th: 0.5,
            omega_th: 0.3,
            hold_ms: 300,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::invalid("alpha", "must lie in [0, 1)"));
        }
        if !(self.a_th > 0.0 && self.a_th.is_finite()) {
            return Err(ConfigError::invalid("a_th", "must be positive"));
        }
        if !(self.omega_th > 0.0 && self.omega_th.is_finite()) {
            return Err(ConfigError::invalid("omega_th", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateStatus {
    /// No excursion seen since (re)start, hold window not yet elapsed.
    Warmup,
    Unstable,
    Stable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateState {
    pub a_hat: f64,
    pub omega_hat: f64,
    /// Start of the current below-threshold streak.
    pub below_since: Option<u64>,
    pub status: GateStatus,
    last_t_ms: Option<u64>,
    seeded: bool,
    disturbed: bool,
}

impl Default for GateState {
    fn default() -> Self {
        GateState {
            a_hat: 0.0,
            omega_hat: 0.0,
            below_since: None,
            status: GateStatus::Warmup,
            last_t_ms: None,
            seeded: false,
            disturbed: false,
        }
    }
}

impl GateState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.last_t_ms
    }

    /// Advances the gate by one reading given as raw magnitudes.
    pub fn update(
        &mut self,
        t_ms: u64,
        accel_norm: f64,
        gyro_norm: f64,
        cfg: &GateConfig,
    ) -> Result<GateStatus, SessionError> {
        if let Some(previous) = self.last_t_ms {
            if t_ms <= previous {
                return Err(SessionError::NonMonotonicTimestamp { previous, got: t_ms });
            }
        }
        self.last_t_ms = Some(t_ms);

        if self.seeded {
            self.a_hat = cfg.alpha * self.a_hat + (1.0 - cfg.alpha) * accel_norm;
            self.omega_hat = cfg.alpha * self.omega_hat + (1.0 - cfg.alpha) * gyro_norm;
        } else {
            self.a_hat = accel_norm;
            self.omega_hat = gyro_norm;
            self.seeded = true;
        }

        self.status = if self.a_hat <= cfg.a_th && self.omega_hat <= cfg.omega_th {
            let since = *self.below_since.get_or_insert(t_ms);
            if t_ms - since >= cfg.hold_ms {
                GateStatus::Stable
            } else if self.disturbed {
                GateStatus::Unstable
            } else {
                GateStatus::Warmup
            }
        } else {
            self.below_since = None;
            self.disturbed = true;
            GateStatus::Unstable
        };
        Ok(self.status)
    }

    /// Drops the smoothed values and any streak; the next sample reseeds.
    /// Timestamp ordering is still enforced across the reset.
    pub fn reset(&mut self) {
        *self = GateState {
            last_t_ms: self.last_t_ms,
            ..GateState::default()
        };
    }
}

/// Advances `state` with `sample` and returns the new status.
pub fn gate_update(
    state: &mut GateState,
    sample: &ImuSample,
    cfg: &GateConfig,
) -> Result<GateStatus, SessionError> {
    state.update(sample.t_ms, sample.accel_norm(), sample.gyro_norm(), cfg)
}

pub fn gate_reset(state: &mut GateState) {
    state.reset();
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> GateConfig {
        GateConfig::default()
    }

    fn feed(state: &mut GateState, t: u64, a: f64, w: f64) -> GateStatus {
        state.update(t, a, w, &cfg()).unwrap()
    }

    #[test]
    fn calm_stream_becomes_stable_after_hold() {
        let mut g = GateState::new();
        let mut statuses = Vec::new();
        for t in (0..=400).step_by(50) {
            statuses.push(feed(&mut g, t, 0.0, 0.0));
        }
        // 0..250 ms pending, stable from 300 ms on
        assert!(statuses[..6].iter().all(|s| *s == GateStatus::Warmup));
        assert!(statuses[6..].iter().all(|s| *s == GateStatus::Stable));
    }

    #[test]
    fn ema_fixed_point() {
        let mut g = GateState::new();
        for t in 0..20 {
            feed(&mut g, t, 0.25, 0.125);
            assert_eq!(g.a_hat, 0.25);
            assert_eq!(g.omega_hat, 0.125);
        }
    }

    #[test]
    fn ema_from_zero_matches_closed_form() {
        // â(0) = 0, then five unit inputs: 1 − 0.9⁵
        let mut g = GateState::new();
        feed(&mut g, 0, 0.0, 0.0);
        for t in 1..=5 {
            feed(&mut g, t, 1.0, 0.0);
        }
        assert!((g.a_hat - 0.40951).abs() < 1e-12);
    }

    #[test]
    fn excursion_clears_streak() {
        let mut g = GateState::new();
        for t in (0..=300).step_by(10) {
            feed(&mut g, t, 0.0, 0.0);
        }
        assert_eq!(g.status, GateStatus::Stable);
        assert_eq!(feed(&mut g, 310, 50.0, 0.0), GateStatus::Unstable);
        assert_eq!(g.below_since, None);
        let mut t = 320;
        while feed(&mut g, t, 0.0, 0.0) != GateStatus::Stable {
            assert_eq!(g.status, GateStatus::Unstable);
            t += 10;
        }
        let since = g.below_since.unwrap();
        assert!(t - since >= 300);
    }

    #[test]
    fn non_monotonic_timestamps_rejected() {
        let mut g = GateState::new();
        feed(&mut g, 10, 0.0, 0.0);
        assert_eq!(
            g.update(10, 0.0, 0.0, &cfg()),
            Err(SessionError::NonMonotonicTimestamp {
                previous: 10,
                got: 10
            })
        );
    }

    #[test]
    fn reset_behaviour() {
        let mut g = GateState::new();
        for t in (0..=500).step_by(10) {
            feed(&mut g, t, 0.0, 0.0);
        }
        assert_eq!(g.status, GateStatus::Stable);
        gate_reset(&mut g);
        assert_eq!(g.below_since, None);
        assert_eq!(feed(&mut g, 510, 0.4, 0.0), GateStatus::Warmup);
        // reseeded from the first post-reset sample, not blended
        assert_eq!(g.a_hat, 0.4);
        for t in (520..=810).step_by(10) {
            feed(&mut g, t, 0.4, 0.0);
        }
        assert_eq!(g.status, GateStatus::Stable);
        assert!(g.update(810, 0.0, 0.0, &cfg()).is_err());
    }

    #[test]
    fn first_sample_seeds_directly() {
        let mut g = GateState::new();
        assert_eq!(feed(&mut g, 0, 3.0, 0.0), GateStatus::Unstable);
        assert_eq!(g.a_hat, 3.0);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(GateConfig { alpha: 1.0, ..cfg() }.validate().is_err());
        assert!(GateConfig { a_th: 0.0, ..cfg() }.validate().is_err());
        assert!(GateConfig { omega_th: -1.0, ..cfg() }.validate().is_err());
    }

    fn stream() -> impl Strategy<Value = Vec<(u64, f64, f64)>> {
        prop::collection::vec((1u64..80, 0.0f64..1.5, 0.0f64..0.8), 1..200).prop_map(|v| {
            let mut t = 0;
            v.into_iter()
                .map(|(dt, a, w)| {
                    t += dt;
                    (t, a, w)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn recursive_matches_closed_form(s in stream(), alpha in 0.0f64..0.99) {
            let c = GateConfig { alpha, ..cfg() };
            let mut g = GateState::new();
            for (t, a, w) in &s {
                g.update(*t, *a, *w, &c).unwrap();
            }
            let k = s.len() - 1;
            let mut closed = alpha.powi(k as i32) * s[0].1;
            for (i, (_, a, _)) in s.iter().enumerate().skip(1) {
                closed += (1.0 - alpha) * alpha.powi((k - i) as i32) * a;
            }
            prop_assert!((g.a_hat - closed).abs() < 1e-12);
        }

        #[test]
        fn no_stable_before_hold_after_excursion(s in stream()) {
            let c = cfg();
            let mut g = GateState::new();
            let mut last_hot: Option<u64> = None;
            for (t, a, w) in s {
                let status = g.update(t, a, w, &c).unwrap();
                if g.a_hat > c.a_th || g.omega_hat > c.omega_th {
                    last_hot = Some(t);
                }
                if status == GateStatus::Stable {
                    prop_assert!(g.a_hat <= c.a_th && g.omega_hat <= c.omega_th);
                    if let Some(h) = last_hot {
                        prop_assert!(t >= h + c.hold_ms);
                    }
                }
            }
        }

        #[test]
        fn raising_thresholds_never_destabilises(s in stream(), da in 0.0f64..1.0, dw in 0.0f64..1.0) {
            let lo = cfg();
            let hi = GateConfig { a_th: lo.a_th + da, omega_th: lo.omega_th + dw, ..lo };
            let (mut g1, mut g2) = (GateState::new(), GateState::new());
            for (t, a, w) in s {
                let s1 = g1.update(t, a, w, &lo).unwrap();
                let s2 = g2.update(t, a, w, &hi).unwrap();
                if s1 == GateStatus::Stable {
                    prop_assert_eq!(s2, GateStatus::Stable);
                }
            }
        }
    }
}
