//! Synthetic IMU trajectories for fixtures and tests.
//!
//! Every trajectory starts with the device held still at `reference` for
//! `settle_ms`, so the session baseline is exactly `reference` and the
//! requested longitude/latitude are the ones the engine recovers. The
//! reported angular velocity is the true angular speed of the motion (plus
//! optional noise); linear acceleration is zero apart from noise and
//! injected bursts.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gate::ImuSample;
use crate::rotation::{orientation_looking_at, Quaternion};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
}

fn invalid(name: &'static str, reason: impl Into<String>) -> SynthError {
    SynthError::InvalidParam {
        name,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// Full yaw sweeps at a fixed latitude.
    Orbit,
    /// Yaw sweeps while latitude ramps from the south to the north pole.
    Spiral,
    /// Randomly drifting yaw/pitch rates with a bounded angular speed.
    RandomWalk,
}

/// Periodic bursts of large linear acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bursts {
    /// Burst period, measured from the end of the settle phase.
    pub every_ms: u64,
    pub length_ms: u64,
    /// Acceleration magnitude during a burst, m/s².
    pub accel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub pattern: Pattern,
    pub rate_hz: f64,
    /// Yaw rate during sweeps, also the pitch rate on transition legs.
    pub yaw_rate_deg_s: f64,
    pub settle_ms: u64,
    /// Orbit latitude.
    pub orbit_pitch_deg: f64,
    /// Orbit revolutions.
    pub revolutions: f64,
    /// Spiral turns between the poles.
    pub spiral_turns: u32,
    /// Random-walk duration after settling.
    pub duration_s: f64,
    /// Random-walk angular speed limit.
    pub max_rate_deg_s: f64,
    pub accel_noise: f64,
    pub gyro_noise: f64,
    pub bursts: Option<Bursts>,
    pub reference: Quaternion,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            pattern: Pattern::Orbit,
            rate_hz: 20.0,
            yaw_rate_deg_s: 14.0,
            settle_ms: 500,
            orbit_pitch_deg: 0.0,
            revolutions: 1.0,
            spiral_turns: 36,
            duration_s: 120.0,
            max_rate_deg_s: 14.0,
            accel_noise: 0.0,
            gyro_noise: 0.0,
            bursts: None,
            reference: Quaternion::IDENTITY,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.rate_hz > 0.0 && self.rate_hz <= 1000.0) {
            return Err(invalid("rate_hz", "must lie in (0, 1000]"));
        }
        if !(self.yaw_rate_deg_s > 0.0 && self.yaw_rate_deg_s.is_finite()) {
            return Err(invalid("yaw_rate", "must be positive"));
        }
        if !(self.orbit_pitch_deg > -90.0 && self.orbit_pitch_deg <= 90.0) {
            return Err(invalid("pitch", "must lie in (-90, 90]"));
        }
        if !(self.revolutions > 0.0 && self.revolutions <= 1000.0) {
            return Err(invalid("revolutions", "must lie in (0, 1000]"));
        }
        if self.spiral_turns == 0 || self.spiral_turns > 10_000 {
            return Err(invalid("turns", "must lie in [1, 10000]"));
        }
        if !(self.duration_s > 0.0 && self.duration_s <= 86_400.0) {
            return Err(invalid("duration", "must lie in (0, 86400]"));
        }
        if !(self.max_rate_deg_s > 0.0 && self.max_rate_deg_s.is_finite()) {
            return Err(invalid("max_rate", "must be positive"));
        }
        if !(self.accel_noise >= 0.0 && self.accel_noise.is_finite()) {
            return Err(invalid("accel_noise", "must be non-negative"));
        }
        if !(self.gyro_noise >= 0.0 && self.gyro_noise.is_finite()) {
            return Err(invalid("gyro_noise", "must be non-negative"));
        }
        if let Some(b) = self.bursts {
            if b.every_ms == 0 || b.length_ms == 0 || b.length_ms >= b.every_ms {
                return Err(invalid("bursts", "need 0 < length < period"));
            }
            if !(b.accel >= 0.0 && b.accel.is_finite()) {
                return Err(invalid("burst_accel", "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Generated samples plus the `[start, end)` intervals of injected bursts.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<ImuSample>,
    pub bursts: Vec<(u64, u64)>,
}

/// One kinematic step: target angles and angular speed (rad/s).
struct Waypoint {
    theta: f64,
    phi: f64,
    yaw_rate: f64,
    pitch_rate: f64,
}

pub fn generate(params: &SynthParams) -> Result<Trajectory, SynthError> {
    params.validate()?;
    let dt = 1.0 / params.rate_hz;
    let rate = params.yaw_rate_deg_s.to_radians();
    let mut path: Vec<Waypoint> = Vec::new();

    let settle_steps = (params.settle_ms as f64 / 1000.0 * params.rate_hz).ceil() as usize + 1;
    for _ in 0..settle_steps {
        path.push(Waypoint {
            theta: 0.0,
            phi: 0.0,
            yaw_rate: 0.0,
            pitch_rate: 0.0,
        });
    }

    match params.pattern {
        Pattern::Orbit => {
            let pitch = params.orbit_pitch_deg.to_radians();
            pitch_leg(&mut path, 0.0, 0.0, pitch, rate, dt);
            let steps = (TAU * params.revolutions / (rate * dt)).ceil() as usize;
            for k in 1..=steps {
                let theta = TAU * params.revolutions * k as f64 / steps as f64;
                path.push(Waypoint {
                    theta,
                    phi: pitch,
                    yaw_rate: rate,
                    pitch_rate: 0.0,
                });
            }
        }
        Pattern::Spiral => {
            pitch_leg(&mut path, 0.0, 0.0, -FRAC_PI_2, rate, dt);
            let sweep = TAU * params.spiral_turns as f64;
            let steps = (sweep / (rate * dt)).ceil() as usize;
            let pitch_rate = std::f64::consts::PI / (steps as f64 * dt);
            for k in 1..=steps {
                let f = k as f64 / steps as f64;
                path.push(Waypoint {
                    theta: sweep * f,
                    phi: -FRAC_PI_2 + std::f64::consts::PI * f,
                    yaw_rate: rate,
                    pitch_rate,
                });
            }
        }
        Pattern::RandomWalk => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed_0001);
            let max_rate = params.max_rate_deg_s.to_radians();
            let kick = Normal::new(0.0, max_rate * 0.5 * dt.sqrt()).expect("finite sigma");
            let steps = (params.duration_s * params.rate_hz).ceil() as usize;
            let (mut theta, mut phi) = (0.0f64, 0.0f64);
            let (mut yr, mut pr) = (0.0f64, 0.0f64);
            let phi_limit = 89f64.to_radians();
            for _ in 0..steps {
                yr += kick.sample(&mut rng);
                pr += kick.sample(&mut rng);
                let speed = (yr * yr + pr * pr).sqrt();
                if speed > max_rate {
                    yr *= max_rate / speed;
                    pr *= max_rate / speed;
                }
                theta += yr * dt;
                phi += pr * dt;
                if phi.abs() > phi_limit {
                    phi = phi.signum() * phi_limit - (phi - phi.signum() * phi_limit);
                    pr = -pr;
                }
                path.push(Waypoint {
                    theta,
                    phi,
                    yaw_rate: yr.abs(),
                    pitch_rate: pr.abs(),
                });
            }
        }
    }

    Ok(render(params, &path))
}

/// Pitch from `from` to `to` at fixed longitude.
fn pitch_leg(path: &mut Vec<Waypoint>, theta: f64, from: f64, to: f64, rate: f64, dt: f64) {
    let span = (to - from).abs();
    if span == 0.0 {
        return;
    }
    let steps = (span / (rate * dt)).ceil() as usize;
    for k in 1..=steps {
        path.push(Waypoint {
            theta,
            phi: from + (to - from) * k as f64 / steps as f64,
            yaw_rate: 0.0,
            pitch_rate: rate,
        });
    }
}

fn render(params: &SynthParams, path: &[Waypoint]) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let a_noise = Normal::new(0.0, params.accel_noise).expect("finite sigma");
    let w_noise = Normal::new(0.0, params.gyro_noise).expect("finite sigma");
    let mut noise3 = |d: &Normal<f64>, on: bool| -> [f64; 3] {
        if on {
            [d.sample(&mut rng), d.sample(&mut rng), d.sample(&mut rng)]
        } else {
            [0.0; 3]
        }
    };

    let mut samples = Vec::with_capacity(path.len());
    let mut bursts = Vec::new();
    let mut last_burst = None;
    for (k, wp) in path.iter().enumerate() {
        let t_ms = (k as f64 * 1000.0 / params.rate_hz).round() as u64;
        let mut accel = noise3(&a_noise, params.accel_noise > 0.0);
        let gn = noise3(&w_noise, params.gyro_noise > 0.0);
        let gyro = [wp.pitch_rate + gn[0], wp.yaw_rate + gn[1], gn[2]];

        if let Some(b) = params.bursts {
            if t_ms >= params.settle_ms {
                let since = t_ms - params.settle_ms;
                let cycle = since / b.every_ms;
                let phase = since % b.every_ms;
                if cycle >= 1 && phase < b.length_ms {
                    let start = params.settle_ms + cycle * b.every_ms;
                    if last_burst != Some(cycle) {
                        bursts.push((start, start + b.length_ms));
                        last_burst = Some(cycle);
                    }
                    accel[0] += b.accel;
                }
            }
        }

        samples.push(ImuSample {
            t_ms,
            q: orientation_looking_at(params.reference, wp.theta, wp.phi),
            accel,
            gyro,
        });
    }
    Trajectory { samples, bursts }
}

/// Draws a uniformly distributed unit quaternion.
pub fn random_orientation(rng: &mut impl Rng) -> Quaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            if let Ok(q) = Quaternion::from_array(v.map(|c| c / n)) {
                return q;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps_strictly_increase() {
        for pattern in [Pattern::Orbit, Pattern::Spiral, Pattern::RandomWalk] {
            let p = SynthParams {
                pattern,
                spiral_turns: 4,
                duration_s: 10.0,
                rate_hz: 100.0,
                ..Default::default()
            };
            let tr = generate(&p).unwrap();
            assert!(tr.samples.windows(2).all(|w| w[0].t_ms < w[1].t_ms));
            assert_eq!(tr.samples[0].t_ms, 0);
        }
    }

    #[test]
    fn angular_speed_respects_limit() {
        let p = SynthParams {
            pattern: Pattern::RandomWalk,
            duration_s: 60.0,
            ..Default::default()
        };
        let limit = p.max_rate_deg_s.to_radians() + 1e-12;
        assert!(generate(&p).unwrap().samples.iter().all(|s| s.gyro_norm() <= limit));
    }

    #[test]
    fn deterministic_for_seed() {
        let p = SynthParams {
            pattern: Pattern::RandomWalk,
            accel_noise: 0.05,
            gyro_noise: 0.01,
            duration_s: 5.0,
            ..Default::default()
        };
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        let other = SynthParams { seed: 2, ..p };
        assert_ne!(generate(&p).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn bursts_are_reported() {
        let p = SynthParams {
            bursts: Some(Bursts {
                every_ms: 5000,
                length_ms: 1000,
                accel: 5.0,
            }),
            ..Default::default()
        };
        let tr = generate(&p).unwrap();
        assert!(!tr.bursts.is_empty());
        for s in &tr.samples {
            let inside = tr.bursts.iter().any(|(a, b)| s.t_ms >= *a && s.t_ms < *b);
            assert_eq!(inside, s.accel_norm() >= 5.0, "t={}", s.t_ms);
        }
    }

    #[test]
    fn invalid_params() {
        let bad = [
            SynthParams { rate_hz: 0.0, ..Default::default() },
            SynthParams { yaw_rate_deg_s: -1.0, ..Default::default() },
            SynthParams { spiral_turns: 0, ..Default::default() },
            SynthParams { orbit_pitch_deg: -90.0, ..Default::default() },
            SynthParams {
                bursts: Some(Bursts { every_ms: 100, length_ms: 100, accel: 1.0 }),
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(generate(&p).is_err(), "{p:?}");
        }
    }
}
