use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use viewsphere::synth::Pattern;
use viewsphere::{ConfigOverrides, RecapturePolicy};

#[derive(Debug, Parser)]
#[command(name = "viewsphere", version, about = "IMU-gated spherical viewpoint coverage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a recorded IMU log through a session and write its report.
    Replay {
        /// JSONL log, one sample per line.
        log: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generate a synthetic IMU log.
    Synth(SynthArgs),
    /// Coverage and band statistics for a list of image orientations.
    Report {
        /// CSV with header image_id,qx,qy,qz,qw; the first row is the reference.
        orientations: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Serve the live WebSocket protocol until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        bind: SocketAddr,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Session settings. Each flag mirrors the config-file key of the same
/// name with dashes turned into underscores.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// TOML file with session settings; flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Longitude columns [default: 36]
    #[arg(long)]
    pub grid_theta: Option<usize>,
    /// Latitude rows [default: 18]
    #[arg(long)]
    pub grid_phi: Option<usize>,
    /// Polar dilation zone, degrees from each pole [default: 30]
    #[arg(long, allow_negative_numbers = true)]
    pub pole_zone: Option<f64>,
    /// EMA retention factor [default: 0.9]
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Acceleration threshold, m/s² [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub a_th: Option<f64>,
    /// Angular-velocity threshold, rad/s [default: 0.3]
    #[arg(long, allow_negative_numbers = true)]
    pub omega_th: Option<f64>,
    /// Required calm time before a pose counts, ms [default: 300]
    #[arg(long)]
    pub hold_ms: Option<u64>,
    /// Whether revisiting a covered cell emits another capture [default: once]
    #[arg(long, value_enum)]
    pub recapture: Option<Recapture>,
}

impl ConfigArgs {
    pub fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            grid_theta: self.grid_theta,
            grid_phi: self.grid_phi,
            pole_zone: self.pole_zone,
            alpha: self.alpha,
            a_th: self.a_th,
            omega_th: self.omega_th,
            hold_ms: self.hold_ms,
            recapture: self.recapture.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Recapture {
    Once,
    Always,
}

impl From<Recapture> for RecapturePolicy {
    fn from(r: Recapture) -> Self {
        match r {
            Recapture::Once => RecapturePolicy::Once,
            Recapture::Always => RecapturePolicy::Always,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PatternArg {
    Orbit,
    Spiral,
    RandomWalk,
}

impl From<PatternArg> for Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Orbit => Pattern::Orbit,
            PatternArg::Spiral => Pattern::Spiral,
            PatternArg::RandomWalk => Pattern::RandomWalk,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    /// Sample rate, Hz [default: 20]
    #[arg(long, allow_negative_numbers = true)]
    pub rate_hz: Option<f64>,
    /// Yaw rate for orbit and spiral, deg/s [default: 14]
    #[arg(long, allow_negative_numbers = true)]
    pub yaw_rate: Option<f64>,
    /// Still time at the reference pose before moving, ms [default: 500]
    #[arg(long)]
    pub settle_ms: Option<u64>,
    /// Orbit pitch, degrees [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub orbit_pitch: Option<f64>,
    /// Orbit revolutions [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub revolutions: Option<f64>,
    /// Spiral turns between the poles [default: 36]
    #[arg(long)]
    pub spiral_turns: Option<u32>,
    /// Random-walk duration, s [default: 120]
    #[arg(long, allow_negative_numbers = true)]
    pub duration_s: Option<f64>,
    /// Random-walk angular speed bound, deg/s [default: 14]
    #[arg(long, allow_negative_numbers = true)]
    pub max_rate: Option<f64>,
    /// Std-dev of additive acceleration noise, m/s² [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub accel_noise: Option<f64>,
    /// Std-dev of additive gyro noise, rad/s [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub gyro_noise: Option<f64>,
    /// Start an instability burst every this many ms
    #[arg(long, requires = "burst_ms")]
    pub burst_every_ms: Option<u64>,
    /// Burst length, ms
    #[arg(long, requires = "burst_every_ms")]
    pub burst_ms: Option<u64>,
    /// Burst acceleration, m/s² [default: 5]
    #[arg(long, requires = "burst_every_ms")]
    pub burst_accel: Option<f64>,
    /// Mounting orientation of the device as qx,qy,qz,qw [default: identity]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub reference: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}
