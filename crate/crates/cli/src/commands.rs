use std::fs;
use std::future::Future;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use viewsphere::grid::{coverage_pgm, refined_pgm};
use viewsphere::io::{import_orientations, parse_log};
use viewsphere::offline::analyze_orientations;
use viewsphere::synth::{generate, Bursts, Pattern, SynthParams};
use viewsphere::{
    refine_display, BandReport, ConfigOverrides, CoverageMatrix, Quaternion, Session,
    SessionConfig, SessionReport,
};
use viewsphere_service::ReportStore;

use crate::args::{ConfigArgs, SynthArgs};
use crate::error::CliError;

/// Defaults, then the config file, then flags.
pub fn resolve_config(args: &ConfigArgs) -> Result<SessionConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            toml::from_str::<ConfigOverrides>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ConfigOverrides::default(),
    };
    SessionConfig::default()
        .with_overrides(&args.overrides().over(file))
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Files produced by `replay`, in write order.
pub struct ReplayOutputs {
    pub report: SessionReport,
    pub files: Vec<(&'static str, Vec<u8>)>,
}

pub fn replay(log: &Path, config: SessionConfig) -> Result<ReplayOutputs, CliError> {
    let file = fs::File::open(log)
        .map_err(|e| CliError::Input(format!("{}: {e}", log.display())))?;
    let samples = parse_log(std::io::BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", log.display())))?;
    let mut session = Session::new(config).map_err(|e| CliError::Config(e.to_string()))?;
    for s in &samples {
        session
            .ingest(s)
            .map_err(|e| CliError::Input(format!("{} at t_ms={}: {e}", log.display(), s.t_ms)))?;
    }
    let report = session.finalize();
    let bands = BandReport {
        bands: report.bands.clone(),
    };
    let mut files = vec![("report.json", report.to_json().into_bytes())];
    files.extend(coverage_files(session.coverage(), &bands));
    Ok(ReplayOutputs { report, files })
}

pub struct ReportOutputs {
    pub coverage_pct: f64,
    pub image_count: usize,
    pub files: Vec<(&'static str, Vec<u8>)>,
}

pub fn report(csv: &Path, config: SessionConfig) -> Result<ReportOutputs, CliError> {
    let file =
        fs::File::open(csv).map_err(|e| CliError::Input(format!("{}: {e}", csv.display())))?;
    let images = import_orientations(file)
        .map_err(|e| CliError::Input(format!("{}: {e}", csv.display())))?;
    let analysis = analyze_orientations(&images, &config.grid);
    Ok(ReportOutputs {
        coverage_pct: analysis.coverage_pct(),
        image_count: images.len(),
        files: coverage_files(&analysis.coverage, &analysis.bands),
    })
}

fn coverage_files(raw: &CoverageMatrix, bands: &BandReport) -> Vec<(&'static str, Vec<u8>)> {
    let refined = refine_display(raw);
    vec![
        ("bands.csv", bands.to_csv().into_bytes()),
        ("coverage.pgm", coverage_pgm(raw)),
        ("coverage_refined.pgm", refined_pgm(raw, &refined)),
        ("coverage.txt", raw.to_text().into_bytes()),
    ]
}

pub fn synth_params(args: &SynthArgs) -> Result<SynthParams, CliError> {
    let d = SynthParams::default();
    let reference = match &args.reference {
        Some(q) => {
            let q: [f64; 4] = q.as_slice().try_into().map_err(|_| {
                CliError::Config(format!("--reference needs 4 components, got {}", q.len()))
            })?;
            Quaternion::from_array(q).map_err(|e| CliError::Config(format!("--reference: {e}")))?
        }
        None => d.reference,
    };
    let bursts = match (args.burst_every_ms, args.burst_ms) {
        (Some(every_ms), Some(length_ms)) => Some(Bursts {
            every_ms,
            length_ms,
            accel: args.burst_accel.unwrap_or(5.0),
        }),
        _ => None,
    };
    let params = SynthParams {
        pattern: args.pattern.into(),
        rate_hz: args.rate_hz.unwrap_or(d.rate_hz),
        yaw_rate_deg_s: args.yaw_rate.unwrap_or(d.yaw_rate_deg_s),
        settle_ms: args.settle_ms.unwrap_or(d.settle_ms),
        orbit_pitch_deg: args.orbit_pitch.unwrap_or(d.orbit_pitch_deg),
        revolutions: args.revolutions.unwrap_or(d.revolutions),
        spiral_turns: args.spiral_turns.unwrap_or(d.spiral_turns),
        duration_s: args.duration_s.unwrap_or(d.duration_s),
        max_rate_deg_s: args.max_rate.unwrap_or(d.max_rate_deg_s),
        accel_noise: args.accel_noise.unwrap_or(d.accel_noise),
        gyro_noise: args.gyro_noise.unwrap_or(d.gyro_noise),
        bursts,
        reference,
        seed: args.seed.unwrap_or(d.seed),
    };
    params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(params)
}

pub fn synth_file_name(pattern: Pattern) -> &'static str {
    match pattern {
        Pattern::Orbit => "orbit.jsonl",
        Pattern::Spiral => "spiral.jsonl",
        Pattern::RandomWalk => "random-walk.jsonl",
    }
}

pub fn synth(params: &SynthParams) -> Result<(&'static str, Vec<u8>, usize), CliError> {
    let tr = generate(params).map_err(|e| CliError::Config(e.to_string()))?;
    let text = viewsphere::io::write_log(&tr.samples);
    Ok((synth_file_name(params.pattern), text.into_bytes(), tr.samples.len()))
}

/// Writes every file or none: all contents go to temporaries first and are
/// renamed into place only once each write has succeeded.
pub fn write_outputs(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    let env = |p: &Path, e: std::io::Error| CliError::Environment(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| env(dir, e))?;
    let mut staged = Vec::new();
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(env(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::new();
    for (tmp, dest) in staged {
        fs::rename(&tmp, &dest).map_err(|e| env(&dest, e))?;
        written.push(dest);
    }
    Ok(written)
}

/// Binds, announces the address on stdout, then serves until `shutdown`.
pub async fn serve(
    bind: SocketAddr,
    config: SessionConfig,
    out: &Path,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), CliError> {
    let listener = viewsphere_service::bind(bind)
        .await
        .map_err(|e| CliError::Environment(format!("cannot bind {bind}: {e}")))?;
    let store = ReportStore::open(out)
        .map_err(|e| CliError::Environment(format!("{}: {e}", out.display())))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Environment(e.to_string()))?;
    {
        let mut stdout = std::io::stdout().lock();
        let _ = writeln!(stdout, "listening on ws://{addr}/ws");
        let _ = stdout.flush();
    }
    tracing::info!(%addr, reports = %store.dir().display(), "serving");
    viewsphere_service::serve(listener, config, Arc::new(store), shutdown)
        .await
        .map_err(|e| CliError::Environment(e.to_string()))
}
