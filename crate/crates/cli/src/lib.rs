//! Command-line front end: `replay`, `synth`, `report`, `serve`.

pub mod args;
pub mod commands;
pub mod error;

use std::io::Write;

use args::{Cli, Command};
use error::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Replay { log, config, out } => {
            let cfg = commands::resolve_config(&config)?;
            let outputs = commands::replay(&log, cfg)?;
            commands::write_outputs(&out.out, &outputs.files)?;
            let r = &outputs.report;
            say(format_args!(
                "coverage {:.4}% from {} captures over {} samples -> {}",
                r.coverage_pct,
                r.capture_count,
                r.sample_count,
                out.out.display()
            ));
        }
        Command::Synth(args) => {
            let params = commands::synth_params(&args)?;
            let (name, bytes, n) = commands::synth(&params)?;
            let written = commands::write_outputs(&args.out.out, &[(name, bytes)])?;
            say(format_args!("{n} samples -> {}", written[0].display()));
        }
        Command::Report {
            orientations,
            config,
            out,
        } => {
            let cfg = commands::resolve_config(&config)?;
            let outputs = commands::report(&orientations, cfg)?;
            commands::write_outputs(&out.out, &outputs.files)?;
            say(format_args!(
                "coverage {:.4}% from {} images -> {}",
                outputs.coverage_pct,
                outputs.image_count,
                out.out.display()
            ));
        }
        Command::Serve { bind, config, out } => {
            let cfg = commands::resolve_config(&config)?;
            let rt = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::Environment(e.to_string()))?;
            rt.block_on(commands::serve(bind, cfg, &out.out, shutdown_signal()))?;
            tracing::info!("shut down cleanly");
        }
    }
    Ok(())
}

fn say(args: std::fmt::Arguments) {
    let _ = writeln!(std::io::stdout(), "{args}");
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    {
        let term = async {
            match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
                Ok(mut s) => {
                    s.recv().await;
                }
                Err(_) => std::future::pending().await,
            }
        };
        tokio::select! {
            _ = ctrl_c => {}
            _ = term => {}
        }
    }
    #[cfg(not(unix))]
    ctrl_c.await;
}
