#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_viewsphere")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn viewsphere(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Replays `log` into `out` and returns the report text.
pub fn replay(log: &Path, out: &Path, extra: &[&str]) -> String {
    let mut args = vec!["replay", path_str(log), "--out", path_str(out)];
    args.extend_from_slice(extra);
    let o = viewsphere(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    std::fs::read_to_string(out.join("report.json")).unwrap()
}

/// Runs `synth` into `out` and returns the written log path.
pub fn synth(out: &Path, args: &[&str]) -> PathBuf {
    let mut all = vec!["synth", "--out", path_str(out)];
    all.extend_from_slice(args);
    let o = viewsphere(&all);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let name = args
        .windows(2)
        .find(|w| w[0] == "--pattern")
        .map(|w| w[1])
        .unwrap();
    out.join(format!("{name}.jsonl"))
}

pub const OUTPUT_FILES: [&str; 5] = [
    "report.json",
    "bands.csv",
    "coverage.pgm",
    "coverage_refined.pgm",
    "coverage.txt",
];

pub struct Served {
    pub child: Child,
    pub addr: SocketAddr,
}

/// Starts `viewsphere serve` on an ephemeral port.
pub fn spawn_server(out: &Path) -> Served {
    let mut child = Command::new(bin())
        .args(["serve", "--bind", "127.0.0.1:0", "--out", path_str(out)])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on ws://")
        .and_then(|s| s.strip_suffix("/ws"))
        .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
        .parse()
        .unwrap();
    Served { child, addr }
}

pub fn interrupt(child: &Child) {
    let status = Command::new("kill")
        .args(["-INT", &child.id().to_string()])
        .status()
        .unwrap();
    assert!(status.success());
}
