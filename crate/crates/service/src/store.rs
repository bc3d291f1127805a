//! Append-only store of finished session reports.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use viewsphere::SessionReport;

const PREFIX: &str = "session-";

/// Writes each report to `<root>/sessions/session-NNNNNN.json`.
///
/// Numbering continues after the highest file already present, so a
/// restarted server never overwrites earlier sessions. Writes are
/// serialized and go through a temporary file plus rename.
pub struct ReportStore {
    dir: PathBuf,
    next: Mutex<u64>,
}

impl ReportStore {
    pub fn open(root: impl AsRef<Path>) -> io::Result<Self> {
        let dir = root.as_ref().join("sessions");
        fs::create_dir_all(&dir)?;
        let mut next = 1;
        for entry in fs::read_dir(&dir)? {
            if let Some(id) = parse_id(&entry?.file_name().to_string_lossy()) {
                next = next.max(id + 1);
            }
        }
        Ok(ReportStore {
            dir,
            next: Mutex::new(next),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn persist(&self, report: &SessionReport) -> io::Result<PathBuf> {
        let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.dir.join(format!("{PREFIX}{:06}.json", *next));
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, report.to_json())?;
        fs::rename(&tmp, &path)?;
        *next += 1;
        Ok(path)
    }

    /// Persisted report files in id order.
    pub fn list(&self) -> io::Result<Vec<PathBuf>> {
        let mut found: Vec<(u64, PathBuf)> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| parse_id(&e.file_name().to_string_lossy()).map(|id| (id, e.path())))
            .collect();
        found.sort();
        Ok(found.into_iter().map(|(_, p)| p).collect())
    }
}

fn parse_id(name: &str) -> Option<u64> {
    name.strip_prefix(PREFIX)?.strip_suffix(".json")?.parse().ok()
}
