//! Longitude band summaries (front / side / back / opposite side).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CoverageMatrix;
use crate::rotation::SphericalAngles;

const DEG_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BandError {
    #[error("malformed bands: {0}")]
    MalformedBands(String),
}

/// Half-open longitude arc `(start_deg, end_deg]`, running eastward and
/// wrapping through ±180° when `end_deg < start_deg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaBand {
    pub start_deg: f64,
    pub end_deg: f64,
}

impl ThetaBand {
    pub const fn new(start_deg: f64, end_deg: f64) -> Self {
        ThetaBand { start_deg, end_deg }
    }

    /// Front, side, back and opposite side, 90° each.
    pub fn quadrants() -> Vec<ThetaBand> {
        vec![
            ThetaBand::new(-45.0, 45.0),
            ThetaBand::new(45.0, 135.0),
            ThetaBand::new(135.0, -135.0),
            ThetaBand::new(-135.0, -45.0),
        ]
    }

    /// Arc length in degrees; a band whose ends coincide spans the circle.
    pub fn span(&self) -> f64 {
        let s = (self.end_deg - self.start_deg).rem_euclid(360.0);
        if s < DEG_EPS {
            360.0
        } else {
            s
        }
    }

    pub fn contains_deg(&self, theta_deg: f64) -> bool {
        let offset = (theta_deg - self.start_deg).rem_euclid(360.0);
        let offset = if offset == 0.0 { 360.0 } else { offset };
        offset <= self.span()
    }

    /// Length of the intersection of this arc with `[lo, hi]` (degrees,
    /// `hi - lo <= 360`).
    fn overlap(&self, lo: f64, hi: f64) -> f64 {
        let start = self.start_deg;
        let end = start + self.span();
        [-360.0, 0.0, 360.0]
            .iter()
            .map(|shift| {
                let a = lo.max(start + shift);
                let b = hi.min(end + shift);
                (b - a).max(0.0)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub band_start_deg: f64,
    pub band_end_deg: f64,
    pub image_count: usize,
    pub coverage_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub bands: Vec<BandRecord>,
}

impl BandReport {
    pub fn total_images(&self) -> usize {
        self.bands.iter().map(|b| b.image_count).sum()
    }

    /// CSV with header `band_start_deg,band_end_deg,image_count,coverage_pct`.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for b in &self.bands {
            wtr.serialize(b).expect("in-memory csv write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory csv flush")).expect("utf8 csv")
    }
}

fn validate(bands: &[ThetaBand]) -> Result<(), BandError> {
    if bands.is_empty() {
        return Err(BandError::MalformedBands("no bands given".into()));
    }
    if let Some(b) = bands
        .iter()
        .find(|b| !(b.start_deg.is_finite() && b.end_deg.is_finite()))
    {
        return Err(BandError::MalformedBands(format!("non-finite band {b:?}")));
    }
    let total: f64 = bands.iter().map(ThetaBand::span).sum();
    if (total - 360.0).abs() > DEG_EPS {
        return Err(BandError::MalformedBands(format!(
            "bands span {total}° instead of 360°"
        )));
    }
    let mut sorted: Vec<_> = bands.to_vec();
    sorted.sort_by(|a, b| {
        a.start_deg
            .rem_euclid(360.0)
            .total_cmp(&b.start_deg.rem_euclid(360.0))
    });
    for (i, b) in sorted.iter().enumerate() {
        let next = &sorted[(i + 1) % sorted.len()];
        let gap = (next.start_deg - b.end_deg).rem_euclid(360.0);
        if gap > DEG_EPS && gap < 360.0 - DEG_EPS {
            return Err(BandError::MalformedBands(format!(
                "band ending at {}° is not followed by a band starting there",
                b.end_deg
            )));
        }
    }
    Ok(())
}

/// Per-band capture counts and area-weighted coverage.
///
/// A band's coverage is the covered fraction of the sphere area lying
/// inside its longitude arc. Columns straddling a band edge contribute in
/// proportion to the part of the column inside the band, which is exact
/// because cell area is uniform in longitude.
pub fn band_report(
    captures: &[SphericalAngles],
    bands: &[ThetaBand],
    coverage: &CoverageMatrix,
) -> Result<BandReport, BandError> {
    validate(bands)?;
    let spec = coverage.spec();
    let col_width = 360.0 / spec.n_theta as f64;
    let areas = spec.row_areas();

    // covered and total area of each column
    let columns: Vec<(f64, f64)> = (0..spec.n_theta)
        .map(|t| {
            areas.iter().enumerate().fold((0.0, 0.0), |(cov, tot), (p, a)| {
                let hit = coverage.get(super::CellIndex { p, t });
                (if hit { cov + a } else { cov }, tot + a)
            })
        })
        .collect();

    let records = bands
        .iter()
        .map(|band| {
            let image_count = captures
                .iter()
                .filter(|a| band.contains_deg(a.theta.to_degrees()))
                .count();
            let (mut cov, mut tot) = (0.0, 0.0);
            for (t, (c, a)) in columns.iter().enumerate() {
                let lo = -180.0 + t as f64 * col_width;
                let frac = band.overlap(lo, lo + col_width) / col_width;
                cov += frac * c;
                tot += frac * a;
            }
            BandRecord {
                band_start_deg: band.start_deg,
                band_end_deg: band.end_deg,
                image_count,
                coverage_pct: if tot > 0.0 { cov / tot * 100.0 } else { 0.0 },
            }
        })
        .collect();
    Ok(BandReport { bands: records })
}
