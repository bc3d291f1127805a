//! Coverage of an already-captured image set.
//!
//! No gating: every orientation is taken as a valid capture. The first
//! image defines the reference frame.

use crate::grid::{band_report, BandReport, CellIndex, CoverageMatrix, GridSpec, ThetaBand};
use crate::io::OrientedImage;
use crate::rotation::{quat_to_dcm, relative_rotation, to_spherical, view_direction, SphericalAngles};

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedImage {
    pub image_id: String,
    pub angles: SphericalAngles,
    pub cell: CellIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineAnalysis {
    pub images: Vec<PlacedImage>,
    pub coverage: CoverageMatrix,
    pub bands: BandReport,
}

impl OfflineAnalysis {
    pub fn coverage_pct(&self) -> f64 {
        self.coverage.coverage_rate()
    }
}

pub fn analyze_orientations(images: &[OrientedImage], spec: &GridSpec) -> OfflineAnalysis {
    let mut coverage = CoverageMatrix::new(*spec);
    let mut placed = Vec::with_capacity(images.len());
    if let Some(first) = images.first() {
        let r0 = quat_to_dcm(&first.q);
        for img in images {
            let angles = to_spherical(&view_direction(&relative_rotation(&r0, &quat_to_dcm(&img.q))));
            let cell = spec.quantize(angles);
            coverage.mark(cell);
            placed.push(PlacedImage {
                image_id: img.image_id.clone(),
                angles,
                cell,
            });
        }
    }
    let angles: Vec<_> = placed.iter().map(|p| p.angles).collect();
    let bands = band_report(&angles, &ThetaBand::quadrants(), &coverage)
        .expect("default quadrants form a partition");
    OfflineAnalysis {
        images: placed,
        coverage,
        bands,
    }
}
