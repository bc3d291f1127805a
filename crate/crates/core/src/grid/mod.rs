//! Longitude–latitude viewpoint grid.
//!
//! The sphere is cut into `n_phi` latitude rows and `n_theta` longitude
//! columns of equal angular size. Because equal-angle cells shrink towards
//! the poles, coverage is always reported as an area fraction: each cell is
//! weighted by `Δθ·(sin φ_{p+1} − sin φ_p)`.

mod bands;
mod export;
mod morphology;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::rotation::{SphericalAngles, ViewDirection};

pub use bands::{band_report, BandError, BandRecord, BandReport, ThetaBand};
pub use export::{coverage_pgm, refined_pgm};
pub use morphology::refine_display;

/// Discretization of the viewing sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Latitude band (degrees from each pole) in which sparse cells are
    /// dilated along longitude for display.
    pub pole_zone_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_theta: 36,
            n_phi: 18,
            pole_zone_deg: 30.0,
        }
    }
}

/// Row `p` (latitude, 0 at the south pole) and column `t` (longitude, 0 at −π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub p: usize,
    pub t: usize,
}

impl GridSpec {
    pub fn new(n_theta: usize, n_phi: usize, pole_zone_deg: f64) -> Result<Self, ConfigError> {
        let spec = GridSpec {
            n_theta,
            n_phi,
            pole_zone_deg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_theta < 2 {
            return Err(ConfigError::invalid("grid_theta", "must be at least 2"));
        }
        if self.n_phi < 2 {
            return Err(ConfigError::invalid("grid_phi", "must be at least 2"));
        }
        if !(self.pole_zone_deg >= 0.0 && self.pole_zone_deg < 90.0) {
            return Err(ConfigError::invalid("pole_zone", "must lie in [0, 90)"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn delta_theta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn delta_phi(&self) -> f64 {
        PI / self.n_phi as f64
    }

    /// Lower latitude edge of row `p`.
    pub fn row_lower(&self, p: usize) -> f64 {
        -FRAC_PI_2 + p as f64 * self.delta_phi()
    }

    pub fn row_center(&self, p: usize) -> f64 {
        -FRAC_PI_2 + (p as f64 + 0.5) * self.delta_phi()
    }

    pub fn column_center(&self, t: usize) -> f64 {
        -PI + (t as f64 + 0.5) * self.delta_theta()
    }

    pub fn cell_center(&self, cell: CellIndex) -> SphericalAngles {
        SphericalAngles {
            theta: self.column_center(cell.t),
            phi: self.row_center(cell.p),
        }
    }

    pub fn cell_center_direction(&self, cell: CellIndex) -> ViewDirection {
        ViewDirection::from_angles(self.cell_center(cell))
    }

    /// Solid angle of any cell in row `p`, in steradians.
    pub fn cell_area(&self, p: usize) -> f64 {
        debug_assert!(p < self.n_phi);
        self.delta_theta() * (self.row_lower(p + 1).sin() - self.row_lower(p).sin())
    }

    pub fn row_areas(&self) -> Vec<f64> {
        (0..self.n_phi).map(|p| self.cell_area(p)).collect()
    }

    /// True when row `p` lies in the polar dilation zone.
    pub fn is_polar_row(&self, p: usize) -> bool {
        self.row_center(p).to_degrees().abs() > 90.0 - self.pole_zone_deg
    }

    /// Grid cell of wrapped/saturated angles.
    ///
    /// `t = min(N_θ−1, max(0, ⌊(θ+π)/2π·N_θ⌋))` and the analogous floor/clamp
    /// for the latitude row, so every input lands in bounds.
    pub fn quantize(&self, angles: SphericalAngles) -> CellIndex {
        CellIndex {
            t: floor_clamp((angles.theta + PI) / TAU * self.n_theta as f64, self.n_theta),
            p: floor_clamp((angles.phi + FRAC_PI_2) / PI * self.n_phi as f64, self.n_phi),
        }
    }

    pub fn index(&self, cell: CellIndex) -> usize {
        cell.p * self.n_theta + cell.t
    }

    pub fn cell_at(&self, index: usize) -> CellIndex {
        CellIndex {
            p: index / self.n_theta,
            t: index % self.n_theta,
        }
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.p < self.n_phi && cell.t < self.n_theta
    }
}

fn floor_clamp(x: f64, n: usize) -> usize {
    let f = x.floor();
    if f.is_nan() || f <= 0.0 {
        0
    } else if f >= (n - 1) as f64 {
        n - 1
    } else {
        f as usize
    }
}

/// Binary `n_phi × n_theta` occupancy grid, row-major with row `p = 0` first.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMatrix {
    spec: GridSpec,
    bits: Vec<bool>,
}

impl CoverageMatrix {
    pub fn new(spec: GridSpec) -> Self {
        CoverageMatrix {
            spec,
            bits: vec![false; spec.cell_count()],
        }
    }

    pub fn full(spec: GridSpec) -> Self {
        CoverageMatrix {
            spec,
            bits: vec![true; spec.cell_count()],
        }
    }

    /// Builds a matrix from row-major bits; `None` if the length is wrong.
    pub fn from_bits(spec: GridSpec, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == spec.cell_count()).then_some(CoverageMatrix { spec, bits })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, cell: CellIndex) -> bool {
        self.bits[self.spec.index(cell)]
    }

    pub(crate) fn set(&mut self, cell: CellIndex) {
        let i = self.spec.index(cell);
        self.bits[i] = true;
    }

    /// Sets the bit for `cell`, returning whether it was previously clear.
    ///
    /// Panics if `cell` is outside the grid.
    pub fn mark(&mut self, cell: CellIndex) -> bool {
        assert!(self.spec.contains(cell), "cell {cell:?} outside grid");
        let i = self.spec.index(cell);
        let fresh = !self.bits[i];
        self.bits[i] = true;
        fresh
    }

    /// Copy with `cell` marked.
    pub fn marked(&self, cell: CellIndex) -> Self {
        let mut out = self.clone();
        out.mark(cell);
        out
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_complete(&self) -> bool {
        self.bits.iter().all(|b| *b)
    }

    pub fn covered_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| self.spec.cell_at(i))
    }

    pub fn uncovered_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| !**b)
            .map(|(i, _)| self.spec.cell_at(i))
    }

    /// Area-weighted coverage in percent, summed over every row and column.
    pub fn coverage_rate(&self) -> f64 {
        let n_theta = self.spec.n_theta;
        let mut covered = 0.0;
        let mut total = 0.0;
        for (p, area) in self.spec.row_areas().into_iter().enumerate() {
            let row = &self.bits[p * n_theta..(p + 1) * n_theta];
            covered += area * row.iter().filter(|b| **b).count() as f64;
            total += area * n_theta as f64;
        }
        covered / total * 100.0
    }

    /// `'0'`/`'1'` characters, row-major with row `p = 0` first.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(spec: GridSpec, s: &str) -> Option<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Self::from_bits(spec, bits)
    }

    /// Plain-text dump: one line per latitude row, row `p = 0` first.
    pub fn to_text(&self) -> String {
        let s = self.to_bit_string();
        let mut out = String::with_capacity(s.len() + self.spec.n_phi);
        for row in s.as_bytes().chunks(self.spec.n_theta) {
            out.push_str(std::str::from_utf8(row).expect("ascii"));
            out.push('\n');
        }
        out
    }
}

/// Free-function form of [`GridSpec::quantize`].
pub fn quantize(angles: SphericalAngles, spec: &GridSpec) -> CellIndex {
    spec.quantize(angles)
}

/// Free-function form of [`GridSpec::cell_area`].
pub fn cell_area(p: usize, spec: &GridSpec) -> f64 {
    spec.cell_area(p)
}
