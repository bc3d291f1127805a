//! Binary PGM (P5) renderings, one pixel per cell, row `p = 0` at the bottom.

use super::{CellIndex, CoverageMatrix};

const COVERED: u8 = 255;
const REFINED: u8 = 128;
const EMPTY: u8 = 0;

fn pgm(n_theta: usize, n_phi: usize, mut shade: impl FnMut(CellIndex) -> u8) -> Vec<u8> {
    let mut out = format!("P5\n{n_theta} {n_phi}\n255\n").into_bytes();
    for p in (0..n_phi).rev() {
        out.extend((0..n_theta).map(|t| shade(CellIndex { p, t })));
    }
    out
}

/// Covered cells white, the rest black.
pub fn coverage_pgm(raw: &CoverageMatrix) -> Vec<u8> {
    let spec = raw.spec();
    pgm(spec.n_theta, spec.n_phi, |c| if raw.get(c) { COVERED } else { EMPTY })
}

/// Raw cells white, cells added by refinement mid-grey, the rest black.
pub fn refined_pgm(raw: &CoverageMatrix, refined: &CoverageMatrix) -> Vec<u8> {
    let spec = raw.spec();
    pgm(spec.n_theta, spec.n_phi, |c| {
        if raw.get(c) {
            COVERED
        } else if refined.get(c) {
            REFINED
        } else {
            EMPTY
        }
    })
}
