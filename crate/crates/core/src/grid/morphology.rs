use super::{CellIndex, CoverageMatrix};

/// Display-only refinement of a coverage matrix.
///
/// Two passes, both evaluated against the unmodified input so the result
/// does not depend on visiting order:
///
/// * pole dilation: in rows whose center lies within `pole_zone_deg` of a
///   pole, every active cell also lights its two longitudinal neighbours
///   (longitude wraps);
/// * hole filling: an inactive cell whose four axial neighbours are all
///   active is switched on. Longitude wraps, latitude does not, so the top
///   and bottom rows are never filled.
///
/// The returned matrix is a superset of the input. Coverage figures must
/// keep using the raw matrix.
pub fn refine_display(raw: &CoverageMatrix) -> CoverageMatrix {
    let spec = *raw.spec();
    let (n_phi, n_theta) = (spec.n_phi, spec.n_theta);
    let mut out = raw.clone();
    let west = |t: usize| (t + n_theta - 1) % n_theta;
    let east = |t: usize| (t + 1) % n_theta;

    for p in (0..n_phi).filter(|&p| spec.is_polar_row(p)) {
        for t in 0..n_theta {
            if raw.get(CellIndex { p, t }) {
                out.set(CellIndex { p, t: west(t) });
                out.set(CellIndex { p, t: east(t) });
            }
        }
    }

    for p in 1..n_phi.saturating_sub(1) {
        for t in 0..n_theta {
            let cell = CellIndex { p, t };
            if raw.get(cell) {
                continue;
            }
            let enclosed = raw.get(CellIndex { p, t: west(t) })
                && raw.get(CellIndex { p, t: east(t) })
                && raw.get(CellIndex { p: p - 1, t })
                && raw.get(CellIndex { p: p + 1, t });
            if enclosed {
                out.set(cell);
            }
        }
    }
    out
}
