//! Rotation and spherical-angle kernel.
//!
//! Orientation arrives as a unit quaternion in sensor order `[x, y, z, w]`
//! (vector part first). It is turned into a direction cosine matrix, made
//! relative to a baseline orientation, and the camera's forward axis `e_z`
//! is expressed as a longitude/latitude pair on the viewing sphere.
//!
//! All angles here are radians.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::MathError;

/// Largest accepted deviation of `‖q‖` from 1 before a quaternion is
/// treated as corrupt.
pub const QUAT_NORM_TOLERANCE: f64 = 1e-3;

/// Deviations below this are float noise and are kept as-is, which makes
/// construction idempotent on already-normalized input.
const QUAT_RENORM_EPS: f64 = 1e-12;

/// Offset used to keep the saturated latitude inside the open lower bound.
pub const PHI_LOWER_EPS: f64 = 1e-12;

/// Below this squared horizontal magnitude the longitude is pinned to 0.
const POLE_EPS_SQ: f64 = 1e-12;

/// View components this close to zero are rounding residue (e.g. from
/// `R₀ᵀ·R₀`) and are snapped so they cannot tip a cell boundary.
const SNAP_EPS: f64 = 1e-14;

/// Unit quaternion in `[x, y, z, w]` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quaternion {
    x: f64,
    y: f64,
    z: f64,
    w: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        w: 1.0,
    };

    /// Validates and, when needed, renormalizes a raw sensor quaternion.
    ///
    /// Norms within [`QUAT_NORM_TOLERANCE`] of 1 are accepted; anything
    /// further out is rejected as corrupt data.
    pub fn new(x: f64, y: f64, z: f64, w: f64) -> Result<Self, MathError> {
        if !(x.is_finite() && y.is_finite() && z.is_finite() && w.is_finite()) {
            return Err(MathError::NonFinite("quaternion"));
        }
        let norm = (x * x + y * y + z * z + w * w).sqrt();
        if (norm - 1.0).abs() > QUAT_NORM_TOLERANCE {
            return Err(MathError::NonUnitQuaternion {
                norm,
                tolerance: QUAT_NORM_TOLERANCE,
            });
        }
        if (norm - 1.0).abs() <= QUAT_RENORM_EPS {
            return Ok(Quaternion { x, y, z, w });
        }
        Ok(Quaternion {
            x: x / norm,
            y: y / norm,
            z: z / norm,
            w: w / norm,
        })
    }

    pub fn from_array(q: [f64; 4]) -> Result<Self, MathError> {
        Self::new(q[0], q[1], q[2], q[3])
    }

    /// Rotation of `angle` radians about a unit `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self, MathError> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !n.is_finite() || n == 0.0 || !angle.is_finite() {
            return Err(MathError::NonFinite("axis-angle"));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(axis[0] / n * s, axis[1] / n * s, axis[2] / n * s, c)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w).sqrt()
    }

    pub fn negated(self) -> Self {
        Quaternion {
            x: -self.x,
            y: -self.y,
            z: -self.z,
            w: -self.w,
        }
    }

    /// Hamilton product `self ⊗ rhs` (apply `rhs` first, then `self`).
    pub fn compose(self, rhs: Quaternion) -> Quaternion {
        let (a, b) = (self, rhs);
        let raw = [
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        ];
        // Product of unit quaternions stays within float noise of unit norm.
        Quaternion::from_array(raw).unwrap_or(Quaternion::IDENTITY)
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix =
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> RotationMatrix {
        let m = &self.0;
        RotationMatrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest elementwise deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst = 0.0f64;
        for (i, row) in p.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - expected).abs());
            }
        }
        worst
    }

    /// `RᵀR = I` and `det R = 1`, both within `tol`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
            && self.orthonormality_error() <= tol
            && (self.determinant() - 1.0).abs() <= tol
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        RotationMatrix(out)
    }
}

/// Unit viewing direction in the baseline frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewDirection {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ViewDirection {
    pub const FORWARD: ViewDirection = ViewDirection {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Direction for a longitude/latitude pair:
    /// `(cos φ sin θ, sin φ, cos φ cos θ)`.
    pub fn from_angles(angles: SphericalAngles) -> ViewDirection {
        let (st, ct) = angles.theta.sin_cos();
        let (sp, cp) = angles.phi.sin_cos();
        ViewDirection {
            x: cp * st,
            y: sp,
            z: cp * ct,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &ViewDirection) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Great-circle angle to `other`, stable for both tiny and near-antipodal
    /// separations.
    pub fn angle_to(&self, other: &ViewDirection) -> f64 {
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        (cx * cx + cy * cy + cz * cz).sqrt().atan2(self.dot(other))
    }
}

/// Longitude `theta` in (−π, π] and latitude `phi` in (−π/2, π/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalAngles {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalAngles {
    /// Wraps `theta` and saturates `phi` into their canonical ranges.
    pub fn normalized(theta: f64, phi: f64) -> Result<Self, MathError> {
        Ok(SphericalAngles {
            theta: wrap_theta(theta)?,
            phi: sat_phi(phi)?,
        })
    }

    pub fn to_degrees(self) -> (f64, f64) {
        (self.theta.to_degrees(), self.phi.to_degrees())
    }
}

/// Direction cosine matrix of a unit quaternion (device frame to world frame).
pub fn quat_to_dcm(q: &Quaternion) -> RotationMatrix {
    let Quaternion { x, y, z, w } = *q;
    RotationMatrix([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

/// `R₀ᵀ · R(t)`: the current orientation expressed against the baseline.
pub fn relative_rotation(baseline: &RotationMatrix, current: &RotationMatrix) -> RotationMatrix {
    baseline.transpose() * *current
}

/// Camera forward axis under `r_rel`, i.e. the third column of the matrix.
pub fn view_direction(r_rel: &RotationMatrix) -> ViewDirection {
    let m = &r_rel.0;
    ViewDirection {
        x: m[0][2],
        y: m[1][2],
        z: m[2][2],
    }
}

/// Longitude/latitude of a unit direction.
///
/// `phi = asin(vy)` and `theta = atan2(vx, vz)`; at the poles (horizontal
/// component below 1e-6) the longitude is defined as 0. The result is
/// wrapped/saturated into the canonical ranges. Components within 1e-14
/// of zero are treated as exactly zero.
pub fn to_spherical(v: &ViewDirection) -> SphericalAngles {
    let snap = |c: f64| if c.abs() < SNAP_EPS { 0.0 } else { c };
    let (vx, vy, vz) = (snap(v.x), snap(v.y), snap(v.z));
    let phi = vy.clamp(-1.0, 1.0).asin();
    let theta = if vx * vx + vz * vz < POLE_EPS_SQ {
        0.0
    } else {
        vx.atan2(vz)
    };
    SphericalAngles {
        theta: wrap_in_range(theta),
        phi: saturate(phi),
    }
}

/// Wraps a longitude into (−π, π] using `θ − 2π·⌊(θ + π) / 2π⌋`.
///
/// The floor expression alone lands on −π for odd multiples of π; that
/// boundary is mapped to +π so the upper bound is the inclusive one.
pub fn wrap_theta(theta: f64) -> Result<f64, MathError> {
    if !theta.is_finite() {
        return Err(MathError::NonFinite("theta"));
    }
    Ok(wrap_in_range(theta))
}

fn wrap_in_range(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut wrapped = theta - TAU * ((theta + PI) / TAU).floor();
    if wrapped <= -PI {
        wrapped += TAU;
    }
    if wrapped > PI {
        wrapped -= TAU;
    }
    wrapped
}

/// Saturates a latitude into (−π/2, π/2].
pub fn sat_phi(phi: f64) -> Result<f64, MathError> {
    if !phi.is_finite() {
        return Err(MathError::NonFinite("phi"));
    }
    Ok(saturate(phi))
}

fn saturate(phi: f64) -> f64 {
    if phi > FRAC_PI_2 {
        FRAC_PI_2
    } else if phi <= -FRAC_PI_2 {
        -FRAC_PI_2 + PHI_LOWER_EPS
    } else {
        phi
    }
}

/// Orientation whose forward axis looks along `(theta, phi)` relative to
/// `reference`: `reference · R_y(θ) · R_x(−φ)`.
pub fn orientation_looking_at(reference: Quaternion, theta: f64, phi: f64) -> Quaternion {
    let (sy, cy) = (theta / 2.0).sin_cos();
    let (sx, cx) = (-phi / 2.0).sin_cos();
    let yaw = Quaternion {
        x: 0.0,
        y: sy,
        z: 0.0,
        w: cy,
    };
    let pitch = Quaternion {
        x: sx,
        y: 0.0,
        z: 0.0,
        w: cx,
    };
    reference.compose(yaw.compose(pitch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Axis-angle (Rodrigues) rotation, written without reference to the
    /// closed-form quaternion matrix.
    fn rodrigues(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
        let n = (axis[0].powi(2) + axis[1].powi(2) + axis[2].powi(2)).sqrt();
        let k = [axis[0] / n, axis[1] / n, axis[2] / n];
        let km = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
        let mut k2 = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k2[i][j] = (0..3).map(|l| km[i][l] * km[l][j]).sum();
            }
        }
        let (s, c) = angle.sin_cos();
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                r[i][j] = id + s * km[i][j] + (1.0 - c) * k2[i][j];
            }
        }
        r
    }

    fn rodrigues_from_quat(q: [f64; 4]) -> [[f64; 3]; 3] {
        let vn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        if vn < 1e-15 {
            return RotationMatrix::IDENTITY.0;
        }
        let angle = 2.0 * vn.atan2(q[3]);
        rodrigues([q[0], q[1], q[2]], angle)
    }

    fn random_unit_quat(rng: &mut impl Rng) -> [f64; 4] {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 0.1 && n < 1.0 {
                return v.map(|c| c / n);
            }
        }
    }

    fn max_diff(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_quaternion_gives_identity_matrix() {
        assert_eq!(quat_to_dcm(&Quaternion::IDENTITY), RotationMatrix::IDENTITY);
    }

    #[test]
    fn quarter_turn_about_y_matches_rodrigues() {
        let h = std::f64::consts::FRAC_PI_4;
        let q = Quaternion::new(0.0, h.sin(), 0.0, h.cos()).unwrap();
        let oracle = rodrigues([0.0, 1.0, 0.0], FRAC_PI_2);
        assert!(max_diff(&quat_to_dcm(&q).0, &oracle) < 1e-12);
        // forward axis swings onto +x
        let v = view_direction(&quat_to_dcm(&q));
        assert!((v.x - 1.0).abs() < 1e-12 && v.z.abs() < 1e-12);
    }

    #[test]
    fn random_quaternions_match_rodrigues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let raw = random_unit_quat(&mut rng);
            let r = quat_to_dcm(&Quaternion::from_array(raw).unwrap());
            assert!(max_diff(&r.0, &rodrigues_from_quat(raw)) < 1e-9);
            assert!(r.is_rotation(1e-9));
        }
    }

    #[test]
    fn quaternion_norm_validation() {
        assert!(matches!(
            Quaternion::new(0.0, 0.0, 0.0, 0.5),
            Err(MathError::NonUnitQuaternion { .. })
        ));
        assert!(matches!(
            Quaternion::new(f64::NAN, 0.0, 0.0, 1.0),
            Err(MathError::NonFinite(_))
        ));
        let q = Quaternion::new(0.0, 0.0, 0.0, 1.0005).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-15);
        // already-normalized input passes through bit-for-bit
        let raw = [0.1, 0.2, 0.3, (1.0f64 - 0.14).sqrt()];
        assert_eq!(Quaternion::from_array(raw).unwrap().to_array(), raw);
    }

    #[test]
    fn relative_rotation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r0 = quat_to_dcm(&Quaternion::from_array(random_unit_quat(&mut rng)).unwrap());
        let rt = quat_to_dcm(&Quaternion::from_array(random_unit_quat(&mut rng)).unwrap());
        assert!(relative_rotation(&r0, &r0).max_abs_diff(&RotationMatrix::IDENTITY) < 1e-12);
        assert_eq!(relative_rotation(&RotationMatrix::IDENTITY, &rt), rt);
        let rel = relative_rotation(&r0, &rt);
        assert!((r0 * rel).max_abs_diff(&rt) < 1e-9);
        assert!(rel.is_rotation(1e-9));
    }

    #[test]
    fn view_direction_is_third_column() {
        assert_eq!(view_direction(&RotationMatrix::IDENTITY), ViewDirection::FORWARD);
        let q = Quaternion::from_axis_angle([1.0, 0.0, 0.0], FRAC_PI_2).unwrap();
        let r = quat_to_dcm(&q);
        let v = view_direction(&r);
        let oracle = r.apply([0.0, 0.0, 1.0]);
        assert_eq!(v.to_array(), oracle);
        assert!((v.y + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_axes() {
        let a = to_spherical(&ViewDirection::FORWARD);
        assert_eq!((a.theta, a.phi), (0.0, 0.0));
        let a = to_spherical(&ViewDirection {
            x: 1.0,
            y: 0.0,
            z: 0.0,
        });
        assert_eq!((a.theta, a.phi), (FRAC_PI_2, 0.0));
        // straight down: longitude pinned, latitude just above −π/2
        let a = to_spherical(&ViewDirection {
            x: 0.0,
            y: -1.0,
            z: 0.0,
        });
        assert_eq!(a.theta, 0.0);
        assert_eq!(a.phi, -FRAC_PI_2 + PHI_LOWER_EPS);
        // atan2 returns −π for (−0, −1); the canonical range keeps +π
        let a = to_spherical(&ViewDirection {
            x: -0.0,
            y: 0.0,
            z: -1.0,
        });
        assert_eq!(a.theta, PI);
    }

    #[test]
    fn spherical_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..100_000 {
            let raw = random_unit_quat(&mut rng);
            let v = ViewDirection {
                x: raw[0],
                y: raw[1],
                z: raw[2],
            };
            let n = (v.x * v.x + v.y * v.y + v.z * v.z).sqrt();
            let v = ViewDirection {
                x: v.x / n,
                y: v.y / n,
                z: v.z / n,
            };
            let a = to_spherical(&v);
            if a.phi.cos() < 1e-6 {
                continue;
            }
            let back = ViewDirection::from_angles(a);
            assert!((back.x - v.x).abs() < 1e-9);
            assert!((back.y - v.y).abs() < 1e-9);
            assert!((back.z - v.z).abs() < 1e-9);
            checked += 1;
        }
        assert!(checked > 99_000);
    }

    #[test]
    fn wrap_theta_examples() {
        assert!((wrap_theta(3.0 * PI / 2.0).unwrap() + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(wrap_theta(0.0).unwrap(), 0.0);
        assert_eq!(wrap_theta(PI).unwrap(), PI);
        assert_eq!(wrap_theta(-PI).unwrap(), PI);
        assert!((wrap_theta(3.0 * PI).unwrap() - PI).abs() < 1e-12);
        assert!(wrap_theta(f64::INFINITY).is_err());
    }

    #[test]
    fn sat_phi_examples() {
        assert_eq!(sat_phi(0.3).unwrap(), 0.3);
        assert_eq!(sat_phi(2.0).unwrap(), FRAC_PI_2);
        assert_eq!(sat_phi(-2.0).unwrap(), -FRAC_PI_2 + PHI_LOWER_EPS);
        assert!(sat_phi(-2.0).unwrap() > -FRAC_PI_2);
        assert!(sat_phi(f64::NAN).is_err());
    }

    #[test]
    fn looking_at_hits_requested_angles() {
        let a = to_spherical(&view_direction(&quat_to_dcm(&orientation_looking_at(
            Quaternion::IDENTITY,
            1.0,
            -0.4,
        ))));
        assert!((a.theta - 1.0).abs() < 1e-12 && (a.phi + 0.4).abs() < 1e-12);
    }

    fn unit_quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-1.0f64..1.0)
            .prop_filter("non-degenerate", |v| {
                v.iter().map(|c| c * c).sum::<f64>() > 1e-2
            })
            .prop_map(|v| {
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                Quaternion::from_array(v.map(|c| c / n)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn double_cover(q in unit_quat()) {
            let a = quat_to_dcm(&q);
            let b = quat_to_dcm(&q.negated());
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
        }

        #[test]
        fn dcm_is_rotation(q in unit_quat()) {
            prop_assert!(quat_to_dcm(&q).is_rotation(1e-9));
        }

        #[test]
        fn relative_recovers_right_factor(a in unit_quat(), x in unit_quat()) {
            let r0 = quat_to_dcm(&a);
            let rx = quat_to_dcm(&x);
            prop_assert!(relative_rotation(&r0, &(r0 * rx)).max_abs_diff(&rx) < 1e-9);
        }

        #[test]
        fn wrap_is_idempotent(x in -1e4f64..1e4) {
            let w = wrap_theta(x).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_theta(w).unwrap(), w);
            let k = ((x - w) / TAU).round();
            prop_assert!((x - w - k * TAU).abs() < 1e-9);
        }

        #[test]
        fn angles_round_trip(theta in -PI..PI, phi in (-FRAC_PI_2 + 1e-6)..(FRAC_PI_2 - 1e-6)) {
            let theta = if theta == -PI { PI } else { theta };
            let a = to_spherical(&ViewDirection::from_angles(SphericalAngles { theta, phi }));
            prop_assert!((a.phi - phi).abs() < 1e-9);
            let d = wrap_theta(a.theta - theta).unwrap();
            prop_assert!(d.abs() < 1e-9);
        }
    }
}
