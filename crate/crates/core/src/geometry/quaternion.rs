use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Below this rotation angle the exponential and logarithm maps switch to
/// their Taylor expansions.
const SMALL_ANGLE: f64 = 1e-8;

/// Unit quaternion in Hamilton, scalar-first convention.
///
/// A quaternion represents the body-to-world rotation of whatever it is
/// attached to. Every constructor and every operation that yields a new
/// rotation renormalizes and canonicalizes the result so that `w >= 0`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion from raw components, normalizing them.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(GeometryError::DegenerateQuaternion);
        }
        Ok(Self::canonical(w / norm, x / norm, y / norm, z / norm))
    }

    /// Like [`Quaternion::from_wxyz`], but components that are already unit
    /// to within rounding are kept as given. Used when reading logs, so
    /// that re-writing a parsed file reproduces it.
    pub(crate) fn from_stored(w: f64, x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() < 1e-8 {
            Ok(Self::canonical(w, x, y, z))
        } else {
            Self::from_wxyz(w, x, y, z)
        }
    }

    /// Exponential map: the rotation of angle `|r|` about `r / |r|`.
    pub fn from_rotvec(r: &Vector3<f64>) -> Self {
        let angle = r.norm();
        let (w, s) = if angle < SMALL_ANGLE {
            let a2 = angle * angle;
            (1.0 - a2 / 8.0, 0.5 - a2 / 48.0)
        } else {
            let half = 0.5 * angle;
            (half.cos(), half.sin() / angle)
        };
        let q = Self::canonical(w, s * r.x, s * r.y, s * r.z);
        q.renormalized()
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n < 1e-15 {
            return Self::IDENTITY;
        }
        Self::from_rotvec(&(axis * (angle / n)))
    }

    /// Rotation about world +z (yaw), in radians.
    pub fn from_yaw(yaw: f64) -> Self {
        Self::from_rotvec(&Vector3::new(0.0, 0.0, yaw))
    }

    /// Z-Y-X intrinsic Euler angles (yaw, then pitch, then roll).
    pub fn from_euler(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self::from_yaw(yaw)
            * Self::from_rotvec(&Vector3::new(0.0, pitch, 0.0))
            * Self::from_rotvec(&Vector3::new(roll, 0.0, 0.0))
    }

    pub fn w(&self) -> f64 {
        self.w
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

    pub fn wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn vector_part(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Logarithm map; the returned rotation vector has norm in `[0, pi]`.
    pub fn to_rotvec(&self) -> Vector3<f64> {
        let v = self.vector_part();
        let s = v.norm();
        if s < SMALL_ANGLE {
            // w is ~1 here because of canonicalization.
            return v * (2.0 / self.w);
        }
        let angle = 2.0 * s.atan2(self.w);
        v * (angle / s)
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.vector_part().norm().atan2(self.w.abs())
    }

    pub fn inverse(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let u = self.vector_part();
        let t = 2.0 * u.cross(v);
        v + self.w * t + u.cross(&t)
    }

    /// Applies the inverse rotation (world-to-body for a body-to-world q).
    pub fn inverse_rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.inverse().rotate(v)
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Yaw angle of the body +x axis projected on the horizontal plane.
    pub fn yaw(&self) -> f64 {
        let fwd = self.rotate(&Vector3::x());
        fwd.y.atan2(fwd.x)
    }

    /// Geodesic interpolation from `self` (tau = 0) to `other` (tau = 1),
    /// always along the shorter arc.
    pub fn slerp(&self, other: &Quaternion, tau: f64) -> Self {
        let delta = (self.inverse() * *other).to_rotvec();
        *self * Self::from_rotvec(&(delta * tau))
    }

    fn canonical(w: f64, x: f64, y: f64, z: f64) -> Self {
        if w < 0.0 {
            Self {
                w: -w,
                x: -x,
                y: -y,
                z: -z,
            }
        } else {
            Self { w, x, y, z }
        }
    }

    fn renormalized(self) -> Self {
        let n = self.norm();
        Self {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Self::canonical(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
        .renormalized()
    }
}

impl fmt::Debug for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quaternion({}, {}, {}, {})", self.w, self.x, self.y, self.z)
    }
}

/// Builds a rotation from a rotation vector. See [`Quaternion::from_rotvec`].
pub fn quat_from_rotvec(r: &Vector3<f64>) -> Quaternion {
    Quaternion::from_rotvec(r)
}

pub fn rotate_vector(q: &Quaternion, v: &Vector3<f64>) -> Vector3<f64> {
    q.rotate(v)
}

/// Angle of the relative rotation `q_true^-1 * q_est`, in radians.
pub fn quat_error(q_est: &Quaternion, q_true: &Quaternion) -> f64 {
    (q_true.inverse() * *q_est).angle()
}

/// Skew-symmetric cross-product matrix, `skew(a) * b == a x b`.
pub fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Right Jacobian of SO(3) evaluated at rotation vector `r`.
pub fn right_jacobian(r: &Vector3<f64>) -> Matrix3<f64> {
    let angle = r.norm();
    let k = skew(r);
    if angle < 1e-6 {
        return Matrix3::identity() - 0.5 * k + (k * k) / 6.0;
    }
    let a2 = angle * angle;
    Matrix3::identity() - (1.0 - angle.cos()) / a2 * k + (angle - angle.sin()) / (a2 * angle) * (k * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Independent oracle: R = I + sin(a) K + (1 - cos(a)) K^2 for unit axis.
    fn rodrigues(r: &Vector3<f64>) -> Matrix3<f64> {
        let a = r.norm();
        if a == 0.0 {
            return Matrix3::identity();
        }
        let k = skew(&(r / a));
        Matrix3::identity() + a.sin() * k + (1.0 - a.cos()) * k * k
    }

    #[test]
    fn rotvec_zero_is_identity() {
        let q = quat_from_rotvec(&Vector3::zeros());
        assert_eq!(q.wxyz(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rotvec_half_turn_about_x() {
        let q = quat_from_rotvec(&Vector3::new(PI, 0.0, 0.0));
        let [w, x, y, z] = q.wxyz();
        assert!(w.abs() < 1e-15 && (x - 1.0).abs() < 1e-15 && y == 0.0 && z == 0.0);
    }

    #[test]
    fn rotvec_matches_rodrigues() {
        let r = Vector3::new(0.1, 0.2, 0.3);
        let diff = quat_from_rotvec(&r).to_rotation_matrix() - rodrigues(&r);
        assert!(diff.amax() < 1e-12, "{diff}");
    }

    #[test]
    fn rotate_simple_cases() {
        let v = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(rotate_vector(&Quaternion::IDENTITY, &v), v);
        let q = Quaternion::from_yaw(PI / 2.0);
        let out = rotate_vector(&q, &Vector3::x());
        assert!((out - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn quat_error_cases() {
        let q = Quaternion::from_rotvec(&Vector3::new(0.3, -0.2, 0.9));
        assert_eq!(quat_error(&q, &q), 0.0);
        let one_deg = Quaternion::from_axis_angle(&Vector3::new(1.0, -2.0, 0.5), PI / 180.0);
        assert!((quat_error(&Quaternion::IDENTITY, &one_deg) - PI / 180.0).abs() < 1e-9);
    }

    #[test]
    fn slerp_quarter_point() {
        let a = Quaternion::IDENTITY;
        let b = Quaternion::from_yaw(PI / 2.0);
        let q = a.slerp(&b, 0.25);
        let expected = Quaternion::from_rotvec(&(Vector3::z() * (PI / 8.0)));
        assert!(quat_error(&q, &expected) < 1e-9);
    }

    #[test]
    fn slerp_takes_short_arc() {
        let a = Quaternion::from_yaw(0.1);
        let b = Quaternion::from_yaw(-0.1);
        assert!((a.slerp(&b, 0.5).yaw()).abs() < 1e-12);
    }

    #[test]
    fn rotvec_log_inverts_exp_beyond_pi() {
        // Rotations past pi wrap to the equivalent short rotation.
        let q = quat_from_rotvec(&Vector3::new(0.0, 0.0, 1.5 * PI));
        assert!(q.w() >= 0.0);
        assert!((q.to_rotvec() - Vector3::new(0.0, 0.0, -0.5 * PI)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_components_rejected() {
        assert!(Quaternion::from_wxyz(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(Quaternion::from_wxyz(f64::NAN, 1.0, 0.0, 0.0).is_err());
        let q = Quaternion::from_wxyz(-2.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(q.wxyz(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn right_jacobian_matches_finite_difference() {
        let r = Vector3::new(0.4, -0.3, 0.2);
        let jr = right_jacobian(&r);
        let h = 1e-6;
        for i in 0..3 {
            let mut d = Vector3::zeros();
            d[i] = h;
            // exp(r + d) ~= exp(r) exp(Jr d)
            let lhs = quat_from_rotvec(&r).inverse() * quat_from_rotvec(&(r + d));
            let col = lhs.to_rotvec() / h;
            assert!((col - jr.column(i)).norm() < 1e-6);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec3(range: f64) -> impl Strategy<Value = Vector3<f64>> {
            (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
        }

        proptest! {
            #[test]
            fn operations_stay_unit(a in vec3(4.0), b in vec3(4.0), tau in 0.0f64..1.0) {
                let qa = quat_from_rotvec(&a);
                let qb = quat_from_rotvec(&b);
                for q in [qa, qb, qa * qb, qa.inverse(), qa.slerp(&qb, tau)] {
                    prop_assert!((q.norm() - 1.0).abs() < 1e-9);
                    prop_assert!(q.w() >= 0.0);
                }
            }

            #[test]
            fn rotation_matches_rodrigues(r in vec3(1.8), v in vec3(10.0)) {
                prop_assume!(r.norm() < PI);
                let via_quat = rotate_vector(&quat_from_rotvec(&r), &v);
                prop_assert!((via_quat - rodrigues(&r) * v).norm() < 1e-10);
                prop_assert!((via_quat.norm() - v.norm()).abs() < 1e-12 * (1.0 + v.norm()));
                let via_matrix = quat_from_rotvec(&r).to_rotation_matrix() * v;
                prop_assert!((via_quat - via_matrix).norm() < 1e-12 * (1.0 + v.norm()));
            }

            #[test]
            fn error_is_symmetric_and_matches_trace(a in vec3(3.0), b in vec3(3.0)) {
                let qa = quat_from_rotvec(&a);
                let qb = quat_from_rotvec(&b);
                let e = quat_error(&qa, &qb);
                prop_assert!((e - quat_error(&qb, &qa)).abs() < 1e-12);
                prop_assert!((0.0..=PI).contains(&e));
                let rel = qb.to_rotation_matrix().transpose() * qa.to_rotation_matrix();
                let cos = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
                // acos is ill-conditioned near 0 and pi.
                prop_assume!(e > 1e-3 && e < PI - 1e-3);
                prop_assert!((e - cos.acos()).abs() < 1e-7);
            }
        }
    }
}
