//! Poses and trajectories.
//!
//! Orientation is a Hamilton unit quaternion stored `(w, x, y, z)`. The TUM
//! file order `(x, y, z, w)` is only used at the I/O boundary.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Allowed deviation of a quaternion norm from one.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Returns `q / |q|` for `q = (w, x, y, z)`.
pub fn normalize_quaternion(q: [f64; 4]) -> Result<UnitQuaternion<f64>> {
    if q.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidQuaternion(format!("non-finite component in {q:?}")));
    }
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let norm = raw.norm();
    if norm == 0.0 {
        return Err(Error::InvalidQuaternion("zero norm".into()));
    }
    Ok(UnitQuaternion::new_unchecked(raw / norm))
}

/// Rotation matrix of a unit quaternion `(w, x, y, z)`.
pub fn quat_to_rotmat(q: [f64; 4]) -> Result<Matrix3<f64>> {
    let [w, x, y, z] = q;
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::InvalidQuaternion(format!("norm {norm} is not 1")));
    }
    Ok(Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ))
}

/// Flips the sign so that `w >= 0`; `q` and `-q` are the same rotation.
pub fn canonical(q: &UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    if q.w < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        *q
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub timestamp: f64,
    pub translation: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    /// Builds a pose from a translation and a `(w, x, y, z)` quaternion that
    /// must already be unit-norm.
    pub fn new(timestamp: f64, translation: [f64; 3], q: [f64; 4]) -> Result<Self> {
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidQuaternion(format!("norm {norm} is not 1")));
        }
        Self::from_parts(
            timestamp,
            Vector3::from(translation),
            UnitQuaternion::new_unchecked(Quaternion::new(q[0], q[1], q[2], q[3])),
        )
    }

    pub fn from_parts(
        timestamp: f64,
        translation: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
    ) -> Result<Self> {
        if !timestamp.is_finite() || timestamp < 0.0 {
            return Err(Error::InvalidPose(format!("timestamp {timestamp}")));
        }
        if translation.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPose("non-finite translation".into()));
        }
        Ok(Self {
            timestamp,
            translation,
            orientation,
        })
    }

    pub fn identity(timestamp: f64) -> Self {
        Self {
            timestamp,
            translation: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.orientation.to_rotation_matrix().into_inner()
    }

    /// `(w, x, y, z)`.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }
}

/// An ordered pose sequence. `frame_ids` names the source frame each pose was
/// taken from; it survives downsampling so per-frame random draws stay tied to
/// the original frame.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Trajectory {
    poses: Vec<Pose>,
    frame_ids: Vec<u64>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>) -> Result<Self> {
        let ids = (0..poses.len() as u64).collect();
        Self::with_frame_ids(poses, ids)
    }

    pub fn with_frame_ids(poses: Vec<Pose>, frame_ids: Vec<u64>) -> Result<Self> {
        if poses.len() != frame_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} poses but {} frame ids",
                poses.len(),
                frame_ids.len()
            )));
        }
        if let Some(w) = poses.windows(2).find(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::InvalidPose(format!(
                "timestamps not strictly increasing: {} then {}",
                w[0].timestamp, w[1].timestamp
            )));
        }
        Ok(Self { poses, frame_ids })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn frame_ids(&self) -> &[u64] {
        &self.frame_ids
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.poses.iter().map(|p| p.timestamp).collect()
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.poses.iter().map(|p| p.translation).collect()
    }

    /// Keeps the poses at `indices` (which must be increasing).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            poses: indices.iter().map(|&i| self.poses[i]).collect(),
            frame_ids: indices.iter().map(|&i| self.frame_ids[i]).collect(),
        }
    }

    /// Same timestamps and frame ids, with each pose replaced by `f(index, pose)`.
    pub(crate) fn map_poses(&self, mut f: impl FnMut(usize, &Pose) -> Pose) -> Self {
        Self {
            poses: self.poses.iter().enumerate().map(|(i, p)| f(i, p)).collect(),
            frame_ids: self.frame_ids.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: [f64; 4], b: [f64; 4]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn wxyz(q: &UnitQuaternion<f64>) -> [f64; 4] {
        [q.w, q.i, q.j, q.k]
    }

    #[test]
    fn normalize_examples() {
        assert!(close(wxyz(&normalize_quaternion([1., 0., 0., 0.]).unwrap()), [1., 0., 0., 0.]));
        assert!(close(wxyz(&normalize_quaternion([2., 0., 0., 0.]).unwrap()), [1., 0., 0., 0.]));
        // |(1,1,1,1)| = 2
        assert!(close(
            wxyz(&normalize_quaternion([1., 1., 1., 1.]).unwrap()),
            [0.5, 0.5, 0.5, 0.5]
        ));
        assert!(matches!(
            normalize_quaternion([0.; 4]),
            Err(Error::InvalidQuaternion(_))
        ));
    }

    #[test]
    fn rotmat_examples() {
        assert_eq!(quat_to_rotmat([1., 0., 0., 0.]).unwrap(), Matrix3::identity());
        // 180 degrees about x
        let r = quat_to_rotmat([0., 1., 0., 0.]).unwrap();
        assert_eq!(r, Matrix3::from_diagonal(&Vector3::new(1., -1., -1.)));
        let q = [0.5, 0.5, 0.5, 0.5];
        let nq = [-0.5, -0.5, -0.5, -0.5];
        assert_eq!(quat_to_rotmat(q).unwrap(), quat_to_rotmat(nq).unwrap());
        assert!(quat_to_rotmat([2., 0., 0., 0.]).is_err());
    }

    #[test]
    fn trajectory_rejects_non_increasing_timestamps() {
        let poses = vec![Pose::identity(1.0), Pose::identity(1.0)];
        assert!(Trajectory::new(poses).is_err());
        assert!(Pose::new(-1.0, [0.; 3], [1., 0., 0., 0.]).is_err());
        assert!(Pose::new(0.0, [0.; 3], [1.1, 0., 0., 0.]).is_err());
    }

    #[test]
    fn canonical_sign() {
        let q = normalize_quaternion([-0.5, 0.5, 0.5, 0.5]).unwrap();
        let c = canonical(&q);
        assert!(c.w > 0.0);
        assert!(close(wxyz(&c), [0.5, -0.5, -0.5, -0.5]));
    }

    proptest! {
        #[test]
        fn rotmat_is_orthonormal(w in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            prop_assume!(w * w + x * x + y * y + z * z > 1e-6);
            let q = normalize_quaternion([w, x, y, z]).unwrap();
            prop_assert!((q.norm() - 1.0).abs() < 1e-12);
            let r = quat_to_rotmat(wxyz(&q)).unwrap();
            prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-9);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn norm_survives_many_compositions() {
        let rng = crate::rng::RngStream::new(3);
        let mut d = rng.cursor();
        let mut q = UnitQuaternion::identity();
        for _ in 0..1_000_000 {
            let axis = Vector3::new(d.next_gaussian(), d.next_gaussian(), d.next_gaussian());
            let step = UnitQuaternion::from_scaled_axis(axis * 0.1);
            let c = q * step;
            q = normalize_quaternion(wxyz(&c)).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-9);
        }
    }
}
