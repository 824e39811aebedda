//! Trajectory-level perturbations: per-pose rotation and translation
//! deviations, faster motion by frame dropping, and stereo-baseline noise.
//!
//! Per-pose draws are keyed by the pose's source frame id, so perturbing and
//! downsampling commute.

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::frame::SensorSequence;
use crate::pose::{Pose, Trajectory, UNIT_TOLERANCE};
use crate::rng::RngStream;

const LANE_ROTATION: u32 = 2;
const LANE_TRANSLATION: u32 = 3;
const LANE_EXTRINSIC: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationParams {
    pub rot_sigma_deg: f64,
    pub trans_sigma_m: f64,
}

impl DeviationParams {
    pub fn new(rot_sigma_deg: f64, trans_sigma_m: f64) -> Result<Self> {
        check_sigma("rotation", rot_sigma_deg)?;
        check_sigma("translation", trans_sigma_m)?;
        Ok(Self {
            rot_sigma_deg,
            trans_sigma_m,
        })
    }
}

fn check_sigma(what: &str, sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} sigma {sigma} must be non-negative")))
    }
}

/// Rotation `Rx(θx)·Ry(θy)·Rz(θz)`.
pub fn euler_xyz(theta: [f64; 3]) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::x_axis(), theta[0])
        * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), theta[1])
        * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta[2])
}

/// Per-axis angles (radians) drawn for the pose with `frame_id`.
pub fn rotation_draw(rng: &RngStream, frame_id: u64, sigma_deg: f64) -> [f64; 3] {
    let s = rng.frame(frame_id).lane(LANE_ROTATION);
    let sigma = sigma_deg.to_radians();
    [0, 1, 2].map(|i| sigma * s.gaussian(i))
}

/// Translation offset (meters) drawn for the pose with `frame_id`.
pub fn translation_draw(rng: &RngStream, frame_id: u64, sigma_m: f64) -> Vector3<f64> {
    let s = rng.frame(frame_id).lane(LANE_TRANSLATION);
    Vector3::new(sigma_m * s.gaussian(0), sigma_m * s.gaussian(1), sigma_m * s.gaussian(2))
}

/// `R' = R·ΔR` with `ΔR` from independent Gaussian Euler angles.
pub fn perturb_rotation(traj: &Trajectory, sigma_deg: f64, rng: &RngStream) -> Result<Trajectory> {
    check_sigma("rotation", sigma_deg)?;
    if sigma_deg == 0.0 {
        return Ok(traj.clone());
    }
    let ids = traj.frame_ids();
    Ok(traj.map_poses(|i, p| {
        let dq = euler_xyz(rotation_draw(rng, ids[i], sigma_deg));
        let q = (p.orientation * dq).into_inner();
        Pose {
            orientation: UnitQuaternion::new_normalize(q),
            ..*p
        }
    }))
}

/// `t' = t + Δt` with `Δt ~ N(0, σ²I)`.
pub fn perturb_translation(traj: &Trajectory, sigma_m: f64, rng: &RngStream) -> Result<Trajectory> {
    check_sigma("translation", sigma_m)?;
    if sigma_m == 0.0 {
        return Ok(traj.clone());
    }
    let ids = traj.frame_ids();
    Ok(traj.map_poses(|i, p| Pose {
        translation: p.translation + translation_draw(rng, ids[i], sigma_m),
        ..*p
    }))
}

/// Rotation deviation followed by translation deviation on separate lanes.
pub fn perturb_se3(traj: &Trajectory, params: &DeviationParams, rng: &RngStream) -> Result<Trajectory> {
    let rotated = perturb_rotation(traj, params.rot_sigma_deg, rng)?;
    perturb_translation(&rotated, params.trans_sigma_m, rng)
}

/// Keeps frames `0, k, 2k, ...` of every stream.
pub fn downsample_faster_motion(seq: &SensorSequence, k: usize) -> Result<SensorSequence> {
    if k < 1 {
        return Err(Error::invalid("downsampling interval must be at least 1"));
    }
    let keep: Vec<usize> = (0..seq.len()).step_by(k).collect();
    SensorSequence::new(
        keep.iter().map(|&i| seq.rgb[i].clone()).collect(),
        keep.iter().map(|&i| seq.depth[i].clone()).collect(),
        seq.trajectory.select(&keep),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrinsicSpec {
    axis: Vector3<f64>,
    sigma: f64,
}

impl ExtrinsicSpec {
    /// `axis` must be unit-norm within [`UNIT_TOLERANCE`].
    pub fn new(axis: Vector3<f64>, sigma: f64) -> Result<Self> {
        if !((axis.norm() - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::invalid(format!("baseline axis norm {} is not 1", axis.norm())));
        }
        check_sigma("baseline", sigma)?;
        Ok(Self { axis, sigma })
    }

    /// Normalizes `direction` first.
    pub fn along(direction: Vector3<f64>, sigma: f64) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("baseline direction has zero length"));
        }
        Self::new(direction / n, sigma)
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `t' = t + η·axis` per frame with `η ~ N(0, σ²)`.
pub fn perturb_extrinsic_baseline(
    extrinsics: &[Vector3<f64>],
    spec: &ExtrinsicSpec,
    rng: &RngStream,
) -> Vec<Vector3<f64>> {
    if spec.sigma == 0.0 {
        return extrinsics.to_vec();
    }
    extrinsics
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let eta = spec.sigma * rng.frame(i as u64).lane(LANE_EXTRINSIC).gaussian(0);
            t + spec.axis * eta
        })
        .collect()
}
