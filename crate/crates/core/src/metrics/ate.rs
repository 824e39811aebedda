use nalgebra::Vector3;

use super::association::{associate, ASSOCIATION_TOLERANCE_S};
use super::umeyama::{umeyama_align, SimilarityTransform};
use crate::error::{Error, Result};
use crate::pose::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Alignment {
    /// Raw positions.
    #[default]
    None,
    /// Rotation and translation fitted to the ground truth.
    Rigid,
    /// Rotation, translation and scale fitted to the ground truth.
    Similarity,
}

impl Alignment {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Rigid => "rigid",
            Self::Similarity => "sim3",
        }
    }
}

impl std::str::FromStr for Alignment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "rigid" | "se3" => Ok(Self::Rigid),
            "sim3" | "similarity" => Ok(Self::Similarity),
            _ => Err(Error::invalid(format!("unknown alignment `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AteReport {
    /// RMSE in meters.
    pub ate: f64,
    pub per_frame_errors: Vec<f64>,
    pub alignment: Alignment,
    pub transform: SimilarityTransform,
    /// `(estimate index, ground-truth index)` of every associated pair.
    pub pairs: Vec<(usize, usize)>,
}

/// Root-mean-square position error over timestamp-associated pairs.
pub fn compute_ate(est: &Trajectory, gt: &Trajectory, alignment: Alignment) -> Result<AteReport> {
    let pairs = associate(&est.timestamps(), &gt.timestamps(), ASSOCIATION_TOLERANCE_S);
    if pairs.is_empty() {
        return Err(Error::NoAssociations);
    }
    if pairs.len() < 2 {
        return Err(Error::TooShort(pairs.len()));
    }
    let (e, g) = (est.poses(), gt.poses());
    let src: Vec<Vector3<f64>> = pairs.iter().map(|&(i, _)| e[i].translation).collect();
    let dst: Vec<Vector3<f64>> = pairs.iter().map(|&(_, j)| g[j].translation).collect();
    let transform = match alignment {
        Alignment::None => SimilarityTransform::identity(),
        Alignment::Rigid => umeyama_align(&src, &dst, false)?,
        Alignment::Similarity => umeyama_align(&src, &dst, true)?,
    };
    let mut sum_sq = 0.0;
    let mut per_frame_errors = Vec::with_capacity(src.len());
    for (s, d) in src.iter().zip(&dst) {
        let p = if alignment == Alignment::None { *s } else { transform.apply(s) };
        let diff = p - d;
        let sq = diff.x * diff.x + diff.y * diff.y + diff.z * diff.z;
        sum_sq += sq;
        per_frame_errors.push(sq.sqrt());
    }
    Ok(AteReport {
        ate: (sum_sq / src.len() as f64).sqrt(),
        per_frame_errors,
        alignment,
        transform,
        pairs,
    })
}
