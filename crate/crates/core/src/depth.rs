//! Depth corruptions: additive noise, edge erosion, random dropout and range
//! clipping. VOID pixels are never turned back into measurements.

use crate::error::{Error, Result};
use crate::frame::{is_void, DepthFrame, VOID};
use crate::perturbation::{PerturbationKind, PerturbationSpec};
use crate::rng::RngStream;
use crate::severity::{DepthParams, SeverityTable};

/// Smallest depth produced by additive noise, in meters.
pub const NOISE_FLOOR_M: f64 = 1e-3;
/// Gradient magnitude (meters per pixel step) above which a pixel is an edge.
pub const EDGE_THRESHOLD_M: f64 = 0.1;

/// Valid measurement interval; depths outside become VOID.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClipRange {
    min: f64,
    max: f64,
}

impl ClipRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && 0.0 < min && min < max) {
            return Err(Error::invalid(format!("clip range [{min}, {max}] needs 0 < min < max")));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn contains(&self, d: f64) -> bool {
        self.min <= d && d <= self.max
    }
}

/// `D' = max(D + η, 1 mm)` with `η ~ N(0, σ²)` on non-VOID pixels.
pub fn depth_gaussian_noise(frame: &DepthFrame, sigma: f64, rng: &RngStream) -> Result<DepthFrame> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("depth noise sigma {sigma} must be non-negative")));
    }
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let depths = frame
        .depths()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if is_void(d) {
                VOID
            } else {
                (f64::from(d) + sigma * rng.gaussian(i as u64)).max(NOISE_FLOOR_M) as f32
            }
        })
        .collect();
    Ok(frame.with_depths(depths))
}

/// Each non-VOID pixel becomes VOID with probability `p`.
pub fn depth_random_missing(frame: &DepthFrame, p: f64, rng: &RngStream) -> Result<DepthFrame> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("missing rate {p} outside [0, 1]")));
    }
    let depths = frame
        .depths()
        .iter()
        .enumerate()
        .map(|(i, &d)| if rng.uniform(i as u64) < p { VOID } else { d })
        .collect();
    Ok(frame.with_depths(depths))
}

/// Keeps depths inside `range`, VOID elsewhere.
pub fn depth_range_clip(frame: &DepthFrame, range: &ClipRange) -> DepthFrame {
    let depths = frame
        .depths()
        .iter()
        .map(|&d| if !is_void(d) && range.contains(f64::from(d)) { d } else { VOID })
        .collect();
    frame.with_depths(depths)
}

/// Thin depth edges: central-difference gradient above
/// [`EDGE_THRESHOLD_M`], kept only at the local maximum along the dominant
/// gradient axis. A VOID pixel is never an edge and contributes no gradient
/// to its neighbors.
pub fn edge_mask(frame: &DepthFrame) -> Vec<bool> {
    let (w, h) = (frame.width(), frame.height());
    let d = frame.depths();
    let at = |x: usize, y: usize| d[y * w + x];
    let diff = |a: f32, b: f32| {
        if is_void(a) || is_void(b) {
            0.0
        } else {
            (f64::from(a) - f64::from(b)) / 2.0
        }
    };
    let mut grad = vec![(0.0f64, 0.0f64); w * h];
    for y in 0..h {
        for x in 0..w {
            if is_void(at(x, y)) {
                continue;
            }
            let gx = diff(at((x + 1).min(w - 1), y), at(x.saturating_sub(1), y));
            let gy = diff(at(x, (y + 1).min(h - 1)), at(x, y.saturating_sub(1)));
            grad[y * w + x] = (gx, gy);
        }
    }
    let mag = |x: isize, y: isize| {
        if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
            0.0
        } else {
            let (gx, gy) = grad[y as usize * w + x as usize];
            gx.hypot(gy)
        }
    };
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (gx, gy) = grad[y * w + x];
            let m = gx.hypot(gy);
            if m <= EDGE_THRESHOLD_M {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            let (prev, next) = if gx.abs() >= gy.abs() {
                (mag(xi - 1, yi), mag(xi + 1, yi))
            } else {
                (mag(xi, yi - 1), mag(xi, yi + 1))
            };
            mask[y * w + x] = m >= prev && m > next;
        }
    }
    mask
}

/// Dilates the edge set by a disc of `radius` and sets each candidate to
/// VOID with probability `retain`.
pub fn depth_edge_erosion(
    frame: &DepthFrame,
    radius: usize,
    retain: f64,
    rng: &RngStream,
) -> Result<DepthFrame> {
    if !(0.0..=1.0).contains(&retain) {
        return Err(Error::invalid(format!("retention probability {retain} outside [0, 1]")));
    }
    let (w, h) = (frame.width(), frame.height());
    if retain == 0.0 || w == 0 || h == 0 {
        return Ok(frame.clone());
    }
    let edges = edge_mask(frame);
    let r = radius as isize;
    let mut candidates = vec![false; w * h];
    for (i, _) in edges.iter().enumerate().filter(|(_, e)| **e) {
        let (ex, ey) = ((i % w) as isize, (i / w) as isize);
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (ex + dx, ey + dy);
                if dx * dx + dy * dy <= r * r && x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    candidates[y as usize * w + x as usize] = true;
                }
            }
        }
    }
    let depths = frame
        .depths()
        .iter()
        .zip(&candidates)
        .enumerate()
        .map(|(i, (&d, &c))| if c && rng.uniform(i as u64) < retain { VOID } else { d })
        .collect();
    Ok(frame.with_depths(depths))
}

/// Applies resolved depth parameters.
pub fn apply_depth_params(frame: &DepthFrame, params: &DepthParams, rng: &RngStream) -> Result<DepthFrame> {
    match *params {
        DepthParams::GaussianNoise { sigma } => depth_gaussian_noise(frame, sigma, rng),
        DepthParams::EdgeErosion { radius, retain } => depth_edge_erosion(frame, radius, retain, rng),
        DepthParams::RandomMissing { rate } => depth_random_missing(frame, rate, rng),
        DepthParams::RangeClipping { min, max } => Ok(depth_range_clip(frame, &ClipRange::new(min, max)?)),
    }
}

/// Applies one depth corruption described by `spec` to the frame at
/// `frame_index`.
pub fn apply_depth(
    frame: &DepthFrame,
    spec: &PerturbationSpec,
    frame_index: u64,
    table: &SeverityTable,
) -> Result<DepthFrame> {
    let PerturbationKind::Depth(kind) = spec.kind else {
        return Err(Error::KindMismatch {
            kind: spec.kind.to_string(),
            expected: "a depth corruption",
        });
    };
    let params = table.depth(kind, spec.level_at(frame_index));
    apply_depth_params(frame, &params, &spec.stream_at(frame_index))
}
