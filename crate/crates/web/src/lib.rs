//! WebAssembly bindings for the browser demo. Every export is a thin wrapper
//! over a plain function that can be tested natively.

use perturb_forge::depth::apply_depth;
use perturb_forge::metrics::{compute_ate, compute_sr, Alignment};
use perturb_forge::rgb::apply_rgb;
use perturb_forge::trajectory::{perturb_rotation, perturb_translation};
use perturb_forge::{
    DepthFrame, Level, PerturbationKind, PerturbationSpec, Pose, Result, RgbFrame, RngStream, SeverityTable,
    Trajectory, TrajectoryKind,
};
use wasm_bindgen::prelude::*;

fn spec(kind: &str, level: &str, mode: &str, seed: u64) -> Result<PerturbationSpec> {
    PerturbationSpec::new(kind.parse()?, level.parse()?, mode.parse()?, seed)
}

/// RGBA in, RGBA out; alpha is passed through.
#[allow(clippy::too_many_arguments)]
pub fn corrupt_rgba(
    rgba: &[u8],
    width: usize,
    height: usize,
    kind: &str,
    level: &str,
    mode: &str,
    seed: u64,
    frame: u64,
) -> Result<Vec<u8>> {
    if rgba.len() != width * height * 4 {
        return Err(perturb_forge::Error::DimensionMismatch(format!(
            "{width}x{height} RGBA needs {} bytes, got {}",
            width * height * 4,
            rgba.len()
        )));
    }
    let rgb: Vec<u8> = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    let image = RgbFrame::from_rgb8(0.0, width, height, &rgb)?;
    let out = apply_rgb(&image, &spec(kind, level, mode, seed)?, frame, &SeverityTable::builtin())?;
    Ok(out
        .to_rgb8()
        .chunks_exact(3)
        .zip(rgba.chunks_exact(4))
        .flat_map(|(c, p)| [c[0], c[1], c[2], p[3]])
        .collect())
}

/// Depth in meters of a corridor with a box, for the depth demo.
pub fn synthetic_depth(width: usize, height: usize) -> Vec<f32> {
    let mut d = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let u = x as f32 / width as f32 - 0.5;
            let v = y as f32 / height as f32 - 0.5;
            let wall = 0.5 / (u.abs().max(v.abs()) + 0.05);
            let boxed = (0.15..0.4).contains(&u) && (0.0..0.3).contains(&v);
            d.push(if boxed { 1.1 } else { wall.min(9.0) });
        }
    }
    d
}

pub fn corrupt_depth_map(
    depths: &[f32],
    width: usize,
    height: usize,
    kind: &str,
    level: &str,
    mode: &str,
    seed: u64,
) -> Result<Vec<f32>> {
    let frame = DepthFrame::new(0.0, width, height, depths.to_vec())?;
    let out = apply_depth(&frame, &spec(kind, level, mode, seed)?, 0, &SeverityTable::builtin())?;
    Ok(out.depths().to_vec())
}

/// Near is bright, far is dark; VOID pixels are drawn red.
pub fn colorize(depths: &[f32], max_depth: f32) -> Vec<u8> {
    depths
        .iter()
        .flat_map(|&d| {
            if d.is_nan() {
                [200, 30, 30, 255]
            } else {
                let g = (255.0 * (1.0 - (d / max_depth).clamp(0.0, 1.0))) as u8;
                [g, g, g, 255]
            }
        })
        .collect()
}

/// A looping handheld-camera path.
pub fn demo_trajectory(frames: usize) -> Result<Trajectory> {
    let poses = (0..frames)
        .map(|i| {
            let a = i as f64 / frames.max(1) as f64 * std::f64::consts::TAU;
            let q = perturb_forge::trajectory::euler_xyz([0.0, 0.0, a]);
            Pose::from_parts(i as f64 / 30.0, [1.5 * a.cos(), (2.0 * a).sin(), 0.1 * a.sin()].into(), q)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(poses)
}

/// Applies rotation and translation deviations to the demo path; "none"
/// skips either one.
pub fn deviate(frames: usize, rotation: &str, translation: &str, seed: u64) -> Result<(Trajectory, Trajectory)> {
    let table = SeverityTable::builtin();
    let clean = demo_trajectory(frames)?;
    let rng = RngStream::new(seed).kind(PerturbationKind::Trajectory(TrajectoryKind::RotationDeviation).tag());
    let mut out = clean.clone();
    if rotation != "none" {
        out = perturb_rotation(&out, table.rotation_sigma_deg(rotation.parse::<Level>()?), &rng)?;
    }
    if translation != "none" {
        out = perturb_translation(&out, table.translation_sigma_m(translation.parse::<Level>()?), &rng)?;
    }
    Ok((clean, out))
}

fn flat(traj: &Trajectory) -> Vec<f64> {
    traj.poses()
        .iter()
        .flat_map(|p| [p.translation.x, p.translation.y, p.translation.z])
        .collect()
}

fn js(e: perturb_forge::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn corrupt_image(
    rgba: &[u8],
    width: usize,
    height: usize,
    kind: &str,
    level: &str,
    mode: &str,
    seed: u64,
    frame: u64,
) -> std::result::Result<Vec<u8>, JsError> {
    corrupt_rgba(rgba, width, height, kind, level, mode, seed, frame).map_err(js)
}

#[wasm_bindgen]
pub fn corrupt_depth(
    width: usize,
    height: usize,
    kind: &str,
    level: &str,
    mode: &str,
    seed: u64,
) -> std::result::Result<Vec<u8>, JsError> {
    let clean = synthetic_depth(width, height);
    let out = corrupt_depth_map(&clean, width, height, kind, level, mode, seed).map_err(js)?;
    Ok(colorize(&out, 9.0))
}

#[wasm_bindgen]
pub fn clean_depth(width: usize, height: usize) -> Vec<u8> {
    colorize(&synthetic_depth(width, height), 9.0)
}

#[wasm_bindgen]
pub struct TrajectoryDemo {
    clean: Vec<f64>,
    perturbed: Vec<f64>,
    ate: f64,
    sr: f64,
}

#[wasm_bindgen]
impl TrajectoryDemo {
    /// Flattened `x, y, z` positions.
    pub fn clean(&self) -> Vec<f64> {
        self.clean.clone()
    }

    pub fn perturbed(&self) -> Vec<f64> {
        self.perturbed.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ate(&self) -> f64 {
        self.ate
    }

    #[wasm_bindgen(getter)]
    pub fn sr(&self) -> f64 {
        self.sr
    }
}

pub fn trajectory_demo(frames: usize, rotation: &str, translation: &str, seed: u64) -> Result<TrajectoryDemo> {
    let (clean, perturbed) = deviate(frames, rotation, translation, seed)?;
    Ok(TrajectoryDemo {
        ate: compute_ate(&perturbed, &clean, Alignment::None)?.ate,
        sr: compute_sr(&perturbed, &clean)?.sr,
        clean: flat(&clean),
        perturbed: flat(&perturbed),
    })
}

#[wasm_bindgen]
pub fn perturb_trajectory(
    frames: usize,
    rotation: &str,
    translation: &str,
    seed: u64,
) -> std::result::Result<TrajectoryDemo, JsError> {
    trajectory_demo(frames, rotation, translation, seed).map_err(js)
}

#[wasm_bindgen]
pub fn rgb_kinds() -> Vec<String> {
    perturb_forge::RgbKind::ALL.iter().map(|k| k.to_string()).collect()
}

#[wasm_bindgen]
pub fn depth_kinds() -> Vec<String> {
    perturb_forge::DepthKind::ALL.iter().map(|k| k.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use perturb_forge::VOID;

    #[test]
    fn alpha_survives_and_levels_differ() {
        let (w, h) = (24, 16);
        let rgba: Vec<u8> = (0..w * h * 4).map(|i| if i % 4 == 3 { 77 } else { (i * 5 % 256) as u8 }).collect();
        let low = corrupt_rgba(&rgba, w, h, "gaussian_noise", "low", "static", 1, 0).unwrap();
        let high = corrupt_rgba(&rgba, w, h, "gaussian_noise", "high", "static", 1, 0).unwrap();
        assert!(low.chunks(4).all(|p| p[3] == 77));
        assert_ne!(low, high);
        assert_eq!(low, corrupt_rgba(&rgba, w, h, "gaussian_noise", "low", "static", 1, 0).unwrap());
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(corrupt_rgba(&[0; 10], 2, 2, "fog", "low", "static", 0, 0).is_err());
        assert!(corrupt_rgba(&[0; 16], 2, 2, "smog", "low", "static", 0, 0).is_err());
        assert!(corrupt_depth_map(&[1.0; 4], 2, 2, "fog", "low", "static", 0).is_err());
    }

    #[test]
    fn depth_demo_marks_void() {
        let (w, h) = (40, 30);
        let out = corrupt_depth_map(&synthetic_depth(w, h), w, h, "random_missing", "high", "static", 3).unwrap();
        let void = out.iter().filter(|d| d.is_nan()).count();
        assert!(void > 0 && void < w * h);
        let rgba = colorize(&out, 9.0);
        assert_eq!(rgba.len(), w * h * 4);
        assert_eq!(colorize(&[VOID], 9.0), vec![200, 30, 30, 255]);
    }

    #[test]
    fn trajectory_demo_scores() {
        let clean = trajectory_demo(120, "none", "none", 0).unwrap();
        assert_eq!((clean.ate, clean.sr), (0.0, 1.0));
        let noisy = trajectory_demo(120, "medium", "high", 9).unwrap();
        assert!(noisy.ate > 0.0 && noisy.perturbed().len() == 360);
        assert!(trajectory_demo(120, "extreme", "none", 0).is_err());
    }

    #[test]
    fn kind_lists() {
        assert_eq!(rgb_kinds().len(), 16);
        assert_eq!(depth_kinds().len(), 4);
    }
}
