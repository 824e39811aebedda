#![allow(dead_code)]

use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3};
use perturb_forge::io::{write_sequence, DEFAULT_DEPTH_SCALE};
use perturb_forge::{DepthFrame, Pose, RgbFrame, SensorSequence, Trajectory};

pub const WIDTH: usize = 64;
pub const HEIGHT: usize = 48;

pub fn timestamp(i: usize) -> f64 {
    1_000.0 + i as f64 / 30.0
}

/// Textured image: gradients, a checkerboard and a frame-dependent sine.
pub fn image(i: usize, w: usize, h: usize) -> RgbFrame {
    let mut px = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let check = if (x / 8 + y / 8) % 2 == 0 { 0.25 } else { 0.0 };
            let wave = 0.2 * ((x as f32 + i as f32) * 0.3).sin();
            px.push((0.2 + 0.5 * x as f32 / w as f32 + check).clamp(0.0, 1.0));
            px.push((0.3 + 0.4 * y as f32 / h as f32 + wave).clamp(0.0, 1.0));
            px.push((0.5 + wave - check).clamp(0.0, 1.0));
        }
    }
    RgbFrame::new(timestamp(i), w, h, px).unwrap()
}

/// A sloped floor with a box in front of it.
pub fn depth(i: usize, w: usize, h: usize) -> DepthFrame {
    let mut d = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let inside = (w / 3..2 * w / 3).contains(&x) && (h / 3..2 * h / 3).contains(&y);
            let v = if inside { 1.2 } else { 3.0 - 1.5 * y as f32 / h as f32 };
            d.push(v + 0.002 * i as f32);
        }
    }
    DepthFrame::new(timestamp(i), w, h, d).unwrap()
}

pub fn trajectory(n: usize) -> Trajectory {
    let poses = (0..n)
        .map(|i| {
            let a = i as f64 * 0.05;
            let q = UnitQuaternion::from_euler_angles(0.1 * a.sin(), a, 0.05);
            Pose::from_parts(timestamp(i), Vector3::new(a.cos(), a.sin(), 0.1 * a), q).unwrap()
        })
        .collect();
    Trajectory::new(poses).unwrap()
}

pub fn sequence(n: usize) -> SensorSequence {
    SensorSequence::new(
        (0..n).map(|i| image(i, WIDTH, HEIGHT)).collect(),
        (0..n).map(|i| depth(i, WIDTH, HEIGHT)).collect(),
        trajectory(n),
    )
    .unwrap()
}

/// Writes an `n`-frame toy source with a stereo baseline file.
pub fn write_source(root: &Path, n: usize) -> SensorSequence {
    let seq = sequence(n);
    write_sequence(&seq, root, DEFAULT_DEPTH_SCALE).unwrap();
    std::fs::write(root.join("extrinsics.txt"), "0.000000 0.050000 0.000000 0.000000\n").unwrap();
    seq
}

pub fn scenes() -> Vec<String> {
    ["office0", "office1", "office2", "office3", "office4", "room0", "room1", "room2"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}
