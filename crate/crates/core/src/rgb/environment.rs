use super::{clamp01, ensure_group, ensure_nonempty};
use crate::error::{Error, Result};
use crate::frame::RgbFrame;
use crate::perturbation::RgbGroup;
use crate::rng::RngStream;
use crate::severity::RgbParams;

/// Gray level of the fog layer.
pub const FOG_GRAY: f32 = 0.7;

const SPATTER_COLOR: [f32; 3] = [0.22, 0.18, 0.14];
const FROST_FLOOR: f64 = 0.8;

/// Effect layer blended as `(1 - α)·I + α·W`, restricted to `mask == 1`
/// when a mask is present.
#[derive(Clone, Debug, PartialEq)]
pub struct WeatherLayer {
    pub pixels: Vec<f32>,
    pub alpha: f64,
    pub mask: Option<Vec<u8>>,
}

/// Seeds where `uniform(pixel) < density`, dilated by a disc of `radius`.
fn dilated_seeds(w: usize, h: usize, density: f64, radius: usize, rng: &RngStream) -> Vec<u8> {
    let seeds: Vec<usize> = (0..w * h)
        .filter(|&i| rng.uniform(i as u64) < density)
        .collect();
    let mut mask = vec![0u8; w * h];
    let r = radius as isize;
    for i in seeds {
        let (sx, sy) = ((i % w) as isize, (i / w) as isize);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (sx + dx, sy + dy);
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    mask[y as usize * w + x as usize] = 1;
                }
            }
        }
    }
    mask
}

/// Bilinear value noise on a lattice of `cell` pixels; lattice values come
/// from `rng` starting at `counter_base`.
fn value_noise(w: usize, h: usize, cell: usize, rng: &RngStream, counter_base: u64) -> Vec<f64> {
    let cell = cell.max(1);
    let lw = w / cell + 2;
    let lattice = |gx: usize, gy: usize| rng.uniform(counter_base + (gy * lw + gx) as u64);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let fy = y as f64 / cell as f64;
        let (gy, ty) = (fy.floor() as usize, fy.fract());
        for x in 0..w {
            let fx = x as f64 / cell as f64;
            let (gx, tx) = (fx.floor() as usize, fx.fract());
            let top = lattice(gx, gy) * (1.0 - tx) + lattice(gx + 1, gy) * tx;
            let bottom = lattice(gx, gy + 1) * (1.0 - tx) + lattice(gx + 1, gy + 1) * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

/// Builds the effect layer for snow, frost, fog or spatter.
pub fn weather_layer(frame: &RgbFrame, params: &RgbParams, rng: &RngStream) -> Result<WeatherLayer> {
    ensure_group(params, RgbGroup::Environment, "an environmental corruption")?;
    let (w, h) = (frame.width(), frame.height());
    let layer = match *params {
        RgbParams::Snow {
            density,
            flake_radius,
            alpha,
        } => {
            let flakes = dilated_seeds(w, h, density, flake_radius, rng);
            let pixels = frame
                .pixels()
                .chunks_exact(3)
                .zip(&flakes)
                .flat_map(|(p, &m)| if m == 1 { [1.0; 3] } else { [p[0], p[1], p[2]] })
                .collect();
            WeatherLayer {
                pixels,
                alpha,
                mask: None,
            }
        }
        RgbParams::Frost { alpha, cell } => {
            let coarse = value_noise(w, h, cell, rng, 0);
            let fine = value_noise(w, h, (cell / 2).max(1), rng, 1 << 40);
            let pixels = coarse
                .iter()
                .zip(&fine)
                .flat_map(|(a, b)| {
                    let n = (2.0 * a + b) / 3.0;
                    let v = (FROST_FLOOR + (1.0 - FROST_FLOOR) * n) as f32;
                    // slightly blue-tinted frost
                    [v * 0.96, v * 0.98, v]
                })
                .map(|v| v.max(FROST_FLOOR as f32))
                .collect();
            WeatherLayer {
                pixels,
                alpha,
                mask: None,
            }
        }
        RgbParams::Fog { alpha } => WeatherLayer {
            pixels: vec![FOG_GRAY; w * h * 3],
            alpha,
            mask: None,
        },
        RgbParams::Spatter {
            density,
            radius,
            alpha,
        } => WeatherLayer {
            pixels: (0..w * h).flat_map(|_| SPATTER_COLOR).collect(),
            alpha,
            mask: Some(dilated_seeds(w, h, density, radius, rng)),
        },
        _ => unreachable!("group checked above"),
    };
    Ok(layer)
}

/// `(1 - α)·I + α·W` per channel, only where the mask (if any) is 1.
pub fn blend(frame: &RgbFrame, layer: &WeatherLayer) -> Result<RgbFrame> {
    if layer.pixels.len() != frame.pixels().len() {
        return Err(Error::DimensionMismatch(format!(
            "layer has {} values, frame has {}",
            layer.pixels.len(),
            frame.pixels().len()
        )));
    }
    if !(0.0..=1.0).contains(&layer.alpha) {
        return Err(Error::invalid(format!("alpha {} outside [0, 1]", layer.alpha)));
    }
    let a = layer.alpha;
    let pixels = frame
        .pixels()
        .iter()
        .zip(&layer.pixels)
        .enumerate()
        .map(|(i, (&v, &wv))| {
            let active = layer.mask.as_ref().is_none_or(|m| m[i / 3] == 1);
            if active {
                clamp01((1.0 - a) * f64::from(v) + a * f64::from(wv))
            } else {
                v
            }
        })
        .collect();
    Ok(frame.with_pixels(pixels))
}

/// Snow, frost, fog or spatter by alpha blending an effect layer.
pub fn apply_environment(frame: &RgbFrame, params: &RgbParams, rng: &RngStream) -> Result<RgbFrame> {
    ensure_group(params, RgbGroup::Environment, "an environmental corruption")?;
    ensure_nonempty(frame)?;
    blend(frame, &weather_layer(frame, params, rng)?)
}
