use super::{clamp01, ensure_group, ensure_nonempty};
use crate::error::{Error, Result};
use crate::frame::RgbFrame;
use crate::perturbation::RgbGroup;
use crate::rng::RngStream;
use crate::severity::RgbParams;

/// Square, odd-sized, normalized convolution kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurKernel {
    size: usize,
    weights: Vec<f64>,
    /// 1-D factor when the kernel is the outer product of a vector with itself.
    separable: Option<Vec<f64>>,
}

impl BlurKernel {
    pub fn identity() -> Self {
        Self {
            size: 1,
            weights: vec![1.0],
            separable: Some(vec![1.0]),
        }
    }

    fn from_counts(size: usize, raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        Self {
            size,
            weights: raw.into_iter().map(|w| w / total).collect(),
            separable: None,
        }
    }

    /// Uniform disc: lattice points with `x² + y² ≤ r²`.
    pub fn disc(radius: usize) -> Self {
        let r = radius as i64;
        let size = 2 * radius + 1;
        let raw = (-r..=r)
            .flat_map(|y| (-r..=r).map(move |x| if x * x + y * y <= r * r { 1.0 } else { 0.0 }))
            .collect();
        Self::from_counts(size, raw)
    }

    /// Sampled Gaussian truncated at `⌈3σ⌉`; `σ < 1e-6` gives the delta kernel.
    pub fn gaussian(sigma: f64) -> Self {
        if sigma < 1e-6 {
            return Self::identity();
        }
        let radius = (3.0 * sigma).ceil() as i64;
        let raw: Vec<f64> = (-radius..=radius)
            .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let factor: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let size = factor.len();
        let weights = factor
            .iter()
            .flat_map(|a| factor.iter().map(move |b| a * b))
            .collect();
        Self {
            size,
            weights,
            separable: Some(factor),
        }
    }

    /// Line of `length` pixels through the center at angle `theta` (radians).
    /// Even lengths get the next odd kernel size.
    pub fn line(length: usize, theta: f64) -> Self {
        if length <= 1 {
            return Self::identity();
        }
        let size = length | 1;
        let c = (size / 2) as f64;
        let half = (length - 1) as f64 / 2.0;
        let samples = 8 * length + 1;
        let mut raw = vec![0.0; size * size];
        let (s, co) = theta.sin_cos();
        for k in 0..samples {
            let t = -half + 2.0 * half * k as f64 / (samples - 1) as f64;
            let x = (c + t * co).round() as usize;
            let y = (c - t * s).round() as usize;
            raw[y * size + x] += 1.0;
        }
        Self::from_counts(size, raw)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.size + x]
    }
}

/// Kernel for the three kernel blurs. Motion blur draws its angle from
/// `rng`; glass blur has no single kernel and is rejected.
pub fn build_kernel(params: &RgbParams, rng: &RngStream) -> Result<BlurKernel> {
    match *params {
        RgbParams::DefocusBlur { radius } => Ok(BlurKernel::disc(radius)),
        RgbParams::MotionBlur { length } => {
            Ok(BlurKernel::line(length, rng.uniform(0) * std::f64::consts::PI))
        }
        RgbParams::GaussianBlur { sigma } => Ok(BlurKernel::gaussian(sigma)),
        _ => Err(Error::KindMismatch {
            kind: params.kind().to_string(),
            expected: "a kernel blur",
        }),
    }
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Convolution with replicate-edge padding.
pub fn convolve(frame: &RgbFrame, kernel: &BlurKernel) -> Result<RgbFrame> {
    ensure_nonempty(frame)?;
    let (w, h) = (frame.width(), frame.height());
    if kernel.size > w || kernel.size > h {
        return Err(Error::KernelTooLarge {
            kernel: kernel.size,
            width: w,
            height: h,
        });
    }
    let src = frame.pixels();
    let r = (kernel.size / 2) as isize;
    let out: Vec<f64> = if let Some(factor) = &kernel.separable {
        let mut horiz = vec![0.0f64; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0f64; 3];
                for (k, &wt) in factor.iter().enumerate() {
                    let sx = clamp_index(x as isize + k as isize - r, w);
                    let p = &src[(y * w + sx) * 3..][..3];
                    for c in 0..3 {
                        acc[c] += wt * f64::from(p[c]);
                    }
                }
                horiz[(y * w + x) * 3..][..3].copy_from_slice(&acc);
            }
        }
        let mut vert = vec![0.0f64; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0f64; 3];
                for (k, &wt) in factor.iter().enumerate() {
                    let sy = clamp_index(y as isize + k as isize - r, h);
                    let p = &horiz[(sy * w + x) * 3..][..3];
                    for c in 0..3 {
                        acc[c] += wt * p[c];
                    }
                }
                vert[(y * w + x) * 3..][..3].copy_from_slice(&acc);
            }
        }
        vert
    } else {
        let taps: Vec<(isize, isize, f64)> = (0..kernel.size)
            .flat_map(|ky| (0..kernel.size).map(move |kx| (kx, ky)))
            .filter_map(|(kx, ky)| {
                let wt = kernel.weight(kx, ky);
                (wt != 0.0).then_some((kx as isize - r, ky as isize - r, wt))
            })
            .collect();
        let mut out = vec![0.0f64; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0f64; 3];
                for &(dx, dy, wt) in &taps {
                    let sx = clamp_index(x as isize + dx, w);
                    let sy = clamp_index(y as isize + dy, h);
                    let p = &src[(sy * w + sx) * 3..][..3];
                    for c in 0..3 {
                        acc[c] += wt * f64::from(p[c]);
                    }
                }
                out[(y * w + x) * 3..][..3].copy_from_slice(&acc);
            }
        }
        out
    };
    Ok(frame.with_pixels(out.into_iter().map(clamp01).collect()))
}

/// Iterated local swaps: every pixel, visited in reverse raster order, is
/// exchanged with the pixel at a uniform offset in `[-δ, δ]²` (clamped to the
/// image).
fn glass_swaps(frame: &RgbFrame, delta: usize, iterations: usize, rng: &RngStream) -> RgbFrame {
    let (w, h) = (frame.width(), frame.height());
    if delta == 0 {
        return frame.clone();
    }
    let mut px = frame.pixels().to_vec();
    let mut draws = rng.cursor();
    for _ in 0..iterations {
        for y in (0..h).rev() {
            for x in (0..w).rev() {
                let dx = draws.next_offset(delta);
                let dy = draws.next_offset(delta);
                let sx = clamp_index(x as isize + dx, w);
                let sy = clamp_index(y as isize + dy, h);
                let (a, b) = ((y * w + x) * 3, (sy * w + sx) * 3);
                if a != b {
                    for c in 0..3 {
                        px.swap(a + c, b + c);
                    }
                }
            }
        }
    }
    frame.with_pixels(px)
}

/// Defocus, glass, motion or Gaussian blur.
pub fn apply_blur(frame: &RgbFrame, params: &RgbParams, rng: &RngStream) -> Result<RgbFrame> {
    ensure_group(params, RgbGroup::Blur, "a blur corruption")?;
    ensure_nonempty(frame)?;
    match *params {
        RgbParams::GlassBlur {
            sigma,
            delta,
            iterations,
        } => {
            let swapped = glass_swaps(frame, delta, iterations, rng);
            convolve(&swapped, &BlurKernel::gaussian(sigma))
        }
        _ => convolve(frame, &build_kernel(params, rng)?),
    }
}
