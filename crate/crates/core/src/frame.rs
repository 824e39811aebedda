//! Sensor observations: RGB images, depth maps, and aligned sequences.

use crate::error::{Error, Result};
use crate::pose::Trajectory;

/// In-memory marker for a missing depth measurement. Written as raw 0 on disk.
pub const VOID: f32 = f32::NAN;

#[inline]
pub fn is_void(d: f32) -> bool {
    d.is_nan()
}

/// Row-major interleaved RGB, channels normalized to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbFrame {
    pub timestamp: f64,
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl RgbFrame {
    pub fn new(timestamp: f64, width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width * height * 3 != pixels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x3 image needs {} values, got {}",
                width * height * 3,
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            timestamp,
            width,
            height,
            pixels,
        })
    }

    pub fn filled(timestamp: f64, width: usize, height: usize, rgb: [f32; 3]) -> Result<Self> {
        let pixels = (0..width * height).flat_map(|_| rgb).collect();
        Self::new(timestamp, width, height, pixels)
    }

    pub fn from_rgb8(timestamp: f64, width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let pixels = bytes.iter().map(|&b| f32::from(b) / 255.0).collect();
        Self::new(timestamp, width, height, pixels)
    }

    /// Quantizes to 8 bits, rounding half away from zero.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Same geometry and timestamp with new (clamped) pixel values.
    pub(crate) fn with_pixels(&self, pixels: Vec<f32>) -> Self {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Self {
            timestamp: self.timestamp,
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Row-major depth in meters; [`VOID`] marks missing measurements.
#[derive(Clone, Debug)]
pub struct DepthFrame {
    pub timestamp: f64,
    width: usize,
    height: usize,
    depths: Vec<f32>,
}

impl PartialEq for DepthFrame {
    /// Bitwise on depths so that VOID compares equal to VOID.
    fn eq(&self, other: &Self) -> bool {
        self.timestamp == other.timestamp
            && self.width == other.width
            && self.height == other.height
            && self.depths.len() == other.depths.len()
            && self
                .depths
                .iter()
                .zip(&other.depths)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl DepthFrame {
    pub fn new(timestamp: f64, width: usize, height: usize, depths: Vec<f32>) -> Result<Self> {
        if width * height != depths.len() {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} depth map needs {} values, got {}",
                width * height,
                depths.len()
            )));
        }
        let depths: Vec<f32> = depths
            .into_iter()
            .map(|d| if is_void(d) { VOID } else { d })
            .collect();
        if let Some(d) = depths
            .iter()
            .find(|d| !is_void(**d) && !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::invalid(format!("depth {d} is not positive and finite")));
        }
        Ok(Self {
            timestamp,
            width,
            height,
            depths,
        })
    }

    /// Decodes raw sensor units; raw 0 is VOID.
    pub fn from_raw(timestamp: f64, width: usize, height: usize, raw: &[u16], scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::invalid(format!("depth scale {scale} must be positive")));
        }
        let depths = raw
            .iter()
            .map(|&r| if r == 0 { VOID } else { (f64::from(r) / scale) as f32 })
            .collect();
        Self::new(timestamp, width, height, depths)
    }

    /// Encodes to raw units. Depths that do not fit in 16 bits become VOID;
    /// the second value counts them.
    pub fn to_raw(&self, scale: f64) -> (Vec<u16>, usize) {
        let mut saturated = 0;
        let raw = self
            .depths
            .iter()
            .map(|&d| {
                if is_void(d) {
                    return 0;
                }
                let r = (f64::from(d) * scale).round();
                if r > f64::from(u16::MAX) {
                    saturated += 1;
                    0
                } else {
                    (r as u16).max(1)
                }
            })
            .collect();
        (raw, saturated)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depths(&self) -> &[f32] {
        &self.depths
    }

    pub fn void_count(&self) -> usize {
        self.depths.iter().filter(|d| is_void(**d)).count()
    }

    pub(crate) fn with_depths(&self, depths: Vec<f32>) -> Self {
        debug_assert_eq!(depths.len(), self.depths.len());
        Self {
            timestamp: self.timestamp,
            width: self.width,
            height: self.height,
            depths,
        }
    }
}

/// Index-aligned RGB, depth and ground-truth streams.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SensorSequence {
    pub rgb: Vec<RgbFrame>,
    pub depth: Vec<DepthFrame>,
    pub trajectory: Trajectory,
}

impl SensorSequence {
    pub fn new(rgb: Vec<RgbFrame>, depth: Vec<DepthFrame>, trajectory: Trajectory) -> Result<Self> {
        if rgb.len() != depth.len() || rgb.len() != trajectory.len() {
            return Err(Error::DimensionMismatch(format!(
                "stream lengths differ: rgb {}, depth {}, trajectory {}",
                rgb.len(),
                depth.len(),
                trajectory.len()
            )));
        }
        Ok(Self {
            rgb,
            depth,
            trajectory,
        })
    }

    pub fn len(&self) -> usize {
        self.rgb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rgb.is_empty()
    }
}
