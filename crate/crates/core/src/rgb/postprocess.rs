use image::codecs::jpeg::{JpegDecoder, JpegEncoder};
use image::{ExtendedColorType, ImageDecoder};

use super::{clamp01, ensure_group, ensure_nonempty};
use crate::error::{Error, Result};
use crate::frame::RgbFrame;
use crate::perturbation::RgbGroup;
use crate::rng::RngStream;
use crate::severity::RgbParams;

fn mean_intensity(frame: &RgbFrame) -> f64 {
    let px = frame.pixels();
    px.iter().map(|&v| f64::from(v)).sum::<f64>() / px.len() as f64
}

fn jpeg_round_trip(frame: &RgbFrame, quality: u8) -> Result<RgbFrame> {
    let codec = |e: image::ImageError| Error::Decode {
        path: "<jpeg round trip>".into(),
        message: e.to_string(),
    };
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality.clamp(1, 100))
        .encode(&frame.to_rgb8(), w, h, ExtendedColorType::Rgb8)
        .map_err(codec)?;
    let decoder = JpegDecoder::new(std::io::Cursor::new(buf)).map_err(codec)?;
    let mut bytes = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut bytes).map_err(codec)?;
    RgbFrame::from_rgb8(frame.timestamp, frame.width(), frame.height(), &bytes)
}

fn pixelate(frame: &RgbFrame, block: usize) -> RgbFrame {
    let (w, h) = (frame.width(), frame.height());
    let block = block.max(1);
    let src = frame.pixels();
    let mut out = src.to_vec();
    for by in (0..h).step_by(block) {
        for bx in (0..w).step_by(block) {
            let (ye, xe) = ((by + block).min(h), (bx + block).min(w));
            let n = ((ye - by) * (xe - bx)) as f64;
            let mut sum = [0.0f64; 3];
            for y in by..ye {
                for x in bx..xe {
                    for c in 0..3 {
                        sum[c] += f64::from(src[(y * w + x) * 3 + c]);
                    }
                }
            }
            let mean = sum.map(|s| clamp01(s / n));
            for y in by..ye {
                for x in bx..xe {
                    out[(y * w + x) * 3..][..3].copy_from_slice(&mean);
                }
            }
        }
    }
    frame.with_pixels(out)
}

/// Brightness offset, contrast about the image mean, JPEG round trip, or
/// block averaging.
pub fn apply_postprocess(frame: &RgbFrame, params: &RgbParams, _rng: &RngStream) -> Result<RgbFrame> {
    ensure_group(params, RgbGroup::PostProcess, "a post-processing corruption")?;
    ensure_nonempty(frame)?;
    match *params {
        RgbParams::Brightness { offset } => Ok(frame.with_pixels(
            frame
                .pixels()
                .iter()
                .map(|&v| clamp01(f64::from(v) + offset))
                .collect(),
        )),
        RgbParams::Contrast { factor } => {
            let j = mean_intensity(frame);
            Ok(frame.with_pixels(
                frame
                    .pixels()
                    .iter()
                    .map(|&v| clamp01(factor * (f64::from(v) - j) + j))
                    .collect(),
            ))
        }
        RgbParams::JpegCompression { quality } => jpeg_round_trip(frame, quality),
        RgbParams::Pixelate { block } => Ok(pixelate(frame, block)),
        _ => unreachable!("group checked above"),
    }
}
