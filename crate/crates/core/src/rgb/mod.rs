//! Image corruptions: noise, blur, environmental blending, post-processing.
//!
//! Every operation is a pure function of (frame, parameters, stream) and
//! clamps channels to `[0, 1]` as its last step.

mod blur;
mod environment;
mod noise;
mod postprocess;

pub use blur::{apply_blur, build_kernel, convolve, BlurKernel};
pub use environment::{apply_environment, blend, weather_layer, WeatherLayer, FOG_GRAY};
pub use noise::apply_noise;
pub use postprocess::apply_postprocess;

use crate::error::{Error, Result};
use crate::frame::RgbFrame;
use crate::perturbation::{PerturbationKind, PerturbationSpec, RgbGroup};
use crate::rng::RngStream;
use crate::severity::{RgbParams, SeverityTable};

/// Applies one image corruption described by `spec` to the frame at
/// `frame_index`.
pub fn apply_rgb(
    frame: &RgbFrame,
    spec: &PerturbationSpec,
    frame_index: u64,
    table: &SeverityTable,
) -> Result<RgbFrame> {
    let PerturbationKind::Rgb(kind) = spec.kind else {
        return Err(Error::KindMismatch {
            kind: spec.kind.to_string(),
            expected: "an RGB corruption",
        });
    };
    let params = table.rgb(kind, spec.level_at(frame_index));
    apply_params(frame, &params, &spec.stream_at(frame_index))
}

/// Dispatches resolved parameters to their group.
pub fn apply_params(frame: &RgbFrame, params: &RgbParams, rng: &RngStream) -> Result<RgbFrame> {
    match params.kind().group() {
        RgbGroup::Noise => apply_noise(frame, params, rng),
        RgbGroup::Blur => apply_blur(frame, params, rng),
        RgbGroup::Environment => apply_environment(frame, params, rng),
        RgbGroup::PostProcess => apply_postprocess(frame, params, rng),
    }
}

pub(crate) fn ensure_group(params: &RgbParams, group: RgbGroup, expected: &'static str) -> Result<()> {
    if params.kind().group() == group {
        Ok(())
    } else {
        Err(Error::KindMismatch {
            kind: params.kind().to_string(),
            expected,
        })
    }
}

pub(crate) fn ensure_nonempty(frame: &RgbFrame) -> Result<()> {
    if frame.is_empty() {
        Err(Error::EmptyFrame)
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn clamp01(v: f64) -> f32 {
    (v.clamp(0.0, 1.0)) as f32
}
