use super::{clamp01, ensure_group, ensure_nonempty};
use crate::error::Result;
use crate::frame::RgbFrame;
use crate::perturbation::RgbGroup;
use crate::rng::RngStream;
use crate::severity::RgbParams;

/// Gaussian (`I + η`), shot (`Poisson(λI)/λ`), impulse (salt and pepper per
/// pixel) or speckle (`I(1 + ρη)`) noise. Channel `i` of the interleaved
/// buffer uses draw index `i`; impulse noise uses one draw per pixel.
pub fn apply_noise(frame: &RgbFrame, params: &RgbParams, rng: &RngStream) -> Result<RgbFrame> {
    ensure_group(params, RgbGroup::Noise, "a noise corruption")?;
    ensure_nonempty(frame)?;
    let src = frame.pixels();
    let pixels: Vec<f32> = match *params {
        RgbParams::GaussianNoise { sigma } => src
            .iter()
            .enumerate()
            .map(|(i, &v)| clamp01(f64::from(v) + sigma * rng.gaussian(i as u64)))
            .collect(),
        RgbParams::ShotNoise { lambda } => src
            .iter()
            .enumerate()
            .map(|(i, &v)| clamp01(rng.poisson(i as u64, f64::from(v) * lambda) as f64 / lambda))
            .collect(),
        RgbParams::ImpulseNoise { p } => {
            let mut out = src.to_vec();
            for (i, px) in out.chunks_exact_mut(3).enumerate() {
                let u = rng.uniform(i as u64);
                if u < p / 2.0 {
                    px.fill(0.0);
                } else if u < p {
                    px.fill(1.0);
                }
            }
            out
        }
        RgbParams::SpeckleNoise { rho } => src
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let v = f64::from(v);
                clamp01(v * (1.0 + rho * rng.gaussian(i as u64)))
            })
            .collect(),
        _ => unreachable!("group checked above"),
    };
    Ok(frame.with_pixels(pixels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn gray(w: usize, h: usize, v: f32) -> RgbFrame {
        RgbFrame::filled(0.0, w, h, [v; 3]).unwrap()
    }

    fn ramp(w: usize, h: usize) -> RgbFrame {
        let px = (0..w * h * 3).map(|i| (i % 256) as f32 / 255.0).collect();
        RgbFrame::new(0.0, w, h, px).unwrap()
    }

    #[test]
    fn zero_parameters_are_identity() {
        let f = ramp(16, 8);
        let rng = RngStream::new(1);
        for p in [
            RgbParams::GaussianNoise { sigma: 0.0 },
            RgbParams::ImpulseNoise { p: 0.0 },
            RgbParams::SpeckleNoise { rho: 0.0 },
        ] {
            assert_eq!(apply_noise(&f, &p, &rng).unwrap(), f, "{p:?}");
        }
    }

    #[test]
    fn shot_noise_keeps_black_black() {
        let f = gray(16, 16, 0.0);
        let out = apply_noise(&f, &RgbParams::ShotNoise { lambda: 3.0 }, &RngStream::new(2)).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn impulse_saturates_every_pixel_at_p_one() {
        let f = gray(1000, 1000, 0.5);
        let out = apply_noise(&f, &RgbParams::ImpulseNoise { p: 1.0 }, &RngStream::new(3)).unwrap();
        let mut zeros = 0usize;
        for px in out.pixels().chunks_exact(3) {
            assert!(px == [0.0; 3] || px == [1.0; 3]);
            zeros += (px[0] == 0.0) as usize;
        }
        let frac = zeros as f64 / 1e6;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn gaussian_std_matches_sigma() {
        // mid-gray with sigma 0.08 never reaches the clamp bounds in practice
        let f = gray(1000, 334, 0.5);
        let sigma = 0.08;
        let out = apply_noise(&f, &RgbParams::GaussianNoise { sigma }, &RngStream::new(4)).unwrap();
        for c in 0..3 {
            let d: Vec<f64> = out
                .pixels()
                .iter()
                .skip(c)
                .step_by(3)
                .map(|&v| f64::from(v) - 0.5)
                .collect();
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let std = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!((std / sigma - 1.0).abs() < 0.02, "channel {c}: {std}");
        }
    }

    #[test]
    fn output_stays_in_range() {
        let f = ramp(32, 32);
        let rng = RngStream::new(5);
        for p in [
            RgbParams::GaussianNoise { sigma: 2.0 },
            RgbParams::ShotNoise { lambda: 1.0 },
            RgbParams::SpeckleNoise { rho: 5.0 },
        ] {
            let out = apply_noise(&f, &p, &rng).unwrap();
            assert!(out.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn empty_and_wrong_kind() {
        let empty = RgbFrame::new(0.0, 0, 0, vec![]).unwrap();
        let rng = RngStream::new(0);
        assert!(matches!(
            apply_noise(&empty, &RgbParams::GaussianNoise { sigma: 0.1 }, &rng),
            Err(Error::EmptyFrame)
        ));
        assert!(matches!(
            apply_noise(&gray(2, 2, 0.1), &RgbParams::Fog { alpha: 0.1 }, &rng),
            Err(Error::KindMismatch { .. })
        ));
    }
}
