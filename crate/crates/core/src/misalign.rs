//! Temporal misalignment between the RGB and depth streams.

use crate::error::{Error, Result};
use crate::frame::SensorSequence;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Rgb,
    Depth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MisalignSpec {
    pub delay: usize,
    pub jitter: usize,
    pub shifted: Stream,
}

impl MisalignSpec {
    pub fn new(delay: usize, jitter: usize, shifted: Stream) -> Result<Self> {
        if jitter > 0 && delay < jitter {
            return Err(Error::invalid(format!(
                "delay {delay} smaller than jitter {jitter} would allow negative offsets"
            )));
        }
        Ok(Self {
            delay,
            jitter,
            shifted,
        })
    }

    /// Fixed delay on the RGB stream.
    pub fn fixed(delay: usize) -> Self {
        Self {
            delay,
            jitter: 0,
            shifted: Stream::Rgb,
        }
    }
}

/// Per-output-frame offsets into the shifted stream: `k` when static,
/// uniform over `k - j ..= k + j` otherwise.
pub fn offsets(spec: &MisalignSpec, len: usize, rng: &RngStream) -> Vec<usize> {
    (0..len)
        .map(|i| {
            if spec.jitter == 0 {
                spec.delay
            } else {
                let u = rng.frame(i as u64).uniform(0);
                let span = 2 * spec.jitter + 1;
                spec.delay - spec.jitter + ((u * span as f64) as usize).min(span - 1)
            }
        })
        .collect()
}

/// Frames left after shifting `n` frames by `delay ± jitter`.
pub fn output_len(spec: &MisalignSpec, n: usize) -> Result<usize> {
    if (spec.delay > 0 && spec.delay >= n) || spec.delay + spec.jitter > n {
        return Err(Error::DelayExceedsSequence {
            delay: spec.delay,
            jitter: spec.jitter,
            len: n,
        });
    }
    if spec.jitter > 0 && spec.delay < spec.jitter {
        return Err(Error::invalid("delay smaller than jitter"));
    }
    Ok(n - spec.delay - spec.jitter)
}

/// Output frame `i` pairs shifted-stream frame `i + kᵢ` with frame `i` of the
/// other stream and of the ground truth. Shifted frames take the timestamp of
/// their new partner so that timestamp association keeps the offset.
pub fn apply_misalignment(seq: &SensorSequence, spec: &MisalignSpec, rng: &RngStream) -> Result<SensorSequence> {
    let len = output_len(spec, seq.len())?;
    let ks = offsets(spec, len, rng);
    let keep: Vec<usize> = (0..len).collect();
    let (mut rgb, mut depth) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for (i, &k) in ks.iter().enumerate() {
        match spec.shifted {
            Stream::Rgb => {
                let mut f = seq.rgb[i + k].clone();
                f.timestamp = seq.depth[i].timestamp;
                rgb.push(f);
                depth.push(seq.depth[i].clone());
            }
            Stream::Depth => {
                let mut f = seq.depth[i + k].clone();
                f.timestamp = seq.rgb[i].timestamp;
                depth.push(f);
                rgb.push(seq.rgb[i].clone());
            }
        }
    }
    SensorSequence::new(rgb, depth, seq.trajectory.select(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{DepthFrame, RgbFrame};
    use crate::pose::{Pose, Trajectory};

    /// Frame `i` is recognizable by its pixel value and depth.
    fn sequence(n: usize) -> SensorSequence {
        let ts = |i: usize| i as f64 / 30.0;
        let rgb = (0..n)
            .map(|i| RgbFrame::filled(ts(i), 1, 1, [i as f32 / n as f32; 3]).unwrap())
            .collect();
        let depth = (0..n)
            .map(|i| DepthFrame::new(ts(i), 1, 1, vec![1.0 + i as f32]).unwrap())
            .collect();
        let traj = Trajectory::new((0..n).map(|i| Pose::identity(ts(i))).collect()).unwrap();
        SensorSequence::new(rgb, depth, traj).unwrap()
    }

    #[test]
    fn zero_delay_is_identity() {
        let s = sequence(10);
        assert_eq!(apply_misalignment(&s, &MisalignSpec::fixed(0), &RngStream::new(0)).unwrap(), s);
    }

    #[test]
    fn static_rgb_delay() {
        let s = sequence(100);
        let out = apply_misalignment(&s, &MisalignSpec::fixed(5), &RngStream::new(0)).unwrap();
        assert_eq!(out.len(), 95);
        for i in 0..95 {
            assert_eq!(out.rgb[i].pixels(), s.rgb[i + 5].pixels());
            assert_eq!(out.rgb[i].timestamp, s.depth[i].timestamp);
            assert_eq!(out.depth[i], s.depth[i]);
            assert_eq!(out.trajectory.poses()[i], s.trajectory.poses()[i]);
        }
    }

    #[test]
    fn static_delay_is_invertible() {
        let s = sequence(40);
        let k = 7;
        let out = apply_misalignment(&s, &MisalignSpec::fixed(k), &RngStream::new(0)).unwrap();
        // output rgb[i - k] is source rgb[i]: shifting back restores the pairing
        for i in k..out.len() {
            assert_eq!(out.rgb[i - k].pixels(), s.rgb[i].pixels());
        }
    }

    #[test]
    fn depth_can_be_the_shifted_stream() {
        let s = sequence(20);
        let spec = MisalignSpec::new(3, 0, Stream::Depth).unwrap();
        let out = apply_misalignment(&s, &spec, &RngStream::new(0)).unwrap();
        assert_eq!(out.depth[0].depths(), s.depth[3].depths());
        assert_eq!(out.rgb[0], s.rgb[0]);
    }

    #[test]
    fn dynamic_offsets_are_uniform() {
        let spec = MisalignSpec::new(5, 1, Stream::Rgb).unwrap();
        let ks = offsets(&spec, 100_000, &RngStream::new(42));
        for k in [4, 5, 6] {
            let f = ks.iter().filter(|&&x| x == k).count() as f64 / 1e5;
            assert!((f - 1.0 / 3.0).abs() < 0.01, "{k}: {f}");
        }
        assert!(ks.iter().all(|k| (4..=6).contains(k)));
        let s = sequence(50);
        let out = apply_misalignment(&s, &spec, &RngStream::new(42)).unwrap();
        assert_eq!(out.len(), 50 - 5 - 1);
    }

    #[test]
    fn errors() {
        let s = sequence(10);
        let rng = RngStream::new(0);
        assert!(matches!(
            apply_misalignment(&s, &MisalignSpec::fixed(10), &rng),
            Err(Error::DelayExceedsSequence { .. })
        ));
        let spec = MisalignSpec::new(9, 2, Stream::Rgb).unwrap();
        assert!(matches!(apply_misalignment(&s, &spec, &rng), Err(Error::DelayExceedsSequence { .. })));
        assert!(MisalignSpec::new(1, 2, Stream::Rgb).is_err());
    }
}
