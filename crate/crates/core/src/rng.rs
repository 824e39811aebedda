//! Counter-based random streams.
//!
//! A stream is a 64-bit key derived from a seed and a path
//! (sequence, frame, kind, lane). Draw `n` on a stream is a pure function of
//! the key and `n`, so frames can be processed in any order, on any thread,
//! and still reproduce the sequential result bit for bit.

/// Lane for per-frame severity draws in dynamic mode.
pub const LANE_LEVEL: u32 = 0;
/// Lane for the perturbation's own samples (noise, masks, offsets).
pub const LANE_DATA: u32 = 1;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

const SALT_SEQUENCE: u64 = 0x5EC0_0000_0000_0001;
const SALT_FRAME: u64 = 0xF4A3_0000_0000_0002;
const SALT_KIND: u64 = 0xC1A5_0000_0000_0003;
const SALT_LANE: u64 = 0x1A9E_0000_0000_0004;

/// SplitMix64 output function.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed ^ 0x7065_7274_7572_6221),
        }
    }

    #[inline]
    fn derive(self, salt: u64, value: u64) -> Self {
        let v = mix64(value.wrapping_add(salt));
        Self {
            key: mix64(self.key.rotate_left(17) ^ v),
        }
    }

    pub fn sequence(self, id: u64) -> Self {
        self.derive(SALT_SEQUENCE, id)
    }

    pub fn frame(self, index: u64) -> Self {
        self.derive(SALT_FRAME, index)
    }

    pub fn kind(self, tag: u32) -> Self {
        self.derive(SALT_KIND, u64::from(tag))
    }

    /// Sub-stream for one purpose within a (frame, kind) cell, e.g. severity
    /// draws versus per-pixel noise.
    pub fn lane(self, lane: u32) -> Self {
        self.derive(SALT_LANE, u64::from(lane))
    }

    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller on draws `2i` and `2i + 1`.
    #[inline]
    pub fn gaussian(&self, index: u64) -> f64 {
        let u1 = 1.0 - self.uniform(index.wrapping_mul(2));
        let u2 = self.uniform(index.wrapping_mul(2).wrapping_add(1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Poisson variate by inversion of the CDF using a single uniform draw.
    pub fn poisson(&self, counter: u64, lambda: f64) -> u64 {
        poisson_inverse(self.uniform(counter), lambda)
    }

    pub fn cursor(self) -> Draws {
        Draws {
            stream: self,
            counter: 0,
        }
    }
}

pub(crate) fn poisson_inverse(u: f64, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u64;
    let cap = (lambda + 12.0 * lambda.sqrt() + 32.0) as u64;
    while u >= cdf && k < cap {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// Sequential view over a stream; each call consumes the next counter(s).
#[derive(Clone, Debug)]
pub struct Draws {
    stream: RngStream,
    counter: u64,
}

impl Draws {
    pub fn next_uniform(&mut self) -> f64 {
        let u = self.stream.uniform(self.counter);
        self.counter += 1;
        u
    }

    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `0..n`; `n` must be non-zero.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_uniform() * n as f64) as usize).min(n - 1)
    }

    /// Uniform integer in `-d..=d`.
    pub fn next_offset(&mut self, d: usize) -> isize {
        self.next_index(2 * d + 1) as isize - d as isize
    }

    pub fn consumed(&self) -> u64 {
        self.counter
    }
}
