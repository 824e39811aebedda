//! Perturbation taxonomy: kinds, severity levels, modes and the spec that
//! binds them to a seed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::{RngStream, LANE_DATA, LANE_LEVEL};

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($label => Ok($name::$variant),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", stringify!($name), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

named_enum!(
    Level {
        Low => "low",
        Medium => "medium",
        High => "high",
    }
);

named_enum!(
    Mode {
        Static => "static",
        Dynamic => "dynamic",
    }
);

named_enum!(
    /// The sixteen image corruptions, in four groups of four.
    RgbKind {
        GaussianNoise => "gaussian_noise",
        ShotNoise => "shot_noise",
        ImpulseNoise => "impulse_noise",
        SpeckleNoise => "speckle_noise",
        DefocusBlur => "defocus_blur",
        GlassBlur => "glass_blur",
        MotionBlur => "motion_blur",
        GaussianBlur => "gaussian_blur",
        Snow => "snow",
        Frost => "frost",
        Fog => "fog",
        Spatter => "spatter",
        Brightness => "brightness",
        Contrast => "contrast",
        JpegCompression => "jpeg_compression",
        Pixelate => "pixelate",
    }
);

named_enum!(
    DepthKind {
        GaussianNoise => "depth_gaussian_noise",
        EdgeErosion => "edge_erosion",
        RandomMissing => "random_missing",
        RangeClipping => "range_clipping",
    }
);

named_enum!(
    TrajectoryKind {
        RotationDeviation => "rotation_deviation",
        TranslationDeviation => "translation_deviation",
        FasterMotion => "faster_motion",
    }
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RgbGroup {
    Noise,
    Blur,
    Environment,
    PostProcess,
}

impl RgbKind {
    pub fn group(self) -> RgbGroup {
        use RgbKind::*;
        match self {
            GaussianNoise | ShotNoise | ImpulseNoise | SpeckleNoise => RgbGroup::Noise,
            DefocusBlur | GlassBlur | MotionBlur | GaussianBlur => RgbGroup::Blur,
            Snow | Frost | Fog | Spatter => RgbGroup::Environment,
            Brightness | Contrast | JpegCompression | Pixelate => RgbGroup::PostProcess,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbationKind {
    Rgb(RgbKind),
    Depth(DepthKind),
    Trajectory(TrajectoryKind),
    Misalignment,
    ExtrinsicBaseline,
}

impl PerturbationKind {
    /// All 25 kinds in a fixed order; the position is the kind's stream tag.
    pub fn all() -> Vec<PerturbationKind> {
        RgbKind::ALL
            .iter()
            .map(|&k| Self::Rgb(k))
            .chain(DepthKind::ALL.iter().map(|&k| Self::Depth(k)))
            .chain(TrajectoryKind::ALL.iter().map(|&k| Self::Trajectory(k)))
            .chain([Self::Misalignment, Self::ExtrinsicBaseline])
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rgb(k) => k.name(),
            Self::Depth(k) => k.name(),
            Self::Trajectory(k) => k.name(),
            Self::Misalignment => "misalignment",
            Self::ExtrinsicBaseline => "extrinsic_baseline",
        }
    }

    pub fn tag(self) -> u32 {
        fn index<T: PartialEq>(all: &[T], k: &T) -> u32 {
            all.iter().position(|x| x == k).expect("every variant is listed") as u32
        }
        match self {
            Self::Rgb(k) => index(RgbKind::ALL, &k),
            Self::Depth(k) => 16 + index(DepthKind::ALL, &k),
            Self::Trajectory(k) => 20 + index(TrajectoryKind::ALL, &k),
            Self::Misalignment => 23,
            Self::ExtrinsicBaseline => 24,
        }
    }

    pub fn supports_dynamic(self) -> bool {
        matches!(self, Self::Rgb(_) | Self::Depth(_) | Self::Misalignment)
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown perturbation kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub level: Level,
    pub mode: Mode,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, level: Level, mode: Mode, seed: u64) -> Result<Self> {
        if mode == Mode::Dynamic && !kind.supports_dynamic() {
            return Err(Error::invalid(format!("`{kind}` has no dynamic mode")));
        }
        Ok(Self {
            kind,
            level,
            mode,
            seed,
        })
    }

    /// Severity in effect on `frame_index`. Static specs keep their level;
    /// dynamic specs draw Low/Medium/High uniformly and independently per
    /// frame.
    pub fn level_at(&self, frame_index: u64) -> Level {
        match self.mode {
            Mode::Static => self.level,
            Mode::Dynamic => {
                let u = RngStream::new(self.seed)
                    .frame(frame_index)
                    .kind(self.kind.tag())
                    .lane(LANE_LEVEL)
                    .uniform(0);
                Level::ALL[((u * 3.0) as usize).min(2)]
            }
        }
    }

    /// Stream for the perturbation's own samples on `frame_index`.
    pub fn stream_at(&self, frame_index: u64) -> RngStream {
        RngStream::new(self.seed)
            .frame(frame_index)
            .kind(self.kind.tag())
            .lane(LANE_DATA)
    }
}

/// `kind:level:mode:seed`, e.g. `gaussian_noise:medium:static:42`.
impl FromStr for PerturbationSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, level, mode, seed] = parts.as_slice() else {
            return Err(Error::invalid(format!(
                "spec `{s}` is not of the form kind:level:mode:seed"
            )));
        };
        let seed = seed
            .parse::<u64>()
            .map_err(|e| Error::invalid(format!("seed `{seed}`: {e}")))?;
        Self::new(kind.parse()?, level.parse()?, mode.parse()?, seed)
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.kind, self.level, self.mode, self.seed)
    }
}
