//! Deterministic perturbation of RGB-D sequences and evaluation of SLAM
//! trajectories and reconstructions.

pub mod depth;
pub mod error;
pub mod execute;
pub mod frame;
pub mod io;
pub mod metrics;
pub mod misalign;
pub mod perturbation;
pub mod plan;
pub mod pose;
pub mod rgb;
pub mod rng;
pub mod severity;
pub mod trajectory;

pub use error::{Error, Result};
pub use frame::{DepthFrame, RgbFrame, SensorSequence, VOID};
pub use perturbation::{DepthKind, Level, Mode, PerturbationKind, PerturbationSpec, RgbKind, TrajectoryKind};
pub use pose::{Pose, Trajectory};
pub use rng::RngStream;
pub use severity::SeverityTable;
