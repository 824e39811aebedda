//! Trajectory and reconstruction metrics.

mod association;
mod ate;
mod recon;
mod summary;
mod umeyama;

pub use association::{associate, ASSOCIATION_TOLERANCE_S};
pub use ate::{compute_ate, Alignment, AteReport};
pub use recon::{compute_recon_metrics, nearest_distances, ReconReport, DEFAULT_THRESHOLD_CM};
pub use summary::{
    aggregate, compute_csr, compute_sr, path_length, AggregateReport, SettingResult, SrReport, FAILURE_ATE,
    FAILURE_SR,
};
pub use umeyama::{umeyama_align, SimilarityTransform};
