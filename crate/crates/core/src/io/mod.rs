//! On-disk sequence layouts and TOML documents.

pub mod documents;
pub mod tum;

pub use documents::{
    manifest_from_toml, manifest_to_toml, plan_from_toml, plan_to_toml, read_manifest, read_plan, seed_from_hex,
    seed_to_hex, sequence_digest, sha256_hex, write_manifest, write_plan, EntryStatus, FileDigest, Manifest,
    ManifestEntry, MANIFEST_FILE, SCHEMA_VERSION,
};
pub use tum::{
    load_sequence, read_depth, read_extrinsics, read_index, read_rgb, read_trajectory, write_depth, write_index,
    write_rgb, write_sequence, write_trajectory, LoadedSequence, SequenceIndex, DEFAULT_DEPTH_SCALE,
};
