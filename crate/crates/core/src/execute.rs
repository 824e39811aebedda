//! Materializes a benchmark plan from clean source sequences.
//!
//! Each entry is written to `<out>/<entry id>/` in the same layout as the
//! sources. Streams an entry does not change are byte-copied; perturbed
//! streams are decoded, perturbed and re-encoded one frame at a time.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use walkdir::WalkDir;

use crate::depth::apply_depth;
use crate::error::{Error, Result};
use crate::frame::SensorSequence;
use crate::io::documents::{
    sequence_digest, sha256_hex, write_manifest, EntryStatus, FileDigest, Manifest, ManifestEntry, MANIFEST_FILE,
};
use crate::io::tum::{self, FrameRef, SequenceIndex, DEPTH_INDEX, EXTRINSICS, GROUNDTRUTH, RGB_INDEX};
use crate::misalign::{apply_misalignment, offsets, output_len, MisalignSpec};
use crate::perturbation::{Mode, PerturbationKind, PerturbationSpec, TrajectoryKind};
use crate::plan::{BenchmarkPlan, Recipe, SequenceSpec};
use crate::pose::Trajectory;
use crate::rgb::apply_rgb;
use crate::rng::RngStream;
use crate::severity::SeverityTable;
use crate::trajectory::{downsample_faster_motion, perturb_extrinsic_baseline, perturb_rotation, perturb_translation, ExtrinsicSpec};

#[derive(Clone, Debug)]
pub struct ExecuteOptions {
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub table: SeverityTable,
}

impl Default for ExecuteOptions {
    fn default() -> Self {
        Self {
            jobs: 0,
            table: SeverityTable::builtin(),
        }
    }
}

fn trajectory_stream(seed: u64) -> RngStream {
    RngStream::new(seed).kind(PerturbationKind::Trajectory(TrajectoryKind::RotationDeviation).tag())
}

fn misalign_stream(seed: u64) -> RngStream {
    RngStream::new(seed).kind(PerturbationKind::Misalignment.tag())
}

fn extrinsic_stream(seed: u64) -> RngStream {
    RngStream::new(seed).kind(PerturbationKind::ExtrinsicBaseline.tag())
}

fn misalign_spec(recipe: &Recipe, table: &SeverityTable) -> Option<MisalignSpec> {
    match *recipe {
        Recipe::Misalignment { level, mode } => {
            let jitter = usize::from(mode == Mode::Dynamic);
            MisalignSpec::new(table.misalignment_delay(level), jitter, crate::misalign::Stream::Rgb).ok()
        }
        _ => None,
    }
}

fn perturb_gt(traj: &Trajectory, recipe: &Recipe, seed: u64, table: &SeverityTable) -> Result<Trajectory> {
    let Recipe::Trajectory { rotation, translation } = *recipe else {
        return Ok(traj.clone());
    };
    let rng = trajectory_stream(seed);
    let mut out = traj.clone();
    if let Some(l) = rotation {
        out = perturb_rotation(&out, table.rotation_sigma_deg(l), &rng)?;
    }
    if let Some(l) = translation {
        out = perturb_translation(&out, table.translation_sigma_m(l), &rng)?;
    }
    Ok(out)
}

fn extrinsic_rows(rows: &[(f64, Vector3<f64>)], level: crate::Level, seed: u64, table: &SeverityTable) -> Result<Vec<(f64, Vector3<f64>)>> {
    let ts: Vec<Vector3<f64>> = rows.iter().map(|r| r.1).collect();
    let direction = ts.iter().find(|t| t.norm() > 0.0).copied().unwrap_or_else(Vector3::x);
    let spec = ExtrinsicSpec::along(direction, table.extrinsic_sigma_m(level))?;
    let out = perturb_extrinsic_baseline(&ts, &spec, &extrinsic_stream(seed));
    Ok(rows.iter().zip(out).map(|(r, t)| (r.0, t)).collect())
}

/// In-memory counterpart of one plan entry. Extrinsic entries leave the
/// sensor streams unchanged.
pub fn apply_recipe(seq: &SensorSequence, recipe: &Recipe, seed: u64, table: &SeverityTable) -> Result<SensorSequence> {
    match *recipe {
        Recipe::Clean | Recipe::Extrinsic { .. } => Ok(seq.clone()),
        Recipe::Rgb { kind, level, mode } => {
            let spec = PerturbationSpec::new(PerturbationKind::Rgb(kind), level, mode, seed)?;
            let rgb = map_indexed(seq.len(), |i| apply_rgb(&seq.rgb[i], &spec, i as u64, table))?;
            SensorSequence::new(rgb, seq.depth.clone(), seq.trajectory.clone())
        }
        Recipe::Depth { kind, level, mode } => {
            let spec = PerturbationSpec::new(PerturbationKind::Depth(kind), level, mode, seed)?;
            let depth = map_indexed(seq.len(), |i| apply_depth(&seq.depth[i], &spec, i as u64, table))?;
            SensorSequence::new(seq.rgb.clone(), depth, seq.trajectory.clone())
        }
        Recipe::FasterMotion { level } => downsample_faster_motion(seq, table.faster_motion_interval(level)),
        Recipe::Trajectory { .. } => SensorSequence::new(
            seq.rgb.clone(),
            seq.depth.clone(),
            perturb_gt(&seq.trajectory, recipe, seed, table)?,
        ),
        Recipe::Misalignment { .. } => {
            let spec = misalign_spec(recipe, table).ok_or_else(|| Error::invalid("misalignment delay below jitter"))?;
            apply_misalignment(seq, &spec, &misalign_stream(seed))
        }
    }
}

#[cfg(feature = "parallel")]
fn map_indexed<T: Send, F: Fn(usize) -> Result<T> + Sync + Send>(n: usize, f: F) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T, F: Fn(usize) -> Result<T>>(n: usize, f: F) -> Result<Vec<T>> {
    (0..n).map(f).collect()
}

fn ext(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("png")
}

fn copy(from: &Path, to: &Path) -> Result<()> {
    fs::copy(from, to).map(|_| ()).map_err(|e| Error::io(to, e))
}

fn files_under(root: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if entry.file_type().is_file() {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

fn relative(root: &Path, path: &Path) -> PathBuf {
    path.strip_prefix(root).expect("walk stays under root").to_path_buf()
}

fn copy_tree(from: &Path, to: &Path) -> Result<()> {
    for src in files_under(from)? {
        let dst = to.join(relative(from, &src));
        if let Some(parent) = dst.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        copy(&src, &dst)?;
    }
    Ok(())
}

/// What each output frame is made of.
struct OutFrame<'a> {
    source: &'a FrameRef,
    /// Source of the rgb image when it differs from `source`.
    rgb_from: &'a FrameRef,
    rgb_timestamp: f64,
}

#[derive(Default)]
struct Written {
    frames: usize,
    saturated: usize,
}

fn write_frames(
    index: &SequenceIndex,
    frames: &[OutFrame],
    traj: &Trajectory,
    spec: &SequenceSpec,
    table: &SeverityTable,
    root: &Path,
) -> Result<Written> {
    tum::create_layout_dirs(root)?;
    let rgb_spec = match spec.recipe {
        Recipe::Rgb { kind, level, mode } => Some(PerturbationSpec::new(PerturbationKind::Rgb(kind), level, mode, spec.seed)?),
        _ => None,
    };
    let depth_spec = match spec.recipe {
        Recipe::Depth { kind, level, mode } => Some(PerturbationSpec::new(PerturbationKind::Depth(kind), level, mode, spec.seed)?),
        _ => None,
    };
    let names = map_indexed(frames.len(), |i| {
        let f = &frames[i];
        let mut saturated = 0;
        let rgb_name = match &rgb_spec {
            Some(p) => {
                let name = tum::frame_file("rgb", i, f.rgb_timestamp, "png");
                let frame = tum::read_rgb(&f.rgb_from.rgb_path, f.rgb_timestamp)?;
                tum::write_rgb(&root.join(&name), &apply_rgb(&frame, p, i as u64, table)?)?;
                name
            }
            None => {
                let name = tum::frame_file("rgb", i, f.rgb_timestamp, ext(&f.rgb_from.rgb_path));
                copy(&f.rgb_from.rgb_path, &root.join(&name))?;
                name
            }
        };
        let depth_ts = f.source.depth_timestamp;
        let depth_name = match &depth_spec {
            Some(p) => {
                let name = tum::frame_file("depth", i, depth_ts, "png");
                let frame = tum::read_depth(&f.source.depth_path, depth_ts, index.depth_scale)?;
                let out = apply_depth(&frame, p, i as u64, table)?;
                saturated += tum::write_depth(&root.join(&name), &out, index.depth_scale)?;
                name
            }
            None => {
                let name = tum::frame_file("depth", i, depth_ts, ext(&f.source.depth_path));
                copy(&f.source.depth_path, &root.join(&name))?;
                name
            }
        };
        Ok(((f.rgb_timestamp, rgb_name), (depth_ts, depth_name), saturated))
    })?;
    let mut rgb_index = Vec::with_capacity(names.len());
    let mut depth_index = Vec::with_capacity(names.len());
    let mut saturated = 0;
    for (r, d, s) in names {
        rgb_index.push(r);
        depth_index.push(d);
        saturated += s;
    }
    tum::write_index(&root.join(RGB_INDEX), &rgb_index)?;
    tum::write_index(&root.join(DEPTH_INDEX), &depth_index)?;
    tum::write_trajectory(&root.join(GROUNDTRUTH), traj)?;
    tum::write_depth_scale(root, index.depth_scale)?;
    Ok(Written {
        frames: frames.len(),
        saturated,
    })
}

fn materialize(spec: &SequenceSpec, source: &Path, table: &SeverityTable, root: &Path) -> Result<(Written, usize)> {
    if root.exists() {
        fs::remove_dir_all(root).map_err(|e| Error::io(root, e))?;
    }
    let index = SequenceIndex::open(source)?;
    if spec.recipe == Recipe::Clean {
        copy_tree(source, root)?;
        return Ok((
            Written {
                frames: index.len(),
                saturated: 0,
            },
            index.dropped,
        ));
    }
    let gt = index.trajectory()?;
    let (keep, traj): (Vec<usize>, Trajectory) = match spec.recipe {
        Recipe::FasterMotion { level } => {
            let keep: Vec<usize> = (0..index.len()).step_by(table.faster_motion_interval(level).max(1)).collect();
            let t = gt.select(&keep);
            (keep, t)
        }
        Recipe::Misalignment { .. } => {
            let m = misalign_spec(&spec.recipe, table).ok_or_else(|| Error::invalid("misalignment delay below jitter"))?;
            let len = output_len(&m, index.len())?;
            let keep: Vec<usize> = (0..len).collect();
            let t = gt.select(&keep);
            (keep, t)
        }
        _ => ((0..index.len()).collect(), perturb_gt(&gt, &spec.recipe, spec.seed, table)?),
    };
    let misalign = misalign_spec(&spec.recipe, table);
    let shifts: Vec<usize> = match &misalign {
        Some(m) => offsets(m, keep.len(), &misalign_stream(spec.seed)),
        None => vec![0; keep.len()],
    };
    let frames: Vec<OutFrame> = keep
        .iter()
        .zip(&shifts)
        .map(|(&i, &k)| {
            let source = &index.frames[i];
            OutFrame {
                source,
                rgb_from: &index.frames[i + k],
                // shifted frames take their new partner's timestamp
                rgb_timestamp: if misalign.is_some() { source.depth_timestamp } else { source.rgb_timestamp },
            }
        })
        .collect();
    let written = write_frames(&index, &frames, &traj, spec, table, root)?;
    let extrinsics = source.join(EXTRINSICS);
    match spec.recipe {
        Recipe::Extrinsic { level } => {
            let rows = tum::read_extrinsics(&extrinsics, index.len())?;
            tum::write_extrinsics(&root.join(EXTRINSICS), &extrinsic_rows(&rows, level, spec.seed, table)?)?;
        }
        _ if extrinsics.is_file() => copy(&extrinsics, &root.join(EXTRINSICS))?,
        _ => {}
    }
    Ok((written, index.dropped))
}

/// Per-file digests of a directory tree, sorted by relative path.
pub fn digest_tree(root: &Path) -> Result<Vec<FileDigest>> {
    let mut files = files_under(root)?
        .into_iter()
        .map(|path| {
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let rel = relative(root, &path);
            let rel: Vec<_> = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect();
            Ok(FileDigest {
                path: rel.join("/"),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

fn run_entry(spec: &SequenceSpec, source: &Path, table: &SeverityTable, out: &Path) -> ManifestEntry {
    let root = out.join(&spec.id);
    let result = materialize(spec, source, table, &root).and_then(|(w, dropped)| Ok((w, dropped, digest_tree(&root)?)));
    match result {
        Ok((w, dropped, files)) => ManifestEntry {
            spec: spec.clone(),
            path: spec.id.clone(),
            status: EntryStatus::Ok,
            frames: w.frames,
            dropped,
            saturated: w.saturated,
            digest: sequence_digest(&files),
            files,
        },
        Err(e) => ManifestEntry {
            spec: spec.clone(),
            path: spec.id.clone(),
            status: EntryStatus::Failed(e.to_string()),
            frames: 0,
            dropped: 0,
            saturated: 0,
            digest: String::new(),
            files: Vec::new(),
        },
    }
}

/// Runs every entry of `plan`, writes `<out>/manifest.toml` and returns the
/// manifest. Entry failures are recorded, not returned; only a missing
/// source or an unwritable output root aborts the run.
pub fn execute_plan(
    plan: &BenchmarkPlan,
    sources: &BTreeMap<String, PathBuf>,
    out: &Path,
    options: &ExecuteOptions,
) -> Result<Manifest> {
    for entry in &plan.entries {
        match sources.get(&entry.scene) {
            Some(p) if p.is_dir() => {}
            _ => return Err(Error::MissingSource(entry.scene.clone())),
        }
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let table = &options.table;
    let run = || -> Vec<ManifestEntry> {
        let one = |s: &SequenceSpec| run_entry(s, &sources[&s.scene], table, out);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            plan.entries.par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            plan.entries.iter().map(one).collect()
        }
    };
    #[cfg(feature = "parallel")]
    let entries = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
        .install(run);
    #[cfg(not(feature = "parallel"))]
    let entries = run();
    let manifest = Manifest {
        master_seed: plan.master_seed,
        severity_digest: sha256_hex(table.to_toml_string().as_bytes()),
        entries,
    };
    write_manifest(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
