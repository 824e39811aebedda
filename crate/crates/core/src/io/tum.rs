//! TUM RGB-D style sequence directories:
//!
//! ```text
//! root/rgb.txt          "timestamp rgb/<file>.png" per line
//! root/depth.txt        "timestamp depth/<file>.png" per line
//! root/groundtruth.txt  "timestamp tx ty tz qx qy qz qw" per line
//! root/rgb/ root/depth/ 8-bit RGB and 16-bit gray PNG images
//! root/depth_scale.txt  optional, raw units per meter (default 5000)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageReader, Luma, Rgb};
use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::frame::{DepthFrame, RgbFrame, SensorSequence};
use crate::metrics::{associate, ASSOCIATION_TOLERANCE_S};
use crate::pose::{canonical, normalize_quaternion, Pose, Trajectory};

pub const DEFAULT_DEPTH_SCALE: f64 = 5000.0;
pub const RGB_INDEX: &str = "rgb.txt";
pub const DEPTH_INDEX: &str = "depth.txt";
pub const GROUNDTRUTH: &str = "groundtruth.txt";
pub const DEPTH_SCALE_FILE: &str = "depth_scale.txt";
pub const EXTRINSICS: &str = "extrinsics.txt";

fn layout(path: &Path, message: impl Into<String>) -> Error {
    Error::Layout {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn decode(path: &Path, message: impl ToString) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(t) => Ok(t),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(layout(path, "file is missing")),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_floats(path: &Path, line_no: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| layout(path, format!("line {line_no}: `{f}` is not a number")))
        })
        .collect()
}

fn check_sorted(path: &Path, ts: &[f64]) -> Result<()> {
    match ts.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(layout(path, format!("timestamps not strictly increasing at entry {}", i + 2))),
        None => Ok(()),
    }
}

/// `timestamp filename` index file.
pub fn read_index(path: &Path) -> Result<Vec<(f64, String)>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (n, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(layout(path, format!("line {n}: expected `timestamp filename`")));
        }
        let ts = parse_floats(path, n, &fields[..1])?[0];
        out.push((ts, fields[1].to_string()));
    }
    check_sorted(path, &out.iter().map(|e| e.0).collect::<Vec<_>>())?;
    Ok(out)
}

pub fn write_index(path: &Path, entries: &[(f64, String)]) -> Result<()> {
    let mut text = String::new();
    for (ts, name) in entries {
        let _ = writeln!(text, "{ts:.6} {name}");
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses `timestamp tx ty tz qx qy qz qw` lines; quaternions are
/// normalized on read.
pub fn parse_trajectory(path: &Path, text: &str) -> Result<Trajectory> {
    let mut poses = Vec::new();
    for (n, line) in data_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(layout(path, format!("line {n}: expected 8 fields, found {}", fields.len())));
        }
        let v = parse_floats(path, n, &fields)?;
        let q = normalize_quaternion([v[7], v[4], v[5], v[6]])
            .map_err(|e| layout(path, format!("line {n}: {e}")))?;
        let pose = Pose::from_parts(v[0], Vector3::new(v[1], v[2], v[3]), q)
            .map_err(|e| layout(path, format!("line {n}: {e}")))?;
        poses.push(pose);
    }
    check_sorted(path, &poses.iter().map(|p| p.timestamp).collect::<Vec<_>>())?;
    Trajectory::new(poses)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    parse_trajectory(path, &read_text(path)?)
}

/// One TUM line per pose, six decimals, `qw >= 0`.
pub fn format_trajectory(traj: &Trajectory) -> String {
    let mut text = String::new();
    for p in traj.poses() {
        let q = canonical(&p.orientation);
        let t = p.translation;
        let _ = writeln!(
            text,
            "{:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
            p.timestamp, t.x, t.y, t.z, q.i, q.j, q.k, q.w
        );
    }
    text
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    fs::write(path, format_trajectory(traj)).map_err(|e| Error::io(path, e))
}

pub fn read_depth_scale(root: &Path) -> Result<f64> {
    let path = root.join(DEPTH_SCALE_FILE);
    if !path.exists() {
        return Ok(DEFAULT_DEPTH_SCALE);
    }
    let text = read_text(&path)?;
    match text.trim().parse::<f64>() {
        Ok(s) if s.is_finite() && s > 0.0 => Ok(s),
        _ => Err(layout(&path, format!("`{}` is not a positive depth scale", text.trim()))),
    }
}

/// Per-frame extrinsic translations (`timestamp tx ty tz`). A single line
/// applies to every frame.
pub fn read_extrinsics(path: &Path, frames: usize) -> Result<Vec<(f64, Vector3<f64>)>> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (n, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(layout(path, format!("line {n}: expected `timestamp tx ty tz`")));
        }
        let v = parse_floats(path, n, &fields)?;
        rows.push((v[0], Vector3::new(v[1], v[2], v[3])));
    }
    match rows.len() {
        0 => Err(layout(path, "no extrinsics")),
        1 => Ok(vec![rows[0]; frames]),
        n if n == frames => Ok(rows),
        n => Err(layout(path, format!("{n} extrinsics for {frames} frames"))),
    }
}

pub fn write_extrinsics(path: &Path, rows: &[(f64, Vector3<f64>)]) -> Result<()> {
    let mut text = String::new();
    for (ts, t) in rows {
        let _ = writeln!(text, "{ts:.6} {:.6} {:.6} {:.6}", t.x, t.y, t.z);
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_rgb(path: &Path, timestamp: f64) -> Result<RgbFrame> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| decode(path, e))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    RgbFrame::from_rgb8(timestamp, w as usize, h as usize, img.as_raw())
}

pub fn read_depth(path: &Path, timestamp: f64, scale: f64) -> Result<DepthFrame> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| decode(path, e))?;
    let DynamicImage::ImageLuma16(buf) = img else {
        return Err(decode(path, "depth image is not 16-bit single-channel"));
    };
    let (w, h) = buf.dimensions();
    DepthFrame::from_raw(timestamp, w as usize, h as usize, buf.as_raw(), scale)
}

pub fn write_rgb(path: &Path, frame: &RgbFrame) -> Result<()> {
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(frame.width() as u32, frame.height() as u32, frame.to_rgb8())
            .ok_or_else(|| Error::DimensionMismatch("rgb buffer".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
}

/// Returns the number of depths too large for 16 bits (written as VOID).
pub fn write_depth(path: &Path, frame: &DepthFrame, scale: f64) -> Result<usize> {
    let (raw, saturated) = frame.to_raw(scale);
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(frame.width() as u32, frame.height() as u32, raw)
            .ok_or_else(|| Error::DimensionMismatch("depth buffer".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    Ok(saturated)
}

/// A source frame as listed on disk, before decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRef {
    pub rgb_timestamp: f64,
    pub rgb_path: PathBuf,
    pub depth_timestamp: f64,
    pub depth_path: PathBuf,
    pub pose: Pose,
}

/// Index of an on-disk sequence with rgb, depth and ground truth associated.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceIndex {
    pub root: PathBuf,
    pub depth_scale: f64,
    pub frames: Vec<FrameRef>,
    /// Listed frames without a partner in every stream.
    pub dropped: usize,
}

impl SequenceIndex {
    pub fn open(root: &Path) -> Result<Self> {
        let rgb = read_index(&root.join(RGB_INDEX))?;
        let depth = read_index(&root.join(DEPTH_INDEX))?;
        let gt = read_trajectory(&root.join(GROUNDTRUTH))?;
        let depth_scale = read_depth_scale(root)?;
        for (index, list) in [(RGB_INDEX, &rgb), (DEPTH_INDEX, &depth)] {
            if let Some((_, name)) = list.iter().find(|(_, n)| !root.join(n).is_file()) {
                return Err(layout(&root.join(index), format!("listed file `{name}` does not exist")));
            }
        }
        let rgb_ts: Vec<f64> = rgb.iter().map(|e| e.0).collect();
        let depth_ts: Vec<f64> = depth.iter().map(|e| e.0).collect();
        let rd = associate(&rgb_ts, &depth_ts, ASSOCIATION_TOLERANCE_S);
        let paired_ts: Vec<f64> = rd.iter().map(|&(i, _)| rgb_ts[i]).collect();
        let with_gt = associate(&paired_ts, &gt.timestamps(), ASSOCIATION_TOLERANCE_S);
        let frames: Vec<FrameRef> = with_gt
            .iter()
            .map(|&(k, g)| {
                let (i, j) = rd[k];
                FrameRef {
                    rgb_timestamp: rgb[i].0,
                    rgb_path: root.join(&rgb[i].1),
                    depth_timestamp: depth[j].0,
                    depth_path: root.join(&depth[j].1),
                    pose: gt.poses()[g],
                }
            })
            .collect();
        let listed = rgb.len().max(depth.len()).max(gt.len());
        Ok(Self {
            root: root.to_path_buf(),
            depth_scale,
            dropped: listed - frames.len(),
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        Trajectory::new(self.frames.iter().map(|f| f.pose).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedSequence {
    pub sequence: SensorSequence,
    pub depth_scale: f64,
    pub dropped: usize,
}

/// Decodes every associated frame of the sequence at `root`.
pub fn load_sequence(root: &Path) -> Result<LoadedSequence> {
    let index = SequenceIndex::open(root)?;
    let rgb = index
        .frames
        .iter()
        .map(|f| read_rgb(&f.rgb_path, f.rgb_timestamp))
        .collect::<Result<Vec<_>>>()?;
    let depth = index
        .frames
        .iter()
        .map(|f| read_depth(&f.depth_path, f.depth_timestamp, index.depth_scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedSequence {
        sequence: SensorSequence::new(rgb, depth, index.trajectory()?)?,
        depth_scale: index.depth_scale,
        dropped: index.dropped,
    })
}

/// `rgb/000012_1305031102.175304.png`.
pub fn frame_file(stream: &str, index: usize, timestamp: f64, ext: &str) -> String {
    format!("{stream}/{index:06}_{timestamp:.6}.{ext}")
}

pub(crate) fn create_layout_dirs(root: &Path) -> Result<()> {
    for d in ["rgb", "depth"] {
        let p = root.join(d);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

pub(crate) fn write_depth_scale(root: &Path, scale: f64) -> Result<()> {
    if scale != DEFAULT_DEPTH_SCALE {
        let p = root.join(DEPTH_SCALE_FILE);
        fs::write(&p, format!("{scale}\n")).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

/// Writes `seq` as a layout under `root`; returns the count of saturated
/// depth pixels written as VOID.
pub fn write_sequence(seq: &SensorSequence, root: &Path, depth_scale: f64) -> Result<usize> {
    if !(depth_scale.is_finite() && depth_scale > 0.0) {
        return Err(Error::invalid(format!("depth scale {depth_scale} must be positive")));
    }
    create_layout_dirs(root)?;
    let mut rgb_index = Vec::with_capacity(seq.len());
    let mut depth_index = Vec::with_capacity(seq.len());
    let mut saturated = 0;
    for (i, (rgb, depth)) in seq.rgb.iter().zip(&seq.depth).enumerate() {
        let rn = frame_file("rgb", i, rgb.timestamp, "png");
        write_rgb(&root.join(&rn), rgb)?;
        rgb_index.push((rgb.timestamp, rn));
        let dn = frame_file("depth", i, depth.timestamp, "png");
        saturated += write_depth(&root.join(&dn), depth, depth_scale)?;
        depth_index.push((depth.timestamp, dn));
    }
    write_index(&root.join(RGB_INDEX), &rgb_index)?;
    write_index(&root.join(DEPTH_INDEX), &depth_index)?;
    write_trajectory(&root.join(GROUNDTRUTH), &seq.trajectory)?;
    write_depth_scale(root, depth_scale)?;
    Ok(saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{is_void, VOID};
    use crate::trajectory::euler_xyz;

    fn sample(n: usize) -> SensorSequence {
        let ts = |i: usize| 1305031102.0 + i as f64 / 30.0;
        let rgb = (0..n)
            .map(|i| {
                let px = (0..4 * 3 * 3).map(|k| ((k * 17 + i * 5) % 256) as f32 / 255.0).collect();
                RgbFrame::new(ts(i), 4, 3, px).unwrap()
            })
            .collect();
        let depth = (0..n)
            .map(|i| {
                let mut d: Vec<f32> = (0..12).map(|k| 0.5 + 0.25 * k as f32 + i as f32 * 0.01).collect();
                d[3] = VOID;
                DepthFrame::new(ts(i), 4, 3, d).unwrap()
            })
            .collect();
        let poses = (0..n)
            .map(|i| {
                let q = euler_xyz([0.1 * i as f64, 2.0, -0.3]);
                Pose::from_parts(ts(i), Vector3::new(i as f64 * 0.1, -1.0, 0.25), q).unwrap()
            })
            .collect();
        SensorSequence::new(rgb, depth, Trajectory::new(poses).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_semantically_identical() {
        let dir = tempfile::tempdir().unwrap();
        let seq = sample(5);
        assert_eq!(write_sequence(&seq, dir.path(), DEFAULT_DEPTH_SCALE).unwrap(), 0);
        let loaded = load_sequence(dir.path()).unwrap();
        assert_eq!(loaded.dropped, 0);
        let back = loaded.sequence;
        assert_eq!(back.len(), 5);
        for (a, b) in seq.rgb.iter().zip(&back.rgb) {
            assert_eq!(a.to_rgb8(), b.to_rgb8());
            assert!((a.timestamp - b.timestamp).abs() < 1e-6);
        }
        for (a, b) in seq.depth.iter().zip(&back.depth) {
            for (x, y) in a.depths().iter().zip(b.depths()) {
                assert_eq!(is_void(*x), is_void(*y));
                if !is_void(*x) {
                    assert!((x - y).abs() <= 1.0 / 5000.0);
                }
            }
        }
        for (a, b) in seq.trajectory.poses().iter().zip(back.trajectory.poses()) {
            assert!((a.translation - b.translation).norm() < 1e-6);
            assert!(a.orientation.angle_to(&b.orientation) < 1e-5);
        }
        let gt = fs::read_to_string(dir.path().join(GROUNDTRUTH)).unwrap();
        for line in gt.lines() {
            let qw: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
            assert!(qw >= 0.0);
        }
    }

    #[test]
    fn empty_sequence_gives_empty_indices() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&SensorSequence::default(), dir.path(), DEFAULT_DEPTH_SCALE).unwrap();
        for f in [RGB_INDEX, DEPTH_INDEX, GROUNDTRUTH] {
            assert_eq!(fs::read_to_string(dir.path().join(f)).unwrap(), "");
        }
        assert!(load_sequence(dir.path()).unwrap().sequence.is_empty());
    }

    #[test]
    fn depth_scale_arithmetic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        let f = DepthFrame::new(0.0, 3, 1, vec![2.0, VOID, 20.0]).unwrap();
        assert_eq!(write_depth(&path, &f, 5000.0).unwrap(), 1);
        let buf = image::open(&path).unwrap().into_luma16();
        assert_eq!(buf.as_raw(), &vec![10000u16, 0, 0]);
        let back = read_depth(&path, 0.0, 5000.0).unwrap();
        assert_eq!(back.depths()[0], 2.0);
        assert!(is_void(back.depths()[1]) && is_void(back.depths()[2]));
    }

    #[test]
    fn missing_and_broken_files() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample(2), dir.path(), DEFAULT_DEPTH_SCALE).unwrap();
        let rgb_file = read_index(&dir.path().join(RGB_INDEX)).unwrap()[0].1.clone();
        fs::write(dir.path().join(&rgb_file), b"not an image").unwrap();
        match load_sequence(dir.path()) {
            Err(Error::Decode { path, .. }) => assert!(path.ends_with(&rgb_file)),
            other => panic!("{other:?}"),
        }
        fs::remove_file(dir.path().join(DEPTH_INDEX)).unwrap();
        assert!(matches!(load_sequence(dir.path()), Err(Error::Layout { .. })));
    }

    #[test]
    fn unmatched_frames_are_counted() {
        let dir = tempfile::tempdir().unwrap();
        let seq = sample(4);
        write_sequence(&seq, dir.path(), DEFAULT_DEPTH_SCALE).unwrap();
        let gt = Trajectory::new(seq.trajectory.poses()[..3].to_vec()).unwrap();
        write_trajectory(&dir.path().join(GROUNDTRUTH), &gt).unwrap();
        let loaded = load_sequence(dir.path()).unwrap();
        assert_eq!((loaded.sequence.len(), loaded.dropped), (3, 1));
    }

    #[test]
    fn custom_depth_scale_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample(2), dir.path(), 1000.0).unwrap();
        assert_eq!(load_sequence(dir.path()).unwrap().depth_scale, 1000.0);
    }

    #[test]
    fn extrinsics_broadcast() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(EXTRINSICS);
        fs::write(&p, "# stereo\n0.0 0.05 0 0\n").unwrap();
        let rows = read_extrinsics(&p, 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].1, Vector3::new(0.05, 0.0, 0.0));
        assert!(read_extrinsics(&dir.path().join("nope.txt"), 3).is_err());
    }

    #[test]
    fn trajectory_parse_errors_name_the_line() {
        let p = Path::new("gt.txt");
        let err = parse_trajectory(p, "0 0 0 0 0 0 0 1\n1 0 0 0 0 0 0\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_trajectory(p, "").unwrap().is_empty());
    }
}
