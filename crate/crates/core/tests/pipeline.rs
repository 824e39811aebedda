mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use perturb_forge::execute::{apply_recipe, digest_tree, execute_plan, ExecuteOptions};
use perturb_forge::io::tum::format_trajectory;
use perturb_forge::io::{load_sequence, read_manifest, EntryStatus, MANIFEST_FILE, DEFAULT_DEPTH_SCALE};
use perturb_forge::plan::{build_plan, BenchmarkPlan, Recipe, SequenceSpec};
use perturb_forge::{DepthKind, Error, Level, Mode, RgbKind, SeverityTable};

fn sources(root: &Path, scenes: &[String]) -> BTreeMap<String, PathBuf> {
    scenes.iter().map(|s| (s.clone(), root.to_path_buf())).collect()
}

fn plan_of(recipes: &[Recipe], seed: u64) -> BenchmarkPlan {
    BenchmarkPlan {
        master_seed: seed,
        scenes: vec!["toy".into()],
        entries: recipes.iter().map(|r| SequenceSpec::new("toy", *r, seed ^ 0x55)).collect(),
    }
}

fn run(plan: &BenchmarkPlan, src: &Path, out: &Path, jobs: usize) -> perturb_forge::io::Manifest {
    let options = ExecuteOptions {
        jobs,
        table: SeverityTable::builtin(),
    };
    execute_plan(plan, &sources(src, &plan.scenes), out, &options).unwrap()
}

#[test]
fn clean_entry_is_byte_identical() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 6);
    let m = run(&plan_of(&[Recipe::Clean], 1), src.path(), out.path(), 2);
    let entry = &m.entries[0];
    assert_eq!(entry.status, EntryStatus::Ok);
    assert_eq!(entry.files, digest_tree(src.path()).unwrap());
}

#[test]
fn disk_output_matches_in_memory_recipe() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 24);
    let recipes = [
        Recipe::Rgb { kind: RgbKind::MotionBlur, level: Level::High, mode: Mode::Dynamic },
        Recipe::Rgb { kind: RgbKind::JpegCompression, level: Level::Low, mode: Mode::Static },
        Recipe::Depth { kind: DepthKind::EdgeErosion, level: Level::Medium, mode: Mode::Static },
        Recipe::FasterMotion { level: Level::High },
        Recipe::Trajectory { rotation: Some(Level::Medium), translation: Some(Level::High) },
        Recipe::Misalignment { level: Level::Low, mode: Mode::Dynamic },
    ];
    let plan = plan_of(&recipes, 7);
    let m = run(&plan, src.path(), out.path(), 3);
    let source = load_sequence(src.path()).unwrap().sequence;
    let table = SeverityTable::builtin();
    for (entry, spec) in m.entries.iter().zip(&plan.entries) {
        assert_eq!(entry.status, EntryStatus::Ok, "{}", spec.id);
        let disk = load_sequence(&out.path().join(&entry.path)).unwrap();
        assert_eq!(disk.dropped, 0, "{}", spec.id);
        let mem = apply_recipe(&source, &spec.recipe, spec.seed, &table).unwrap();
        assert_eq!(disk.sequence.len(), mem.len(), "{}", spec.id);
        assert_eq!(entry.frames, mem.len());
        for (a, b) in disk.sequence.rgb.iter().zip(&mem.rgb) {
            assert_eq!(a.to_rgb8(), b.to_rgb8(), "{}", spec.id);
        }
        for (a, b) in disk.sequence.depth.iter().zip(&mem.depth) {
            assert_eq!(a.to_raw(DEFAULT_DEPTH_SCALE), b.to_raw(DEFAULT_DEPTH_SCALE), "{}", spec.id);
        }
        assert_eq!(format_trajectory(&disk.sequence.trajectory), format_trajectory(&mem.trajectory));
    }
}

#[test]
fn untouched_streams_are_byte_copied() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 5);
    let recipe = Recipe::Rgb { kind: RgbKind::GaussianNoise, level: Level::Low, mode: Mode::Static };
    let m = run(&plan_of(&[recipe], 3), src.path(), out.path(), 1);
    let theirs = digest_tree(src.path()).unwrap();
    let ours = &m.entries[0].files;
    let depth = |files: &[perturb_forge::io::FileDigest]| -> Vec<String> {
        files.iter().filter(|f| f.path.starts_with("depth/")).map(|f| f.sha256.clone()).collect()
    };
    assert_eq!(depth(&theirs), depth(ours));
    assert!(ours.iter().any(|f| f.path == "extrinsics.txt"));
}

#[test]
fn faster_motion_index_arithmetic() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 100);
    let recipes: Vec<Recipe> = Level::ALL.iter().map(|&level| Recipe::FasterMotion { level }).collect();
    let m = run(&plan_of(&recipes, 1), src.path(), out.path(), 2);
    let lens: Vec<usize> = m.entries.iter().map(|e| e.frames).collect();
    assert_eq!(lens, [50, 25, 13]);
}

#[test]
fn extrinsic_entry_rewrites_baseline_only() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 8);
    let m = run(&plan_of(&[Recipe::Extrinsic { level: Level::High }], 5), src.path(), out.path(), 1);
    let root = out.path().join(&m.entries[0].path);
    let rows = perturb_forge::io::read_extrinsics(&root.join("extrinsics.txt"), 8).unwrap();
    assert!(rows.iter().all(|(_, t)| t.y == 0.0 && t.z == 0.0));
    assert!(rows.iter().any(|(_, t)| (t.x - 0.05).abs() > 1e-4));
}

#[test]
fn failures_are_recorded_and_the_run_continues() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 6);
    let victim = fs::read_dir(src.path().join("rgb")).unwrap().next().unwrap().unwrap().path();
    fs::write(&victim, b"broken").unwrap();
    let recipes = [
        Recipe::Rgb { kind: RgbKind::Brightness, level: Level::Low, mode: Mode::Static },
        Recipe::FasterMotion { level: Level::Low },
    ];
    let m = run(&plan_of(&recipes, 2), src.path(), out.path(), 2);
    match &m.entries[0].status {
        EntryStatus::Failed(msg) => assert!(msg.contains("decode"), "{msg}"),
        s => panic!("{s:?}"),
    }
    assert_eq!(m.entries[1].status, EntryStatus::Ok);
    assert_eq!(m.failures(), 1);
    assert_eq!(read_manifest(&out.path().join(MANIFEST_FILE)).unwrap(), m);
}

#[test]
fn missing_source_aborts_before_writing() {
    let out = tempfile::tempdir().unwrap();
    let plan = build_plan(&common::scenes(), 1).unwrap();
    let mut srcs = BTreeMap::new();
    srcs.insert("office0".to_string(), out.path().to_path_buf());
    let err = execute_plan(&plan, &srcs, &out.path().join("o"), &ExecuteOptions::default()).unwrap_err();
    assert!(matches!(err, Error::MissingSource(ref s) if s == "office1"), "{err}");
    assert!(!out.path().join("o").exists());
}

#[test]
fn rerun_overwrites_stale_output() {
    let (src, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::write_source(src.path(), 4);
    let plan = plan_of(&[Recipe::FasterMotion { level: Level::Low }], 9);
    let first = run(&plan, src.path(), out.path(), 1);
    fs::write(out.path().join(&first.entries[0].path).join("junk"), b"x").unwrap();
    assert_eq!(run(&plan, src.path(), out.path(), 1), first);
}
