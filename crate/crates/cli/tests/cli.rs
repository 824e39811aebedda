use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use perturb_forge::io::{read_manifest, write_sequence, write_trajectory, DEFAULT_DEPTH_SCALE};
use perturb_forge::{DepthFrame, Pose, RgbFrame, SensorSequence, Trajectory};

const SCENES: &str = "office0,office1,office2,office3,office4,room0,room1,room2";

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perturb-forge"))
        .args(args)
        .env_remove("PERTURB_FORGE_SEVERITY_TABLE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn line_trajectory(n: usize, dx: f64) -> Trajectory {
    let poses = (0..n)
        .map(|i| Pose::new(i as f64 * 0.1, [i as f64 * 0.2 + dx, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0]).unwrap())
        .collect();
    Trajectory::new(poses).unwrap()
}

fn write_source(root: &Path, n: usize) {
    let rgb = (0..n)
        .map(|i| {
            let px = (0..16 * 12 * 3).map(|k| ((k * 7 + i * 13) % 256) as f32 / 255.0).collect();
            RgbFrame::new(i as f64 * 0.1, 16, 12, px).unwrap()
        })
        .collect();
    let depth = (0..n)
        .map(|i| DepthFrame::new(i as f64 * 0.1, 16, 12, vec![1.5 + 0.01 * i as f32; 16 * 12]).unwrap())
        .collect();
    let seq = SensorSequence::new(rgb, depth, line_trajectory(n, 0.0)).unwrap();
    write_sequence(&seq, root, DEFAULT_DEPTH_SCALE).unwrap();
}

#[test]
fn plan_prints_counts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.toml"), dir.path().join("b.toml"));
    let out = cli(&["plan", "--scenes", SCENES, "--seed", "42", "--out", path(&a)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("seed 42"), "{text}");
    for (c, n) in [("clean", 8), ("image", 768), ("depth", 32), ("faster_motion", 24), ("trajectory", 120), ("misalignment", 48)] {
        assert!(text.contains(&format!("count.{c} {n}\n")), "{c}: {text}");
    }
    cli(&["plan", "--scenes", SCENES, "--seed", "42", "--out", path(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn plan_with_seven_scenes_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["plan", "--scenes", "a,b,c,d,e,f,g", "--out", path(&dir.path().join("p.toml"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plan shape"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn evaluate_reports_ate_and_sr() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, off, empty) = (dir.path().join("gt.txt"), dir.path().join("off.txt"), dir.path().join("empty.txt"));
    write_trajectory(&gt, &line_trajectory(20, 0.0)).unwrap();
    write_trajectory(&off, &line_trajectory(20, 0.1)).unwrap();
    fs::write(&empty, "").unwrap();

    let same = stdout(&cli(&["evaluate", "--est", path(&gt), "--gt", path(&gt)]));
    assert!(same.contains("ate 0.000000") && same.contains("sr 1.000000"), "{same}");
    let shifted = stdout(&cli(&["evaluate", "--est", path(&off), "--gt", path(&gt), "--align", "none"]));
    assert!(shifted.contains("ate 0.100000"), "{shifted}");
    let failed = cli(&["evaluate", "--est", path(&empty), "--gt", path(&gt)]);
    assert_eq!(failed.status.code(), Some(0));
    let text = stdout(&failed);
    assert!(text.contains("ate 1.000000") && text.contains("sr 0.000000") && text.contains("failed true"), "{text}");

    let structured = cli(&["evaluate", "--est", path(&off), "--gt", path(&gt), "--format", "structured", "--seed", "7"]);
    let v: serde_json::Value = serde_json::from_slice(&structured.stdout).unwrap();
    assert!((v["ate"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert_eq!(v["seed"], 7);
}

#[test]
fn evaluate_without_associations_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, late) = (dir.path().join("gt.txt"), dir.path().join("late.txt"));
    write_trajectory(&gt, &line_trajectory(5, 0.0)).unwrap();
    let poses = (0..5).map(|i| Pose::new(100.0 + i as f64, [0.0; 3], [1.0, 0.0, 0.0, 0.0]).unwrap()).collect();
    write_trajectory(&late, &Trajectory::new(poses).unwrap()).unwrap();
    let out = cli(&["evaluate", "--est", path(&late), "--gt", path(&gt)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.02 s"));
}

#[test]
fn perturb_single_spec_and_jobs_independence() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("office0");
    write_source(&src, 6);
    let mut digests = Vec::new();
    for jobs in ["1", "4"] {
        let out_dir = dir.path().join(format!("out{jobs}"));
        let out = cli(&[
            "perturb", "--spec", "gaussian_noise:medium:static:42", "--src", path(&src), "--out", path(&out_dir), "--jobs", jobs,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("seed 42"));
        let m = read_manifest(&out_dir.join("manifest.toml")).unwrap();
        assert_eq!(m.entries.len(), 1);
        assert!(out_dir.join(&m.entries[0].path).join("rgb.txt").is_file());
        digests.push(m.entries[0].digest.clone());
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn perturb_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["perturb", "--spec", "fog:low:static:1", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let out = cli(&["perturb", "--spec", "fog:lowish:static:1", "--src", path(dir.path()), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn perturb_plan_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let sources = dir.path().join("src");
    for scene in SCENES.split(',') {
        write_source(&sources.join(scene), 4);
    }
    // only a few entries, to keep the run short
    let plan_path = dir.path().join("plan.toml");
    cli(&["plan", "--scenes", SCENES, "--seed", "5", "--out", path(&plan_path)]);
    let mut plan = perturb_forge::io::read_plan(&plan_path).unwrap();
    plan.entries.retain(|e| e.scene == "office0" && (e.id.contains("clean") || e.id.contains("faster_motion")));
    perturb_forge::io::write_plan(&plan_path, &plan).unwrap();

    let out_dir = dir.path().join("out");
    let out = cli(&["perturb", "--plan", path(&plan_path), "--src", path(&sources), "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = out_dir.join("manifest.toml");
    let m = read_manifest(&manifest).unwrap();
    assert_eq!(m.entries.len(), 4);

    let results = dir.path().join("results");
    let clean = &m.entries[0];
    let target = results.join(format!("{}.txt", clean.spec.id));
    fs::create_dir_all(target.parent().unwrap()).unwrap();
    fs::copy(out_dir.join(&clean.path).join("groundtruth.txt"), &target).unwrap();

    let out = cli(&["report", "--manifest", path(&manifest), "--results", path(&results), "--csr-thresholds", "0.01,0.5,1.0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("failures 3"), "{text}");
    assert!(text.contains("category:clean 1 0 0.000000 0.000000 1.000000 1.000000"), "{text}");
    assert!(text.contains("category:faster_motion 3 3 1.000000 1.000000 0.000000 0.000000"), "{text}");
    assert!(text.contains("missing result"), "{text}");
    let csr: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("all "))
        .skip(1)
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect();
    assert_eq!(csr, [25.0, 25.0, 100.0]);
}

#[test]
fn partial_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("seq");
    write_source(&src, 6);
    let out = cli(&["perturb", "--spec", "misalignment:high:static:3", "--src", path(&src), "--out", path(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).contains("failed 1"));
}

#[test]
fn severity_table_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.toml");
    fs::write(&table, "schema_version = 1\n").unwrap();
    let src = dir.path().join("seq");
    write_source(&src, 3);
    let out = Command::new(env!("CARGO_BIN_EXE_perturb-forge"))
        .args(["perturb", "--spec", "fog:low:static:1", "--src", path(&src), "--out", path(&dir.path().join("o"))])
        .env("PERTURB_FORGE_SEVERITY_TABLE", &table)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fog"));
}
