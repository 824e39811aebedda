use std::collections::BTreeMap;
use std::path::Path;

use perturb_forge::io::{read_manifest, read_trajectory, EntryStatus, ManifestEntry};
use perturb_forge::metrics::{aggregate, compute_ate, compute_csr, compute_sr, Alignment, SettingResult};
use serde_json::{json, Value};

use crate::{Failure, Output};

/// Result file of an entry: `<results>/<entry id>.txt`. A sibling
/// `<entry id>.failed` marks a run that produced no trajectory.
fn score(entry: &ManifestEntry, root: &Path, results: &Path, align: Alignment) -> Result<SettingResult, String> {
    if let EntryStatus::Failed(msg) = &entry.status {
        return Err(format!("perturbation failed: {msg}"));
    }
    let est_path = results.join(format!("{}.txt", entry.spec.id));
    if results.join(format!("{}.failed", entry.spec.id)).exists() {
        return Err("marked failed".into());
    }
    if !est_path.is_file() {
        return Err("missing result".into());
    }
    let est = read_trajectory(&est_path).map_err(|e| e.to_string())?;
    if est.is_empty() {
        return Err("empty trajectory".into());
    }
    let gt = read_trajectory(&root.join(&entry.path).join("groundtruth.txt")).map_err(|e| e.to_string())?;
    let ate = compute_ate(&est, &gt, align).map_err(|e| e.to_string())?.ate;
    let sr = compute_sr(&est, &gt).map_err(|e| e.to_string())?.sr;
    Ok(SettingResult::ok(ate, sr))
}

pub(crate) fn cmd_report(
    manifest_path: &Path,
    results: &Path,
    thresholds: &[f64],
    align: Alignment,
    output: &mut Output,
) -> Result<(), Failure> {
    if let Some(bad) = thresholds.iter().find(|x| !(**x >= 0.0)) {
        return Err(Failure::Usage(format!("CSR threshold {bad} must be non-negative")));
    }
    let manifest = read_manifest(manifest_path)?;
    if manifest.entries.is_empty() {
        return Err(Failure::Data("manifest has no entries".into()));
    }
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let mut groups: BTreeMap<String, Vec<SettingResult>> = BTreeMap::new();
    let mut problems = Vec::new();
    for entry in &manifest.entries {
        let result = score(entry, root, results, align).unwrap_or_else(|why| {
            problems.push((entry.spec.id.clone(), why));
            SettingResult::failure()
        });
        let category = entry.spec.category().to_string();
        for key in [
            "all".to_string(),
            format!("category:{category}"),
            format!("kind:{category}/{}", entry.spec.recipe.kind_label()),
        ] {
            groups.entry(key).or_default().push(result);
        }
    }

    output.field("alignment", json!(align.name()), align.name().to_string());
    output.field("entries", json!(manifest.entries.len()), manifest.entries.len().to_string());
    output.field("failures", json!(problems.len()), problems.len().to_string());
    for (id, why) in &problems {
        output.line(format!("failure {id} {why}"));
    }
    output.fields.insert(
        "failure_list".into(),
        Value::Array(problems.iter().map(|(id, why)| json!({"id": id, "reason": why})).collect()),
    );

    output.line("# aggregate".into());
    output.line("group count failures mean_ate max_ate mean_sr min_sr".into());
    let mut tables = Vec::new();
    for (group, settings) in &groups {
        let a = aggregate(settings)?;
        output.line(format!(
            "{group} {} {} {:.6} {:.6} {:.6} {:.6}",
            a.count, a.failure_count, a.mean_ate, a.max_ate, a.mean_sr, a.min_sr
        ));
        tables.push(json!({
            "group": group, "count": a.count, "failures": a.failure_count,
            "mean_ate": a.mean_ate, "max_ate": a.max_ate, "mean_sr": a.mean_sr, "min_sr": a.min_sr,
        }));
    }
    output.fields.insert("aggregate".into(), Value::Array(tables));

    output.line("# csr".into());
    output.line("group xi csr_pct".into());
    let mut curves = Vec::new();
    for (group, settings) in groups.iter().filter(|(g, _)| !g.starts_with("kind:")) {
        let ates: Vec<f64> = settings.iter().map(|s| s.effective().0).collect();
        let mut points = Vec::new();
        for &xi in thresholds {
            let c = compute_csr(&ates, xi)?;
            output.line(format!("{group} {xi} {c:.6}"));
            points.push(json!({"xi": xi, "csr_pct": c}));
        }
        curves.push(json!({"group": group, "points": points}));
    }
    output.fields.insert("csr".into(), Value::Array(curves));
    Ok(())
}
