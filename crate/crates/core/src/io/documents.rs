//! Plan and manifest TOML documents.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::plan::{entry_id, BenchmarkPlan, Category, Recipe, SequenceSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn seed_to_hex(seed: u64) -> String {
    format!("{seed:016x}")
}

pub fn seed_from_hex(s: &str) -> Result<u64> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    if digits.is_empty() || digits.len() > 16 {
        return Err(Error::Schema(format!("seed `{s}` is not a 64-bit hex value")));
    }
    u64::from_str_radix(digits, 16).map_err(|_| Error::Schema(format!("seed `{s}` is not a 64-bit hex value")))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    id: String,
    scene: String,
    category: String,
    recipe: String,
    seed: String,
}

impl EntryDoc {
    fn from_spec(s: &SequenceSpec) -> Self {
        Self {
            id: s.id.clone(),
            scene: s.scene.clone(),
            category: s.category().to_string(),
            recipe: s.recipe.to_string(),
            seed: seed_to_hex(s.seed),
        }
    }

    fn into_spec(self, n: usize) -> Result<SequenceSpec> {
        let at = |e: Error| Error::Schema(format!("entries[{n}]: {e}"));
        let recipe: Recipe = self.recipe.parse().map_err(at)?;
        let category: Category = self.category.parse().map_err(at)?;
        if category != recipe.category() {
            return Err(Error::Schema(format!(
                "entries[{n}]: category `{category}` does not match recipe `{recipe}`"
            )));
        }
        let expected = entry_id(&self.scene, &recipe);
        if self.id != expected {
            return Err(Error::Schema(format!("entries[{n}]: id `{}` should be `{expected}`", self.id)));
        }
        Ok(SequenceSpec {
            id: self.id,
            scene: self.scene,
            recipe,
            seed: seed_from_hex(&self.seed).map_err(|e| Error::Schema(format!("entries[{n}]: {e}")))?,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanHeader {
    master_seed: String,
    entry_count: usize,
    scenes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    schema_version: u32,
    plan: PlanHeader,
    #[serde(default)]
    entries: Vec<EntryDoc>,
}

fn check_version(text: &str) -> Result<()> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Schema(e.to_string()))?;
    match table.get("schema_version").and_then(|v| v.as_integer()) {
        Some(v) if v == SCHEMA_VERSION as i64 => Ok(()),
        Some(v) => Err(Error::Schema(format!("unsupported schema_version {v}"))),
        None => Err(Error::Schema("missing schema_version".into())),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    check_version(text)?;
    toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

fn check_count(declared: usize, found: usize) -> Result<()> {
    if declared != found {
        return Err(Error::Schema(format!(
            "entry_count is {declared} but {found} [[entries]] tables are present"
        )));
    }
    Ok(())
}

pub fn plan_to_toml(plan: &BenchmarkPlan) -> String {
    let doc = PlanDoc {
        schema_version: SCHEMA_VERSION,
        plan: PlanHeader {
            master_seed: seed_to_hex(plan.master_seed),
            entry_count: plan.entries.len(),
            scenes: plan.scenes.clone(),
        },
        entries: plan.entries.iter().map(EntryDoc::from_spec).collect(),
    };
    toml::to_string(&doc).expect("plan documents always serialize")
}

pub fn plan_from_toml(text: &str) -> Result<BenchmarkPlan> {
    let doc: PlanDoc = parse(text)?;
    check_count(doc.plan.entry_count, doc.entries.len())?;
    let entries = doc
        .entries
        .into_iter()
        .enumerate()
        .map(|(n, e)| e.into_spec(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkPlan {
        master_seed: seed_from_hex(&doc.plan.master_seed)?,
        scenes: doc.plan.scenes,
        entries,
    })
}

pub fn read_plan(path: &Path) -> Result<BenchmarkPlan> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    plan_from_toml(&text)
}

pub fn write_plan(path: &Path, plan: &BenchmarkPlan) -> Result<()> {
    fs::write(path, plan_to_toml(plan)).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryStatus {
    Ok,
    Failed(String),
}

/// One produced (or failed) sequence. `path` is relative to the output root.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub spec: SequenceSpec,
    pub path: String,
    pub status: EntryStatus,
    pub frames: usize,
    pub dropped: usize,
    pub saturated: usize,
    pub digest: String,
    pub files: Vec<FileDigest>,
}

impl ManifestEntry {
    pub fn is_ok(&self) -> bool {
        self.status == EntryStatus::Ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub master_seed: u64,
    pub severity_digest: String,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_ok()).count()
    }
}

/// Digest of a whole sequence directory: sha256 over its sorted
/// `path sha256` lines.
pub fn sequence_digest(files: &[FileDigest]) -> String {
    let mut lines: Vec<String> = files.iter().map(|f| format!("{} {}\n", f.path, f.sha256)).collect();
    lines.sort();
    sha256_hex(lines.concat().as_bytes())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntryDoc {
    id: String,
    scene: String,
    category: String,
    recipe: String,
    seed: String,
    path: String,
    status: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    error: String,
    frames: usize,
    dropped: usize,
    saturated: usize,
    digest: String,
    #[serde(default)]
    files: Vec<FileDigest>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestHeader {
    master_seed: String,
    severity_digest: String,
    entry_count: usize,
    failed_count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    schema_version: u32,
    manifest: ManifestHeader,
    #[serde(default)]
    entries: Vec<ManifestEntryDoc>,
}

pub fn manifest_to_toml(m: &Manifest) -> String {
    let entries = m
        .entries
        .iter()
        .map(|e| {
            let base = EntryDoc::from_spec(&e.spec);
            let (status, error) = match &e.status {
                EntryStatus::Ok => ("ok".to_string(), String::new()),
                EntryStatus::Failed(msg) => ("failed".to_string(), msg.clone()),
            };
            ManifestEntryDoc {
                id: base.id,
                scene: base.scene,
                category: base.category,
                recipe: base.recipe,
                seed: base.seed,
                path: e.path.clone(),
                status,
                error,
                frames: e.frames,
                dropped: e.dropped,
                saturated: e.saturated,
                digest: e.digest.clone(),
                files: e.files.clone(),
            }
        })
        .collect();
    let doc = ManifestDoc {
        schema_version: SCHEMA_VERSION,
        manifest: ManifestHeader {
            master_seed: seed_to_hex(m.master_seed),
            severity_digest: m.severity_digest.clone(),
            entry_count: m.entries.len(),
            failed_count: m.failures(),
        },
        entries,
    };
    toml::to_string(&doc).expect("manifest documents always serialize")
}

pub fn manifest_from_toml(text: &str) -> Result<Manifest> {
    let doc: ManifestDoc = parse(text)?;
    check_count(doc.manifest.entry_count, doc.entries.len())?;
    let mut entries = Vec::with_capacity(doc.entries.len());
    for (n, e) in doc.entries.into_iter().enumerate() {
        let status = match e.status.as_str() {
            "ok" => EntryStatus::Ok,
            "failed" => EntryStatus::Failed(e.error),
            s => return Err(Error::Schema(format!("entries[{n}]: unknown status `{s}`"))),
        };
        let spec = EntryDoc {
            id: e.id,
            scene: e.scene,
            category: e.category,
            recipe: e.recipe,
            seed: e.seed,
        }
        .into_spec(n)?;
        entries.push(ManifestEntry {
            spec,
            path: e.path,
            status,
            frames: e.frames,
            dropped: e.dropped,
            saturated: e.saturated,
            digest: e.digest,
            files: e.files,
        });
    }
    Ok(Manifest {
        master_seed: seed_from_hex(&doc.manifest.master_seed)?,
        severity_digest: doc.manifest.severity_digest,
        entries,
    })
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    manifest_from_toml(&text)
}

pub fn write_manifest(path: &Path, m: &Manifest) -> Result<()> {
    fs::write(path, manifest_to_toml(m)).map_err(|e| Error::io(path, e))
}
