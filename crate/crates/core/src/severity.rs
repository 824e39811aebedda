//! Severity table: resolves every (kind, level) pair to concrete parameters.
//!
//! The on-disk form is TOML with a `schema_version` key and one table per
//! cell, `[<kind>.<level>]`, holding that kind's named parameters. Loading
//! rejects unknown kinds, levels and fields and lists every missing cell.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::perturbation::{DepthKind, Level, PerturbationKind, RgbKind, TrajectoryKind};

pub const SCHEMA_VERSION: i64 = 1;

const BUILTIN: &str = include_str!("../severity/default.toml");

#[derive(Clone, Copy, Debug)]
enum FieldType {
    Real { min: f64, max: f64 },
    Int { min: i64, max: i64 },
}

#[derive(Clone, Copy, Debug)]
struct Field {
    name: &'static str,
    ty: FieldType,
}

const fn real(name: &'static str, min: f64, max: f64) -> Field {
    Field {
        name,
        ty: FieldType::Real { min, max },
    }
}

const fn int(name: &'static str, min: i64, max: i64) -> Field {
    Field {
        name,
        ty: FieldType::Int { min, max },
    }
}

const INF: f64 = f64::INFINITY;

fn schema(kind: PerturbationKind) -> Vec<Field> {
    use PerturbationKind as P;
    match kind {
        P::Rgb(k) => match k {
            RgbKind::GaussianNoise => vec![real("sigma", 0.0, INF)],
            RgbKind::ShotNoise => vec![real("lambda", 1e-6, INF)],
            RgbKind::ImpulseNoise => vec![real("p", 0.0, 1.0)],
            RgbKind::SpeckleNoise => vec![real("rho", 0.0, INF)],
            RgbKind::DefocusBlur => vec![int("radius", 0, 256)],
            RgbKind::GlassBlur => vec![
                real("sigma", 0.0, 64.0),
                int("delta", 0, 64),
                int("iterations", 0, 64),
            ],
            RgbKind::MotionBlur => vec![int("length", 1, 513)],
            RgbKind::GaussianBlur => vec![real("sigma", 0.0, 64.0)],
            RgbKind::Snow => vec![
                real("density", 0.0, 1.0),
                int("flake_radius", 0, 64),
                real("alpha", 0.0, 1.0),
            ],
            RgbKind::Frost => vec![real("alpha", 0.0, 1.0), int("cell", 1, 4096)],
            RgbKind::Fog => vec![real("alpha", 0.0, 1.0)],
            RgbKind::Spatter => vec![
                real("density", 0.0, 1.0),
                int("radius", 0, 64),
                real("alpha", 0.0, 1.0),
            ],
            RgbKind::Brightness => vec![real("offset", -1.0, 1.0)],
            RgbKind::Contrast => vec![real("factor", 0.0, INF)],
            RgbKind::JpegCompression => vec![int("quality", 1, 100)],
            RgbKind::Pixelate => vec![int("block", 1, 4096)],
        },
        P::Depth(k) => match k {
            DepthKind::GaussianNoise => vec![real("sigma", 0.0, INF)],
            DepthKind::EdgeErosion => vec![int("radius", 0, 64), real("retain", 0.0, 1.0)],
            DepthKind::RandomMissing => vec![real("rate", 0.0, 1.0)],
            DepthKind::RangeClipping => vec![real("min", 0.0, INF), real("max", 0.0, INF)],
        },
        P::Trajectory(k) => match k {
            TrajectoryKind::RotationDeviation => vec![real("sigma_deg", 0.0, 180.0)],
            TrajectoryKind::TranslationDeviation => vec![real("sigma_m", 0.0, INF)],
            TrajectoryKind::FasterMotion => vec![int("interval", 1, 1 << 20)],
        },
        P::Misalignment => vec![int("delay", 0, 1 << 20)],
        P::ExtrinsicBaseline => vec![real("sigma_m", 0.0, INF)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RgbParams {
    GaussianNoise { sigma: f64 },
    ShotNoise { lambda: f64 },
    ImpulseNoise { p: f64 },
    SpeckleNoise { rho: f64 },
    DefocusBlur { radius: usize },
    GlassBlur { sigma: f64, delta: usize, iterations: usize },
    MotionBlur { length: usize },
    GaussianBlur { sigma: f64 },
    Snow { density: f64, flake_radius: usize, alpha: f64 },
    Frost { alpha: f64, cell: usize },
    Fog { alpha: f64 },
    Spatter { density: f64, radius: usize, alpha: f64 },
    Brightness { offset: f64 },
    Contrast { factor: f64 },
    JpegCompression { quality: u8 },
    Pixelate { block: usize },
}

impl RgbParams {
    pub fn kind(&self) -> RgbKind {
        match self {
            Self::GaussianNoise { .. } => RgbKind::GaussianNoise,
            Self::ShotNoise { .. } => RgbKind::ShotNoise,
            Self::ImpulseNoise { .. } => RgbKind::ImpulseNoise,
            Self::SpeckleNoise { .. } => RgbKind::SpeckleNoise,
            Self::DefocusBlur { .. } => RgbKind::DefocusBlur,
            Self::GlassBlur { .. } => RgbKind::GlassBlur,
            Self::MotionBlur { .. } => RgbKind::MotionBlur,
            Self::GaussianBlur { .. } => RgbKind::GaussianBlur,
            Self::Snow { .. } => RgbKind::Snow,
            Self::Frost { .. } => RgbKind::Frost,
            Self::Fog { .. } => RgbKind::Fog,
            Self::Spatter { .. } => RgbKind::Spatter,
            Self::Brightness { .. } => RgbKind::Brightness,
            Self::Contrast { .. } => RgbKind::Contrast,
            Self::JpegCompression { .. } => RgbKind::JpegCompression,
            Self::Pixelate { .. } => RgbKind::Pixelate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DepthParams {
    GaussianNoise { sigma: f64 },
    EdgeErosion { radius: usize, retain: f64 },
    RandomMissing { rate: f64 },
    RangeClipping { min: f64, max: f64 },
}

/// Parameter values of one cell, keyed by field name.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamSet(BTreeMap<&'static str, f64>);

impl ParamSet {
    fn real(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn int(&self, name: &str) -> usize {
        self.0[name] as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeverityTable {
    cells: BTreeMap<(PerturbationKind, Level), ParamSet>,
}

impl Default for SeverityTable {
    fn default() -> Self {
        Self::builtin()
    }
}

impl SeverityTable {
    /// The shipped table (`severity/default.toml`).
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("built-in severity table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Schema(e.to_string()))?;
        match doc.get("schema_version") {
            Some(toml::Value::Integer(SCHEMA_VERSION)) => {}
            Some(other) => {
                return Err(Error::Schema(format!(
                    "unsupported schema_version {other} (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Schema("missing `schema_version`".into())),
        }

        let mut cells = BTreeMap::new();
        for (key, value) in &doc {
            if key == "schema_version" {
                continue;
            }
            let kind: PerturbationKind = key
                .parse()
                .map_err(|_| Error::Schema(format!("unknown kind table [{key}]")))?;
            let levels = value
                .as_table()
                .ok_or_else(|| Error::Schema(format!("[{key}] must be a table")))?;
            for (level_key, cell) in levels {
                let level: Level = level_key
                    .parse()
                    .map_err(|_| Error::Schema(format!("unknown level [{key}.{level_key}]")))?;
                let cell = cell
                    .as_table()
                    .ok_or_else(|| Error::Schema(format!("[{key}.{level_key}] must be a table")))?;
                let params = parse_cell(kind, cell)
                    .map_err(|msg| Error::Schema(format!("[{key}.{level_key}]: {msg}")))?;
                cells.insert((kind, level), params);
            }
        }

        let missing: Vec<String> = PerturbationKind::all()
            .into_iter()
            .flat_map(|k| Level::ALL.iter().map(move |&l| (k, l)))
            .filter(|cell| !cells.contains_key(cell))
            .map(|(k, l)| format!("{k}.{l}"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Schema(format!(
                "severity table is missing cells: {}",
                missing.join(", ")
            )));
        }
        Ok(Self { cells })
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = format!("schema_version = {SCHEMA_VERSION}\n");
        for ((kind, level), params) in &self.cells {
            let _ = write!(out, "\n[{kind}.{level}]\n");
            for field in &schema(*kind) {
                let v = params.real(field.name);
                match field.ty {
                    FieldType::Real { .. } => {
                        let _ = writeln!(out, "{} = {:?}", field.name, v);
                    }
                    FieldType::Int { .. } => {
                        let _ = writeln!(out, "{} = {}", field.name, v as i64);
                    }
                }
            }
        }
        out
    }

    pub fn get(&self, kind: PerturbationKind, level: Level) -> &ParamSet {
        &self.cells[&(kind, level)]
    }

    /// Copy of the table with one parameter replaced (validated against the
    /// kind's schema).
    pub fn with_param(&self, kind: PerturbationKind, level: Level, name: &str, value: f64) -> Result<Self> {
        let fields = schema(kind);
        let field = fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::invalid(format!("`{kind}` has no parameter `{name}`")))?;
        check_value(field, value).map_err(Error::InvalidParameter)?;
        let mut next = self.clone();
        let cell = next.cells.get_mut(&(kind, level)).expect("table is total");
        cell.0.insert(field.name, value);
        check_cell(kind, cell).map_err(Error::InvalidParameter)?;
        Ok(next)
    }

    pub fn rgb(&self, kind: RgbKind, level: Level) -> RgbParams {
        let p = self.get(PerturbationKind::Rgb(kind), level);
        match kind {
            RgbKind::GaussianNoise => RgbParams::GaussianNoise { sigma: p.real("sigma") },
            RgbKind::ShotNoise => RgbParams::ShotNoise { lambda: p.real("lambda") },
            RgbKind::ImpulseNoise => RgbParams::ImpulseNoise { p: p.real("p") },
            RgbKind::SpeckleNoise => RgbParams::SpeckleNoise { rho: p.real("rho") },
            RgbKind::DefocusBlur => RgbParams::DefocusBlur { radius: p.int("radius") },
            RgbKind::GlassBlur => RgbParams::GlassBlur {
                sigma: p.real("sigma"),
                delta: p.int("delta"),
                iterations: p.int("iterations"),
            },
            RgbKind::MotionBlur => RgbParams::MotionBlur { length: p.int("length") },
            RgbKind::GaussianBlur => RgbParams::GaussianBlur { sigma: p.real("sigma") },
            RgbKind::Snow => RgbParams::Snow {
                density: p.real("density"),
                flake_radius: p.int("flake_radius"),
                alpha: p.real("alpha"),
            },
            RgbKind::Frost => RgbParams::Frost {
                alpha: p.real("alpha"),
                cell: p.int("cell"),
            },
            RgbKind::Fog => RgbParams::Fog { alpha: p.real("alpha") },
            RgbKind::Spatter => RgbParams::Spatter {
                density: p.real("density"),
                radius: p.int("radius"),
                alpha: p.real("alpha"),
            },
            RgbKind::Brightness => RgbParams::Brightness { offset: p.real("offset") },
            RgbKind::Contrast => RgbParams::Contrast { factor: p.real("factor") },
            RgbKind::JpegCompression => RgbParams::JpegCompression {
                quality: p.int("quality") as u8,
            },
            RgbKind::Pixelate => RgbParams::Pixelate { block: p.int("block") },
        }
    }

    pub fn depth(&self, kind: DepthKind, level: Level) -> DepthParams {
        let p = self.get(PerturbationKind::Depth(kind), level);
        match kind {
            DepthKind::GaussianNoise => DepthParams::GaussianNoise { sigma: p.real("sigma") },
            DepthKind::EdgeErosion => DepthParams::EdgeErosion {
                radius: p.int("radius"),
                retain: p.real("retain"),
            },
            DepthKind::RandomMissing => DepthParams::RandomMissing { rate: p.real("rate") },
            DepthKind::RangeClipping => DepthParams::RangeClipping {
                min: p.real("min"),
                max: p.real("max"),
            },
        }
    }

    pub fn rotation_sigma_deg(&self, level: Level) -> f64 {
        self.get(PerturbationKind::Trajectory(TrajectoryKind::RotationDeviation), level)
            .real("sigma_deg")
    }

    pub fn translation_sigma_m(&self, level: Level) -> f64 {
        self.get(PerturbationKind::Trajectory(TrajectoryKind::TranslationDeviation), level)
            .real("sigma_m")
    }

    pub fn faster_motion_interval(&self, level: Level) -> usize {
        self.get(PerturbationKind::Trajectory(TrajectoryKind::FasterMotion), level)
            .int("interval")
    }

    pub fn misalignment_delay(&self, level: Level) -> usize {
        self.get(PerturbationKind::Misalignment, level).int("delay")
    }

    pub fn extrinsic_sigma_m(&self, level: Level) -> f64 {
        self.get(PerturbationKind::ExtrinsicBaseline, level).real("sigma_m")
    }
}

fn check_value(field: &Field, v: f64) -> std::result::Result<(), String> {
    match field.ty {
        FieldType::Real { min, max } => {
            if !(v.is_finite() && v >= min && v <= max) {
                return Err(format!("`{}` = {v} outside [{min}, {max}]", field.name));
            }
        }
        FieldType::Int { min, max } => {
            if v.fract() != 0.0 || v < min as f64 || v > max as f64 {
                return Err(format!("`{}` = {v} is not an integer in [{min}, {max}]", field.name));
            }
        }
    }
    Ok(())
}

fn check_cell(kind: PerturbationKind, cell: &ParamSet) -> std::result::Result<(), String> {
    if kind == PerturbationKind::Depth(DepthKind::RangeClipping) {
        let (min, max) = (cell.real("min"), cell.real("max"));
        if !(min > 0.0 && min < max) {
            return Err(format!("clip range needs 0 < min < max, got [{min}, {max}]"));
        }
    }
    Ok(())
}

fn parse_cell(kind: PerturbationKind, cell: &toml::Table) -> std::result::Result<ParamSet, String> {
    let fields = schema(kind);
    if let Some(unknown) = cell.keys().find(|k| !fields.iter().any(|f| f.name == k.as_str())) {
        return Err(format!("unknown field `{unknown}`"));
    }
    let mut out = BTreeMap::new();
    for field in &fields {
        let value = cell
            .get(field.name)
            .ok_or_else(|| format!("missing field `{}`", field.name))?;
        let v = match (field.ty, value) {
            (FieldType::Real { .. }, toml::Value::Float(f)) => *f,
            (_, toml::Value::Integer(i)) => *i as f64,
            _ => return Err(format!("field `{}` has the wrong type", field.name)),
        };
        check_value(field, v)?;
        out.insert(field.name, v);
    }
    let set = ParamSet(out);
    check_cell(kind, &set)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_is_total() {
        let t = SeverityTable::builtin();
        assert_eq!(t.cells.len(), 25 * 3);
        assert_eq!(t.rotation_sigma_deg(Level::Medium), 3.0);
        assert_eq!(t.translation_sigma_m(Level::Low), 0.0125);
        assert_eq!(
            t.depth(DepthKind::RangeClipping, Level::Medium),
            DepthParams::RangeClipping { min: 0.42, max: 10.0 }
        );
        assert_eq!(
            t.depth(DepthKind::RandomMissing, Level::Medium),
            DepthParams::RandomMissing { rate: 0.1 }
        );
        let delays: Vec<_> = Level::ALL.iter().map(|&l| t.misalignment_delay(l)).collect();
        assert_eq!(delays, [5, 10, 20]);
        let speed: Vec<_> = Level::ALL.iter().map(|&l| t.faster_motion_interval(l)).collect();
        assert_eq!(speed, [2, 4, 8]);
        assert_eq!(t.extrinsic_sigma_m(Level::Low), 0.001);
        assert_eq!(t.extrinsic_sigma_m(Level::High), 0.01);
    }

    #[test]
    fn toml_round_trip() {
        let t = SeverityTable::builtin();
        let text = t.to_toml_string();
        assert_eq!(SeverityTable::from_toml_str(&text).unwrap(), t);
    }

    #[test]
    fn missing_cell_is_listed() {
        let text = SeverityTable::builtin()
            .to_toml_string()
            .replace("[fog.high]\nalpha = 0.7\n", "");
        let err = SeverityTable::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("fog.high"), "{err}");
    }

    #[test]
    fn unknown_field_and_kind_rejected() {
        let base = SeverityTable::builtin().to_toml_string();
        let err = SeverityTable::from_toml_str(&base.replace("[fog.low]\n", "[fog.low]\ncolor = 1\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("fog.low") && err.contains("color"), "{err}");
        let err = SeverityTable::from_toml_str(&format!("{base}\n[haze.low]\nalpha = 1.0\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("haze"), "{err}");
        let err = SeverityTable::from_toml_str("[fog.low]\nalpha = 0.1\n").unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
    }

    #[test]
    fn with_param_validates() {
        let t = SeverityTable::builtin();
        let fog = PerturbationKind::Rgb(RgbKind::Fog);
        assert!(t.with_param(fog, Level::Low, "alpha", 0.0).is_ok());
        assert!(t.with_param(fog, Level::Low, "alpha", 1.5).is_err());
        assert!(t.with_param(fog, Level::Low, "beta", 0.5).is_err());
        let clip = PerturbationKind::Depth(DepthKind::RangeClipping);
        assert!(t.with_param(clip, Level::Low, "min", 50.0).is_err());
    }
}
