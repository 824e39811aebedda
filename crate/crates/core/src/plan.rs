//! Benchmark composition: the 1,000-entry enumeration of perturbed sequence
//! recipes over eight scenes, with per-entry seeds derived from the recipe.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::perturbation::{DepthKind, Level, Mode, PerturbationKind, PerturbationSpec, RgbKind, TrajectoryKind};

/// Scenes per benchmark.
pub const SCENE_COUNT: usize = 8;
/// Entries per scene: 1 + 96 + 4 + 3 + 15 + 6.
pub const ENTRIES_PER_SCENE: usize = 125;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Clean,
    ImagePerturb,
    DepthPerturb,
    FasterMotion,
    TrajectoryDeviation,
    Misalignment,
    /// Stereo-baseline noise; available for single runs, not part of the plan.
    Extrinsic,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Self::Clean,
        Self::ImagePerturb,
        Self::DepthPerturb,
        Self::FasterMotion,
        Self::TrajectoryDeviation,
        Self::Misalignment,
        Self::Extrinsic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Clean => "clean",
            Self::ImagePerturb => "image",
            Self::DepthPerturb => "depth",
            Self::FasterMotion => "faster_motion",
            Self::TrajectoryDeviation => "trajectory",
            Self::Misalignment => "misalignment",
            Self::Extrinsic => "extrinsic",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown category `{s}`")))
    }
}

/// What to do to a clean source sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Recipe {
    Clean,
    Rgb { kind: RgbKind, level: Level, mode: Mode },
    Depth { kind: DepthKind, level: Level, mode: Mode },
    FasterMotion { level: Level },
    /// Rotation and/or translation deviation; at least one is set.
    Trajectory { rotation: Option<Level>, translation: Option<Level> },
    Misalignment { level: Level, mode: Mode },
    Extrinsic { level: Level },
}

impl Recipe {
    pub fn category(&self) -> Category {
        match self {
            Self::Clean => Category::Clean,
            Self::Rgb { .. } => Category::ImagePerturb,
            Self::Depth { .. } => Category::DepthPerturb,
            Self::FasterMotion { .. } => Category::FasterMotion,
            Self::Trajectory { .. } => Category::TrajectoryDeviation,
            Self::Misalignment { .. } => Category::Misalignment,
            Self::Extrinsic { .. } => Category::Extrinsic,
        }
    }

    /// Name of the perturbation kind, or the category for composite recipes.
    pub fn kind_label(&self) -> String {
        match self {
            Self::Clean => "clean".into(),
            Self::Rgb { kind, .. } => kind.to_string(),
            Self::Depth { kind, .. } => kind.to_string(),
            Self::FasterMotion { .. } => TrajectoryKind::FasterMotion.to_string(),
            Self::Trajectory {
                rotation: Some(_),
                translation: Some(_),
            } => "combined_deviation".into(),
            Self::Trajectory { rotation: Some(_), .. } => TrajectoryKind::RotationDeviation.to_string(),
            Self::Trajectory { .. } => TrajectoryKind::TranslationDeviation.to_string(),
            Self::Misalignment { .. } => PerturbationKind::Misalignment.to_string(),
            Self::Extrinsic { .. } => PerturbationKind::ExtrinsicBaseline.to_string(),
        }
    }

    /// Recipe for a single perturbation spec (the spec's seed is not part of
    /// the recipe).
    pub fn from_spec(spec: &PerturbationSpec) -> Self {
        let (level, mode) = (spec.level, spec.mode);
        match spec.kind {
            PerturbationKind::Rgb(kind) => Self::Rgb { kind, level, mode },
            PerturbationKind::Depth(kind) => Self::Depth { kind, level, mode },
            PerturbationKind::Trajectory(TrajectoryKind::FasterMotion) => Self::FasterMotion { level },
            PerturbationKind::Trajectory(TrajectoryKind::RotationDeviation) => Self::Trajectory {
                rotation: Some(level),
                translation: None,
            },
            PerturbationKind::Trajectory(TrajectoryKind::TranslationDeviation) => Self::Trajectory {
                rotation: None,
                translation: Some(level),
            },
            PerturbationKind::Misalignment => Self::Misalignment { level, mode },
            PerturbationKind::ExtrinsicBaseline => Self::Extrinsic { level },
        }
    }
}

fn opt_level(l: &Option<Level>) -> &'static str {
    l.map_or("none", Level::name)
}

/// Canonical text form, also the input of seed derivation:
/// `clean`, `rgb/<kind>/<level>/<mode>`, `depth/<kind>/<level>/<mode>`,
/// `faster_motion/<level>`, `trajectory/rot=<level|none>/trans=<level|none>`,
/// `misalignment/<level>/<mode>`, `extrinsic/<level>`.
impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Clean => f.write_str("clean"),
            Self::Rgb { kind, level, mode } => write!(f, "rgb/{kind}/{level}/{mode}"),
            Self::Depth { kind, level, mode } => write!(f, "depth/{kind}/{level}/{mode}"),
            Self::FasterMotion { level } => write!(f, "faster_motion/{level}"),
            Self::Trajectory { rotation, translation } => {
                write!(f, "trajectory/rot={}/trans={}", opt_level(rotation), opt_level(translation))
            }
            Self::Misalignment { level, mode } => write!(f, "misalignment/{level}/{mode}"),
            Self::Extrinsic { level } => write!(f, "extrinsic/{level}"),
        }
    }
}

impl FromStr for Recipe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed recipe `{s}`"));
        let parts: Vec<&str> = s.split('/').collect();
        let opt = |part: &str, key: &str| -> Result<Option<Level>> {
            match part.strip_prefix(key).ok_or_else(bad)? {
                "none" => Ok(None),
                l => l.parse().map(Some),
            }
        };
        let recipe = match parts.as_slice() {
            ["clean"] => Self::Clean,
            ["rgb", k, l, m] => Self::Rgb {
                kind: k.parse()?,
                level: l.parse()?,
                mode: m.parse()?,
            },
            ["depth", k, l, m] => Self::Depth {
                kind: k.parse()?,
                level: l.parse()?,
                mode: m.parse()?,
            },
            ["faster_motion", l] => Self::FasterMotion { level: l.parse()? },
            ["trajectory", r, t] => {
                let (rotation, translation) = (opt(r, "rot=")?, opt(t, "trans=")?);
                if rotation.is_none() && translation.is_none() {
                    return Err(bad());
                }
                Self::Trajectory { rotation, translation }
            }
            ["misalignment", l, m] => Self::Misalignment {
                level: l.parse()?,
                mode: m.parse()?,
            },
            ["extrinsic", l] => Self::Extrinsic { level: l.parse()? },
            _ => return Err(bad()),
        };
        Ok(recipe)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSpec {
    pub id: String,
    pub scene: String,
    pub recipe: Recipe,
    pub seed: u64,
}

impl SequenceSpec {
    pub fn new(scene: &str, recipe: Recipe, seed: u64) -> Self {
        Self {
            id: entry_id(scene, &recipe),
            scene: scene.to_string(),
            recipe,
            seed,
        }
    }

    pub fn category(&self) -> Category {
        self.recipe.category()
    }
}

/// `<scene>/<recipe with '/' and '=' turned into '-'>`; also the entry's
/// output directory relative to the output root.
pub fn entry_id(scene: &str, recipe: &Recipe) -> String {
    let slug: String = recipe
        .to_string()
        .chars()
        .map(|c| if c == '/' || c == '=' { '-' } else { c })
        .collect();
    format!("{scene}/{slug}")
}

/// First 8 bytes (big endian) of `sha256("<master>|<scene>|<recipe>")`.
pub fn derive_seed(master_seed: u64, scene: &str, recipe: &Recipe) -> u64 {
    let digest = Sha256::digest(format!("{master_seed}|{scene}|{recipe}").as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchmarkPlan {
    pub master_seed: u64,
    pub scenes: Vec<String>,
    pub entries: Vec<SequenceSpec>,
}

impl BenchmarkPlan {
    /// A one-entry plan with an explicit seed.
    pub fn single(scene: &str, recipe: Recipe, seed: u64) -> Result<Self> {
        check_scene(scene)?;
        Ok(Self {
            master_seed: seed,
            scenes: vec![scene.to_string()],
            entries: vec![SequenceSpec::new(scene, recipe, seed)],
        })
    }

    pub fn category_counts(&self) -> BTreeMap<Category, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.category()).or_insert(0) += 1;
        }
        counts
    }
}

/// Scene ids become directory names.
pub fn check_scene(scene: &str) -> Result<()> {
    let ok = !scene.is_empty()
        && scene != "."
        && scene != ".."
        && scene.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c));
    if ok {
        Ok(())
    } else {
        Err(Error::PlanShape(format!(
            "scene id `{scene}` must be non-empty ASCII letters, digits, `_`, `-` or `.`"
        )))
    }
}

/// The 125 recipes of one scene, in plan order.
pub fn scene_recipes() -> Vec<Recipe> {
    let mut out = vec![Recipe::Clean];
    for &kind in RgbKind::ALL {
        for &mode in Mode::ALL {
            for &level in Level::ALL {
                out.push(Recipe::Rgb { kind, level, mode });
            }
        }
    }
    for &kind in DepthKind::ALL {
        out.push(Recipe::Depth {
            kind,
            level: Level::Medium,
            mode: Mode::Static,
        });
    }
    for &level in Level::ALL {
        out.push(Recipe::FasterMotion { level });
    }
    for &level in Level::ALL {
        out.push(Recipe::Trajectory {
            rotation: Some(level),
            translation: None,
        });
    }
    for &level in Level::ALL {
        out.push(Recipe::Trajectory {
            rotation: None,
            translation: Some(level),
        });
    }
    for &rot in Level::ALL {
        for &trans in Level::ALL {
            out.push(Recipe::Trajectory {
                rotation: Some(rot),
                translation: Some(trans),
            });
        }
    }
    for &mode in Mode::ALL {
        for &level in Level::ALL {
            out.push(Recipe::Misalignment { level, mode });
        }
    }
    out
}

/// Full benchmark over exactly eight distinct scenes.
pub fn build_plan<S: AsRef<str>>(scenes: &[S], master_seed: u64) -> Result<BenchmarkPlan> {
    if scenes.len() != SCENE_COUNT {
        return Err(Error::PlanShape(format!(
            "expected {SCENE_COUNT} scenes, got {}",
            scenes.len()
        )));
    }
    let scenes: Vec<String> = scenes.iter().map(|s| s.as_ref().to_string()).collect();
    for (i, s) in scenes.iter().enumerate() {
        check_scene(s)?;
        if scenes[..i].contains(s) {
            return Err(Error::PlanShape(format!("scene `{s}` listed twice")));
        }
    }
    let recipes = scene_recipes();
    debug_assert_eq!(recipes.len(), ENTRIES_PER_SCENE);
    let entries = scenes
        .iter()
        .flat_map(|scene| {
            recipes
                .iter()
                .map(move |r| SequenceSpec::new(scene, *r, derive_seed(master_seed, scene, r)))
        })
        .collect();
    Ok(BenchmarkPlan {
        master_seed,
        scenes,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn scenes() -> Vec<String> {
        (0..8).map(|i| format!("scene{i}")).collect()
    }

    #[test]
    fn category_counts_per_benchmark() {
        let plan = build_plan(&scenes(), 1).unwrap();
        assert_eq!(plan.entries.len(), 1000);
        let c = plan.category_counts();
        assert_eq!(c[&Category::Clean], 8);
        assert_eq!(c[&Category::ImagePerturb], 768);
        assert_eq!(c[&Category::DepthPerturb], 32);
        assert_eq!(c[&Category::FasterMotion], 24);
        assert_eq!(c[&Category::TrajectoryDeviation], 120);
        assert_eq!(c[&Category::Misalignment], 48);
        assert!(!c.contains_key(&Category::Extrinsic));
        let per_scene = plan
            .entries
            .iter()
            .filter(|e| e.scene == "scene3" && e.category() == Category::TrajectoryDeviation)
            .count();
        assert_eq!(per_scene, 15);
    }

    #[test]
    fn entries_and_seeds_are_unique() {
        let plan = build_plan(&scenes(), 99).unwrap();
        let ids: HashSet<_> = plan.entries.iter().map(|e| e.id.clone()).collect();
        let seeds: HashSet<_> = plan.entries.iter().map(|e| e.seed).collect();
        assert_eq!(ids.len(), 1000);
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn plans_are_deterministic_in_the_master_seed() {
        let a = build_plan(&scenes(), 5).unwrap();
        assert_eq!(a, build_plan(&scenes(), 5).unwrap());
        let b = build_plan(&scenes(), 6).unwrap();
        assert!(a.entries.iter().zip(&b.entries).all(|(x, y)| x.seed != y.seed));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(build_plan(&scenes()[..7], 0), Err(Error::PlanShape(_))));
        let mut dup = scenes();
        dup[7] = dup[0].clone();
        assert!(matches!(build_plan(&dup, 0), Err(Error::PlanShape(_))));
        let mut bad = scenes();
        bad[0] = "../x".into();
        assert!(matches!(build_plan(&bad, 0), Err(Error::PlanShape(_))));
    }

    #[test]
    fn recipe_text_round_trips() {
        let mut all = scene_recipes();
        all.push(Recipe::Extrinsic { level: Level::High });
        for r in all {
            assert_eq!(r.to_string().parse::<Recipe>().unwrap(), r);
        }
        assert!("trajectory/rot=none/trans=none".parse::<Recipe>().is_err());
        assert!("rgb/fog/low".parse::<Recipe>().is_err());
    }

    #[test]
    fn spec_recipes() {
        let spec: PerturbationSpec = "rotation_deviation:high:static:3".parse().unwrap();
        assert_eq!(
            Recipe::from_spec(&spec),
            Recipe::Trajectory {
                rotation: Some(Level::High),
                translation: None
            }
        );
        assert_eq!(
            entry_id("office", &Recipe::from_spec(&spec)),
            "office/trajectory-rot-high-trans-none"
        );
    }
}
