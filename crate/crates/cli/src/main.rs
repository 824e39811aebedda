use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use perturb_forge::execute::{execute_plan, ExecuteOptions};
use perturb_forge::io::{read_plan, read_trajectory, write_plan, MANIFEST_FILE};
use perturb_forge::metrics::{compute_ate, compute_sr, Alignment, FAILURE_ATE};
use perturb_forge::plan::{build_plan, check_scene, derive_seed, BenchmarkPlan, Category, Recipe, SequenceSpec};
use perturb_forge::{Error, PerturbationSpec, SeverityTable};
use serde_json::{json, Value};

mod report;

const SEVERITY_ENV: &str = "PERTURB_FORGE_SEVERITY_TABLE";

#[derive(Parser)]
#[command(name = "perturb-forge", version, about = "Perturb RGB-D sequences and score SLAM trajectories")]
struct Cli {
    /// Seed override (decimal or 0x-prefixed hex)
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Write the benchmark plan for eight scenes
    Plan {
        #[arg(long, value_delimiter = ',', required = true)]
        scenes: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Materialize a plan, or one spec, from clean sequences
    Perturb {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        plan: Option<PathBuf>,
        /// kind:level:mode:seed
        #[arg(long)]
        spec: Option<String>,
        /// One sequence (with --spec) or a directory of per-scene sequences
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Score an estimated trajectory against ground truth
    Evaluate {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value = "none")]
        align: Alignment,
        #[arg(long, value_delimiter = ',', default_value = "ate,sr")]
        metrics: Vec<Metric>,
    },
    /// Aggregate per-entry results of a produced benchmark
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        results: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1,0.2,0.5")]
        csr_thresholds: Vec<f64>,
        #[arg(long, default_value = "none")]
        align: Alignment,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Ate,
    Sr,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    match s.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| format!("`{s}` is not a 64-bit seed: {e}"))
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Partial(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Partial(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Partial(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

/// Collects `key value` lines for text output and a JSON object for
/// structured output.
struct Output {
    format: Format,
    fields: serde_json::Map<String, Value>,
    lines: Vec<String>,
}

impl Output {
    fn new(format: Format, seed: u64) -> Self {
        let mut out = Self {
            format,
            fields: serde_json::Map::new(),
            lines: Vec::new(),
        };
        out.field("seed", json!(seed), seed.to_string());
        out
    }

    fn field(&mut self, key: &str, value: Value, text: String) {
        self.lines.push(format!("{key} {text}"));
        self.fields.insert(key.to_string(), value);
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.field(key, json!(value), format!("{value:.6}"));
    }

    fn line(&mut self, text: String) {
        self.lines.push(text);
    }

    fn print(self) {
        match self.format {
            Format::Text => {
                for l in self.lines {
                    println!("{l}");
                }
            }
            Format::Structured => {
                let text = serde_json::to_string_pretty(&Value::Object(self.fields)).expect("JSON values serialize");
                println!("{text}");
            }
        }
    }
}

fn severity_table() -> Result<SeverityTable, Failure> {
    match std::env::var_os(SEVERITY_ENV) {
        Some(path) => Ok(SeverityTable::load(Path::new(&path))?),
        None => Ok(SeverityTable::builtin()),
    }
}

fn cmd_plan(seed: u64, scenes: &[String], out: &Path, output: &mut Output) -> Result<(), Failure> {
    let plan = build_plan(scenes, seed)?;
    write_plan(out, &plan)?;
    output.field("plan", json!(out), out.display().to_string());
    output.field("entries", json!(plan.entries.len()), plan.entries.len().to_string());
    let counts = plan.category_counts();
    let mut map = serde_json::Map::new();
    for c in Category::ALL {
        if let Some(n) = counts.get(&c) {
            map.insert(c.to_string(), json!(n));
            output.line(format!("count.{c} {n}"));
        }
    }
    output.fields.insert("counts".into(), Value::Object(map));
    Ok(())
}

/// Re-derives every entry seed from a new master seed.
fn reseed(plan: BenchmarkPlan, master: u64) -> BenchmarkPlan {
    let entries = plan
        .entries
        .into_iter()
        .map(|e| SequenceSpec {
            seed: derive_seed(master, &e.scene, &e.recipe),
            ..e
        })
        .collect();
    BenchmarkPlan {
        master_seed: master,
        entries,
        ..plan
    }
}

fn scene_name(src: &Path) -> String {
    let name = src
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_default();
    if check_scene(&name).is_ok() {
        name
    } else {
        "source".into()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_perturb(
    seed: Option<u64>,
    plan: Option<&Path>,
    spec: Option<&str>,
    src: &Path,
    out: &Path,
    jobs: usize,
    output: &mut Output,
) -> Result<u64, Failure> {
    if !src.is_dir() {
        return Err(Failure::Usage(format!("--src {} is not a directory", src.display())));
    }
    let table = severity_table()?;
    let (plan, sources) = match (plan, spec) {
        (Some(path), _) => {
            let plan = read_plan(path)?;
            let plan = match seed {
                Some(s) => reseed(plan, s),
                None => plan,
            };
            let sources: BTreeMap<String, PathBuf> = plan.scenes.iter().map(|s| (s.clone(), src.join(s))).collect();
            (plan, sources)
        }
        (None, Some(text)) => {
            let mut spec: PerturbationSpec = text.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let scene = scene_name(src);
            let plan = BenchmarkPlan::single(&scene, Recipe::from_spec(&spec), spec.seed)?;
            (plan, BTreeMap::from([(scene, src.to_path_buf())]))
        }
        (None, None) => return Err(Failure::Usage("one of --plan or --spec is required".into())),
    };
    let manifest = execute_plan(&plan, &sources, out, &ExecuteOptions { jobs, table })?;
    let effective = plan.master_seed;
    output.fields.insert("seed".into(), json!(effective));
    output.lines[0] = format!("seed {effective}");
    let path = out.join(MANIFEST_FILE);
    output.field("manifest", json!(path), path.display().to_string());
    output.field("entries", json!(manifest.entries.len()), manifest.entries.len().to_string());
    output.field("failed", json!(manifest.failures()), manifest.failures().to_string());
    for e in manifest.entries.iter().filter(|e| !e.is_ok()) {
        if let perturb_forge::io::EntryStatus::Failed(msg) = &e.status {
            output.line(format!("failure {} {msg}", e.spec.id));
        }
    }
    if manifest.failures() > 0 {
        return Err(Failure::Partial(format!(
            "{} of {} entries failed",
            manifest.failures(),
            manifest.entries.len()
        )));
    }
    Ok(effective)
}

fn cmd_evaluate(est: &Path, gt: &Path, align: Alignment, metrics: &[Metric], output: &mut Output) -> Result<(), Failure> {
    let est = read_trajectory(est)?;
    let gt = read_trajectory(gt)?;
    output.field("alignment", json!(align.name()), align.name().to_string());
    let failed = est.is_empty();
    if metrics.contains(&Metric::Ate) {
        if failed {
            output.metric("ate", FAILURE_ATE);
        } else {
            let report = compute_ate(&est, &gt, align).map_err(|e| match e {
                Error::NoAssociations => Failure::Data(format!(
                    "{e}: no estimated timestamp lies within 0.02 s of a ground-truth timestamp"
                )),
                e => e.into(),
            })?;
            output.field("pairs", json!(report.pairs.len()), report.pairs.len().to_string());
            output.metric("ate", report.ate);
        }
    }
    if metrics.contains(&Metric::Sr) {
        output.metric("sr", compute_sr(&est, &gt)?.sr);
    }
    output.field("failed", json!(failed), failed.to_string());
    Ok(())
}

fn run(cli: Cli, output: &mut Output) -> Result<(), Failure> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Plan { scenes, out } => cmd_plan(seed, &scenes, &out, output),
        Command::Perturb { plan, spec, src, out, jobs } => {
            cmd_perturb(cli.seed, plan.as_deref(), spec.as_deref(), &src, &out, jobs, output).map(|_| ())
        }
        Command::Evaluate { est, gt, align, metrics } => cmd_evaluate(&est, &gt, align, &metrics, output),
        Command::Report {
            manifest,
            results,
            csr_thresholds,
            align,
        } => report::cmd_report(&manifest, &results, &csr_thresholds, align, output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let mut output = Output::new(cli.format, cli.seed.unwrap_or(0));
    let result = run(cli, &mut output);
    if let Err(Failure::Usage(msg)) = &result {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    output.print();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
