//! Command-line surface. Each subcommand is a thin wrapper over one library
//! operation; results go to `out` as JSON lines or CSV, prose to `err`.
//!
//! Exit codes: 0 success, 1 domain failure (invalid, incoherent, nothing
//! found), 2 usage or I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::coherence::{chi, chi_path};
use crate::embedding::find_embeddings;
use crate::fmi::{f_decompose, recompose, FmiError};
use crate::recursion::{reify, RecursionError};
use crate::runtime::SnapshotStore;
use crate::sim::presets::{phase_table, preset, PRESET_NAMES};
use crate::sim::{run as run_scenario, ScenarioConfig, ScenarioError};
use crate::space::{validate, ConceptSpace, FitnessField};
use crate::transform::{TransformError, Transformation};

/// Environment variable naming the fixture directory for `selftest`.
pub const FIXTURES_ENV: &str = "RCP_FIXTURES";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cograph", version, about = "Concept-graph coherence toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a space file against every structural invariant.
    Validate { space: PathBuf },
    /// List embeddings of one space into another, one JSON object per line.
    Embed {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Coherence verdict of each transformation, or of their sequence with --path.
    Check {
        space: PathBuf,
        #[arg(required = true)]
        transforms: Vec<PathBuf>,
        #[arg(long)]
        path: bool,
    },
    /// Run a scenario file or a named preset.
    Simulate {
        scenario: Option<PathBuf>,
        #[arg(long, conflicts_with = "scenario")]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Factor a coherent transformation into single remaps.
    Decompose { space: PathBuf, transform: PathBuf },
    /// Rebuild an instance from its move log and print the reified space.
    Replay {
        log: PathBuf,
        /// Keep the state snapshots in this directory.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Run the built-in checks over the fixture corpus named by RCP_FIXTURES
    /// (default: the fixtures shipped with the source).
    Selftest,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Domain(String),
    Usage(String),
}

type Outcome = Result<i32, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_space(path: &Path) -> Result<(ConceptSpace, Option<FitnessField>), Failure> {
    ConceptSpace::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_transform(path: &Path) -> Result<Transformation, Failure> {
    Transformation::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn json_line(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(usage)
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "{msg}");
            EXIT_DOMAIN
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate { space } => cmd_validate(&space, out),
        Command::Embed { source, target, limit } => cmd_embed(&source, &target, limit, out),
        Command::Check { space, transforms, path } => cmd_check(&space, &transforms, path, out),
        Command::Simulate { scenario, preset, out: dir, seed, format } => {
            cmd_simulate(scenario.as_deref(), preset.as_deref(), dir.as_deref(), seed, format, out, err)
        }
        Command::Decompose { space, transform } => cmd_decompose(&space, &transform, out, err),
        Command::Replay { log, store } => cmd_replay(&log, store.as_deref(), out),
        Command::Selftest => cmd_selftest(out),
    }
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let (space, fitness) = load_space(path)?;
    let mut problems = validate(&space);
    if let Some(f) = &fitness {
        problems.extend(f.validate_against(&space));
    }
    if problems.is_empty() {
        json_line(out, "OK")?;
        return Ok(EXIT_OK);
    }
    for p in &problems {
        json_line(out, &serde_json::to_string(p).expect("violations serialize"))?;
    }
    Ok(EXIT_DOMAIN)
}

fn cmd_embed(source: &Path, target: &Path, limit: Option<usize>, out: &mut dyn Write) -> Outcome {
    let (s, _) = load_space(source)?;
    let (t, _) = load_space(target)?;
    let found = find_embeddings(&s, &t, limit);
    for g in &found {
        json_line(out, &g.to_json())?;
    }
    Ok(if found.is_empty() { EXIT_DOMAIN } else { EXIT_OK })
}

fn transform_failure(out: &mut dyn Write, e: TransformError) -> Outcome {
    let code = match &e {
        TransformError::DomainMismatch { .. } => "DOMAIN_MISMATCH",
        TransformError::SpaceMismatch { .. } => "SPACE_MISMATCH",
        TransformError::TargetMissing(..) => "TARGET_MISSING",
        TransformError::NotInjective(_) => "NON_INJECTIVE",
        TransformError::Parse(_) => return Err(usage(e)),
    };
    let line = serde_json::json!({ "error": code, "detail": e.to_string() });
    json_line(out, &line.to_string())?;
    Ok(EXIT_DOMAIN)
}

fn cmd_check(space: &Path, transforms: &[PathBuf], as_path: bool, out: &mut dyn Write) -> Outcome {
    let (space, _) = load_space(space)?;
    let ts = transforms.iter().map(|p| load_transform(p)).collect::<Result<Vec<_>, _>>()?;
    let verdicts = if as_path {
        match chi_path(&ts, &space) {
            Ok(v) => vec![v],
            Err(e) => return transform_failure(out, e),
        }
    } else {
        let mut vs = Vec::new();
        for t in &ts {
            match chi(t, &space) {
                Ok(v) => vs.push(v),
                Err(e) => return transform_failure(out, e),
            }
        }
        vs
    };
    for v in &verdicts {
        json_line(out, &v.to_json())?;
    }
    Ok(if verdicts.iter().all(|v| v.coherent) { EXIT_OK } else { EXIT_DOMAIN })
}

fn cmd_simulate(
    scenario: Option<&Path>,
    preset_name: Option<&str>,
    dir: Option<&Path>,
    seed: Option<u64>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    if preset_name == Some("phase_table") {
        for row in phase_table(seed.unwrap_or(crate::sim::presets::SHIPPED_SEEDS[0])).map_err(|e| Failure::Domain(e.to_string()))? {
            json_line(out, &serde_json::to_string(&row).expect("rows serialize"))?;
        }
        return Ok(EXIT_OK);
    }
    let mut cfg = match (scenario, preset_name) {
        (Some(path), _) => ScenarioConfig::from_json(&read(path)?).map_err(usage)?,
        (None, Some(name)) => preset(name, 0).ok_or_else(|| {
            usage(format!("unknown preset {name}; known: phase_table, {}", PRESET_NAMES.join(", ")))
        })?,
        (None, None) => return Err(usage("a scenario file or --preset is required")),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    } else if scenario.is_none() {
        cfg.seed = crate::sim::presets::SHIPPED_SEEDS[0];
    }
    let series = match run_scenario(&cfg) {
        Ok(s) => s,
        Err(e @ ScenarioError::InvalidConfig(_)) => return Err(usage(e)),
        Err(e) => return Err(Failure::Domain(e.to_string())),
    };
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(usage)?;
            let stem = cfg.name.clone().unwrap_or_else(|| "metrics".into());
            let data = dir.join(format!("{stem}.csv"));
            let sidecar = dir.join(format!("{stem}.json"));
            fs::write(&data, series.to_csv()).map_err(usage)?;
            fs::write(&sidecar, series.sidecar(&cfg)).map_err(usage)?;
            let _ = writeln!(err, "wrote {} and {}", data.display(), sidecar.display());
        }
        None => {
            let body = match format {
                Format::Csv => series.to_csv(),
                Format::Json => series.to_json() + "\n",
            };
            out.write_all(body.as_bytes()).map_err(usage)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_decompose(space: &Path, transform: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (space, _) = load_space(space)?;
    let t = load_transform(transform)?;
    let moves = match f_decompose(&t, &space) {
        Ok(m) => m,
        Err(FmiError::Transform(e)) => return transform_failure(out, e),
        Err(e) => return Err(Failure::Domain(e.to_string())),
    };
    for m in &moves {
        json_line(out, &serde_json::to_string(m).expect("moves serialize"))?;
    }
    let back = recompose(&moves, &space).map_err(|e| Failure::Domain(e.to_string()))?;
    if back != t {
        return Err(Failure::Domain("recompose: MISMATCH".into()));
    }
    let _ = writeln!(err, "recompose: EXACT");
    Ok(EXIT_OK)
}

fn cmd_replay(log: &Path, store_dir: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let text = read(log)?;
    let store = match store_dir {
        Some(d) => SnapshotStore::at_dir(d).map_err(usage)?,
        None => SnapshotStore::in_memory(),
    };
    match reify(&text, &store) {
        Ok(r) => {
            json_line(out, &r.to_json())?;
            Ok(EXIT_OK)
        }
        Err(RecursionError::Runtime(e)) => Err(usage(e)),
        Err(e) => Err(Failure::Domain(e.to_string())),
    }
}

fn cmd_selftest(out: &mut dyn Write) -> Outcome {
    let root = std::env::var_os(FIXTURES_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    if !root.is_dir() {
        return Err(usage(format!("{} is not a directory", root.display())));
    }
    let mut all = true;
    for (name, pass) in crate::fixtures::run_checks(&root).map_err(usage)? {
        all &= pass;
        let line = serde_json::json!({ "check": name, "pass": pass });
        json_line(out, &line.to_string())?;
    }
    Ok(if all { EXIT_OK } else { EXIT_DOMAIN })
}
