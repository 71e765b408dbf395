use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use starris_cli::commands::{self, Failure};
use starris_cli::presets;
use starris_cli::scenario::ScenarioDocument;

/// Output directory applied to relative CSV paths.
const OUT_DIR_ENV: &str = "STARRIS_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "starris",
    version,
    about = "Dual-sided reconfigurable surface studies: coverage maps, gain cuts and outage sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML)
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Bundled scenario by name (see `validate --preset help` for the list)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output CSV path; the JSON sidecar lands next to it
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed, overriding the scenario's run.seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores; results do not depend on this)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Channel-gain map over both observation half-planes
    Coverage(RunArgs),
    /// Near-field vs far-field gain along a symmetric cut line
    GainProfile(RunArgs),
    /// Outage sweep: Monte Carlo, high-SNR asymptote and numeric reference
    Outage(RunArgs),
    /// Schema and physics lint of a scenario (exit 0 clean, 1 warnings, 2 errors)
    Validate(ScenarioArgs),
    /// Print the aperture's near/far field boundary in meters
    Boundary(ScenarioArgs),
}

fn load_document(args: &ScenarioArgs) -> Result<(ScenarioDocument, Option<String>), Failure> {
    let text = match (&args.scenario, &args.preset) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Schema(format!("read {}: {e}", path.display())))?,
        (None, Some(name)) => presets::lookup(name)
            .ok_or_else(|| {
                Failure::Schema(format!(
                    "unknown preset {name:?}; bundled presets: {}",
                    presets::names().join(", ")
                ))
            })?
            .to_string(),
        _ => {
            return Err(Failure::Schema(
                "pass exactly one of --scenario PATH or --preset NAME".into(),
            ))
        }
    };
    let doc = ScenarioDocument::parse(&text).map_err(Failure::Schema)?;
    Ok((doc, args.preset.clone()))
}

/// Relative output paths (including the per-command defaults) resolve
/// under the directory named by STARRIS_OUT_DIR when it is set.
fn resolve_out(requested: &Option<PathBuf>, default_name: &str) -> PathBuf {
    let base = requested
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name));
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if base.is_relative() => PathBuf::from(dir).join(base),
        _ => base,
    }
}

fn apply_workers(workers: Option<usize>) -> Result<(), Failure> {
    let Some(n) = workers else { return Ok(()) };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Computation(format!("worker pool: {e}")))
}

fn run_compute(
    args: &RunArgs,
    default_name: &str,
    command: fn(&ScenarioDocument, Option<&str>, &std::path::Path, u64) -> Result<(), Failure>,
) -> Result<(), Failure> {
    apply_workers(args.workers)?;
    let (doc, preset) = load_document(&args.scenario)?;
    let seed = args.seed.unwrap_or(doc.run.seed);
    let out = resolve_out(&args.out, default_name);
    command(&doc, preset.as_deref(), &out, seed)
}

fn exit_of(result: Result<(), Failure>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code() as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Coverage(args) => exit_of(run_compute(args, "coverage.csv", commands::cmd_coverage)),
        Command::GainProfile(args) => {
            exit_of(run_compute(args, "gain_profile.csv", commands::cmd_gain_profile))
        }
        Command::Outage(args) => exit_of(run_compute(args, "outage.csv", commands::cmd_outage)),
        Command::Validate(args) => match load_document(args) {
            Ok((doc, _)) => commands::cmd_validate(&doc) as u8,
            Err(f) => {
                // unparseable scenarios surface through the same lint format
                println!("SCHEMA error: {}", f.message());
                f.exit_code() as u8
            }
        },
        Command::Boundary(args) => {
            exit_of(load_document(args).and_then(|(doc, _)| commands::cmd_boundary(&doc)))
        }
    };
    ExitCode::from(code)
}
