//! Command-line front end.
//!
//! Subcommands: `ber` (Monte Carlo sweep), `aber` (semi-analytic bound),
//! `capacity` (ergodic capacity), `complexity` (exact RM counts) and `sweep`
//! (several BER runs from one file). Flags override config-file values.
//! Exits 0 on success, 1 on runtime failures, 2 on usage errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    aber_union_bound, complexity_rm, complexity_table, ergodic_capacity, ComplexityParams,
    ComplexityReport, ComplexitySystem,
};
use crate::detection::Detector;
use crate::harness::output;
use crate::harness::{run_sweep, with_worker_pool, RunManifest, SimConfig};

#[derive(Parser)]
#[command(
    name = "ris-rsm",
    version,
    about = "Link-level simulation and analysis for RIS-assisted receive spatial modulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep over the config's SNR grid
    Ber(BerArgs),
    /// Semi-analytic average BER bound over the config's SNR grid
    Aber(AnalysisArgs),
    /// Ergodic capacity over the config's SNR grid
    Capacity(AnalysisArgs),
    /// Exact real-multiplication complexity counts
    Complexity(ComplexityArgs),
    /// Several BER sweeps from one file with [[run]] blocks
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Write CSV here (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the JSON run manifest here
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Debug: transmit without noise
    #[arg(long)]
    noiseless: bool,
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel realizations per SNR point
    #[arg(long)]
    realizations: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the JSON run manifests here
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Parameter set, e.g. M=16,nR=8,nS=4,N=32
    #[arg(long, value_parser = parse_params)]
    params: ComplexityParams,
    /// All nine system/detector rows
    #[arg(long, conflicts_with_all = ["system", "detector"])]
    all: bool,
    /// One system: ris-qam-psk | ris-rsm | coas-ris-rsm | acas-ris-rsm | edas-ris-rsm
    #[arg(long, requires = "detector", value_parser = parse_system)]
    system: Option<ComplexitySystem>,
    /// One detector: ml | greedy
    #[arg(long, requires = "system", value_parser = parse_detector)]
    detector: Option<Detector>,
    /// Write the rows as CSV here as well
    #[arg(long)]
    out: Option<PathBuf>,
}

type CliError = Box<dyn std::error::Error>;

/// Parses `argv` and dispatches; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ber(args) => run_ber(args),
        Command::Aber(args) => run_aber(args),
        Command::Capacity(args) => run_capacity(args),
        Command::Complexity(args) => run_complexity(args),
        Command::Sweep(args) => run_multi_sweep(args),
    }
}

fn load_config(common: &CommonArgs) -> Result<SimConfig, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("cannot read {}: {e}", common.config.display()))?;
    let mut cfg: SimConfig = toml::from_str(&text)?;
    apply_overrides(&mut cfg, common);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut SimConfig, common: &CommonArgs) {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = common.workers {
        cfg.workers = workers;
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display()).into()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_ber(args: BerArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common)?;
    if args.noiseless {
        cfg.noiseless = true;
    }
    let manifest = run_sweep(&cfg)?;
    emit(&args.common.out, &output::ber_csv([&manifest]))?;
    write_manifests(&args.manifest, std::slice::from_ref(&manifest))
}

fn run_multi_sweep(args: SweepArgs) -> Result<(), CliError> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct SweepSpec {
        #[serde(default)]
        run: Vec<SimConfig>,
    }
    let text = std::fs::read_to_string(&args.common.config)
        .map_err(|e| format!("cannot read {}: {e}", args.common.config.display()))?;
    let spec: SweepSpec = toml::from_str(&text)?;
    let mut manifests = Vec::new();
    for mut cfg in spec.run {
        apply_overrides(&mut cfg, &args.common);
        cfg.validate()?;
        manifests.push(run_sweep(&cfg)?);
    }
    emit(&args.common.out, &output::ber_csv(&manifests))?;
    write_manifests(&args.manifest, &manifests)
}

fn write_manifests(path: &Option<PathBuf>, manifests: &[RunManifest]) -> Result<(), CliError> {
    if let Some(path) = path {
        std::fs::write(path, output::manifests_json(manifests))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn run_aber(args: AnalysisArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let realizations = args.realizations.unwrap_or(2000);
    let estimates = with_worker_pool(cfg.workers, || {
        cfg.snr_db
            .iter()
            .map(|&snr| aber_union_bound(&cfg, snr, realizations))
            .collect::<Result<Vec<_>, _>>()
    })?;
    emit(&args.common.out, &output::aber_csv(&cfg, &estimates))
}

fn run_capacity(args: AnalysisArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let realizations = args.realizations.unwrap_or(1000);
    let records = with_worker_pool(cfg.workers, || {
        cfg.snr_db
            .iter()
            .map(|&snr| ergodic_capacity(&cfg, snr, realizations))
            .collect::<Result<Vec<_>, _>>()
    })?;
    emit(&args.common.out, &output::capacity_csv(&cfg, &records))
}

fn run_complexity(args: ComplexityArgs) -> Result<(), CliError> {
    let reports: Vec<ComplexityReport> = if args.all {
        complexity_table(&args.params)?
    } else {
        match (args.system, args.detector) {
            (Some(system), Some(detector)) => {
                let rm_count = complexity_rm(system, detector, &args.params)?;
                vec![ComplexityReport {
                    system,
                    detector,
                    params: args.params,
                    rm_count,
                }]
            }
            _ => return Err("pass either --all or both --system and --detector".into()),
        }
    };
    print!("{}", output::complexity_text(&reports));
    if args.out.is_some() {
        emit(&args.out, &output::complexity_csv(&reports))?;
    }
    Ok(())
}

fn parse_params(s: &str) -> Result<ComplexityParams, String> {
    let (mut m, mut n_r, mut n_s, mut n_ris) = (None, None, None, None);
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|e| format!("bad value in '{part}': {e}"))?;
        match key.trim() {
            "M" | "m" => m = Some(value),
            "nR" | "nr" | "n_r" => n_r = Some(value),
            "nS" | "ns" | "n_s" => n_s = Some(value),
            "N" | "n" | "n_ris" => n_ris = Some(value),
            other => return Err(format!("unknown parameter '{other}'")),
        }
    }
    Ok(ComplexityParams {
        m: m.ok_or("missing M")?,
        n_r: n_r.ok_or("missing nR")?,
        n_s: n_s.ok_or("missing nS")?,
        n_ris: n_ris.ok_or("missing N")?,
    })
}

fn parse_system(s: &str) -> Result<ComplexitySystem, String> {
    match s.to_ascii_lowercase().as_str() {
        "ris-qam-psk" | "ris-qam/psk" | "ris-qam" | "ris-psk" => Ok(ComplexitySystem::RisQamPsk),
        "ris-rsm" => Ok(ComplexitySystem::RisRsm),
        "coas-ris-rsm" | "coas" => Ok(ComplexitySystem::CoasRisRsm),
        "acas-ris-rsm" | "acas" => Ok(ComplexitySystem::AcasRisRsm),
        "edas-ris-rsm" | "edas" => Ok(ComplexitySystem::EdasRisRsm),
        other => Err(format!("unknown system '{other}'")),
    }
}

fn parse_detector(s: &str) -> Result<Detector, String> {
    match s.to_ascii_lowercase().as_str() {
        "ml" => Ok(Detector::Ml),
        "greedy" | "gd" => Ok(Detector::Greedy),
        other => Err(format!("unknown detector '{other}'")),
    }
}
