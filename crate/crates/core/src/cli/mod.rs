//! Command-line front end: `run`, `compare` and `validate`.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::election::{
    epoch_length, expected_bs_distance, expected_ch_distance, expected_cluster_count, expected_round_energy,
};
use crate::engine::ConfigIssue;
use crate::metrics::{comparison_configs, comparison_from_results, run_batch, ComparisonReport, RunResult};

pub use config::{BsPreset, ExperimentSpec, ModeSelection, Overrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Invalid(Vec<ConfigIssue>),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 1,
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Parser)]
#[command(
    name = "leach-sim",
    version,
    about = "LEACH / distance-adaptive LEACH WSN simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every (mode, seed) pair and write per-round traces plus a summary.
    Run(ExperimentArgs),
    /// Run classic and adaptive on the same seeds and write a comparison report.
    Compare(ExperimentArgs),
    /// Check a config and print the derived estimator constants.
    Validate(ExperimentArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct ExperimentArgs {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base-station preset: center, corner, edge, far.
    #[arg(long, conflicts_with = "bs")]
    pub bs_preset: Option<String>,
    /// Base-station position as X,Y.
    #[arg(long, allow_hyphen_values = true)]
    pub bs: Option<String>,
    /// Number of seeds; seeds are base-seed, base-seed + 1, ...
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// classic, adaptive or both.
    #[arg(long)]
    pub mode: Option<String>,
    /// Runs executed in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            bs_preset: self.bs_preset.clone(),
            bs: self.bs.clone(),
            seed_count: self.seeds,
            base_seed: self.base_seed,
            mode: self.mode.clone(),
            jobs: self.jobs,
            out: self.out.clone(),
        }
    }
}

/// Read the config file (if any) and merge the command-line overrides.
pub fn load_spec(args: &ExperimentArgs) -> Result<ExperimentSpec, CliError> {
    let raw = match &args.config {
        None => config::RawConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            config::parse_raw(&text).map_err(|message| CliError::Parse {
                path: path.clone(),
                message,
            })?
        }
    };
    config::build_spec(raw, &args.overrides()).map_err(CliError::Invalid)
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::write(&path, bytes).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn trace_file_name(result: &RunResult) -> String {
    format!("trace_{}_seed{}.csv", result.mode, result.seed)
}

/// Every (mode, seed) run of the spec, in mode-major order.
pub fn execute_runs(spec: &ExperimentSpec) -> Vec<RunResult> {
    let configs: Vec<_> = spec
        .modes
        .modes()
        .into_iter()
        .flat_map(|mode| spec.seeds.iter().map(move |&seed| (mode, seed)))
        .map(|(mode, seed)| spec.config_for(mode, seed))
        .collect();
    run_batch(&configs, spec.jobs)
}

/// One trace file per run and a `summary.csv`. Returns the written paths.
pub fn cmd_run(spec: &ExperimentSpec) -> Result<Vec<PathBuf>, CliError> {
    prepare_dir(&spec.out_dir)?;
    let results = execute_runs(spec);
    let mut written = Vec::with_capacity(results.len() + 1);
    for r in &results {
        written.push(write_file(
            spec.out_dir.join(trace_file_name(r)),
            &output::trace_csv(&r.records),
        )?);
    }
    written.push(write_file(
        spec.out_dir.join("summary.csv"),
        &output::summary_csv(&results),
    )?);
    Ok(written)
}

/// Paired classic/adaptive comparison. Ignores the spec's mode selection.
pub fn run_comparison(spec: &ExperimentSpec) -> (ComparisonReport, Vec<RunResult>) {
    let configs = comparison_configs(&spec.base, &spec.seeds, spec.shared_topology);
    let results = run_batch(&configs, spec.jobs);
    let report = comparison_from_results(&spec.base, &spec.seeds, spec.shared_topology, &results);
    (report, results)
}

/// Writes `comparison.csv`, `paired_deltas.csv`, `summary.csv` and `digest.txt`.
pub fn cmd_compare(spec: &ExperimentSpec) -> Result<(ComparisonReport, Vec<PathBuf>), CliError> {
    prepare_dir(&spec.out_dir)?;
    let (report, results) = run_comparison(spec);
    let title = format!("classic vs adaptive, base station {}", spec.bs_preset);
    let written = vec![
        write_file(
            spec.out_dir.join("comparison.csv"),
            &output::comparison_csv(&report),
        )?,
        write_file(
            spec.out_dir.join("paired_deltas.csv"),
            &output::paired_deltas_csv(&report),
        )?,
        write_file(spec.out_dir.join("summary.csv"), &output::summary_csv(&results))?,
        write_file(
            spec.out_dir.join("digest.txt"),
            output::digest(&report, &title).as_bytes(),
        )?,
    ];
    Ok((report, written))
}

/// Constants the adaptive election derives from the config before any run.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantities {
    pub d_th: f64,
    pub epoch_rounds: u64,
    pub k_clusters: f64,
    pub d_to_bs: f64,
    pub d_to_ch: f64,
    pub e_total: f64,
    pub e_round: f64,
    pub r_max: f64,
}

impl DerivedQuantities {
    pub fn of(spec: &ExperimentSpec) -> Self {
        let cfg = &spec.base;
        let k = expected_cluster_count(cfg);
        let e_total = cfg.field.n as f64 * cfg.e0;
        let e_round = expected_round_energy(cfg);
        Self {
            d_th: cfg.radio.distance_threshold(),
            epoch_rounds: epoch_length(cfg.popt),
            k_clusters: k,
            d_to_bs: expected_bs_distance(cfg.field.side),
            d_to_ch: expected_ch_distance(cfg.field.side, k),
            e_total,
            e_round,
            r_max: e_total / e_round,
        }
    }
}

pub fn validation_report(spec: &ExperimentSpec) -> String {
    let d = DerivedQuantities::of(spec);
    let c = &spec.base;
    let mut s = String::new();
    let _ = writeln!(s, "configuration OK");
    let _ = writeln!(s, "  nodes N                 : {}", c.field.n);
    let _ = writeln!(s, "  field side              : {} m", c.field.side);
    let _ = writeln!(s, "  base station            : {}", spec.bs_preset);
    let _ = writeln!(s, "  seeds                   : {}", spec.seeds.len());
    let _ = writeln!(
        s,
        "  distance threshold d_th : {:.4} m{}",
        d.d_th,
        if c.radio.threshold_override.is_some() {
            " (override)"
        } else {
            ""
        }
    );
    let _ = writeln!(s, "  epoch length            : {} rounds", d.epoch_rounds);
    let _ = writeln!(s, "  expected clusters k     : {}", d.k_clusters);
    let _ = writeln!(s, "  expected d_toBS         : {:.4} m", d.d_to_bs);
    let _ = writeln!(s, "  expected d_toCH         : {:.4} m", d.d_to_ch);
    let _ = writeln!(s, "  E_total = N E_0         : {} J", d.e_total);
    let _ = writeln!(s, "  E_round                 : {:e} J", d.e_round);
    let _ = writeln!(s, "  R = E_total / E_round   : {:.4} rounds", d.r_max);
    s
}

/// Validate and describe the experiment.
pub fn cmd_validate(args: &ExperimentArgs) -> Result<(DerivedQuantities, String), CliError> {
    let spec = load_spec(args)?;
    Ok((DerivedQuantities::of(&spec), validation_report(&spec)))
}

/// Entry point used by the binary. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Validate(args) => cmd_validate(args).map(|(_, text)| print!("{text}")),
        Command::Run(args) => load_spec(args).and_then(|spec| {
            let files = cmd_run(&spec)?;
            println!("wrote {} files to {}", files.len(), spec.out_dir.display());
            Ok(())
        }),
        Command::Compare(args) => load_spec(args).and_then(|spec| {
            let (report, _) = cmd_compare(&spec)?;
            let title = format!("classic vs adaptive, base station {}", spec.bs_preset);
            print!("{}", output::digest(&report, &title));
            println!("\nreport written to {}", spec.out_dir.display());
            Ok(())
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
