use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opdisk::{
    cmd_crossratio, cmd_distance, cmd_geodesic, cmd_replay, cmd_verify, parse_matrix, CliError,
    CliResult, Instance, Report, RunConfig, Suite,
};
use opdisk_core::disk::DiskPoint;
use opdisk_core::matrix::Tolerances;

#[derive(Parser)]
#[command(name = "opdisk", version, about = "Geometry of the operator Poincaré disk of M_n(C)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Args)]
struct GlobalOpts {
    /// Matrix size for random instances.
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    eps_check: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    eps_rank: f64,
    /// Upper bound on the operator norm of random disk points.
    #[arg(long, global = true, default_value_t = 0.9)]
    norm_cap: f64,
    /// Accept minimal-norm solutions of rank-deficient cross-ratio systems.
    #[arg(long, global = true)]
    allow_nonunique: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two disk points, and z2 translated by g̃_{z1}⁻¹.
    Distance { z1: PathBuf, z2: PathBuf },
    /// Samples of the geodesic through z0 (t = 0) and z1 (t = 1) as CSV.
    Geodesic {
        z0: PathBuf,
        z1: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// The cross ratio cr(z0, z1), its norm and the norm–distance residual.
    Crossratio { z0: PathBuf, z1: PathBuf },
    /// Runs a seeded verification suite.
    Verify {
        #[arg(value_parser = suite_parser)]
        suite: Suite,
        /// Rerun only this instance index.
        #[arg(long, conflicts_with = "replay")]
        instance: Option<u64>,
        /// Rerun a failure instance written by an earlier run.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

fn suite_parser(s: &str) -> Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite {s:?}; expected one of {}", names.join(", "))
    })
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn read_point(path: &Path, tol: &Tolerances) -> CliResult<DiskPoint> {
    let m = parse_matrix(&read(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(DiskPoint::new(m, tol)?)
}

fn render(report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Internal(e.to_string())),
        Format::Csv => Ok(report.to_csv()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("OPDISK_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Validation(format!("OPDISK_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    let o = &cli.opts;
    let cfg = RunConfig {
        dim: o.dim,
        seed: o.seed,
        samples: o.samples,
        eps_rank: o.eps_rank,
        eps_check: o.eps_check,
        norm_cap: o.norm_cap,
        allow_nonunique: o.allow_nonunique,
    };
    let tol = Tolerances::new(o.eps_rank, o.eps_check)?;
    let out = o.out.as_deref();
    match &cli.command {
        Command::Distance { z1, z2 } => {
            let r = cmd_distance(&read_point(z1, &tol)?, &read_point(z2, &tol)?, &tol)?;
            emit(&render(&r, o.format.unwrap_or(Format::Json))?, out)
        }
        Command::Geodesic {
            z0,
            z1,
            t_min,
            t_max,
            steps,
        } => {
            if o.format == Some(Format::Json) {
                return Err(CliError::Validation("geodesic output is CSV only".into()));
            }
            let csv = cmd_geodesic(&read_point(z0, &tol)?, &read_point(z1, &tol)?, *t_min, *t_max, *steps, &tol)?;
            emit(&csv, out)
        }
        Command::Crossratio { z0, z1 } => {
            let r = cmd_crossratio(&read_point(z0, &tol)?, &read_point(z1, &tol)?, &tol)?;
            emit(&render(&r, o.format.unwrap_or(Format::Json))?, out)
        }
        Command::Verify {
            suite,
            instance,
            replay,
        } => {
            let result = match replay {
                Some(path) => {
                    let inst: Instance = serde_json::from_str(&read(path)?)
                        .map_err(|e| CliError::Validation(format!("invalid instance file: {e}")))?;
                    if inst.suite != suite.name() {
                        return Err(CliError::Validation(format!(
                            "instance belongs to suite {:?}, not {:?}",
                            inst.suite,
                            suite.name()
                        )));
                    }
                    cmd_replay(&inst)
                }
                None => thread_pool()?.install(|| cmd_verify(*suite, &cfg, *instance)),
            };
            let format = o.format.unwrap_or(Format::Json);
            match result {
                Ok(r) => emit(&render(&r, format)?, out),
                Err(CliError::SuiteFailure {
                    suite,
                    index,
                    detail,
                    max_residual,
                    eps_check,
                    report,
                    instance,
                }) => {
                    emit(&render(&report, format)?, out)?;
                    let inst = serde_json::to_string(&instance).map_err(|e| CliError::Internal(e.to_string()))?;
                    eprintln!("failing instance (replay with `opdisk verify {suite} --replay FILE`):");
                    eprintln!("{inst}");
                    Err(CliError::SuiteFailure {
                        suite,
                        index,
                        detail,
                        max_residual,
                        eps_check,
                        report,
                        instance,
                    })
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
