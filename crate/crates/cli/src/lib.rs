//! The `gwb` command line: JSON in, CSV or JSON out.

pub mod formats;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gwb_core::consistency::run_consistency;
use gwb_core::otd::counterexample_report;
use gwb_core::{
    barycenter, energy, evolve, gauss_dirac_params, solve_w2, w2_1d, DiscreteMeasure1D, GaussianParams, Law,
};
use serde::Serialize;

use formats::{read_json, write_file, FamilyInput, MeasureInput, MeasureRdInput, ScheduleInput, StateInput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Module(#[from] gwb_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Module(e) => e.code(),
            CliError::Usage(_) => "Usage",
            CliError::Parse(_) => "Parse",
            CliError::Io(_) => "Io",
        }
    }

    /// 1 for failures inside a computation or while writing, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Module(_) | CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Parse(_) => 2,
        }
    }

    /// `{"error": code, "detail": text}`.
    pub fn record(&self) -> String {
        serde_json::json!({ "error": self.code(), "detail": self.to_string() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "gwb", version, about = "Barycenters of probability measures under signed weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Barycenter of a signed family on the line, written as a quantile CSV.
    Barycenter {
        #[arg(long)]
        family: PathBuf,
        /// Grid size for parametric laws.
        #[arg(long)]
        grid: Option<usize>,
        /// Quantile CSV path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy of a measure with respect to a signed family on the line.
    Energy {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Squared Wasserstein distance between two discrete measures in dimension 1 to 3.
    W2 {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Writes the optimal plan as `i,j,mass`.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Sticky-particle snapshots as `t,atom,mass` rows.
    Sticky {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weight and point under which two Gaussians have a Dirac barycenter.
    GaussDirac {
        #[arg(long, allow_hyphen_values = true)]
        m1: f64,
        #[arg(long)]
        s1: f64,
        #[arg(long, allow_hyphen_values = true)]
        m2: f64,
        #[arg(long)]
        s2: f64,
        /// Also computes the gridded barycenter at this size.
        #[arg(long)]
        grid: Option<usize>,
        /// Quantile CSV of the gridded barycenter.
        #[arg(long, requires = "grid")]
        out: Option<PathBuf>,
    },
    /// Energies of the planar family with several minimizers.
    Counterexample {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Report path; standard output if omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Energy and barycenter gaps of sampled approximating families.
    Consistency {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Writes `contents` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, contents),
        None => stdout.write_all(contents.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct BarycenterSummary {
    energy: f64,
    kind: &'static str,
    cells: usize,
}

#[derive(Serialize)]
struct GaussDiracSummary {
    lambda_bar: f64,
    z_bar: f64,
    weight_wide: f64,
    weight_narrow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w2_to_dirac: Option<f64>,
}

/// Runs one subcommand. Summaries go to `stdout`.
pub fn run(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Barycenter { family, grid, out } => {
            let family = read_json::<FamilyInput>(family)?.resolve(*grid)?;
            let bary = barycenter(&family);
            let csv = formats::law_csv(&bary);
            match out {
                Some(p) => {
                    write_file(p, &csv)?;
                    let summary = BarycenterSummary {
                        energy: energy(&family, &bary),
                        kind: if matches!(bary, Law::Grid(_)) { "grid" } else { "discrete" },
                        cells: match &bary {
                            Law::Discrete(mu) => mu.len(),
                            Law::Grid(g) => g.size(),
                        },
                    };
                    emit(None, &json(&summary), stdout)
                }
                None => emit(None, &csv, stdout),
            }
        }
        Command::Energy { family, measure, grid } => {
            let family = read_json::<FamilyInput>(family)?.resolve(*grid)?;
            let mu = read_json::<MeasureInput>(measure)?.resolve(*grid)?;
            emit(None, &json(&serde_json::json!({ "energy": energy(&family, &mu) })), stdout)
        }
        Command::W2 { a, b, plan } => {
            let a = read_json::<MeasureRdInput>(a)?.resolve()?;
            let b = read_json::<MeasureRdInput>(b)?.resolve()?;
            let t = solve_w2(&a, &b)?;
            if let Some(p) = plan {
                write_file(p, &formats::plan_csv(&t.plan))?;
            }
            let summary = serde_json::json!({
                "cost": t.cost,
                "w2": t.w2(),
                "pivots": t.pivots,
                "min_reduced_cost": t.min_reduced_cost(),
                "marginal_error": t.plan.marginal_error(a.masses(), b.masses()),
            });
            emit(None, &json(&summary), stdout)
        }
        Command::Sticky { state, times, out } => {
            let state = read_json::<StateInput>(state)?.resolve()?;
            let snapshots = times.iter().map(|&t| Ok((t, evolve(&state, t)?))).collect::<Result<Vec<_>, CliError>>()?;
            emit(out.as_deref(), &formats::trajectories_csv(&snapshots), stdout)
        }
        Command::GaussDirac { m1, s1, m2, s2, grid, out } => {
            let g1 = GaussianParams::new(*m1, *s1)?;
            let g2 = GaussianParams::new(*m2, *s2)?;
            let params = gauss_dirac_params(&g1, &g2)?;
            let mut summary = GaussDiracSummary {
                lambda_bar: params.lambda_bar,
                z_bar: params.z_bar,
                weight_wide: params.weight_wide(),
                weight_narrow: params.weight_narrow(),
                grid: *grid,
                w2_to_dirac: None,
            };
            if let Some(m) = grid {
                let bary = barycenter(&params.family(&g1, &g2, *m)?);
                summary.w2_to_dirac = Some(w2_1d(&bary, &DiscreteMeasure1D::dirac(params.z_bar)));
                if let Some(p) = out {
                    write_file(p, &formats::law_csv(&bary))?;
                }
            }
            emit(None, &json(&summary), stdout)
        }
        Command::Counterexample { samples, seed, report } => {
            let r = counterexample_report(*samples, *seed)?;
            emit(report.as_deref(), &json(&r), stdout)
        }
        Command::Consistency { schedule, out } => {
            let schedule = read_json::<ScheduleInput>(schedule)?.resolve()?;
            let report = run_consistency(&schedule)?;
            emit(out.as_deref(), &json(&report), stdout)
        }
    }
}

/// Sizes the global thread pool from `GWB_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GWB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("GWB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}
