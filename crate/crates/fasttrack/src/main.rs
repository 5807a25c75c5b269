use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fasttrack::curves::{build_curve, CurveKind, CurveOptions};
use fasttrack::derive::derive_report;
use fasttrack::output::{write_csv, write_csv_file};
use fasttrack::scenario::ScenarioFile;
use fasttrack::simulate::{report_header, report_record, simulate_scenario};
use fasttrack::table1::{table1, Table1};
use fasttrack::{CliError, Result};
use fasttrack_core::design_space::Rounding;
use fasttrack_core::power_engine::Conditioning;
use fasttrack_core::Tolerances;

/// Two-stage fast-track registration designs: derived quantities, plot
/// data, the worked-example table and Monte Carlo checks.
#[derive(Parser)]
#[command(name = "fasttrack", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundArg {
    Ceiling,
    Nearest,
}

#[derive(Clone, Copy, ValueEnum)]
enum CondArg {
    Unconditional,
    Continuation,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the closed-form quantities of a scenario.
    Derive {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "ceiling")]
        rounding: RoundArg,
    },
    /// Write plot data for one statistic over a grid of first-stage information.
    Curve {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        scenario: PathBuf,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.002)]
        grid_step: f64,
        /// Conditioning of the mean second-stage information.
        #[arg(long, value_enum, default_value = "unconditional")]
        conditioning: CondArg,
        #[arg(long, value_enum, default_value = "ceiling")]
        rounding: RoundArg,
    },
    /// Sample sizes of the apply-or-waive strategy in the worked example.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ceiling")]
        rounding: RoundArg,
    },
    /// Simulate a scenario's design under the null and the assumed effect.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn rounding(r: RoundArg) -> Rounding {
    match r {
        RoundArg::Ceiling => Rounding::Ceiling,
        RoundArg::Nearest => Rounding::Nearest,
    }
}

fn emit(out: Option<PathBuf>, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    match out {
        Some(p) => write_csv_file(&p, header, rows),
        None => write_csv(std::io::stdout().lock(), header, rows),
    }
}

fn run(cli: Cli) -> Result<()> {
    let tol = Tolerances::default();
    match cli.cmd {
        Cmd::Derive { scenario, rounding: r } => {
            let s = ScenarioFile::load(&scenario)?;
            let rep = derive_report(&s, rounding(r))?;
            let mut out = std::io::stdout().lock();
            for (k, v) in &rep.entries {
                writeln!(out, "{k} = {v}").map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
            }
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
        }
        Cmd::Curve {
            kind,
            scenario,
            out,
            grid_step,
            conditioning,
            rounding: r,
        } => {
            let kind: CurveKind = kind.parse()?;
            let s = ScenarioFile::load(&scenario)?;
            let opt = CurveOptions {
                step: grid_step,
                conditioning: match conditioning {
                    CondArg::Unconditional => Conditioning::Unconditional,
                    CondArg::Continuation => Conditioning::Continuation,
                },
                rounding: rounding(r),
                tol,
            };
            let c = build_curve(kind, &s, &opt)?;
            emit(out, &c.header(c.has_sizes()), &c.records())?;
        }
        Cmd::Table1 { out, rounding: r } => {
            let t = table1(rounding(r), &tol)?;
            emit(out, &Table1::header(), &t.records())?;
        }
        Cmd::Simulate {
            scenario,
            reps,
            seed,
            out,
        } => {
            if reps == 0 {
                return Err(CliError::Invalid("--reps must be positive".into()));
            }
            let s = ScenarioFile::load(&scenario)?;
            let reports = simulate_scenario(&s, reps, seed, &tol)?;
            let rows: Vec<Vec<String>> = reports.iter().map(report_record).collect();
            if out.is_some() {
                write_csv(std::io::stdout().lock(), &report_header(), &rows)?;
            }
            emit(out, &report_header(), &rows)?;
        }
    }
    Ok(())
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
