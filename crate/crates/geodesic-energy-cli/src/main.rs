//! Command-line front end: problem configs in, solves and convergence
//! studies out. Users are scripts and CI.
//!
//! Exit codes: 0 success, 1 config error, 2 non-convergence (or a failed
//! gradient check), 3 numeric error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use geodesic_energy::config::{parse_config, parse_n_list, Problem};
use geodesic_energy::energy::{DiscreteObjective, QuadratureRule};
use geodesic_energy::error::Error;
use geodesic_energy::solver::minimize;
use geodesic_energy::study::{
    run_counterexample, run_study, write_counterexample_csv, write_study_csv, DEFAULT_N_LADDER,
};

#[derive(Parser)]
#[command(
    name = "geodesic-energy",
    version,
    about = "Minimal geodesics by discrete energy minimization: solves, convergence studies, gradient checks, and the degenerate length-discretization table"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve from a problem config; emits a JSON report.
    Solve {
        /// Path to the problem config JSON.
        config: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export the minimizing curve as CSV (columns t, x_1..x_D).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Convergence study over a ladder of segment counts; emits CSV.
    Study {
        config: PathBuf,
        /// Comma-separated ladder, strictly increasing, each entry dividing
        /// the next (default 8,16,32,64,128,256).
        #[arg(long = "n-list")]
        n_list: Option<String>,
        /// Which discretization rule(s) to study.
        #[arg(long, value_enum, default_value_t = RuleChoice::Both)]
        rule: RuleChoice,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the failure of direct length discretization: both discrete
    /// lengths pin at 4 pi while the energy route recovers 8 pi.
    Counterexample {
        /// Comma-separated ladder (default 8,16,32,64).
        #[arg(long = "n-list")]
        n_list: Option<String>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized analytic-vs-finite-difference gradient check.
    Gradcheck {
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleChoice {
    Trapezoidal,
    Left,
    Both,
}

impl RuleChoice {
    fn rules(self) -> Vec<QuadratureRule> {
        match self {
            RuleChoice::Trapezoidal => vec![QuadratureRule::Trapezoidal],
            RuleChoice::Left => vec![QuadratureRule::LeftEndpoint],
            RuleChoice::Both => vec![QuadratureRule::Trapezoidal, QuadratureRule::LeftEndpoint],
        }
    }
}

enum Failure {
    Config(String),
    NonConvergence(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Usage(_) => Failure::Config(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NonConvergence(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    Ok(config.build()?)
}

fn emit(out: &Option<PathBuf>, content: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content)
            .map_err(|e| Failure::Numeric(format!("stdout: {e}"))),
    }
}

fn ladder_arg(n_list: &Option<String>, default: &[usize]) -> Result<Vec<usize>, Failure> {
    match n_list {
        Some(text) => Ok(parse_n_list(text)?),
        None => Ok(default.to_vec()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { config, out, csv } => {
            let problem = load_problem(&config)?;
            let obj = DiscreteObjective::new(&problem.metric, problem.rule, problem.functional);
            let report = minimize(
                &obj,
                &problem.x0,
                &problem.x1,
                problem.n_segments,
                &problem.solve_config,
            )?;
            if let Some(path) = &csv {
                let mut buf = Vec::new();
                report
                    .minimizer
                    .write_csv(&mut buf)
                    .map_err(|e| Failure::Numeric(e.to_string()))?;
                emit(&Some(path.clone()), &buf)?;
            }
            let mut json = report.to_json();
            json.push('\n');
            emit(&out, json.as_bytes())?;
            if !report.converged {
                return Err(Failure::NonConvergence(format!(
                    "solve did not converge in {} iterations{}",
                    report.iterations,
                    report
                        .diagnostic
                        .as_deref()
                        .map(|d| format!(" ({d})"))
                        .unwrap_or_default()
                )));
            }
            Ok(())
        }
        Command::Study {
            config,
            n_list,
            rule,
            out,
        } => {
            let problem = load_problem(&config)?;
            let ladder = ladder_arg(&n_list, &DEFAULT_N_LADDER)?;
            let studies = run_study(&problem, &ladder, &rule.rules())?;
            let mut buf = Vec::new();
            write_study_csv(&studies, &mut buf).map_err(|e| Failure::Numeric(e.to_string()))?;
            emit(&out, &buf)?;
            if let Some(bad) = studies.iter().find(|s| !s.all_converged) {
                return Err(Failure::NonConvergence(format!(
                    "{} ladder contains non-converged solves",
                    bad.rule
                )));
            }
            Ok(())
        }
        Command::Counterexample { n_list, out } => {
            let ladder = ladder_arg(&n_list, &[8, 16, 32, 64])?;
            let rows = run_counterexample(&ladder)?;
            let mut buf = Vec::new();
            write_counterexample_csv(&rows, &mut buf)
                .map_err(|e| Failure::Numeric(e.to_string()))?;
            emit(&out, &buf)?;
            Ok(())
        }
        Command::Gradcheck {
            config,
            samples,
            seed,
        } => {
            let problem = load_problem(&config)?;
            let report = geodesic_energy::study::gradcheck(&problem, samples, seed)?;
            println!(
                "gradcheck: {} — max relative discrepancy {:.6e} over {} samples (threshold 1e-5)",
                if report.pass { "pass" } else { "fail" },
                report.max_rel_discrepancy,
                report.samples
            );
            if !report.pass {
                return Err(Failure::NonConvergence(
                    "gradient check exceeded the 1e-5 threshold".into(),
                ));
            }
            Ok(())
        }
    }
}
