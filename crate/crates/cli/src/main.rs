//! `painleve`: resonances, series, numeric validation and exponent-ellipsoid
//! searches from the command line. Reports are JSON (`"schema": 1`).
//!
//! Exit codes: 0 success, 2 invalid input, 3 compatibility failure,
//! 4 validation failure.

mod commands;
mod request;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use painleve::rational::parse_rational;
use serde::Serialize;
use thiserror::Error;

use commands::{SecantRequest, SeriesOptions};
use request::RequestArgs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("compatibility failure: {0}")]
    Compatibility(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Compatibility(_) => 3,
        }
    }
}

const EXIT_VALIDATION_FAILED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "painleve", version, about = "Painleve analysis of steady Ricci soliton ODE systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
struct SeriesArgs {
    /// Truncation order N (default: ceil(12/Q)).
    #[arg(long = "N", visible_alias = "truncation")]
    truncation: Option<usize>,
    /// Choose the top-resonance parameter so that H = 0.
    #[arg(long)]
    h0: bool,
    /// Shift the projected parameter by this rational, keeping the H = 0 claim.
    #[arg(long, allow_hyphen_values = true, requires = "h0")]
    perturb_lambda: Option<String>,
}

impl SeriesArgs {
    fn options(&self) -> Result<SeriesOptions, CliError> {
        let perturb_lambda = match &self.perturb_lambda {
            Some(text) => Some(parse_rational(text).map_err(|e| CliError::Invalid(format!("--perturb-lambda: {e}")))?),
            None => None,
        };
        Ok(SeriesOptions {
            truncation: self.truncation,
            h0: self.h0,
            perturb_lambda,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Determinant of the resonance matrix, its rational roots and their roles.
    Resonances {
        #[command(flatten)]
        request: RequestArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Truncated series with its coefficient and constraint tables.
    Series {
        #[command(flatten)]
        request: RequestArgs,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Numeric checks of a series given as a JSON file or inline request.
    Validate {
        /// Series JSON (a `series` report or a bare series).
        #[arg(long, conflicts_with_all = ["dims", "d2", "family"])]
        input: Option<PathBuf>,
        #[command(flatten)]
        request: RequestArgs,
        #[command(flatten)]
        series: SeriesArgs,
        /// Also write the trajectory seeded at the first seed time as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Rational points on the exponent ellipsoid and local obstructions.
    Ellipsoid {
        /// Factor dimensions, comma separated.
        #[arg(long)]
        dims: String,
        /// Largest common denominator searched.
        #[arg(long, default_value_t = 10)]
        bound: u32,
        /// Moduli tested for an obstruction, comma separated.
        #[arg(long, value_delimiter = ',')]
        moduli: Vec<u32>,
        /// Known point from which to draw secant lines.
        #[arg(long, allow_hyphen_values = true, requires = "secant_direction")]
        secant_base: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "secant_base")]
        secant_direction: Option<String>,
        #[arg(long, default_value_t = 8)]
        secant_count: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn emit<T: Serialize>(report: &T, out: &OutputArgs) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Invalid(e.to_string()))?;
    text.push('\n');
    match &out.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Resonances { request, out } => {
            let report = commands::cmd_resonances(&request.resolve()?)?;
            emit(&report, &out)?;
            Ok(0)
        }
        Command::Series { request, series, out } => {
            let report = commands::cmd_series(&request.resolve()?, &series.options()?)?;
            emit(&report, &out)?;
            Ok(0)
        }
        Command::Validate {
            input,
            request,
            series,
            csv,
            out,
        } => {
            let report = match &input {
                Some(path) => {
                    let sol = commands::load_series(path)?;
                    commands::cmd_validate(&sol, None, Some(path.display().to_string()), csv.as_ref())?
                }
                None => {
                    let req = request.resolve()?;
                    let sol = commands::compute_series(&req, &series.options()?)?;
                    commands::cmd_validate(&sol, Some(req), None, csv.as_ref())?
                }
            };
            emit(&report, &out)?;
            Ok(if report.pass { 0 } else { EXIT_VALIDATION_FAILED })
        }
        Command::Ellipsoid {
            dims,
            bound,
            moduli,
            secant_base,
            secant_direction,
            secant_count,
            out,
        } => {
            let secant = match (secant_base, secant_direction) {
                (Some(base), Some(direction)) => Some(SecantRequest {
                    base,
                    direction,
                    count: secant_count,
                }),
                _ => None,
            };
            let report = commands::cmd_ellipsoid(&dims, bound, &moduli, secant.as_ref())?;
            emit(&report, &out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Invalid(String::new()).exit_code(), 2);
        assert_eq!(CliError::Compatibility(String::new()).exit_code(), 3);
        assert_eq!(EXIT_VALIDATION_FAILED, 4);
    }

    #[test]
    fn flags_parse() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
