//! `fqx`: checks on atomic measures, lattice combs, trigonometric
//! polynomials, and Kronecker approximation, driven by JSON configs.
//!
//! Exit codes: 0 when the requested check passes, 1 when it fails or a
//! prerequisite refuses to run, 2 on configuration errors, 3 when a
//! resource cap is exceeded.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use commands::Outcome;
use fqx_core::error::Error;

#[derive(Parser)]
#[command(name = "fqx", version, about = "Atomic measures, lattice combs, and Kronecker approximation checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write an `r,value` series here (growth, parseval, theorem2).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the generalized Poisson formula for a lattice-comb spec.
    PoissonCheck(IoArgs),
    /// Fit the growth exponent of ball variations.
    Growth(IoArgs),
    /// Estimate the sup of ball variations over translated centers.
    TranslationBound(IoArgs),
    /// Bohr mean Fourier coefficient of a trigonometric polynomial.
    Bohr(IoArgs),
    /// Ball-average Parseval series of a trigonometric polynomial.
    Parseval(IoArgs),
    /// Scan for epsilon-almost periods.
    AlmostPeriods(IoArgs),
    /// Solve an inhomogeneous Kronecker approximation instance.
    KroneckerSolve(IoArgs),
    /// Exact power-expansion certificate; either --config or --N/--q.
    KroneckerCertify {
        #[command(flatten)]
        io: IoArgs,
        /// Number of frequencies of the canonical independent instance.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Power to expand.
        #[arg(long)]
        q: Option<u32>,
    },
    /// Integer relations of the instance vectors and the solvability
    /// criterion.
    KroneckerRelations(IoArgs),
    /// Squared-mass translation-bound chain over seeded centers.
    Theorem2(IoArgs),
    /// Phase-alignment mass concentration against the convolution ceiling.
    Theorem3(IoArgs),
    /// Translation-bound certificate for a nonnegative measure pair.
    Prop2(IoArgs),
    /// Convolution sup bound certificate.
    Prop3(IoArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::ResourceCap { .. } => ExitCode::from(3),
        Error::Config(_) | Error::SingularBasis { .. } | Error::NearDuplicateAtoms(..) => {
            ExitCode::from(2)
        }
        // Failed gates and broken numerics are failed checks.
        _ => ExitCode::from(1),
    }
}

fn load_config<T: DeserializeOwned>(io: &IoArgs) -> Result<T, Error> {
    let path = io
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this subcommand".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config: {e}")))
}

fn emit(io: &IoArgs, outcome: &Outcome) -> Result<(), Error> {
    let rendered =
        serde_json::to_string_pretty(&outcome.report).expect("reports serialize to JSON");
    match &io.output {
        Some(path) => fs::write(path, rendered + "\n")
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            // A closed pipe (e.g. piping into `head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{rendered}");
        }
    }
    if let Some(path) = &io.csv {
        match &outcome.csv {
            Some(series) => {
                let mut text = String::from("r,value\n");
                for (r, v) in series {
                    text.push_str(&format!("{r},{v}\n"));
                }
                fs::write(path, text)
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            }
            None => {
                return Err(Error::Config(
                    "this subcommand produces no CSV series".into(),
                ))
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let (io, outcome) = match cli.command {
        Command::PoissonCheck(io) => {
            let outcome = commands::poisson(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Growth(io) => {
            let outcome = commands::growth(load_config(&io)?)?;
            (io, outcome)
        }
        Command::TranslationBound(io) => {
            let outcome = commands::translation_bound(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Bohr(io) => {
            let outcome = commands::bohr(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Parseval(io) => {
            let outcome = commands::parseval(load_config(&io)?)?;
            (io, outcome)
        }
        Command::AlmostPeriods(io) => {
            let outcome = commands::almost_periods(load_config(&io)?)?;
            (io, outcome)
        }
        Command::KroneckerSolve(io) => {
            let outcome = commands::kronecker_solve(load_config(&io)?)?;
            (io, outcome)
        }
        Command::KroneckerCertify { io, n, q } => {
            let outcome = match (n, q, io.config.is_some()) {
                (Some(n), Some(q), false) => commands::canonical_certify(n, q)?,
                (None, None, true) => commands::kronecker_certify(load_config(&io)?)?,
                _ => {
                    return Err(Error::Config(
                        "use either --config or both --N and --q".into(),
                    ))
                }
            };
            (io, outcome)
        }
        Command::KroneckerRelations(io) => {
            let outcome = commands::kronecker_relations(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Theorem2(io) => {
            let outcome = commands::theorem2(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Theorem3(io) => {
            let outcome = commands::theorem3(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Prop2(io) => {
            let outcome = commands::prop2(load_config(&io)?)?;
            (io, outcome)
        }
        Command::Prop3(io) => {
            let outcome = commands::prop3(load_config(&io)?)?;
            (io, outcome)
        }
    };
    emit(&io, &outcome)?;
    Ok(if outcome.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
