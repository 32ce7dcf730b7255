//! `dircomp`: analyze composition-operator symbols on the Hardy space of
//! Dirichlet series.
//!
//! Four subcommands: `analyze` one symbol, `compare` a pair, `lincomb` a
//! linear combination, and `kernels` for kernel-sequence tables. Reports are
//! JSON with sorted keys; kernel tables are CSV. Identical invocations
//! produce byte-identical output.
//!
//! Exit codes: 0 success, 2 parse error, 3 symbol outside the admissible
//! class, 4 guard violation, 5 bad combination input, 6 unsupported
//! symbol/kernel pairing, 1 anything else.

mod csv;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use dircomp_core::analysis::Config;
use dircomp_core::dsl;
use dircomp_core::kernels::{KernelPath, KernelSequencePlan, KernelSpec};
use dircomp_core::Error;

#[derive(Parser)]
#[command(name = "dircomp", version, about = "Composition operators on Dirichlet series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Grid resolution per torus angle (default: per-dimension).
    #[arg(long)]
    grid: Option<usize>,
    /// Seed for the deterministic sample sets.
    #[arg(long, default_value_t = 0x5EED_D1CE)]
    seed: u64,
    /// Boundary contact tolerance.
    #[arg(long, default_value_t = 1e-8)]
    gamma_tol: f64,
    /// Relative tolerance for boundary-data equality.
    #[arg(long, default_value_t = 1e-9)]
    eq_tol: f64,
    /// Finest-level ceiling for the vanishing-ratio verdict.
    #[arg(long, default_value_t = 1e-2)]
    o_tol: f64,
    /// Contact tolerance for angular derivatives.
    #[arg(long, default_value_t = 1e-7)]
    nt_tol: f64,
    /// Value tolerance of the descent refinement.
    #[arg(long, default_value_t = 1e-9)]
    refine_tol: f64,
    /// Largest contact order probed.
    #[arg(long, default_value_t = 8)]
    max_contact_order: u32,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format (analysis commands emit json, kernels emits csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl CommonFlags {
    fn config(&self) -> Config {
        Config {
            gamma_tol: self.gamma_tol,
            eq_tol: self.eq_tol,
            o_tol: self.o_tol,
            nt_tol: self.nt_tol,
            refine_tol: self.refine_tol,
            resolution: self.grid,
            seed: self.seed,
            max_contact_order: self.max_contact_order,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one symbol: class, membership, range, compactness, contacts.
    Analyze {
        /// Symbol expression, e.g. "s + 1 - 2^(-s)".
        symbol: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Compare two symbols: component obstructions, compact difference,
    /// and the kernel estimator.
    Compare {
        symbol0: String,
        symbol1: String,
        /// Largest kernel index for the estimator.
        #[arg(long, default_value_t = 10_000)]
        estimator_k: u64,
        /// Slant of the estimator path.
        #[arg(long, default_value_t = 50.0)]
        estimator_m: f64,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Test a linear combination given as alternating coefficient/symbol
    /// pairs: `lincomb 1 "s + 1 - 2^(-s)" -- -1 "s + 1 - 3^(-s)"`.
    Lincomb {
        /// Alternating coefficients and symbols.
        #[arg(allow_hyphen_values = true, num_args = 2..)]
        terms: Vec<String>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Emit kernel-sequence tables (CSV), optionally with the estimator
    /// column for a symbol pair.
    Kernels {
        /// Kernel family: full | partial-d:D | partial-q:P1,P2,... |
        /// single-prime:Q
        #[arg(long)]
        family: String,
        /// Path to the boundary: radial | slanted | sqrt-slanted |
        /// prime-power
        #[arg(long, default_value = "radial")]
        path: String,
        /// Slant parameter M of the path.
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 1)]
        k_start: u64,
        #[arg(long, default_value_t = 100)]
        k_end: u64,
        #[arg(long, default_value_t = 1)]
        k_step: u64,
        /// Two symbols for the estimator column.
        #[arg(long, num_args = 2)]
        symbols: Option<Vec<String>>,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        Error::OutsideClass { .. } => 3,
        Error::DimensionGuard(..)
        | Error::DimensionMismatch { .. }
        | Error::TruncationTooLarge(..)
        | Error::PowerGuard(..)
        | Error::EnumerationGuard(..)
        | Error::DerivativeGuard(..)
        | Error::Domain(_) => 4,
        Error::DuplicateSymbol | Error::ZeroCoefficient => 5,
        Error::UnsupportedPairing(_) | Error::FamilyMismatch => 6,
        _ => 1,
    }
}

fn emit(out: &Option<std::path::PathBuf>, payload: &str) -> Result<(), std::io::Error> {
    match out {
        Some(path) => std::fs::write(path, payload),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload.as_bytes())
        }
    }
}

fn parse_family(text: &str) -> Result<KernelSpec, Error> {
    let w = Complex64::new(1.0, 0.0);
    if text == "full" {
        return Ok(KernelSpec::Full { w });
    }
    if let Some(d) = text.strip_prefix("partial-d:") {
        let d: usize = d.parse().map_err(|_| Error::Parse {
            line: 1,
            col: 1,
            msg: format!("invalid partial kernel order `{d}`"),
        })?;
        return Ok(KernelSpec::PartialD { d, w });
    }
    if let Some(list) = text.strip_prefix("partial-q:") {
        let mut primes = Vec::new();
        for part in list.split(',') {
            primes.push(part.trim().parse().map_err(|_| Error::Parse {
                line: 1,
                col: 1,
                msg: format!("invalid prime `{part}`"),
            })?);
        }
        return Ok(KernelSpec::PartialQ { primes, w });
    }
    if let Some(q) = text.strip_prefix("single-prime:") {
        let q: u64 = q.parse().map_err(|_| Error::Parse {
            line: 1,
            col: 1,
            msg: format!("invalid base `{q}`"),
        })?;
        return Ok(KernelSpec::SinglePrime { q, w });
    }
    Err(Error::Parse { line: 1, col: 1, msg: format!("unknown kernel family `{text}`") })
}

fn parse_path(text: &str, m: f64) -> Result<KernelPath, Error> {
    match text {
        "radial" => Ok(KernelPath::Radial),
        "slanted" => Ok(KernelPath::Slanted { m }),
        "sqrt-slanted" => Ok(KernelPath::SqrtSlanted { m }),
        "prime-power" => Ok(KernelPath::PrimePower { m }),
        other => Err(Error::Parse { line: 1, col: 1, msg: format!("unknown path `{other}`") }),
    }
}

fn check_format(flags: &CommonFlags, expected: Format) -> Result<(), Error> {
    if let Some(format) = flags.format {
        if format != expected {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                msg: "this command supports only its native format".into(),
            });
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { symbol, flags } => {
            check_format(&flags, Format::Json)?;
            let phi = dsl::parse(&symbol)?;
            let value = report::analyze(&symbol, &phi, &flags.config())?;
            let mut text = serde_json::to_string_pretty(&value).expect("serializable report");
            text.push('\n');
            emit(&flags.out, &text).map_err(io_error)?;
        }
        Command::Compare { symbol0, symbol1, estimator_k, estimator_m, flags } => {
            check_format(&flags, Format::Json)?;
            let phi0 = dsl::parse(&symbol0)?;
            let phi1 = dsl::parse(&symbol1)?;
            let value = report::compare(
                (&symbol0, &symbol1),
                &phi0,
                &phi1,
                &flags.config(),
                estimator_k,
                estimator_m,
            )?;
            let mut text = serde_json::to_string_pretty(&value).expect("serializable report");
            text.push('\n');
            emit(&flags.out, &text).map_err(io_error)?;
        }
        Command::Lincomb { terms, flags } => {
            check_format(&flags, Format::Json)?;
            if terms.len() % 2 != 0 {
                return Err(Error::Parse {
                    line: 1,
                    col: 1,
                    msg: "expected alternating coefficient/symbol pairs".into(),
                });
            }
            let mut parsed = Vec::new();
            for pair in terms.chunks(2) {
                let lambda = dsl::parse_scalar(&pair[0])?;
                let phi = dsl::parse(&pair[1])?;
                parsed.push((lambda, pair[1].clone(), phi));
            }
            let value = report::lincomb(&parsed, &flags.config())?;
            let mut text = serde_json::to_string_pretty(&value).expect("serializable report");
            text.push('\n');
            emit(&flags.out, &text).map_err(io_error)?;
        }
        Command::Kernels { family, path, m, k_start, k_end, k_step, symbols, flags } => {
            check_format(&flags, Format::Csv)?;
            let plan = KernelSequencePlan {
                family: parse_family(&family)?,
                path: parse_path(&path, m)?,
                k_start,
                k_end,
                k_step,
            };
            let table = match symbols {
                Some(pair) => {
                    let phi0 = dsl::parse(&pair[0])?;
                    let phi1 = dsl::parse(&pair[1])?;
                    csv::estimator_table(&plan, &phi0, &phi1)?
                }
                None => csv::kernel_table(&plan)?,
            };
            emit(&flags.out, &table).map_err(io_error)?;
        }
    }
    Ok(())
}

fn io_error(e: std::io::Error) -> Error {
    Error::Precondition(format!("io: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
