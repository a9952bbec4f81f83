//! `rklab`: tables of r_K(m), weighted sums, identity checks and the
//! bilinear-sum counterexample from the command line.

mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use rklab::analytic::AnalyticError;
use rklab::expsum::ExpSumError;
use rklab::ideal_sieve::{SieveError, TableFormatError};
use rklab::number_field::FieldError;

use config::{Cli, Command};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CONTRACT: u8 = 2;
pub const EXIT_CHECK: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Usage,
    Contract,
    Check,
}

/// An error tagged with the exit status it should produce.
#[derive(Debug)]
pub struct Failure {
    kind: FailureKind,
    message: String,
}

impl Failure {
    pub fn usage(err: anyhow::Error) -> anyhow::Error {
        Self::tagged(FailureKind::Usage, err)
    }

    pub fn contract(err: anyhow::Error) -> anyhow::Error {
        Self::tagged(FailureKind::Contract, err)
    }

    pub fn check(message: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(Failure {
            kind: FailureKind::Check,
            message: message.into(),
        })
    }

    fn tagged(kind: FailureKind, err: anyhow::Error) -> anyhow::Error {
        anyhow::Error::new(Failure {
            kind,
            message: format!("{err:#}"),
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f.kind {
                FailureKind::Usage => EXIT_USAGE,
                FailureKind::Contract => EXIT_CONTRACT,
                FailureKind::Check => EXIT_CHECK,
            };
        }
        if let Some(e) = cause.downcast_ref::<SieveError>() {
            match e {
                SieveError::TooLarge(..) | SieveError::Overflow { .. } => return EXIT_CONTRACT,
                SieveError::EmptyRange => return EXIT_USAGE,
                SieveError::Field(FieldError::UncertifiedPrime(_)) => return EXIT_CONTRACT,
                SieveError::Field(_) => {}
            }
        }
        if let Some(FieldError::UncertifiedPrime(_)) = cause.downcast_ref::<FieldError>() {
            return EXIT_CONTRACT;
        }
        if let Some(AnalyticError::OutOfRange { .. }) = cause.downcast_ref::<AnalyticError>() {
            return EXIT_CONTRACT;
        }
        if let Some(ExpSumError::TooManyTerms(_)) = cause.downcast_ref::<ExpSumError>() {
            return EXIT_CONTRACT;
        }
        if let Some(TableFormatError::TooLarge(_)) = cause.downcast_ref::<TableFormatError>() {
            return EXIT_CONTRACT;
        }
    }
    EXIT_USAGE
}

fn run(cli: Cli) -> Result<()> {
    let Cli { command, mut opts } = cli;
    opts.merge_config_file()?;
    if let Some(threads) = opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::usage(e.into()))?;
    }
    match command {
        Command::Field => commands::field(&opts),
        Command::Sieve => commands::sieve(&opts),
        Command::Sums => commands::sums(&opts),
        Command::Kappa => commands::kappa(&opts),
        Command::Counterexample => commands::counterexample(&opts),
        Command::Fit => commands::fit(&opts),
        Command::Check => commands::check(&opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
