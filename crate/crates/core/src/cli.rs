//! Command-line entry point.
//!
//! `surfcheck <suite> [--genus N] [--group su2|su3] [--seed S] [--trials T]
//! [--h H] [--tol TOL] [--out PATH]` runs one suite and writes its JSON
//! report. Exit status: 0 when every check passes, 2 when a check fails,
//! 1 on a usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::freegroup::Genus;
use crate::liegroup::SpecialUnitary;
use crate::report::VerificationReport;
use crate::suites::{run_suite, Suite, SuiteError, SuiteParams, DEFAULT_H};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupChoice {
    Su2,
    Su3,
}

#[derive(Debug, Parser)]
#[command(name = "surfcheck", version, about = "Deterministic verification suites for surface-group calculus")]
struct Args {
    /// Suite to run.
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 2)]
    genus: usize,
    #[arg(long, value_enum, default_value_t = GroupChoice::Su2)]
    group: GroupChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = DEFAULT_H)]
    h: f64,
    /// Overrides the suite's main tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub params: SuiteParams,
    pub out: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn parse_from<I, T>(argv: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let args = Args::try_parse_from(argv)?;
        let usage = |msg: String| clap::Error::raw(clap::error::ErrorKind::ValueValidation, msg + "\n");
        let genus = Genus::new(args.genus).map_err(|e| usage(e.to_string()))?;
        if args.trials == 0 {
            return Err(usage("--trials must be at least 1".into()));
        }
        if !(args.h > 0.0 && args.h.is_finite()) {
            return Err(usage(format!("--h must be positive, got {}", args.h)));
        }
        if let Some(t) = args.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(usage(format!("--tol must be positive, got {t}")));
            }
        }
        let group = match args.group {
            GroupChoice::Su2 => SpecialUnitary::su2(),
            GroupChoice::Su3 => SpecialUnitary::new(3).expect("3 is supported"),
        };
        Ok(SuiteConfig {
            suite: args.suite,
            params: SuiteParams {
                genus,
                group,
                seed: args.seed,
                trials: args.trials,
                h: args.h,
                tol: args.tol,
            },
            out: args.out,
        })
    }

    pub fn execute(&self) -> Result<VerificationReport, SuiteError> {
        run_suite(self.suite, &self.params)
    }
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match SuiteConfig::parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let report = match config.execute() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let json = report.to_json();
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => println!("{json}"),
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SuiteConfig::parse_from(["surfcheck", "verify-main"]).unwrap();
        assert_eq!(c.suite, Suite::VerifyMain);
        assert_eq!(c.params.genus.get(), 2);
        assert_eq!(c.params.group.n(), 2);
        assert_eq!(c.params.seed, 0);
        assert_eq!(c.params.trials, 100);
        assert_eq!(c.params.h, 1e-5);
        assert_eq!(c.params.tol, None);
        assert!(c.out.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        for argv in [
            vec!["surfcheck", "verify-fox", "--genus", "0"],
            vec!["surfcheck", "verify-fox", "--trials", "0"],
            vec!["surfcheck", "verify-fox", "--h", "-1"],
            vec!["surfcheck", "verify-fox", "--group", "so3"],
            vec!["surfcheck", "verify-fox", "--bogus"],
            vec!["surfcheck", "no-such-suite"],
        ] {
            assert!(SuiteConfig::parse_from(argv.clone()).is_err(), "{argv:?}");
            assert_eq!(run(argv), EXIT_USAGE);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["surfcheck", "verify-fox", "--genus", "1"]), EXIT_PASS);
        assert_eq!(run(["surfcheck", "verify-cycle", "--genus", "1"]), EXIT_USAGE);
        assert_eq!(run(["surfcheck", "verify-moment", "--group", "su3"]), EXIT_USAGE);
        // an impossible tolerance turns a passing suite into a failing one
        assert_eq!(
            run(["surfcheck", "verify-main", "--genus", "1", "--trials", "3", "--tol", "1e-300"]),
            EXIT_FAIL
        );
    }
}
