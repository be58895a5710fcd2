//! `fibra`: load a JSON universe of finite objects, run one operation or
//! property check, and print a canonical JSON report.
//!
//! Exit status: 0 on success, 2 on a domain error (bad document, unknown
//! object, refused operation), 1 on a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use fibra_cli::{enum_limit_from_env, run, Command, Report};
use fibra_core::error::Error;
use fibra_core::universe::Universe;

#[derive(Debug, Parser)]
#[command(name = "fibra", version, about = "Finite-model checker for fibered correspondences")]
struct Cli {
    /// Path to the JSON universe document.
    #[arg(short, long, global = true)]
    universe: Option<PathBuf>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Check a named property of an object.
    Check {
        object: String,
        #[arg(long)]
        property: String,
    },
    /// Compose two correspondences (the second is applied first).
    Compose { f: String, g: String },
    /// Invert a correspondence.
    Inverse { f: String },
    /// Image of a set under a correspondence, or of a subbundle under a
    /// fibered correspondence.
    Image { f: String, sub: String },
    /// Quotient a bundle by a fibered equivalence.
    Quotient { bundle: String, equiv: String },
    /// Factor a fibered morphism through its kernel.
    Factorize { morphism: String },
    /// Orbit quotient of a representation.
    Orbits { rep: String },
    /// Continuity of a correspondence between two topologies.
    Continuity(ContinuityArgs),
    /// Correspondence induced on sections by a reduced correspondence.
    Sections { reduced: String },
    /// Classify a reduced endorelation.
    Classify { reduced: String },
    /// Validate a tower and report its projections.
    Tower { name: String },
}

#[derive(Debug, Args)]
struct ContinuityArgs {
    corr: String,
    src_top: String,
    dst_top: String,
    /// Restrict the check to one named set.
    #[arg(long)]
    on: Option<String>,
}

fn to_command(sub: Sub) -> Command {
    match sub {
        Sub::Check { object, property } => Command::Check { object, property },
        Sub::Compose { f, g } => Command::Compose { f, g },
        Sub::Inverse { f } => Command::Inverse { f },
        Sub::Image { f, sub } => Command::Image { f, sub },
        Sub::Quotient { bundle, equiv } => Command::Quotient { bundle, equiv },
        Sub::Factorize { morphism } => Command::Factorize { morphism },
        Sub::Orbits { rep } => Command::Orbits { rep },
        Sub::Continuity(c) => Command::Continuity {
            corr: c.corr,
            src_top: c.src_top,
            dst_top: c.dst_top,
            on: c.on,
        },
        Sub::Sections { reduced } => Command::Sections { reduced },
        Sub::Classify { reduced } => Command::Classify { reduced },
        Sub::Tower { name } => Command::Tower { name },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let Some(path) = cli.universe else {
        eprintln!("error: --universe <path> is required");
        return ExitCode::from(1);
    };
    let cmd = to_command(cli.command);

    let universe = match std::fs::read(&path) {
        Ok(bytes) => Universe::from_json_slice(&bytes),
        Err(e) => Err(Error::ParseError {
            message: format!("cannot read {}: {e}", path.display()),
        }),
    };
    let report = match universe {
        Ok(u) => run(&u, &cmd, enum_limit_from_env()),
        Err(e) => Report {
            command: cmd.echo(),
            outcome: Err(e),
        },
    };
    print!("{}", report.to_json());
    if report.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
