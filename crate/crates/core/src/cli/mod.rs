//! Command-line front end. [`run`] does all the work so that the binary
//! stays a thin wrapper and tests can drive commands in-process.

mod commands;
pub mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::{Error, NumericError};
use crate::symexpr::default_seed;

pub use report::{validate, Report};

#[derive(Parser, Debug)]
#[command(name = "condsym", version, about = "Q-conditional symmetries of reaction-diffusion-convection equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Test an operator against an equation or a catalog entry.
    Verify(VerifyArgs),
    /// Print the determining system of a canonical family.
    Detsys(DetsysArgs),
    /// Numeric checks: constraint systems and invariant flows.
    Numcheck(NumcheckArgs),
    /// Browse and verify the built-in catalog.
    Catalog(CatalogArgs),
    /// Compare operators up to a multiplier, or apply an equivalence transform.
    Equiv(EquivArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "entry", required_unless_present = "entry")]
    pub equation: Option<String>,
    #[arg(long)]
    pub entry: Option<String>,
    /// Required with --equation; with --entry, replaces the entry's operators.
    #[arg(long, required_unless_present = "entry")]
    pub operator: Option<String>,
    /// Comma-separated `k=v` with rational or decimal values.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Solution of the entry's constraint system, `f=...; g=...`.
    #[arg(long)]
    pub candidate: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    PowerPlain,
    PowerConvective,
    ExpPlain,
    ExpConvective,
}

#[derive(Args, Debug)]
pub struct DetsysArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct NumcheckArgs {
    /// Invariant-flow check of an entry's operator.
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub entry: Option<String>,
    /// Finite-difference check of a constraint system on a candidate.
    #[arg(long, requires = "candidate")]
    pub system: Option<String>,
    #[arg(long)]
    pub candidate: Option<String>,
    #[arg(long, default_value = "")]
    pub params: String,
    /// Point count of the finest grid [default: 201 for entries, 1001 for systems].
    #[arg(long)]
    pub grid: Option<usize>,
    /// `x0,x1` [default: 0,1 for entries, 1,2 for systems].
    #[arg(long)]
    pub interval: Option<String>,
    /// End time of the flow check.
    #[arg(long, default_value_t = 0.5)]
    pub t_end: f64,
    /// `V(x0),V'(x0)` for the profile ODE of the flow check.
    #[arg(long, default_value = "2,0.5")]
    pub profile: String,
    /// Time at which a system candidate is sampled.
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    /// Gate on the deviation and residual [default: 1e-4 for entries, 1e-6 for systems].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    #[command(subcommand)]
    pub action: CatalogAction,
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    List,
    Show {
        id: String,
    },
    /// Every fixture and mutation of every entry.
    VerifyAll,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    /// Two operators, `--operator A --operator B`.
    #[arg(long = "operator", num_args = 1, conflicts_with = "entry")]
    pub operators: Vec<String>,
    #[arg(long, requires = "transform")]
    pub entry: Option<String>,
    /// depress-cubic, galilean, lambda-zero or multiplier.
    #[arg(long)]
    pub transform: Option<String>,
    /// Argument of the transform (galilean speed, multiplier).
    #[arg(long)]
    pub arg: Option<String>,
    #[arg(long, default_value = "")]
    pub params: String,
    #[arg(long)]
    pub candidate: Option<String>,
    #[arg(long)]
    pub json: bool,
}

/// What a command produced, before rendering.
#[derive(Debug)]
pub(crate) struct Outcome {
    pub status: String,
    pub code: i32,
    pub text: String,
    pub payload: Value,
    pub assumptions: Vec<String>,
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code and kind for a library error.
pub fn classify(e: &Error) -> (i32, &'static str) {
    match e {
        Error::Parse(_) => (2, "Parse"),
        Error::Malformed(_) => (2, "Malformed"),
        Error::ConstraintViolation(_) => (2, "ConstraintViolation"),
        Error::UnknownEntry(_) => (2, "UnknownEntry"),
        Error::UnknownSystem(_) => (2, "UnknownSystem"),
        Error::InapplicableTransform(_) => (2, "InapplicableTransform"),
        Error::CatalogData { .. } => (2, "CatalogData"),
        Error::CyclicBinding(_) | Error::SelfReferentialBinding(_) => (2, "Binding"),
        Error::DivisionByZero => (2, "DivisionByZero"),
        Error::Unsupported(_) => (3, "Unsupported"),
        Error::UnsupportedClass(_) => (3, "UnsupportedClass"),
        Error::NotSplittable(_) => (3, "NotSplittable"),
        Error::SizeLimit { .. } => (3, "SizeLimit"),
        Error::Soundness(_) => (3, "Soundness"),
        Error::Numeric(n) => match n {
            NumericError::Pole { .. } | NumericError::BlowUp { .. } | NumericError::StepFailure { .. } => {
                (1, "Numeric")
            }
            NumericError::GridTooSmall(_) | NumericError::InvalidGrid(_) | NumericError::UnboundSymbol(_) => {
                (2, "Numeric")
            }
            NumericError::Precondition(_) => (3, "Numeric"),
        },
    }
}

fn json_flag(c: &Command) -> bool {
    match c {
        Command::Verify(a) => a.json,
        Command::Detsys(a) => a.json,
        Command::Numcheck(a) => a.json,
        Command::Catalog(a) => a.json,
        Command::Equiv(a) => a.json,
    }
}

/// Parse `args` (without the program name) and run the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("condsym")).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let json = json_flag(&cli.command);
    let start = Instant::now();
    let result = commands::dispatch(&cli.command);
    let elapsed = start.elapsed().as_secs_f64();
    let seed = default_seed();
    match result {
        Ok(out) => {
            let stdout = if json {
                let r = Report {
                    command: echo,
                    status: out.status,
                    exit_code: out.code,
                    payload: out.payload,
                    assumptions: out.assumptions,
                    seed,
                    elapsed_s: elapsed,
                    error: None,
                };
                pretty(&r.to_json())
            } else {
                out.text
            };
            Output { code: out.code, stdout, stderr: String::new() }
        }
        Err(e) => {
            let (code, kind) = classify(&e);
            if json {
                let r = Report {
                    command: echo,
                    status: "Error".into(),
                    exit_code: code,
                    payload: Value::Object(Default::default()),
                    assumptions: vec![],
                    seed,
                    elapsed_s: elapsed,
                    error: Some((kind.into(), e.to_string())),
                };
                Output { code, stdout: pretty(&r.to_json()), stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: format!("error ({kind}): {e}\n") }
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}
