//! `conecert` command-line front end.
//!
//! ```text
//! conecert <project|farkas|quadrature|shape|membership> --input FILE
//!          [--output FILE] [--tol T] [--format json|text] [--seed N]
//!          [--timing] [--dump-csv FILE]
//! ```
//!
//! Exit status: 0 when every certificate passes, 2 when a result was
//! produced but a certificate failed, 1 on bad input.

pub mod commands;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::Problem;
use crate::report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "conecert",
    version,
    about = "Certified cone projections and friends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project a point onto a cone given by generators or by inequalities
    Project(Flags),
    /// Decide a Farkas alternative and return its certificate
    Farkas(Flags),
    /// Build a positive quadrature rule
    Quadrature(Flags),
    /// Best polynomial approximation with a sign-constrained derivative
    Shape(Flags),
    /// Cone or span membership with a witness
    Membership(Flags),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct Flags {
    /// Problem file (JSON); `-` reads stdin
    #[arg(long)]
    input: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Tolerance; overrides any `tol` in the problem file
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall time in `runtime_ms` (output is then no longer reproducible)
    #[arg(long)]
    timing: bool,
    /// Also write a CSV of the main result vectors
    #[arg(long)]
    dump_csv: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Project(f) => ("project", f),
            Command::Farkas(f) => ("farkas", f),
            Command::Quadrature(f) => ("quadrature", f),
            Command::Shape(f) => ("shape", f),
            Command::Membership(f) => ("membership", f),
        }
    }
}

/// Bad input or I/O; reported with exit status 1.
#[derive(Debug)]
struct Failure(String);

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| Failure(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
    }
}

fn parse_problem(path: &Path, text: &str) -> Result<Problem, Failure> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg
            .rsplit_once(" at line ")
            .map_or(msg.as_str(), |(m, _)| m);
        Failure(format!(
            "{}:{}:{}: {msg}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn build_report(cmd: &str, flags: &Flags) -> Result<(Report, String), Failure> {
    let text = read_input(&flags.input)?;
    let problem = parse_problem(&flags.input, &text)?;
    if problem.kind() != cmd {
        return Err(Failure(format!(
            "{}: problem kind `{}` does not match subcommand `{cmd}`",
            flags.input.display(),
            problem.kind()
        )));
    }
    let tol = flags.tol.or(problem.tol()).unwrap_or(conecert::DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure(format!("tolerance must be positive, got {tol}")));
    }
    let start = Instant::now();
    let outcome = commands::execute(&problem, tol, flags.seed)
        .map_err(|e| Failure(format!("{}: {e}", flags.input.display())))?;
    let elapsed = start.elapsed();
    let report = Report {
        kind: cmd.to_string(),
        input_echo: serde_json::to_value(&problem).expect("plain data"),
        result: outcome.result,
        certificates: outcome.certificates,
        runtime_ms: flags.timing.then_some(elapsed.as_secs_f64() * 1e3),
    };
    Ok((report, outcome.csv))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parse `argv`, run the subcommand and return the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (cmd, flags) = cli.command.parts();
    let result = build_report(cmd, flags).and_then(|(report, csv)| {
        let rendered = match flags.format {
            Format::Json => report::to_json(&report),
            Format::Text => report::to_text(&report),
        };
        write_out(flags.output.as_deref(), &rendered)?;
        if let Some(p) = &flags.dump_csv {
            std::fs::write(p, csv).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
        }
        Ok(report.all_pass())
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("conecert: certificate check failed");
            2
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
