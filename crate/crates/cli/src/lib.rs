//! Command-line front end: each subcommand evaluates one library surface
//! over parameter grids and prints a deterministic table.

pub mod commands;
pub mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use table::{Cell, Config, Table};

#[derive(Debug, Parser)]
#[command(name = "tsallis-ldp", version, about = "Tables for q-deformed Tsallis statistics and q-binomial large deviations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// q-logarithm, q-exponential, q-product and q-ratio over grids.
    Qfun(QfunArgs),
    /// Exact q-factorials against the rough and precise q-Stirling formulas.
    Stirling(StirlingArgs),
    /// Materialized q-binomial pmf with its normalization constant.
    Pmf(PmfArgs),
    /// q-divergence, α-divergence and the relation between them.
    Divergence(DivergenceArgs),
    /// Tail probabilities, empirical q-rates and the rate function.
    Ldp(LdpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    /// Plain-text pmf record (pmf only).
    Record,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Record => "record",
        })
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QfunArgs {
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Second operand for the q-product and q-ratio columns.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub y: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StirlingArgs {
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    /// Sizes to evaluate; with `--estimate-delta`, the largest size of the schedule.
    #[arg(long, required = true, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Estimate δ_q instead of tabulating the formulas.
    #[arg(long)]
    pub estimate_delta: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, required = true, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Draw this many samples and add an empirical frequency column.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// First distribution, comma separated.
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub p: Vec<f64>,
    /// Reference distribution, comma separated.
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub r: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LdpArgs {
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, required = true, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Validation,
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage | ErrorKind::Validation => 1,
            ErrorKind::Numerical | ErrorKind::Io => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Validation => "validation",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub parameter: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn validation(parameter: &str, message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            parameter: Some(parameter.to_string()),
            message: message.into(),
        }
    }

    /// One-line JSON record for standard error.
    pub fn record(&self) -> String {
        json!({
            "error": self.kind.name(),
            "parameter": self.parameter,
            "message": self.message,
        })
        .to_string()
    }
}

impl From<tsallis_ldp::Error> for CliError {
    fn from(e: tsallis_ldp::Error) -> Self {
        let parameter = match &e {
            tsallis_ldp::Error::InvalidParameter { name, .. } => Some(name.to_string()),
            tsallis_ldp::Error::Domain(d) => Some(d.function.to_string()),
            _ => None,
        };
        let kind = if e.is_numerical() {
            ErrorKind::Numerical
        } else {
            ErrorKind::Validation
        };
        Self {
            kind,
            parameter,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            kind: ErrorKind::Io,
            parameter: None,
            message: e.to_string(),
        }
    }
}

/// The rendered output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Text(String),
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        match (self, format) {
            (Output::Text(s), _) => buf.extend_from_slice(s.as_bytes()),
            (Output::Table(t), Format::Json) => t.write_json(&mut buf)?,
            (Output::Table(t), _) => t.write_csv(&mut buf)?,
        }
        Ok(buf)
    }
}

impl Command {
    fn output_args(&self) -> &OutputArgs {
        match self {
            Command::Qfun(a) => &a.output,
            Command::Stirling(a) => &a.output,
            Command::Pmf(a) => &a.output,
            Command::Divergence(a) => &a.output,
            Command::Ldp(a) => &a.output,
        }
    }
}

/// Validates and evaluates a parsed command.
pub fn execute(command: &Command) -> Result<Output, CliError> {
    let format = command.output_args().format;
    if format == Format::Record && !matches!(command, Command::Pmf(_)) {
        return Err(CliError::validation("format", "record output is only available for pmf"));
    }
    match command {
        Command::Qfun(a) => commands::qfun(a).map(Output::Table),
        Command::Stirling(a) => commands::stirling(a).map(Output::Table),
        Command::Pmf(a) => commands::pmf(a),
        Command::Divergence(a) => commands::divergence(a).map(Output::Table),
        Command::Ldp(a) => commands::ldp(a).map(Output::Table),
    }
}

/// Runs the program on `args` and returns the exit status.
pub fn run<I, T, O, E>(args: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError {
                kind: ErrorKind::Usage,
                parameter: None,
                message: e.kind().to_string(),
            };
            let _ = write!(stderr, "{}", e.render());
            let _ = writeln!(stderr, "{}", err.record());
            return err.kind.exit_code();
        }
    };
    let result = execute(&cli.command).and_then(|out| {
        let args = cli.command.output_args();
        let bytes = out.render(args.format)?;
        match &args.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => stdout.write_all(&bytes)?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.record());
            e.kind.exit_code()
        }
    }
}
