//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::execute;
use crate::config::{ExperimentConfig, Format, Kind, Overrides};
use crate::error::CliError;
use crate::report::{write_outputs, Written};
use crate::schema::EXPERIMENT_SCHEMA;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_CHECKS_FAILED: u8 = 2;

/// Failing checks echoed to stderr.
const FAILURES_SHOWN: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "seqmc", version, about = "Sequential maximum-confidence discrimination experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-state closed forms and channels over a (p, theta) grid.
    TwoState(RunArgs),
    /// Confidence decay of geometric-uniform ensembles.
    Gu(RunArgs),
    /// One multi-party run with its transcript.
    Sequential(RunArgs),
    /// Party-count bounds against direct iteration.
    Bounds(RunArgs),
    /// Bundled oracle suites.
    Verify(RunArgs),
    /// Any config, dispatched on its `kind`.
    Run(RunArgs),
    /// Validates a config and prints its normal form.
    Validate(SourceArgs),
    /// Prints the configuration schema.
    Schema,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Path to a JSON config.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Config given as a JSON string.
    #[arg(long, value_name = "JSON")]
    pub inline: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR", env = "SEQMC_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Only report errors.
    #[arg(long, short)]
    pub quiet: bool,
}

impl SourceArgs {
    fn load(&self, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
        match (&self.config, &self.inline) {
            (Some(path), _) => ExperimentConfig::from_path(path, overrides),
            (None, Some(text)) => ExperimentConfig::from_json_str(text, overrides),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

/// Result of a completed command.
#[derive(Debug)]
pub struct Completed {
    pub passed: bool,
    pub written: Option<Written>,
}

impl Completed {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_CHECKS_FAILED
        }
    }
}

pub fn dispatch(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> Result<Completed, CliError> {
    let (args, required) = match cli.command {
        Command::Schema => {
            write_stdout(out, EXPERIMENT_SCHEMA.as_bytes())?;
            return Ok(Completed { passed: true, written: None });
        }
        Command::Validate(source) => {
            let cfg = source.load(&Overrides::default())?;
            let mut text = serde_json::to_vec_pretty(&cfg.to_value()).map_err(CliError::Json)?;
            text.push(b'\n');
            write_stdout(out, &text)?;
            return Ok(Completed { passed: true, written: None });
        }
        Command::TwoState(a) => (a, Some(Kind::TwoStateSweep)),
        Command::Gu(a) => (a, Some(Kind::GuSweep)),
        Command::Sequential(a) => (a, Some(Kind::SequentialRun)),
        Command::Bounds(a) => (a, Some(Kind::Bounds)),
        Command::Verify(a) => (a, Some(Kind::Verify)),
        Command::Run(a) => (a, None),
    };

    let overrides = Overrides {
        seed: args.seed,
        trials: args.trials,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
    };
    let cfg = args.source.load(&overrides)?;
    if let Some(kind) = required {
        if kind != cfg.kind {
            return Err(CliError::KindMismatch {
                expected: kind.as_str(),
                found: cfg.kind.as_str(),
            });
        }
    }

    let outcome = execute(&cfg)?;
    let format = cfg.output.format;
    let data = match format {
        Format::Csv => &outcome.csv,
        Format::Json => &outcome.json,
    };
    let report = outcome.checks.report();
    let written = write_outputs(&args.out, cfg.stem(), format.extension(), data, &report)?;

    if !args.quiet {
        let line = format!(
            "{}: {} checks, {} failed; wrote {} and {}\n",
            cfg.kind.as_str(),
            report.total,
            report.failed,
            written.data.display(),
            written.checks.display(),
        );
        write_stdout(out, line.as_bytes())?;
        for f in report.failures.iter().take(FAILURES_SHOWN) {
            let _ = writeln!(
                err,
                "FAILED {} [{}]: expected {} actual {} tolerance {}",
                f.check,
                f.context.as_deref().unwrap_or("-"),
                f.expected,
                f.actual,
                f.tolerance.map_or("-".to_string(), |t| format!("{t:e}")),
            );
        }
    }
    Ok(Completed {
        passed: report.passed,
        written: Some(written),
    })
}

fn write_stdout(out: &mut impl Write, bytes: &[u8]) -> Result<(), CliError> {
    out.write_all(bytes)
        .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
}
