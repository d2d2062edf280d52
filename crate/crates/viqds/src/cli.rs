//! Argument parsing and dispatch.
//!
//! Exit codes: 0 when every check passes, 1 when a reported bound is
//! violated, 2 for usage or configuration errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, InstrumentSpec};
use crate::error::{AppError, AppResult};
use crate::report::{Format, Report};
use crate::scenario::Scenario;

pub const DEFAULT_SEED: u64 = 20_240_917;

fn parse_prime(s: &str) -> Result<u32, String> {
    let p: u32 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if viqds_core::field::is_prime(p) {
        Ok(p)
    } else {
        Err("p must be prime".into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "viqds", version, about = "Exact checks, soundness games and signature simulations")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Qudit dimension (prime).
    #[arg(long, global = true, default_value = "2", value_parser = parse_prime)]
    pub p: u32,
    /// Number of concatenated components.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub l: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, global = true, env = "VIQDS_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact completeness and soundness of the l-fold protocol.
    Exact,
    /// Optimal stateless prover, with a dual certificate.
    Soundness {
        /// Solve the t-fold tensored game.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        tensor: u64,
        /// Moduli of a mixed tensor product, e.g. `2,3`.
        #[arg(long, value_delimiter = ',', value_parser = parse_prime, conflicts_with_all = ["tensor", "game"])]
        components: Vec<u32>,
        /// Solve a game read from JSON.
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Transcript witness-independence of verifier instruments.
    Zk {
        /// Comma-separated: honest, identity, computational, eigenbasis[:t],
        /// random:N, file:PATH.
        #[arg(long, value_delimiter = ',')]
        instruments: Vec<InstrumentSpec>,
    },
    /// Signature sessions from a scenario file.
    Viqds {
        /// Scenario JSON; without it, honest sessions at --p.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write one JSON line per session here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Every experiment with default sizes.
    Suite,
}

fn run(cli: &Cli) -> AppResult<Report> {
    let c = &cli.common;
    let l = c.l as usize;
    let reps = c.reps as usize;
    match &cli.command {
        Command::Exact => commands::exact(c.p, l, c.seed),
        Command::Soundness {
            tensor,
            components,
            game,
        } => match game {
            Some(path) => commands::soundness_file(path),
            None if !components.is_empty() => commands::soundness(components),
            None => commands::soundness(&vec![c.p; *tensor as usize]),
        },
        Command::Zk { instruments } => {
            let specs = if instruments.is_empty() {
                commands::default_instruments()
            } else {
                instruments.clone()
            };
            commands::zk(c.p, l, &specs, c.seed)
        }
        Command::Viqds { scenario, log } => {
            let scenario = match scenario {
                Some(path) => Scenario::load(path)?,
                None => {
                    let mut s = Scenario::honest(c.p, c.seed, reps);
                    s.l = l;
                    s
                }
            };
            let out = commands::viqds(&scenario, reps)?;
            if let Some(path) = log {
                let mut text = String::new();
                for line in &out.log {
                    text += &serde_json::to_string(line).expect("serializable");
                    text.push('\n');
                }
                std::fs::write(path, text).map_err(|e| AppError::Io(path.display().to_string(), e))?;
            }
            Ok(out.report)
        }
        Command::Suite => commands::suite(c.seed, reps),
    }
}

/// Parses `args`, runs, writes the report, and returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let text = report.render(cli.common.format);
    let written = match &cli.common.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| AppError::Io(path.display().to_string(), e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| AppError::Io("stdout".into(), e)),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 2;
    }
    if report.pass {
        0
    } else {
        1
    }
}

pub fn main() -> i32 {
    main_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
