//! Command-line front end over the germ library: generate germ files, run
//! checks, run the reduction, decide the standard-embedding question.
//!
//! Exit codes: 0 success or affirmative verdict, 1 certified negative
//! verdict or failed check, 2 usage or parse error. Exactly one
//! machine-readable line goes to standard output; human detail goes to
//! standard error; full reports go to files.

mod commands;
mod format;
mod polyparse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "veronese", version, about = "Exact recognition of standard weight-graded germ parametrizations", max_term_width = 100)]
struct Cli {
    /// Seed for the randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Truncation order; defaults to max(q+4, 2q+2).
    #[arg(long, global = true)]
    trunc: Option<u32>,

    /// Number of sampled directions for curve checks.
    #[arg(long, global = true, default_value_t = 10)]
    samples: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a germ file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Check a property of a germ file.
    Check {
        file: PathBuf,
        /// Which property to check.
        #[arg(long, value_enum)]
        what: CheckKind,
    },
    /// Run the normal-form reduction and write a trace file.
    Reduce {
        file: PathBuf,
        /// Where to write the trace.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Verify an existing trace against the germ file instead of
        /// recomputing the pipeline.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Decide whether the germ is a standard weight-graded embedding.
    Decide {
        file: PathBuf,
        /// Write the full report (trace, witness or certificate) here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// The standard monomial germ.
    Veronese {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// A standard germ disguised by a seeded homography and parameter
    /// change.
    Disguise {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        /// Coefficient size bound for the random transformations.
        #[arg(long, default_value_t = 3)]
        magnitude: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// A weight-graded residual family `x_a = s^a (1 + R_|a|)`.
    Family {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        /// Residual factor for weight 2, e.g. "s1^5".
        #[arg(long = "R2")]
        r2: Option<String>,
        #[arg(long = "R3")]
        r3: Option<String>,
        #[arg(long = "R4")]
        r4: Option<String>,
        #[arg(long = "R5")]
        r5: Option<String>,
        #[arg(long = "R6")]
        r6: Option<String>,
        #[arg(long = "R7")]
        r7: Option<String>,
        #[arg(long = "R8")]
        r8: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// The standard germ with one coordinate projected away.
    ProjectDrop {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        /// The dropped coordinate, as comma-separated exponents, e.g. "1,1".
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// The standard germ with explicit perturbations added to components.
    Perturb {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        /// Perturbation "ALPHA:POLY", e.g. "2,0:s2^3"; repeatable.
        #[arg(long = "add", required = true)]
        add: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    /// Order-q osculating regularity.
    Regularity,
    /// Osculating dimensions at every order up to q.
    Osculating,
    /// The shared residual-factor pattern of a curve family.
    Pattern,
    /// Fit a bounded-degree rational curve to sampled line images.
    RncLines,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate { ref kind } => commands::generate(&cli, kind),
        Command::Check { ref file, what } => commands::check(&cli, file, what),
        Command::Reduce { ref file, ref trace_out, ref replay } => {
            commands::reduce(file, trace_out.as_deref(), replay.as_deref())
        }
        Command::Decide { ref file, ref report } => {
            commands::decide(&cli, file, report.as_deref())
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
