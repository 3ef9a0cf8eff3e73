//! Batch front end for `zariski-core`: reads group, set and requirement
//! documents, runs one library operation and writes a JSON or text report.
//!
//! Exit codes: `0` success, `2` invalid input (bad flags, unreadable or
//! malformed files, rejected data), `3` a bounded search ran out of budget.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Format, Inputs, JobConfig};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "zariski", version, about = "Almost-torsion sets, Zariski closures and orbit constructions")]
pub struct Cli {
    /// JSON job file; flags given here override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Shuffles the order in which a generated requirement net is processed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a set is almost n-torsion.
    Classify(ClassifyArgs),
    /// Zariski closure in normal form.
    Closure(GroupSetArgs),
    /// Decide Zariski density.
    Dense(GroupSetArgs),
    /// Closure guessed from a finite prefix (bounded groups only).
    Oracle(OracleArgs),
    /// Rational independence of 1, x_1, ..., x_d.
    Kronecker(KroneckerArgs),
    /// Weyl sums and discrepancy of a point set.
    Weyl(WeylArgs),
    /// A point whose orbit under a set of integers meets every box.
    Orbit(OrbitArgs),
    /// A homomorphism G -> T^d hitting every box from each family member.
    Hom(HomArgs),
    /// Visit x0 + s·alpha for s in a set of integers.
    Flow(FlowArgs),
}

#[derive(Debug, Args)]
pub struct GroupSetArgs {
    #[arg(long, value_name = "FILE")]
    pub group: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub set: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub io: GroupSetArgs,
    /// Also tabulate fibers over the first N elements.
    #[arg(long, value_name = "N")]
    pub prefix: Option<usize>,
    #[arg(long)]
    pub divisor_bound: Option<u64>,
    #[arg(long)]
    pub threshold: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub io: GroupSetArgs,
    #[arg(long, value_name = "N")]
    pub prefix: Option<usize>,
    #[arg(long)]
    pub modulus_bound: Option<u64>,
    #[arg(long)]
    pub coset_bound: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KroneckerArgs {
    #[arg(long, value_name = "FILE")]
    pub reals: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub k_max: Option<i64>,
    /// Pass threshold 1/m for each Weyl sum.
    #[arg(long)]
    pub m: Option<u64>,
    /// Greedy low-discrepancy reordering (exact points only).
    #[arg(long)]
    pub reorder: bool,
}

#[derive(Debug, Args)]
pub struct NetArgs {
    #[arg(long, value_name = "FILE")]
    pub reqs: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Box radius for a generated net, e.g. "1/8".
    #[arg(long)]
    pub epsilon: Option<String>,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// Subset of Z as a set expression.
    #[arg(long, value_name = "FILE")]
    pub set: Option<PathBuf>,
    /// Explicit list of integers, used instead of --set.
    #[arg(long, value_name = "FILE")]
    pub stream: Option<PathBuf>,
    #[command(flatten)]
    pub net: NetArgs,
    /// Level of a generated net (0, or n >= 2 for the n-torsion points).
    #[arg(long)]
    pub level: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HomArgs {
    #[arg(long, value_name = "FILE")]
    pub group: Option<PathBuf>,
    /// JSON array of set expressions.
    #[arg(long, value_name = "FILE")]
    pub family: Option<PathBuf>,
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long)]
    pub backtrack_budget: Option<usize>,
    #[arg(long)]
    pub max_walk: Option<usize>,
    /// Extend the result to be injective on the first N group elements.
    #[arg(long, value_name = "N")]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, value_name = "FILE")]
    pub set: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub alpha: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub x0: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub boxes: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub prefix: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Closure(_) => "closure",
            Command::Dense(_) => "dense",
            Command::Oracle(_) => "oracle",
            Command::Kronecker(_) => "kronecker",
            Command::Weyl(_) => "weyl",
            Command::Orbit(_) => "orbit",
            Command::Hom(_) => "hom",
            Command::Flow(_) => "flow",
        }
    }

    fn into_config(self) -> JobConfig {
        let command = Some(self.name().to_string());
        let gs = |a: GroupSetArgs| Inputs { group: a.group, set: a.set, ..Inputs::default() };
        match self {
            Command::Classify(a) => JobConfig {
                command,
                inputs: gs(a.io),
                prefix: a.prefix,
                divisor_bound: a.divisor_bound,
                threshold: a.threshold,
                ..JobConfig::default()
            },
            Command::Closure(a) | Command::Dense(a) => JobConfig { command, inputs: gs(a), ..JobConfig::default() },
            Command::Oracle(a) => JobConfig {
                command,
                inputs: gs(a.io),
                prefix: a.prefix,
                modulus_bound: a.modulus_bound,
                coset_bound: a.coset_bound,
                ..JobConfig::default()
            },
            Command::Kronecker(a) => {
                JobConfig { command, inputs: Inputs { reals: a.reals, ..Inputs::default() }, ..JobConfig::default() }
            }
            Command::Weyl(a) => JobConfig {
                command,
                inputs: Inputs { points: a.points, ..Inputs::default() },
                k_max: a.k_max,
                m: a.m,
                reorder: a.reorder.then_some(true),
                ..JobConfig::default()
            },
            Command::Orbit(a) => JobConfig {
                command,
                inputs: Inputs { set: a.set, stream: a.stream, reqs: a.net.reqs, ..Inputs::default() },
                dim: a.net.dim,
                epsilon: a.net.epsilon,
                level: a.level,
                ..JobConfig::default()
            },
            Command::Hom(a) => JobConfig {
                command,
                inputs: Inputs { group: a.group, family: a.family, reqs: a.net.reqs, ..Inputs::default() },
                dim: a.net.dim,
                epsilon: a.net.epsilon,
                backtrack_budget: a.backtrack_budget,
                max_walk: a.max_walk,
                window: a.window,
                ..JobConfig::default()
            },
            Command::Flow(a) => JobConfig {
                command,
                inputs: Inputs { set: a.set, alpha: a.alpha, x0: a.x0, boxes: a.boxes, ..Inputs::default() },
                prefix: a.prefix,
                ..JobConfig::default()
            },
        }
    }
}

/// Parses arguments, runs the job and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("zariski: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let name = cli.command.name();
    let top = JobConfig {
        output: cli.output,
        format: cli.format,
        seed: cli.seed,
        ..cli.command.into_config()
    };
    let job = match &cli.config {
        Some(path) => {
            let file = JobConfig::load(path)?;
            if let Some(c) = file.command.as_deref().filter(|&c| c != name) {
                return Err(CliError::Usage(format!("job file is for `{c}`, not `{name}`")));
            }
            file.overlay(&top)
        }
        None => top,
    };
    let report = commands::dispatch(&job)?;
    report.write(job.format(), job.output.as_deref())
}
