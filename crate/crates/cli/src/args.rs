use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shm_core::{Rational, Registers};

#[derive(Debug, Parser)]
#[command(name = "shm", version, about = "Run and analyse Shoenfield register machines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Include wall-clock timing in structured output (breaks byte-identical
    /// reruns).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a deterministic program.
    Run(RunArgs),
    /// Build and export the non-deterministic computation tree.
    Tree(TreeArgs),
    /// Exact acceptance probability by exhaustive enumeration.
    Prob(ProbArgs),
    /// Monte Carlo estimate of the acceptance probability.
    Estimate(EstimateArgs),
    /// Bounded-error decision around 1/2.
    Decide(DecideArgs),
    /// Generate a random program.
    Gen(GenArgs),
    /// Validate a program file.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Naive,
    Memoized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecideModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenMode {
    Det,
    Nondet,
    Prob,
}

/// Options shared by every command that executes a program.
#[derive(Debug, Args)]
pub struct MachineArgs {
    /// Program file in `.shm` format.
    pub file: PathBuf,

    /// Input register, `INDEX=VALUE`; repeatable.
    #[arg(long = "reg", value_name = "I=V", value_parser = parse_register)]
    pub registers: Vec<(usize, u64)>,

    /// Register whose positive value marks a halted configuration accepting.
    #[arg(long, default_value_t = 0)]
    pub accept_reg: usize,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl MachineArgs {
    pub fn inputs(&self) -> Registers {
        let mut inputs = Registers::new();
        for &(r, v) in &self.registers {
            inputs.insert(r, v);
        }
        inputs
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub machine: MachineArgs,

    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,

    /// List every configuration of the computation chain.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub machine: MachineArgs,

    #[arg(long, default_value_t = 10)]
    pub depth: u64,

    #[arg(long, default_value_t = 10_000)]
    pub node_budget: usize,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[command(flatten)]
    pub machine: MachineArgs,

    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,

    #[arg(long, value_enum, default_value_t = EngineArg::Memoized)]
    pub engine: EngineArg,

    /// Cap on explored states.
    #[arg(long, env = "SHM_NODE_CAP", default_value_t = 10_000_000)]
    pub node_cap: u64,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub machine: MachineArgs,

    /// Target accuracy, e.g. `1/10`.
    #[arg(long, value_parser = parse_rational)]
    pub epsilon: Rational,

    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[command(flatten)]
    pub machine: MachineArgs,

    /// Acceptance gap around 1/2, e.g. `1/6`.
    #[arg(long, value_parser = parse_rational)]
    pub eta: Rational,

    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,

    #[arg(long, value_enum, default_value_t = DecideModeArg::Exact)]
    pub mode: DecideModeArg,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, env = "SHM_NODE_CAP", default_value_t = 10_000_000)]
    pub node_cap: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenMode::Prob)]
    pub mode: GenMode,

    /// Line count, `N` or a range `A..B` (inclusive).
    #[arg(long, default_value = "1..8", value_parser = parse_line_range)]
    pub lines: (usize, usize),

    #[arg(long, default_value_t = 3)]
    pub max_choices: usize,

    /// Registers are drawn from `0..registers`.
    #[arg(long, default_value_t = 4)]
    pub registers: usize,

    /// How far past the last line jump targets may point.
    #[arg(long, default_value_t = 2)]
    pub jump_slack: usize,

    #[arg(long, default_value_t = 12)]
    pub denominator_bound: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub file: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_register(s: &str) -> Result<(usize, u64), String> {
    let (r, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected INDEX=VALUE, got `{s}`"))?;
    let r = r.trim().parse().map_err(|e| format!("bad register index: {e}"))?;
    let v = v.trim().parse().map_err(|e| format!("bad register value: {e}"))?;
    Ok((r, v))
}

/// Accepts `a/b`, integers and plain decimals (`0.1` is exactly 1/10).
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((whole, frac)) = s.split_once('.') {
        let digits = format!("{whole}{frac}");
        let numerator = Rational::from_str(&digits).map_err(|e| format!("bad number `{s}`: {e}"))?;
        let scale = Rational::from_str(&format!("1{}", "0".repeat(frac.len()))).expect("power of ten");
        return Ok(numerator / scale);
    }
    Rational::from_str(s).map_err(|e| format!("bad rational `{s}`: {e}"))
}

fn parse_line_range(s: &str) -> Result<(usize, usize), String> {
    let bad = |e: std::num::ParseIntError| format!("bad line count `{s}`: {e}");
    match s.split_once("..") {
        Some((a, b)) => Ok((a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?)),
        None => {
            let n = s.trim().parse().map_err(bad)?;
            Ok((n, n))
        }
    }
}
