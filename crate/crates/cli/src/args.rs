//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frankl_core::driver::MasterMode;
use frankl_core::separation::Mode;

#[derive(Debug, Parser)]
#[command(name = "frankl", version, about = "Exact FC / Non-FC classification of union-closed families")]
pub struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the JSON artifact here instead of next to the input.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Print incidence matrices of the families in a verdict.
    #[arg(long, global = true)]
    pub matrix: bool,
    /// Label matrix columns and `--branch-first-on` indices by complemented
    /// column index instead of bit mask; implies `--matrix`.
    #[arg(long = "paper-columns", global = true)]
    pub complemented_columns: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a union-closed family is FC.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Master problem: basic LP solution or minimum-ℓ1 integer weights.
        #[arg(long, value_enum, default_value_t = MasterArg::Lp)]
        master: MasterArg,
        /// Iteration cap of the cutting-plane loop (defaults to 4n).
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Check one weight vector against every feasible family.
    CertifyWeights {
        file: PathBuf,
        /// Comma-separated nonnegative weights c_1,...,c_n.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<u64>,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Replay a certificate or fixture document.
    Verify { file: PathBuf },
    /// Structural queries on a family.
    Structure {
        #[arg(value_enum)]
        query: StructureQuery,
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Classify by exhaustive enumeration (n <= 4).
    Oracle { file: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Separation objective.
    #[arg(long, value_enum, default_value_t = ModeArg::MaxViolation)]
    pub mode: ModeArg,
    /// Branch-and-bound node cap (overrides FRANKL_NODE_LIMIT).
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Variables to branch on first, as comma-separated masks.
    #[arg(long, value_delimiter = ',')]
    pub branch_first_on: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Feasibility,
    MaxViolation,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Feasibility => Mode::Feasibility,
            ModeArg::MaxViolation => Mode::MaxViolation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MasterArg {
    Lp,
    Ip,
}

impl From<MasterArg> for MasterMode {
    fn from(m: MasterArg) -> Self {
        match m {
            MasterArg::Lp => MasterMode::LpNormalized,
            MasterArg::Ip => MasterMode::IpL1Min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureQuery {
    Regularity,
    Morris,
    Vaughan,
    SmallerG,
}

impl StructureQuery {
    pub fn suffix(self) -> &'static str {
        match self {
            StructureQuery::Regularity => "regularity",
            StructureQuery::Morris => "morris",
            StructureQuery::Vaughan => "vaughan",
            StructureQuery::SmallerG => "smaller-g",
        }
    }
}
