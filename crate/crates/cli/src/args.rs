use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "povm-certify",
    version,
    about = "Certify that measurement schemes distinguish bounded-rank quantum states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (falls back to POVM_CERTIFY_THREADS, then all cores).
    #[arg(long, global = true, env = "POVM_CERTIFY_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Artifact path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Raise log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `k` Haar rank-one POVMs with `m` outcomes.
    RankOne,
    /// `m` random product observables on the `--dims` factors.
    Observables,
    /// `m` frame vectors (Gaussian, or Parseval with `--parseval`).
    Frame,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Eigenbases of the three Pauli matrices.
    Mub,
    /// Symmetric three-outcome qubit POVM.
    Trine,
    /// Computational-basis measurement on C^n.
    Computational,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintArg {
    Free,
    UnitTrace,
    Sphere,
    TracelessSphere,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// Wirtinger-gradient identities against finite differences.
    Identities,
    /// Nullity of the trivial-partition linear system.
    Nullity,
    /// Rank of the diagonal commutator span.
    Commutators,
    /// Measured dimensions of the representing and state sets.
    Secant,
}

/// Where a scheme comes from: a file, a preset, or a seeded random draw.
#[derive(Args, Debug, Clone, Serialize)]
pub struct SchemeSource {
    /// Scheme JSON file.
    #[arg(long = "in", conflicts_with = "preset")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum, default_value_t = Family::RankOne)]
    pub family: Family,
    /// Hilbert-space dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of POVMs.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Outcomes per POVM, observables, or frame vectors (default n).
    #[arg(long)]
    pub m: Option<usize>,
    /// Local dimensions for observables, e.g. 2,2.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Traceless observable factors.
    #[arg(long)]
    pub pauli: bool,
    /// Parseval frames (rows of a Haar isometry).
    #[arg(long)]
    pub parseval: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub scheme: SchemeSource,
    /// State rank bound.
    #[arg(long, alias = "rank", default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = povm_certify::certify::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = povm_certify::certify::MAX_ITERATIONS)]
    pub max_iterations: usize,
    /// Decide completeness on all states by linear algebra, ignoring `--r`.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Sample a scheme and write it as JSON.
    Gen {
        #[command(flatten)]
        scheme: SchemeSource,
    },
    /// Decide whether a scheme is complete on rank-r states.
    Certify(CertifyArgs),
    /// Estimate the stability constant of a scheme.
    Kappa(CertifyArgs),
    /// Re-certify random schemes inside the stability ball.
    Stability {
        #[command(flatten)]
        certify: CertifyArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Measure the dimension of a bounded-rank set by Jacobian rank.
    Dimension {
        #[arg(long)]
        n: usize,
        /// Rank bound of the set.
        #[arg(long, alias = "rank")]
        r: usize,
        #[arg(long, value_enum, default_value_t = ConstraintArg::Free)]
        constraint: ConstraintArg,
        /// Sample points.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Numerical checks of the gradient identities and partition probes.
    Lab {
        #[arg(long, value_enum)]
        probe: Probe,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Rows of the isometry or size of the hermitian matrix.
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, alias = "rank", default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Completeness frequencies of random POVM or observable schemes.
    Sweep {
        #[arg(long, value_enum, default_value_t = Family::RankOne)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, alias = "rank", default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Sizes to sweep: a list `4,5,6` or a range `4..=6`.
        #[arg(long)]
        m: String,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        pauli: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = povm_certify::certify::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Injectivity frequencies of random frames on rank-r matrices.
    Frames {
        #[arg(long)]
        n: usize,
        #[arg(long, alias = "rank", default_value_t = 1)]
        r: usize,
        #[arg(long)]
        m: String,
        #[arg(long)]
        parseval: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = povm_certify::certify::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Recover random rank-r states from their data, or exhibit an ambiguous pair.
    Reconstruct {
        #[command(flatten)]
        scheme: SchemeSource,
        #[arg(long, alias = "rank", default_value_t = 1)]
        r: usize,
        /// Number of random states.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Search for a kernel witness and report the two states it confuses.
        #[arg(long)]
        ambiguity: bool,
    },
    /// Recompute the von Neumann measurement table.
    Table1,
}

/// Parses `4,5,6`, `4..=6` or `4..7`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid size list `{text}`; use `4,5,6`, `4..=6` or `4..7`");
    if let Some((a, b)) = text.split_once("..") {
        let lo: usize = a.trim().parse().map_err(|_| bad())?;
        let (hi, inclusive) = match b.strip_prefix('=') {
            Some(rest) => (rest.trim().parse::<usize>().map_err(|_| bad())?, true),
            None => (b.trim().parse::<usize>().map_err(|_| bad())?, false),
        };
        let v: Vec<usize> = if inclusive { (lo..=hi).collect() } else { (lo..hi).collect() };
        if v.is_empty() {
            return Err(bad());
        }
        Ok(v)
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
    }
}
