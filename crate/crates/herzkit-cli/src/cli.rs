use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "herzkit", version, about = "Anisotropic mixed-norm Herz and Herz-Hardy computations on sampled functions")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mixed Lebesgue norm ‖f‖_q.
    Norm {
        #[command(flatten)]
        source: Source,
        /// Exponents, one per axis (innermost first); `inf` allowed.
        #[arg(long)]
        q: String,
        #[command(flatten)]
        out: Output,
    },
    /// Herz norm with its shell terms and truncation diagnostics.
    Herz {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        herz: HerzArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Hardy-Littlewood maximal function over a ball family.
    Maximal {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Family::Covering)]
        family: Family,
        /// Number of dyadic radii for `--family dyadic`.
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[command(flatten)]
        ratio: RatioArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Fractional integral I_α f.
    Fractional {
        #[command(flatten)]
        source: Source,
        /// Order α with 0 < α < n.
        #[arg(long)]
        order: f64,
        #[command(flatten)]
        ratio: RatioArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Calderón-Zygmund operator (the Hilbert transform in 1D), optionally
    /// as the commutator [b, T].
    Cz {
        #[command(flatten)]
        source: Source,
        /// Builtin spec of the multiplier b of the commutator [b, T].
        #[arg(long)]
        commutator: Option<String>,
        #[command(flatten)]
        ratio: RatioArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Littlewood-Paley square functions.
    Lp {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = SquareFunction::G)]
        kind: SquareFunction,
        #[arg(long, default_value_t = 1.0)]
        aperture: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        /// Scale range 2^j, j_min..=j_max; fitted to the grid when absent.
        #[arg(long, allow_hyphen_values = true)]
        j_min: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        j_max: Option<i32>,
        #[command(flatten)]
        ratio: RatioArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Block, atomic or molecular decomposition.
    Decompose {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = DecompositionKind::Block)]
        kind: DecompositionKind,
        #[command(flatten)]
        herz: HerzArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Molecule decay ε.
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Checks the input as a central atom and as a molecule.
    Atoms {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        q: String,
        /// Vanishing-moment order.
        #[arg(long, default_value_t = 0)]
        s: usize,
        /// Ball index: supp a ⊂ B_k.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        k: i32,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        restricted: bool,
        /// Check a seeded random atom instead of the input.
        #[arg(long)]
        generate: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Runs verification suites.
    Verify {
        /// A suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Iteration bound B, or `auto` to estimate it.
        #[arg(long = "B", default_value = "auto")]
        b: String,
        /// Iteration order K.
        #[arg(long = "K", default_value_t = 12)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Rebuilds Σλa (or Σλb) from a decompose report.
    Synthesize {
        /// A report written by `decompose`.
        #[arg(long)]
        input: PathBuf,
        /// Function to measure residuals against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Adds the remainder bump of an atomic decomposition.
        #[arg(long)]
        with_remainder: bool,
        #[command(flatten)]
        out: Output,
    },
}

/// Where the input function comes from and how builtins are sampled.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Builtin spec `name[:key=value,...]`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Sampled function file (.json or .csv).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Points per axis for builtins, e.g. `129` or `129x65`.
    #[arg(long, default_value = "129")]
    pub grid: String,
    /// Half-width of the sampling box, one value or one per axis.
    #[arg(long = "L", default_value = "8")]
    pub half_width: String,
    /// Anisotropy a, one entry per axis; isotropic when absent.
    #[arg(long)]
    pub a: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct HerzArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Outer exponent p in (0, inf].
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    #[arg(long, allow_hyphen_values = true)]
    pub k_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub k_max: Option<i32>,
    #[arg(long)]
    pub non_homogeneous: bool,
}

/// Norm used for the output/input ratio of operator commands.
#[derive(Debug, Clone, Args)]
pub struct RatioArgs {
    /// Herz parameters `alpha,p`; the ratio uses the mixed norm alone when
    /// absent.
    #[arg(long = "herz")]
    pub herz: Option<String>,
    /// Exponents of the ratio norm; 2 on every axis when absent.
    #[arg(long = "norm-q")]
    pub norm_q: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Dyadic scales of the Schwartz window used by atomic decompositions.
    #[arg(long, allow_hyphen_values = true, default_value_t = -4)]
    pub window_min: i32,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3)]
    pub window_max: i32,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Report path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for data-parallel loops.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed of every random draw; recorded in the report.
    #[arg(long, default_value_t = herzkit::builtins::DEFAULT_SEED)]
    pub seed: u64,
    /// Exit with status 4 when a truncated sum loses more than the threshold.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = herzkit::herz::DEFAULT_TRUNCATION_THRESHOLD)]
    pub truncation_threshold: f64,
    /// Config file of `key = value` lines, overridden by explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Covering,
    Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SquareFunction {
    G,
    Area,
    GStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecompositionKind {
    Block,
    Atomic,
    Molecule,
}
