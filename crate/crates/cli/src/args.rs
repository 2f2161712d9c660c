use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cme-exact", version, about = "Exact and oracle solvers for stochastic reaction systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form distribution p_n(t), dispatched on the system class.
    SolveClosed(Common),
    /// Truncated master equation integrated with RK4.
    SolveMaster(Common),
    /// Gillespie simulation with empirical probabilities and standard errors.
    Simulate(Common),
    /// First three cumulants from the closed-form generating function.
    Moments(Common),
    /// Sup-norm distance between closed form and master equation.
    Compare(Common),
    /// Mean and variance over the simplex beta + gamma + tau = 1 for
    /// birth, pair creation and decay.
    SweepTernary(Sweep),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// System file in DSL or JSON form; `-` reads standard input.
    #[arg(long, conflicts_with = "dsl", required_unless_present = "dsl")]
    pub system: Option<String>,
    /// Inline DSL text.
    #[arg(long)]
    pub dsl: Option<String>,
    /// Initial state: counts such as `100` or `5,1`, or a JSON distribution.
    #[arg(long)]
    pub initial: Option<String>,
    /// Comma-separated ascending sample times.
    #[arg(long, default_value = "0")]
    pub times: String,
    /// Total-degree cutoff of the generating-function series.
    #[arg(long)]
    pub max_deg: Option<usize>,
    /// Per-species truncation of the master equation.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// RK4 step for the master equation.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub traj: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct Sweep {
    /// Initial particle count.
    #[arg(long, default_value = "100")]
    pub initial: String,
    #[arg(long, default_value = "1,4,16")]
    pub times: String,
    /// Grid spacing on the simplex; must divide 1.
    #[arg(long, default_value_t = 0.02)]
    pub step: f64,
    #[arg(long)]
    pub max_deg: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}
