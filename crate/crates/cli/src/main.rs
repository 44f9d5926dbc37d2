use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "roundness-lab", version, about = "Generalized roundness of finite metric spaces")]
struct Cli {
    /// Worker threads for parallel loops.
    #[arg(long, global = true, env = "ROUNDNESS_LAB_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the generalized roundness of a space file.
    Gr(GrArgs),
    /// Search for a violating 2n-gon at a fixed exponent.
    Search(SearchArgs),
    /// Generate an example space.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
        #[command(flatten)]
        out: GenOutput,
    },
    /// Build an embedding of a space.
    Embed {
        #[command(subcommand)]
        kind: EmbedKind,
    },
    /// Generalized roundness across a family of growing spaces, as CSV.
    Sweep(SweepArgs),
    /// Deficiency and extremal values over a grid of exponents, as CSV.
    Curve(CurveArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct Bisection {
    #[arg(long, default_value_t = roundness_core::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = roundness_core::DEFAULT_P_MAX)]
    pub pmax: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GrArgs {
    pub space: PathBuf,
    #[command(flatten)]
    pub bisection: Bisection,
    /// Recorded in the CSV row; the computation is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Accept input that fails metric validation.
    #[arg(long)]
    pub force: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the one-row summary CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    pub space: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value = "local")]
    pub strategy: String,
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long = "max-n", default_value_t = 4)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent search streams; results depend on this, not on --jobs.
    #[arg(long, default_value_t = 8)]
    pub workers: usize,
    #[arg(long)]
    pub force: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GenFamily {
    Zn {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        radius: usize,
    },
    Free {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        radius: usize,
    },
    Hypercube {
        #[arg(long)]
        n: usize,
    },
    Grid {
        /// Side lengths, comma separated.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
    },
    Cycle {
        #[arg(long)]
        n: usize,
    },
    Path {
        #[arg(long)]
        n: usize,
    },
    Lp {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Graph metric of an edge-list file.
    Graph { edges: PathBuf },
}

#[derive(Debug, Args, Serialize)]
pub struct GenOutput {
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Also write the graph as an edge list (graph families only).
    #[arg(long, global = true)]
    pub edges_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EmbedKind {
    /// Half-space embedding of a median graph into l1.
    L1(L1Args),
    /// Euclidean points realizing d^p as squared distances.
    Gns(GnsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct L1Args {
    /// Edge list, or a space file whose unit-distance pairs are the edges.
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub basepoint: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GnsArgs {
    pub space: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub basepoint: usize,
    #[arg(long)]
    pub force: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// One of zn, free, hypercube, grid.
    pub family: String,
    /// Rank for zn/free, number of axes for grid.
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// First radius (hypercube dimension, grid side length).
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    #[arg(long)]
    pub to: usize,
    #[command(flatten)]
    pub bisection: Bisection,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    pub space: PathBuf,
    /// Side a of a fixed configuration, comma separated point indices.
    #[arg(long, value_delimiter = ',', requires = "b")]
    pub a: Vec<usize>,
    #[arg(long, value_delimiter = ',', requires = "a")]
    pub b: Vec<usize>,
    /// Without --a/--b, the curve tracks the worst configuration up to this size.
    #[arg(long = "max-n", default_value_t = 2)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = roundness_core::DEFAULT_P_MAX)]
    pub pmax: f64,
    #[arg(long)]
    pub force: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// 2 for validation failures, 3 for size caps, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    use roundness_core::Error;
    let core = err.chain().find_map(|e| e.downcast_ref::<Error>());
    match core {
        Some(Error::SizeCap { .. }) => 3,
        Some(_) => 2,
        None if err.chain().any(|e| e.downcast_ref::<serde_json::Error>().is_some()) => 2,
        None if err.chain().any(|e| e.downcast_ref::<commands::ValidationFailure>().is_some()) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Gr(args) => commands::gr(&args),
        Command::Search(args) => commands::search(&args),
        Command::Gen { family, out } => commands::gen(&family, &out),
        Command::Embed { kind: EmbedKind::L1(args) } => commands::embed_l1(&args),
        Command::Embed { kind: EmbedKind::Gns(args) } => commands::embed_gns(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Curve(args) => commands::curve(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
