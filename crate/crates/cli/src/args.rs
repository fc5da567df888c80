use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmat::table::DEFAULT_DEPTH_CAP;

#[derive(Debug, Parser)]
#[command(name = "rmat", version, about = "R-MAT graph generator with constant work per edge")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an edge list.
    Generate(GenerateArgs),
    /// Chi-square test of generated (or stored) edges against the exact cell probabilities.
    Verify(VerifyArgs),
    /// Throughput and samples per edge as a function of table size, as CSV.
    BenchTablesize(BenchTablesizeArgs),
    /// Throughput as a function of thread count, as CSV.
    BenchThreads(BenchThreadsArgs),
    /// Print the fragment table, one `row col depth prob` line per entry.
    TableDump(TableDumpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Probability of the top-left quadrant.
    #[arg(short = 'a', default_value_t = 0.57, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(short = 'b', default_value_t = 0.19, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(short = 'c', default_value_t = 0.19, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(short = 'd', default_value_t = 0.05, allow_negative_numbers = true)]
    pub d: f64,
    /// log2 of the node count.
    #[arg(short = 'k', default_value_t = 20)]
    pub k: u32,
    /// Number of edges.
    #[arg(short = 'm', default_value_t = 1_000_000)]
    pub m: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKindArg {
    Fixed,
    Variable,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long = "table", value_enum, default_value_t = TableKindArg::Variable)]
    pub kind: TableKindArg,
    /// Fragment depth of a fixed table (4^depth entries).
    #[arg(long, conflicts_with = "size")]
    pub depth: Option<u32>,
    /// Entry limit of a variable table, or entry count (a power of 4) of a fixed one.
    #[arg(long)]
    pub size: Option<usize>,
    /// Deepest fragment a variable table may hold.
    #[arg(long, default_value_t = DEFAULT_DEPTH_CAP)]
    pub depth_cap: u32,
    /// Multiply each table probability by a seeded factor in [1-noise, 1+noise].
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ThreadArgs {
    /// Worker threads; defaults to the available cores.
    #[arg(long, env = "RMAT_THREADS")]
    pub threads: Option<usize>,
    /// Edges per generator block.
    #[arg(long, default_value_t = rmat::generator::DEFAULT_BLOCK_SIZE)]
    pub block_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Binary,
    Text,
    None,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub table: TableArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
    /// Mirror every edge into the lower triangle (u >= v).
    #[arg(long)]
    pub undirected: bool,
    /// Relabel vertices by a seeded permutation.
    #[arg(long)]
    pub scramble: bool,
    /// Drop repeated edges within each block, or each tile when partitioned.
    #[arg(long)]
    pub dedup: bool,
    /// Resample until every tile's edges are distinct.
    #[arg(long, requires = "tiles")]
    pub distinct: bool,
    /// Split the matrix into 2^t x 2^t tiles.
    #[arg(long = "tiles", value_name = "T")]
    pub tiles: Option<u32>,
    /// Number of parts sharing the tile rows.
    #[arg(long, value_name = "P", requires = "tiles")]
    pub parts: Option<u64>,
    /// Generate only this part.
    #[arg(long, value_name = "I", requires_all = ["parts", "tiles"])]
    pub part: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub table: TableArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
    /// Test the naive recursive sampler instead of the table generator.
    #[arg(long, conflicts_with = "input")]
    pub naive: bool,
    /// Test edges read from a binary edge file instead of generating them.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = rmat::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct BenchTablesizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
    /// Table kinds to sweep.
    #[arg(long = "table", value_enum, num_args = 1.., value_delimiter = ',', default_value = "fixed,variable")]
    pub kinds: Vec<TableKindArg>,
    /// Table sizes, ascending. Fixed tables use the largest power of 4 not above each size + 3.
    #[arg(long, value_delimiter = ',', default_value = "13,61,253,1021,4093,16381,65533")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = rmat::table::DEFAULT_DEPTH_CAP)]
    pub depth_cap: u32,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// CSV path; standard output when absent.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchThreadsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub table: TableArgs,
    /// Thread counts to measure.
    #[arg(long = "thread-list", value_delimiter = ',', default_value = "1,2,4")]
    pub thread_list: Vec<usize>,
    #[arg(long, default_value_t = rmat::generator::DEFAULT_BLOCK_SIZE)]
    pub block_size: usize,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// CSV path; standard output when absent.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableDumpArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub table: TableArgs,
    /// Output path; standard output when absent.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}
