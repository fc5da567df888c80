mod args;

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::Parser;
use log::warn;
use rmat::bench::{sweep_table_sizes, sweep_threads, write_csv, SweepConfig};
use rmat::generator::{default_threads, naive_edges};
use rmat::io::{read_binary, write_edges, Format};
use rmat::partition::{generate_part, plan_tiles, PartitionPlan, Tile};
use rmat::postprocess::{dedup_local, to_undirected, DedupScope, ScrambleKey};
use rmat::rng::{Domain, StreamKey, StreamRng};
use rmat::stats::{chi_square, chi_square_pooled, exact_cell_probs, CellHistogram};
use rmat::table::MAX_FIXED_DEPTH;
use rmat::{Edge, FragmentTable, GenConfig, Generator, RmatParams, TableSpec};

use args::*;

const DEFAULT_FIXED_DEPTH: u32 = 8;
const DEFAULT_VARIABLE_SIZE: usize = 4093;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", message.join(" "));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Verify(a) => verify(a),
        Command::BenchTablesize(a) => bench_tablesize(a),
        Command::BenchThreads(a) => bench_threads(a),
        Command::TableDump(a) => table_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn params(m: &ModelArgs) -> Result<RmatParams> {
    Ok(RmatParams::new(m.a, m.b, m.c, m.d, m.k)?)
}

fn table_spec(t: &TableArgs) -> Result<TableSpec> {
    Ok(match t.kind {
        TableKindArg::Fixed => match (t.depth, t.size) {
            (Some(depth), _) => TableSpec::Fixed { depth },
            (None, Some(size)) => TableSpec::fixed_with_size(size)?,
            (None, None) => TableSpec::Fixed { depth: DEFAULT_FIXED_DEPTH },
        },
        TableKindArg::Variable => {
            if t.depth.is_some() {
                bail!("--depth applies to fixed tables; use --size for a variable table");
            }
            TableSpec::Variable {
                size_limit: t.size.unwrap_or(DEFAULT_VARIABLE_SIZE),
                depth_cap: t.depth_cap,
            }
        }
    })
}

fn build_table(params: &RmatParams, t: &TableArgs, seed: u64) -> Result<FragmentTable> {
    let table = table_spec(t)?.build(params)?;
    if t.noise == 0.0 {
        return Ok(table);
    }
    let mut rng = StreamRng::new(StreamKey::new(Domain::Perturb, seed, &[]));
    Ok(table.perturb(t.noise, &mut rng)?)
}

fn threads(t: &ThreadArgs) -> Result<usize> {
    ensure!(t.block_size > 0, "--block-size must be positive");
    match t.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => Ok(n),
        None => Ok(default_threads()),
    }
}

/// Runs `f` against `path` or standard output. A file is written under a
/// temporary name in the same directory and renamed only when `f` succeeds.
fn with_output<T>(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<T>) -> Result<T> {
    match path {
        Some(path) => {
            let dir = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("cannot create a file in {}", dir.display()))?;
            let mut w = BufWriter::new(tmp);
            let value = f(&mut w)?;
            let tmp = w.into_inner().map_err(|e| e.into_error())?;
            tmp.persist(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            Ok(value)
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            let value = f(&mut w)?;
            w.flush()?;
            Ok(value)
        }
    }
}

/// Per-unit postprocessing. A unit is one generator block, or one tile in a
/// partitioned run. Duplicates are removed first, while edges still lie in
/// their tile; with `undirected` a second pass removes mirrored pairs.
struct Pipeline {
    scramble: Option<ScrambleKey>,
    undirected: bool,
    dedup: bool,
}

impl Pipeline {
    fn is_identity(&self) -> bool {
        self.scramble.is_none() && !self.undirected && !self.dedup
    }

    fn apply<'e>(&self, edges: &'e [Edge], scope: DedupScope) -> Result<Cow<'e, [Edge]>> {
        if self.is_identity() {
            return Ok(Cow::Borrowed(edges));
        }
        let mut out = if self.dedup {
            dedup_local(edges, scope)?
        } else {
            edges.to_vec()
        };
        if let Some(key) = &self.scramble {
            out.iter_mut().for_each(|e| *e = key.scramble_edge(*e));
        }
        if self.undirected {
            out.iter_mut().for_each(|e| *e = to_undirected(*e));
            if self.dedup {
                out = dedup_local(&out, DedupScope::Block)?;
            }
        }
        Ok(Cow::Owned(out))
    }
}

struct Summary {
    edges: u64,
    seconds: f64,
    samples: Option<u64>,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edges={} seconds={:.6} edges_per_sec={:.0}",
            self.edges,
            self.seconds,
            self.edges as f64 / self.seconds.max(f64::MIN_POSITIVE)
        )?;
        match self.samples {
            Some(s) => write!(f, " samples={s} samples_per_edge={:.4}", s as f64 / self.edges.max(1) as f64),
            None => write!(f, " samples=na samples_per_edge=na"),
        }
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let p = params(&args.model)?;
    let (k, m, seed) = (p.k(), args.model.m, args.model.seed);
    let threads = threads(&args.threads)?;
    let block_size = args.threads.block_size;
    let table = build_table(&p, &args.table, seed)?;
    if args.undirected && p.b() != p.c() {
        warn!("--undirected with b != c: mirroring folds two unequal quadrants together");
    }
    let format = match args.format {
        FormatArg::Binary => Format::Binary,
        FormatArg::Text => Format::Text,
        FormatArg::None => Format::None,
    };
    if format == Format::None && args.output.is_some() {
        warn!("--format none writes nothing; ignoring the output path");
    }
    let pipeline = Pipeline {
        scramble: args.scramble.then(|| ScrambleKey::new(seed, k)),
        undirected: args.undirected,
        dedup: args.dedup,
    };
    let plan = match args.tiles {
        Some(t) => Some(PartitionPlan::new(k, t, m, seed, args.parts.unwrap_or(1))?),
        None => None,
    };
    let parts: Vec<u64> = match (&plan, args.part) {
        (Some(plan), Some(i)) => {
            ensure!(i < plan.parts, "--part {i} is out of range for {} parts", plan.parts);
            vec![i]
        }
        (Some(plan), None) => (0..plan.parts).collect(),
        (None, _) => Vec::new(),
    };

    let to_stdout = format != Format::None && args.output.is_none();
    let path = if format == Format::None { None } else { args.output.as_deref() };
    let start = Instant::now();
    let (edges, samples) = with_output(path, |w| {
        let mut written = 0u64;
        let mut emit = |edges: &[Edge]| -> Result<()> {
            written += edges.len() as u64;
            write_edges(w, edges, format)?;
            Ok(())
        };
        let samples = match &plan {
            None => {
                let cfg = GenConfig::new(k, m, seed)
                    .with_threads(threads)
                    .with_block_size(block_size);
                let samples = Generator::new(&table, cfg).for_each_window(|window| -> Result<()> {
                    for block in window.chunks(block_size) {
                        emit(&pipeline.apply(block, DedupScope::Block)?)?;
                    }
                    Ok(())
                })?;
                Some(samples)
            }
            Some(plan) => {
                for &part in &parts {
                    let tiles = plan_tiles(plan, &p, part).tiles;
                    let edges = generate_part(plan, &p, &table, part, args.distinct, threads)?;
                    let mut rest = &edges[..];
                    for tc in &tiles {
                        let (mine, tail) = rest.split_at(tc.count as usize);
                        rest = tail;
                        let tile = Tile::new(k, plan.tile_bits, tc.tile_row, tc.tile_col);
                        emit(&pipeline.apply(mine, DedupScope::Tile(tile))?)?;
                    }
                }
                None
            }
        };
        Ok((written, samples))
    })?;
    let summary = Summary {
        edges,
        seconds: start.elapsed().as_secs_f64(),
        samples,
    };
    if to_stdout {
        eprintln!("{summary}");
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let p = params(&args.model)?;
    let (k, m, seed) = (p.k(), args.model.m, args.model.seed);
    let expected = exact_cell_probs(&p, k)?;
    let edges = if let Some(input) = &args.input {
        let file = File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
        let edges = read_binary(io::BufReader::new(file))?;
        if let Some(e) = edges.iter().find(|e| e.u >> k != 0 || e.v >> k != 0) {
            bail!("edge ({}, {}) in {} does not fit 2^{k} nodes", e.u, e.v, input.display());
        }
        edges
    } else if args.naive {
        naive_edges(&p, k, m, seed)
    } else {
        let table = build_table(&p, &args.table, seed)?;
        let cfg = GenConfig::new(k, m, seed)
            .with_threads(threads(&args.threads)?)
            .with_block_size(args.threads.block_size);
        Generator::new(&table, cfg).generate().edges
    };
    let hist = CellHistogram::from_edges(k, &edges)?;
    let result = match chi_square(&hist, &expected, args.alpha) {
        Err(rmat::Error::SampleTooSmall { .. }) => chi_square_pooled(&hist, &expected, args.alpha)?,
        other => other?,
    };
    println!("{result}");
    Ok(())
}

/// Entry count of the fixed table compared against a variable table of
/// `size` entries: the largest power of 4 not above `size + 3`.
fn fixed_depth_near(size: usize) -> u32 {
    let bits = usize::BITS - 1 - (size + 3).leading_zeros();
    (bits / 2).clamp(1, MAX_FIXED_DEPTH)
}

fn bench_tablesize(args: BenchTablesizeArgs) -> Result<()> {
    ensure!(!args.sizes.is_empty(), "--sizes is empty");
    ensure!(args.sizes.windows(2).all(|w| w[0] < w[1]), "--sizes must be ascending");
    let p = params(&args.model)?;
    let mut cfg = SweepConfig::new(p, args.model.m, args.model.seed);
    cfg.threads = threads(&args.threads)?;
    cfg.block_size = args.threads.block_size;
    cfg.repetitions = args.repetitions;
    let mut specs = Vec::new();
    for &size in &args.sizes {
        for kind in &args.kinds {
            specs.push(match kind {
                TableKindArg::Fixed => {
                    let depth = fixed_depth_near(size);
                    (1usize << (2 * depth), TableSpec::Fixed { depth })
                }
                TableKindArg::Variable => (
                    size,
                    TableSpec::Variable {
                        size_limit: size,
                        depth_cap: args.depth_cap,
                    },
                ),
            });
        }
    }
    let rows = sweep_table_sizes(&cfg, &specs)?;
    with_output(args.output.as_deref(), |w| Ok(write_csv(w, &rows)?))
}

fn bench_threads(args: BenchThreadsArgs) -> Result<()> {
    ensure!(!args.thread_list.is_empty(), "--thread-list is empty");
    ensure!(args.thread_list.iter().all(|&n| n >= 1), "thread counts must be at least 1");
    ensure!(args.block_size > 0, "--block-size must be positive");
    let p = params(&args.model)?;
    let table = build_table(&p, &args.table, args.model.seed)?;
    let mut cfg = SweepConfig::new(p, args.model.m, args.model.seed);
    cfg.block_size = args.block_size;
    cfg.repetitions = args.repetitions;
    let rows = sweep_threads(&cfg, &table, &args.thread_list);
    with_output(args.output.as_deref(), |w| Ok(write_csv(w, &rows)?))
}

fn table_dump(args: TableDumpArgs) -> Result<()> {
    let p = params(&args.model)?;
    let table = build_table(&p, &args.table, args.model.seed)?;
    let s = table.stats();
    eprintln!(
        "entries={} min_prob={:e} max_prob={:e} expected_depth={:.6} expected_info={:.6}",
        s.entry_count, s.min_prob, s.max_prob, s.expected_depth, s.expected_info
    );
    let text = table.dump();
    with_output(args.output.as_deref(), |w| Ok(w.write_all(text.as_bytes())?))
}
