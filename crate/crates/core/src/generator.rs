//! Edge emission from a fragment table, the blockwise deterministic driver,
//! and the naive one-level-at-a-time reference process.
//!
//! Edges are produced in blocks of `block_size`. Block `i` always draws from
//! the stream keyed by `(seed, i)` and starts with empty bit accumulators, so
//! the output is the same whichever worker generates which block, and the
//! concatenation in block order is independent of the thread count.

use crate::params::RmatParams;
use crate::rng::{Domain, StreamKey, StreamRng};
use crate::table::FragmentTable;

pub const DEFAULT_BLOCK_SIZE: usize = 1 << 16;

/// A directed edge `(u, v)`: row index `u`, column index `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(C)]
pub struct Edge {
    pub u: u64,
    pub v: u64,
}

impl Edge {
    pub const fn new(u: u64, v: u64) -> Self {
        Self { u, v }
    }
}

/// Row and column bits generated but not yet emitted. Both accumulators
/// always hold `len` bits; the oldest bit is the most significant.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmitState {
    row: u128,
    col: u128,
    len: u32,
}

impl EmitState {
    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Fills `out` with edges on `2^k` nodes. Returns the number of table
/// samples consumed. Surplus bits of the last fragment stay in `state`.
///
/// A fragment deeper than `k` can complete several edges; they are emitted
/// in order. `k = 0` is the single-node case and consumes no samples.
#[inline]
pub fn emit_into(
    table: &FragmentTable,
    k: u32,
    state: &mut EmitState,
    rng: &mut StreamRng,
    out: &mut [Edge],
) -> u64 {
    debug_assert!(k <= crate::params::MAX_K);
    if k == 0 {
        out.fill(Edge::default());
        return 0;
    }
    let mut samples = 0u64;
    let mut filled = 0;
    let n = out.len();
    // Drain bits carried over from a previous call first.
    while state.len >= k && filled < n {
        out[filled] = take_edge(state, k);
        filled += 1;
    }
    while filled < n {
        let f = table.sample_fragment(rng.next_u64());
        samples += 1;
        state.row = (state.row << f.depth) | f.row as u128;
        state.col = (state.col << f.depth) | f.col as u128;
        state.len += f.depth;
        while state.len >= k && filled < n {
            out[filled] = take_edge(state, k);
            filled += 1;
        }
    }
    samples
}

#[inline(always)]
fn take_edge(state: &mut EmitState, k: u32) -> Edge {
    let rest = state.len - k;
    let edge = Edge {
        u: (state.row >> rest) as u64,
        v: (state.col >> rest) as u64,
    };
    let mask = (1u128 << rest) - 1;
    state.row &= mask;
    state.col &= mask;
    state.len = rest;
    edge
}

/// Generates block `block_index` into `out` (its length is the block's edge
/// count) from a fresh accumulator. Leftover bits are discarded.
pub fn emit_block(table: &FragmentTable, k: u32, seed: u64, block_index: u64, out: &mut [Edge]) -> u64 {
    let mut rng = StreamRng::new(StreamKey::block(seed, block_index));
    let mut state = EmitState::default();
    emit_into(table, k, &mut state, &mut rng, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub k: u32,
    pub edge_count: u64,
    pub seed: u64,
    pub block_size: usize,
    pub threads: usize,
}

impl GenConfig {
    pub fn new(k: u32, edge_count: u64, seed: u64) -> Self {
        Self {
            k,
            edge_count,
            seed,
            block_size: DEFAULT_BLOCK_SIZE,
            threads: default_threads(),
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size.max(1);
        self
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub edges: Vec<Edge>,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct Generator<'a> {
    table: &'a FragmentTable,
    config: GenConfig,
}

impl<'a> Generator<'a> {
    pub fn new(table: &'a FragmentTable, config: GenConfig) -> Self {
        assert!(config.block_size >= 1, "block size must be positive");
        assert!(config.k <= crate::params::MAX_K, "k exceeds 62");
        Self { table, config }
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    pub fn block_count(&self) -> u64 {
        self.config.edge_count.div_ceil(self.config.block_size as u64)
    }

    /// Edge count of block `i`; only the last block may be short.
    fn block_len(&self, i: u64) -> usize {
        let bs = self.config.block_size as u64;
        (self.config.edge_count - i * bs).min(bs) as usize
    }

    /// All edges in block order, on `config.threads` workers.
    pub fn generate(&self) -> Generated {
        #[cfg(feature = "parallel")]
        if self.config.threads > 1 {
            return self.generate_parallel();
        }
        self.generate_sequential()
    }

    /// All edges on the calling thread.
    pub fn generate_sequential(&self) -> Generated {
        let mut edges = vec![Edge::default(); self.config.edge_count as usize];
        let samples = edges
            .chunks_mut(self.config.block_size)
            .enumerate()
            .map(|(i, block)| emit_block(self.table, self.config.k, self.config.seed, i as u64, block))
            .sum();
        Generated { edges, samples }
    }

    #[cfg(feature = "parallel")]
    pub fn generate_parallel(&self) -> Generated {
        use rayon::prelude::*;
        let mut edges = vec![Edge::default(); self.config.edge_count as usize];
        let samples = with_pool(self.config.threads, || {
            edges
                .par_chunks_mut(self.config.block_size)
                .enumerate()
                .map(|(i, block)| emit_block(self.table, self.config.k, self.config.seed, i as u64, block))
                .sum()
        });
        Generated { edges, samples }
    }

    /// Generates windows of consecutive blocks and hands each window to
    /// `sink` in block order, so memory stays bounded for large `m`.
    /// Window boundaries always fall on block boundaries.
    pub fn for_each_window<E>(
        &self,
        mut sink: impl FnMut(&[Edge]) -> Result<(), E>,
    ) -> Result<u64, E> {
        let blocks_per_window = (self.config.threads * 4).max(1) as u64;
        let total_blocks = self.block_count();
        let mut buf = Vec::new();
        let mut samples = 0;
        let mut first = 0;
        while first < total_blocks {
            let last = (first + blocks_per_window).min(total_blocks);
            let len: usize = (first..last).map(|i| self.block_len(i)).sum();
            buf.resize(len, Edge::default());
            samples += self.fill_blocks(first, &mut buf);
            sink(&buf)?;
            first = last;
        }
        Ok(samples)
    }

    fn fill_blocks(&self, first: u64, buf: &mut [Edge]) -> u64 {
        let (k, seed, bs) = (self.config.k, self.config.seed, self.config.block_size);
        #[cfg(feature = "parallel")]
        if self.config.threads > 1 {
            use rayon::prelude::*;
            return with_pool(self.config.threads, || {
                buf.par_chunks_mut(bs)
                    .enumerate()
                    .map(|(i, block)| emit_block(self.table, k, seed, first + i as u64, block))
                    .sum()
            });
        }
        buf.chunks_mut(bs)
            .enumerate()
            .map(|(i, block)| emit_block(self.table, k, seed, first + i as u64, block))
            .sum()
    }

    /// Generates every edge without retaining any; returns the samples
    /// consumed. Used for throughput measurements.
    pub fn run_discarding(&self) -> u64 {
        let (k, seed, bs) = (self.config.k, self.config.seed, self.config.block_size);
        let blocks = self.block_count();
        #[cfg(feature = "parallel")]
        if self.config.threads > 1 {
            use rayon::prelude::*;
            return with_pool(self.config.threads, || {
                (0..blocks)
                    .into_par_iter()
                    .map_init(
                        || vec![Edge::default(); bs],
                        |scratch, i| {
                            let block = &mut scratch[..self.block_len(i)];
                            let s = emit_block(self.table, k, seed, i, block);
                            std::hint::black_box(&block);
                            s
                        },
                    )
                    .sum()
            });
        }
        let mut scratch = vec![Edge::default(); bs];
        (0..blocks)
            .map(|i| {
                let block = &mut scratch[..self.block_len(i)];
                let s = emit_block(self.table, k, seed, i, block);
                std::hint::black_box(&block);
                s
            })
            .sum()
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// One edge by the textbook process: `k` independent quadrant choices, the
/// first choice giving the most significant bit of both indices.
pub fn naive_edge(params: &RmatParams, k: u32, rng: &mut StreamRng) -> Edge {
    let [a, b, c, _] = params.quadrants();
    let (ab, abc) = (a + b, a + b + c);
    let mut edge = Edge::default();
    for _ in 0..k {
        let x = rng.next_f64();
        let (r, col) = if x < a {
            (0, 0)
        } else if x < ab {
            (0, 1)
        } else if x < abc {
            (1, 0)
        } else {
            (1, 1)
        };
        edge.u = (edge.u << 1) | r;
        edge.v = (edge.v << 1) | col;
    }
    edge
}

/// `m` reference edges, keyed in blocks of [`DEFAULT_BLOCK_SIZE`] on a
/// stream domain disjoint from the fast generator's.
pub fn naive_edges(params: &RmatParams, k: u32, m: u64, seed: u64) -> Vec<Edge> {
    let mut out = vec![Edge::default(); m as usize];
    for (i, block) in out.chunks_mut(DEFAULT_BLOCK_SIZE).enumerate() {
        let mut rng = StreamRng::new(StreamKey::new(Domain::Naive, seed, &[i as u64]));
        block.iter_mut().for_each(|e| *e = naive_edge(params, k, &mut rng));
    }
    out
}
