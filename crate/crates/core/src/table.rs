//! Fragment tables: precomputed recursion paths and their probabilities.
//!
//! A fragment of depth `d` fixes `d` consecutive recursion levels, i.e. `d`
//! row bits and `d` column bits. The set of fragments in a table is always the
//! leaf set of a finite 4-ary recursion tree, so its probabilities sum to one
//! and sampling a fragment is equivalent to running the recursive process for
//! that many levels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::alias::AliasTable;
use crate::params::{RmatParams, MAX_K};
use crate::rng::StreamRng;
use crate::{Error, Result};

/// Largest depth accepted by [`FragmentTable::fixed`]; `4^12 = 2^24` entries.
pub const MAX_FIXED_DEPTH: u32 = 12;
/// Default and largest depth cap for variable tables.
pub const DEFAULT_DEPTH_CAP: u32 = MAX_K;

/// One precomputed recursion path.
///
/// Bit strings are stored right-aligned with the first recursion decision in
/// the most significant of the `depth` low bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEntry {
    pub row_bits: u64,
    pub col_bits: u64,
    pub depth: u32,
    pub prob: f64,
}

impl PathEntry {
    /// Quadrant digits (`2 * row_bit + col_bit`) from the top level down.
    pub fn digits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.depth).rev().map(move |level| {
            let r = (self.row_bits >> level) & 1;
            let c = (self.col_bits >> level) & 1;
            (2 * r + c) as usize
        })
    }

    /// Interleaved digit string as a base-4 number, left-aligned in 128 bits.
    /// Distinct entries of a prefix-free set have distinct keys, and sorting
    /// by this key is lexicographic order of the digit strings.
    pub fn path_key(&self) -> u128 {
        let path = interleave(self.row_bits, self.col_bits, self.depth);
        path.checked_shl(128 - 2 * self.depth).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Fixed { depth: u32 },
    Variable { size_limit: usize, depth_cap: u32 },
}

/// How to build a table; what a caller selects before any table exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSpec {
    Fixed { depth: u32 },
    Variable { size_limit: usize, depth_cap: u32 },
}

impl TableSpec {
    /// Fixed table with `size` entries; `size` must be a power of four.
    pub fn fixed_with_size(size: usize) -> Result<Self> {
        if size < 4 || !size.is_power_of_two() || !size.trailing_zeros().is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("fixed table size {size} is not a power of 4 (>= 4)")));
        }
        Ok(TableSpec::Fixed {
            depth: size.trailing_zeros() / 2,
        })
    }

    pub fn build(&self, params: &RmatParams) -> Result<FragmentTable> {
        match *self {
            TableSpec::Fixed { depth } => FragmentTable::fixed(params, depth),
            TableSpec::Variable {
                size_limit,
                depth_cap,
            } => FragmentTable::variable(params, size_limit, depth_cap),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TableSpec::Fixed { .. } => "fixed",
            TableSpec::Variable { .. } => "variable",
        }
    }
}

/// Packed form of a [`PathEntry`] read by the emission loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fragment {
    pub row: u64,
    pub col: u64,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentTable {
    entries: Vec<PathEntry>,
    fragments: Vec<Fragment>,
    sampler: AliasTable,
    kind: TableKind,
    min_depth: u32,
    max_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableStats {
    pub entry_count: usize,
    pub min_prob: f64,
    pub max_prob: f64,
    /// `sum p_e * d_e`: recursion levels resolved per sample.
    pub expected_depth: f64,
    /// `-sum p_e log2 p_e`: self-information per sample in bits.
    pub expected_info: f64,
}

/// Result of a variable-depth build together with the probabilities of the
/// entries that were expanded, in expansion order.
#[derive(Debug, Clone)]
pub struct VariableBuild {
    pub table: FragmentTable,
    pub expanded: Vec<f64>,
}

impl FragmentTable {
    /// All `4^depth` paths of one fixed depth, in lexicographic digit order.
    pub fn fixed(params: &RmatParams, depth: u32) -> Result<Self> {
        if !(1..=MAX_FIXED_DEPTH).contains(&depth) {
            return Err(Error::DepthOutOfRange {
                depth,
                max: MAX_FIXED_DEPTH,
            });
        }
        let q = params.quadrants();
        // Level by level: every entry of the previous level gets four
        // children appended in digit order.
        let mut level: Vec<(u128, f64)> = vec![(0, 1.0)];
        for _ in 0..depth {
            level = level
                .iter()
                .flat_map(|&(path, p)| (0..4).map(move |dig| ((path << 2) | dig as u128, p * q[dig])))
                .collect();
        }
        let entries = level
            .into_iter()
            .map(|(path, prob)| {
                let (row_bits, col_bits) = deinterleave(path, depth);
                PathEntry {
                    row_bits,
                    col_bits,
                    depth,
                    prob,
                }
            })
            .collect();
        Self::from_entries(entries, TableKind::Fixed { depth })
    }

    /// Greedy variable-depth table: repeatedly expand the most probable
    /// entry while the table stays within `size_limit` entries.
    ///
    /// Entries at `depth_cap` are never expanded. When no cap binds the final
    /// size is the largest value `<= size_limit` that is `1 mod 3`.
    pub fn variable(params: &RmatParams, size_limit: usize, depth_cap: u32) -> Result<Self> {
        Ok(Self::variable_traced(params, size_limit, depth_cap)?.table)
    }

    pub fn variable_traced(
        params: &RmatParams,
        size_limit: usize,
        depth_cap: u32,
    ) -> Result<VariableBuild> {
        if size_limit < 4 {
            return Err(Error::SizeLimitTooSmall(size_limit));
        }
        if !(1..=MAX_K).contains(&depth_cap) {
            return Err(Error::DepthOutOfRange {
                depth: depth_cap,
                max: MAX_K,
            });
        }
        let q = params.quadrants();
        let mut queue = BinaryHeap::with_capacity(size_limit);
        queue.push(QueueNode {
            prob: 1.0,
            depth: 0,
            path: 0,
        });
        let mut frozen = Vec::new();
        let mut expanded = Vec::new();

        // Each expansion replaces one entry by four.
        while queue.len() + frozen.len() + 3 <= size_limit {
            let Some(node) = queue.pop() else { break };
            if node.depth >= depth_cap {
                frozen.push(node);
                continue;
            }
            expanded.push(node.prob);
            for (digit, &p) in q.iter().enumerate() {
                queue.push(QueueNode {
                    prob: node.prob * p,
                    depth: node.depth + 1,
                    path: (node.path << 2) | digit as u128,
                });
            }
        }

        let entries = queue
            .into_iter()
            .chain(frozen)
            .map(|node| {
                let depth = node.depth;
                let (row_bits, col_bits) = deinterleave(node.path, depth);
                PathEntry {
                    row_bits,
                    col_bits,
                    depth,
                    prob: node.prob,
                }
            })
            .collect();
        let table = Self::from_entries(
            entries,
            TableKind::Variable {
                size_limit,
                depth_cap,
            },
        )?;
        Ok(VariableBuild { table, expanded })
    }

    fn from_entries(mut entries: Vec<PathEntry>, kind: TableKind) -> Result<Self> {
        entries.sort_by_key(|e| (e.path_key(), e.depth));
        let probs: Vec<f64> = entries.iter().map(|e| e.prob).collect();
        let sampler = AliasTable::new(&probs)?;
        let fragments = entries
            .iter()
            .map(|e| Fragment {
                row: e.row_bits,
                col: e.col_bits,
                depth: e.depth,
            })
            .collect();
        let min_depth = entries.iter().map(|e| e.depth).min().unwrap_or(0);
        let max_depth = entries.iter().map(|e| e.depth).max().unwrap_or(0);
        Ok(Self {
            entries,
            fragments,
            sampler,
            kind,
            min_depth,
            max_depth,
        })
    }

    pub fn entries(&self) -> &[PathEntry] {
        &self.entries
    }

    pub fn sampler(&self) -> &AliasTable {
        &self.sampler
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_depth(&self) -> u32 {
        self.min_depth
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    #[inline]
    pub(crate) fn sample_fragment(&self, draw: u64) -> Fragment {
        self.fragments[self.sampler.sample_u64(draw)]
    }

    pub fn stats(&self) -> TableStats {
        let mut mass_by_depth = vec![0.0f64; self.max_depth as usize + 1];
        let mut s = TableStats {
            entry_count: self.entries.len(),
            min_prob: f64::INFINITY,
            max_prob: 0.0,
            expected_depth: 0.0,
            expected_info: 0.0,
        };
        for e in &self.entries {
            s.min_prob = s.min_prob.min(e.prob);
            s.max_prob = s.max_prob.max(e.prob);
            mass_by_depth[e.depth as usize] += e.prob;
            s.expected_info -= e.prob * e.prob.log2();
        }
        s.expected_depth = if self.min_depth == self.max_depth {
            self.max_depth as f64
        } else {
            let total: f64 = mass_by_depth.iter().sum();
            mass_by_depth
                .iter()
                .enumerate()
                .map(|(d, m)| d as f64 * m)
                .sum::<f64>()
                / total
        };
        s
    }

    /// Multiplies every probability by an independent factor uniform in
    /// `[1 - noise, 1 + noise]` and renormalizes. Paths are unchanged.
    pub fn perturb(&self, noise: f64, rng: &mut StreamRng) -> Result<Self> {
        if !(0.0..1.0).contains(&noise) {
            return Err(Error::NoiseOutOfRange(noise));
        }
        if noise == 0.0 {
            return Ok(self.clone());
        }
        let mut entries = self.entries.clone();
        for e in entries.iter_mut() {
            e.prob *= 1.0 - noise + 2.0 * noise * rng.next_f64();
        }
        let z: f64 = entries.iter().map(|e| e.prob).sum();
        entries.iter_mut().for_each(|e| e.prob /= z);
        Self::from_entries(entries, self.kind)
    }

    /// Exact Kraft equality plus prefix-freeness of adjacent sorted keys:
    /// together these say the entries are the leaves of a finite 4-ary tree.
    pub fn is_complete_prefix_code(&self) -> bool {
        let top = self.max_depth;
        let kraft: u128 = self
            .entries
            .iter()
            .fold(0u128, |acc, e| acc.saturating_add(1u128 << (2 * (top - e.depth))));
        if kraft != 1u128 << (2 * top) {
            return false;
        }
        self.entries.windows(2).all(|w| !is_prefix(&w[0], &w[1]))
    }

    /// One line per entry: `row_bits col_bits depth prob`, bits written
    /// most significant first.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 48);
        for e in &self.entries {
            let width = e.depth as usize;
            let _ = writeln!(
                out,
                "{} {} {} {:e}",
                bit_string(e.row_bits, width),
                bit_string(e.col_bits, width),
                e.depth,
                e.prob
            );
        }
        out
    }
}

fn bit_string(bits: u64, width: usize) -> String {
    if width == 0 {
        return String::new();
    }
    format!("{bits:0width$b}")
}

fn is_prefix(short: &PathEntry, long: &PathEntry) -> bool {
    if short.depth > long.depth {
        return false;
    }
    let shift = long.depth - short.depth;
    long.row_bits >> shift == short.row_bits && long.col_bits >> shift == short.col_bits
}

pub(crate) fn interleave(row: u64, col: u64, depth: u32) -> u128 {
    (0..depth).rev().fold(0u128, |acc, level| {
        let digit = 2 * ((row >> level) & 1) + ((col >> level) & 1);
        (acc << 2) | digit as u128
    })
}

pub(crate) fn deinterleave(path: u128, depth: u32) -> (u64, u64) {
    (0..depth).rev().fold((0u64, 0u64), |(r, c), level| {
        let digit = (path >> (2 * level)) & 3;
        ((r << 1) | (digit >> 1) as u64, (c << 1) | (digit & 1) as u64)
    })
}

/// Max-heap order: higher probability first, then smaller depth, then
/// lexicographically smaller path.
#[derive(Debug, Clone, Copy)]
struct QueueNode {
    prob: f64,
    depth: u32,
    path: u128,
}

impl Ord for QueueNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then_with(|| other.depth.cmp(&self.depth))
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for QueueNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for QueueNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueNode {}
