#![allow(dead_code)]

use rmat::stats::CellHistogram;
use rmat::{Edge, RmatParams};

pub const SKEWED: [f64; 4] = [0.9, 0.025, 0.025, 0.05];

/// Cell probabilities by direct per-cell products, independent of the
/// level-by-level construction in `stats::exact_cell_probs`.
pub fn brute_cell_probs(params: &RmatParams, k: u32) -> Vec<f64> {
    let q = params.quadrants();
    let side = 1u64 << k;
    let mut out = Vec::with_capacity((side * side) as usize);
    for u in 0..side {
        for v in 0..side {
            let p: f64 = (0..k)
                .map(|bit| q[(2 * ((u >> bit) & 1) + ((v >> bit) & 1)) as usize])
                .product();
            out.push(p);
        }
    }
    out
}

pub fn histogram(k: u32, edges: &[Edge]) -> CellHistogram {
    CellHistogram::from_edges(k, edges).unwrap()
}

/// Largest per-cell deviation in units of the binomial standard deviation.
pub fn max_sigma(h: &CellHistogram, probs: &[f64]) -> f64 {
    let n = h.total() as f64;
    h.counts()
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt())
        .fold(0.0, f64::max)
}

/// Walks the 4-ary tree from the root: every reached node must be either a
/// table entry or a proper prefix of one, and every entry must be reached.
pub fn tree_walk_ok(table: &rmat::FragmentTable) -> bool {
    use std::collections::HashSet;
    let leaves: HashSet<(u64, u64, u32)> = table
        .entries()
        .iter()
        .map(|e| (e.row_bits, e.col_bits, e.depth))
        .collect();
    let mut internal = HashSet::new();
    for e in table.entries() {
        for d in 0..e.depth {
            let s = e.depth - d;
            internal.insert((e.row_bits >> s, e.col_bits >> s, d));
        }
    }
    if leaves.len() != table.len() || internal.iter().any(|n| leaves.contains(n)) {
        return false;
    }
    let mut stack = vec![(0u64, 0u64, 0u32)];
    let mut reached = 0;
    while let Some((r, c, d)) = stack.pop() {
        if leaves.contains(&(r, c, d)) {
            reached += 1;
        } else if internal.contains(&(r, c, d)) {
            for digit in 0..4u64 {
                stack.push(((r << 1) | (digit >> 1), (c << 1) | (digit & 1), d + 1));
            }
        } else {
            return false;
        }
    }
    reached == table.len()
}
