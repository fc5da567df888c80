//! Communication-free partitioned generation.
//!
//! The adjacency matrix is cut into `2^t x 2^t` square tiles. The number of
//! edges per tile comes from recursively splitting `m` multinomially over the
//! four quadrants, `t` levels deep, where every recursion node draws from a
//! stream keyed by its path. Any part can therefore recompute exactly the
//! counts of its own tiles while skipping every subtree outside its rows, and
//! the tiles' edges come from the fragment sampler run over the remaining
//! `k - t` levels.

use std::collections::HashSet;
use std::ops::Range;

use rand_distr::{Binomial, Distribution};

use crate::generator::{emit_into, EmitState, Edge};
use crate::params::RmatParams;
use crate::rng::{Domain, StreamKey, StreamRng};
use crate::table::FragmentTable;
use crate::{Error, Result};

/// Square submatrix with rows `[row * 2^(k-t), (row + 1) * 2^(k-t))` and the
/// analogous column range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tile {
    pub k: u32,
    pub t: u32,
    pub row: u64,
    pub col: u64,
}

impl Tile {
    pub fn new(k: u32, t: u32, row: u64, col: u64) -> Self {
        assert!(t <= k && row >> t == 0 && col >> t == 0, "tile outside the grid");
        Self { k, t, row, col }
    }

    /// Index bits left inside the tile.
    pub fn local_bits(&self) -> u32 {
        self.k - self.t
    }

    pub fn cell_count(&self) -> u128 {
        1u128 << (2 * self.local_bits())
    }

    pub fn contains(&self, e: Edge) -> bool {
        let s = self.local_bits();
        e.u >> s == self.row && e.v >> s == self.col
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileCount {
    pub tile_row: u64,
    pub tile_col: u64,
    pub count: u64,
}

/// Shared inputs of a partitioned run. Every part builds the same plan and
/// differs only in the part index it asks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionPlan {
    pub k: u32,
    pub tile_bits: u32,
    pub edge_count: u64,
    pub seed: u64,
    pub parts: u64,
}

impl PartitionPlan {
    pub fn new(k: u32, tile_bits: u32, edge_count: u64, seed: u64, parts: u64) -> Result<Self> {
        if tile_bits > k {
            return Err(Error::InvalidConfig(format!("tile bits {tile_bits} exceed k = {k}")));
        }
        if tile_bits > 31 {
            return Err(Error::InvalidConfig(format!("tile bits {tile_bits} exceed 31")));
        }
        if parts == 0 {
            return Err(Error::InvalidConfig("at least one part is required".into()));
        }
        Ok(Self {
            k,
            tile_bits,
            edge_count,
            seed,
            parts,
        })
    }

    pub fn tile_rows(&self) -> u64 {
        1 << self.tile_bits
    }

    /// Contiguous tile rows owned by `part`. When there are more parts than
    /// tile rows, some parts own nothing.
    pub fn owner_rows(&self, part: u64) -> Range<u64> {
        assert!(part < self.parts, "part {part} out of {}", self.parts);
        let rows = self.tile_rows() as u128;
        let at = |p: u64| (p as u128 * rows / self.parts as u128) as u64;
        at(part)..at(part + 1)
    }
}

/// Key of the recursion-tree node reached by `path` (base-4 quadrant digits,
/// most significant first) at `depth`.
pub fn node_key(seed: u64, depth: u32, path: u64) -> StreamKey {
    StreamKey::new(Domain::SplitNode, seed, &[depth as u64, path])
}

/// Splits `n` edges over the four quadrants as Multinomial(n; a, b, c, d),
/// drawn as three conditional binomials from the node's own stream.
pub fn split_quadrant_counts(n: u64, params: &RmatParams, key: StreamKey) -> [u64; 4] {
    if n == 0 {
        return [0; 4];
    }
    let [a, b, c, d] = params.quadrants();
    let mut rng = StreamRng::new(key);
    let mut draw = |trials: u64, p: f64| -> u64 {
        if trials == 0 {
            return 0;
        }
        Binomial::new(trials, p.clamp(0.0, 1.0))
            .expect("probability clamped to [0, 1]")
            .sample(&mut rng)
    };
    let na = draw(n, a);
    let nb = draw(n - na, b / (b + c + d));
    let nc = draw(n - na - nb, c / (c + d));
    [na, nb, nc, n - na - nb - nc]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    /// Owned tiles in row-major order.
    pub tiles: Vec<TileCount>,
    /// Recursion nodes evaluated, including the root and the tiles.
    pub visited_nodes: u64,
}

/// Tile counts for the tiles in `part`'s rows. Subtrees whose row span
/// misses those rows are never visited.
pub fn plan_tiles(plan: &PartitionPlan, params: &RmatParams, part: u64) -> TilePlan {
    let owned = plan.owner_rows(part);
    let t = plan.tile_bits;
    let mut tiles = Vec::new();
    let mut visited = 0u64;
    if owned.is_empty() {
        return TilePlan {
            tiles,
            visited_nodes: 0,
        };
    }
    // (depth, row prefix, col prefix, path, count)
    let mut stack = vec![(0u32, 0u64, 0u64, 0u64, plan.edge_count)];
    while let Some((depth, row, col, path, count)) = stack.pop() {
        visited += 1;
        if depth == t {
            tiles.push(TileCount {
                tile_row: row,
                tile_col: col,
                count,
            });
            continue;
        }
        let split = split_quadrant_counts(count, params, node_key(plan.seed, depth, path));
        let span = t - depth - 1;
        for (digit, &n) in split.iter().enumerate().rev() {
            let (r, c) = (row << 1 | (digit >> 1) as u64, col << 1 | (digit & 1) as u64);
            let rows = (r << span)..((r + 1) << span);
            if rows.start < owned.end && owned.start < rows.end {
                stack.push((depth + 1, r, c, path << 2 | digit as u64, n));
            }
        }
    }
    tiles.sort_by_key(|tc| (tc.tile_row, tc.tile_col));
    TilePlan {
        tiles,
        visited_nodes: visited,
    }
}

/// `count` edges inside `tile`, generated by the fragment loop over the
/// tile's `k - t` local levels from the stream keyed by the tile.
///
/// With `distinct`, duplicate cells are rejected and resampled, so the tile
/// must have at least `count` cells.
pub fn generate_tile(
    table: &FragmentTable,
    tile: Tile,
    count: u64,
    seed: u64,
    distinct: bool,
) -> Result<Vec<Edge>> {
    if distinct && count as u128 > tile.cell_count() {
        return Err(Error::CountOverflowsTile {
            count,
            capacity: tile.cell_count(),
        });
    }
    let local = tile.local_bits();
    let mut rng = StreamRng::new(StreamKey::new(Domain::Tile, seed, &[tile.t as u64, tile.row, tile.col]));
    let mut state = EmitState::default();
    let mut edges = vec![Edge::default(); count as usize];
    emit_into(table, local, &mut state, &mut rng, &mut edges);

    if distinct {
        let mut seen = HashSet::with_capacity(edges.len());
        edges.retain(|e| seen.insert(*e));
        let mut one = [Edge::default()];
        while (edges.len() as u64) < count {
            emit_into(table, local, &mut state, &mut rng, &mut one);
            if seen.insert(one[0]) {
                edges.push(one[0]);
            }
        }
    }

    let (row_base, col_base) = (tile.row << local, tile.col << local);
    for e in edges.iter_mut() {
        e.u |= row_base;
        e.v |= col_base;
    }
    Ok(edges)
}

/// Every edge of `part`, tiles in row-major order.
pub fn generate_part(
    plan: &PartitionPlan,
    params: &RmatParams,
    table: &FragmentTable,
    part: u64,
    distinct: bool,
    threads: usize,
) -> Result<Vec<Edge>> {
    let tiles = plan_tiles(plan, params, part).tiles;
    let one = |tc: &TileCount| {
        let tile = Tile::new(plan.k, plan.tile_bits, tc.tile_row, tc.tile_col);
        generate_tile(table, tile, tc.count, plan.seed, distinct)
    };
    #[cfg(feature = "parallel")]
    let per_tile: Vec<Vec<Edge>> = if threads > 1 {
        use rayon::prelude::*;
        crate::generator::with_pool(threads, || tiles.par_iter().map(one).collect::<Result<_>>())?
    } else {
        tiles.iter().map(one).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_tile: Vec<Vec<Edge>> = {
        let _ = threads;
        tiles.iter().map(one).collect::<Result<_>>()?
    };
    Ok(per_tile.concat())
}
