//! Constant-time per-edge postprocessing: undirected mirroring, vertex ID
//! scrambling, and duplicate removal scoped to one block or tile.

use std::collections::HashSet;

use crate::generator::Edge;
use crate::partition::Tile;
use crate::rng::{mix64, Domain, StreamKey};
use crate::{Error, Result};

/// Maps an edge into the lower-left triangle (`u >= v`).
#[inline]
pub fn to_undirected(e: Edge) -> Edge {
    Edge::new(e.u.max(e.v), e.u.min(e.v))
}

/// Both orientations of an edge, for consumers that want symmetric lists.
#[inline]
pub fn symmetric_pair(e: Edge) -> [Edge; 2] {
    [e, Edge::new(e.v, e.u)]
}

const ROUNDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Round {
    mul: u64,
    mul_inv: u64,
    shift: u32,
    rot: u32,
    xor: u64,
}

/// Seeded bijection on `[0, 2^k)`. Each round multiplies by an odd
/// constant, xors with a right shift of itself, rotates, and xors a key, all
/// modulo `2^k`, so every round and hence the composition is invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrambleKey {
    seed: u64,
    k: u32,
    mask: u64,
    rounds: [Round; ROUNDS],
}

impl ScrambleKey {
    pub fn new(seed: u64, k: u32) -> Self {
        assert!((1..=64).contains(&k), "scramble width must be in 1..=64");
        let mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        let base = StreamKey::new(Domain::Scramble, seed, &[k as u64]).raw();
        let rounds = std::array::from_fn(|i| {
            let h = |j: u64| mix64(base ^ mix64((i as u64) << 8 | j));
            let mul = h(0) | 1;
            Round {
                mul,
                mul_inv: odd_inverse(mul),
                // shift 0 would zero the value; k = 1 has no usable shift
                shift: if k > 1 { 1 + (h(1) % (k as u64 - 1)) as u32 } else { 64 },
                rot: (h(2) % k as u64) as u32,
                xor: h(3) & mask,
            }
        });
        Self { seed, k, mask, rounds }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn scramble(&self, v: u64) -> u64 {
        debug_assert!(v & !self.mask == 0);
        let mut x = v;
        for r in &self.rounds {
            x = x.wrapping_mul(r.mul) & self.mask;
            x ^= x.checked_shr(r.shift).unwrap_or(0);
            x = self.rotl(x, r.rot);
            x ^= r.xor;
        }
        x
    }

    pub fn unscramble(&self, v: u64) -> u64 {
        let mut x = v;
        for r in self.rounds.iter().rev() {
            x ^= r.xor;
            x = self.rotl(x, (self.k - r.rot) % self.k);
            // x = y ^ (y >> s) is solved by iterating y <- x ^ (y >> s)
            let mut y = x;
            let mut covered = r.shift;
            while covered < self.k {
                y = x ^ y.checked_shr(r.shift).unwrap_or(0);
                covered += r.shift;
            }
            x = y.wrapping_mul(r.mul_inv) & self.mask;
        }
        x
    }

    #[inline]
    pub fn scramble_edge(&self, e: Edge) -> Edge {
        Edge::new(self.scramble(e.u), self.scramble(e.v))
    }

    #[inline]
    fn rotl(&self, x: u64, r: u32) -> u64 {
        if r == 0 {
            return x;
        }
        ((x << r) | (x >> (self.k - r))) & self.mask
    }
}

/// Inverse of an odd number modulo 2^64 by Newton iteration.
fn odd_inverse(a: u64) -> u64 {
    let mut inv = a;
    for _ in 0..6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(inv)));
    }
    inv
}

/// Where a batch of edges handed to [`dedup_local`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupScope {
    /// A generator block; any edge is acceptable.
    Block,
    /// A partition tile; every edge must lie inside it.
    Tile(Tile),
}

/// Keeps the first occurrence of each edge and preserves order otherwise.
pub fn dedup_local(edges: &[Edge], scope: DedupScope) -> Result<Vec<Edge>> {
    if let DedupScope::Tile(tile) = scope {
        if let Some(e) = edges.iter().find(|e| !tile.contains(**e)) {
            return Err(Error::EdgeOutsideDeclaredTile { u: e.u, v: e.v });
        }
    }
    let mut seen = HashSet::with_capacity(edges.len());
    Ok(edges.iter().copied().filter(|e| seen.insert(*e)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn undirected_examples() {
        assert_eq!(to_undirected(Edge::new(3, 7)), Edge::new(7, 3));
        assert_eq!(to_undirected(Edge::new(5, 5)), Edge::new(5, 5));
        assert_eq!(symmetric_pair(Edge::new(1, 2)), [Edge::new(1, 2), Edge::new(2, 1)]);
    }

    #[test]
    fn scramble_is_a_permutation_for_small_widths() {
        for k in 1..=16 {
            for seed in [0u64, 1, 0xdead_beef] {
                let key = ScrambleKey::new(seed, k);
                let n = 1usize << k;
                let mut seen = vec![false; n];
                for v in 0..n as u64 {
                    let s = key.scramble(v) as usize;
                    assert!(s < n && !seen[s], "k={k} seed={seed} collides at {v}");
                    seen[s] = true;
                    assert_eq!(key.unscramble(s as u64), v);
                }
            }
        }
    }

    #[test]
    fn smallest_width_maps_onto_itself() {
        for seed in 0..8 {
            let key = ScrambleKey::new(seed, 1);
            let mut image = [key.scramble(0), key.scramble(1)];
            image.sort();
            assert_eq!(image, [0, 1]);
        }
    }

    #[test]
    fn scramble_is_seed_dependent() {
        let a = ScrambleKey::new(1, 20);
        let b = ScrambleKey::new(2, 20);
        assert_eq!(a, ScrambleKey::new(1, 20));
        assert!((0..100).any(|v| a.scramble(v) != b.scramble(v)));
        // not the identity
        assert!((0..100).filter(|&v| a.scramble(v) == v).count() < 5);
    }

    #[test]
    fn dedup_examples() {
        let e = |u, v| Edge::new(u, v);
        assert_eq!(
            dedup_local(&[e(1, 2), e(1, 2), e(3, 4)], DedupScope::Block).unwrap(),
            vec![e(1, 2), e(3, 4)]
        );
        assert!(dedup_local(&[], DedupScope::Block).unwrap().is_empty());
        let tile = Tile::new(8, 2, 1, 3);
        // tile (1, 3) with 2^6 = 64 cells per side
        assert!(dedup_local(&[e(64, 192), e(127, 255)], DedupScope::Tile(tile)).is_ok());
        assert!(matches!(
            dedup_local(&[e(64, 192), e(0, 0)], DedupScope::Tile(tile)),
            Err(Error::EdgeOutsideDeclaredTile { u: 0, v: 0 })
        ));
    }

    proptest! {
        #[test]
        fn scramble_roundtrips_at_any_width(k in 1u32..=62, seed: u64, raw: u64) {
            let key = ScrambleKey::new(seed, k);
            let v = raw & ((1u64 << k) - 1);
            let s = key.scramble(v);
            prop_assert!(s < 1u64 << k);
            prop_assert_eq!(key.unscramble(s), v);
        }

        #[test]
        fn undirected_is_idempotent(u: u64, v: u64) {
            let once = to_undirected(Edge::new(u, v));
            prop_assert!(once.u >= once.v);
            prop_assert_eq!(to_undirected(once), once);
        }
    }
}
