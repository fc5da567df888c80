//! Walker alias tables (Vose's two-worklist construction).
//!
//! A table over `n` weights stores, per bucket, the probability of keeping the
//! bucket's own index and the index to fall back to otherwise. One uniform
//! draw picks a bucket and a fraction, so sampling costs O(1).

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    /// Probability of keeping the bucket's own index.
    thresholds: Vec<f64>,
    /// `thresholds` scaled to `2^64`, compared against the low word of the
    /// bucket-selection product in [`AliasTable::sample_u64`].
    keep: Vec<u64>,
    aliases: Vec<u32>,
    total_weight: f64,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "alias table of {} entries exceeds u32 indexing",
                weights.len()
            )));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let total_weight: f64 = weights.iter().sum();
        if total_weight <= 0.0 {
            return Err(Error::AllZeroWeights);
        }

        let n = weights.len();
        let scale = n as f64 / total_weight;
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut thresholds = vec![1.0; n];
        let mut aliases: Vec<u32> = (0..n as u32).collect();

        // Ties with the average count as large.
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            thresholds[s] = scaled[s];
            aliases[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Whatever remains on either list is (up to rounding) exactly full.
        for i in small.into_iter().chain(large) {
            thresholds[i] = 1.0;
            aliases[i] = i as u32;
        }

        let keep = thresholds.iter().map(|&t| threshold_to_u64(t)).collect();
        Ok(Self {
            thresholds,
            keep,
            aliases,
            total_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn threshold(&self, bucket: usize) -> f64 {
        self.thresholds[bucket]
    }

    pub fn alias(&self, bucket: usize) -> usize {
        self.aliases[bucket] as usize
    }

    /// Resolves a draw already split into a bucket index in `[0, len)` and a
    /// fraction in `[0, 1)`.
    #[inline]
    pub fn sample(&self, bucket: usize, fraction: f64) -> usize {
        if fraction < self.thresholds[bucket] {
            bucket
        } else {
            self.aliases[bucket] as usize
        }
    }

    /// Resolves one 64-bit uniform draw. The high word of `x * len` selects
    /// the bucket and the low word is the fraction.
    #[inline]
    pub fn sample_u64(&self, x: u64) -> usize {
        let product = x as u128 * self.keep.len() as u128;
        let bucket = (product >> 64) as usize;
        let fraction = product as u64;
        if fraction < self.keep[bucket] {
            bucket
        } else {
            self.aliases[bucket] as usize
        }
    }

    /// Probability of each index implied by the stored buckets.
    pub fn reconstructed_probs(&self) -> Vec<f64> {
        let n = self.len();
        let mut mass = self.thresholds.clone();
        for (bucket, &alias) in self.aliases.iter().enumerate() {
            mass[alias as usize] += 1.0 - self.thresholds[bucket];
        }
        mass.iter_mut().for_each(|m| *m /= n as f64);
        mass
    }
}

fn threshold_to_u64(t: f64) -> u64 {
    // `as` saturates, so a threshold of 1 keeps every fraction but u64::MAX.
    (t * 18_446_744_073_709_551_616.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{StreamKey, StreamRng};
    use proptest::prelude::*;

    fn assert_reconstructs(weights: &[f64], tol: f64) {
        let table = AliasTable::new(weights).unwrap();
        let total: f64 = weights.iter().sum();
        for (p, w) in table.reconstructed_probs().iter().zip(weights) {
            assert!((p - w / total).abs() <= tol, "{p} vs {}", w / total);
        }
        for b in 0..table.len() {
            assert!(table.alias(b) < table.len());
            assert!((0.0..=1.0).contains(&table.threshold(b)));
        }
    }

    #[test]
    fn symmetric_pair() {
        let t = AliasTable::new(&[1.0, 1.0]).unwrap();
        assert_eq!(t.reconstructed_probs(), vec![0.5, 0.5]);
        assert_eq!(t.sample(0, 0.3), 0);
        assert_eq!(t.sample(1, 0.999), 1);
    }

    #[test]
    fn graph500_weights_reconstruct() {
        assert_reconstructs(&[0.57, 0.19, 0.19, 0.05], 1e-9);
    }

    #[test]
    fn three_to_one() {
        let t = AliasTable::new(&[3.0, 1.0]).unwrap();
        let p = t.reconstructed_probs();
        assert!((p[0] - 0.75).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);

        // 10^7 draws; sigma = sqrt(n p (1-p)).
        let n = 10_000_000u64;
        let mut rng = StreamRng::new(StreamKey::block(42, 0));
        let hits = (0..n).filter(|_| t.sample_u64(rng.next_u64()) == 0).count() as f64;
        let sigma = (n as f64 * 0.75 * 0.25).sqrt();
        assert!((hits - 0.75 * n as f64).abs() <= 4.0 * sigma, "hits {hits}");
    }

    #[test]
    fn grid_sweep_matches_reconstruction() {
        let weights = [0.57, 0.19, 0.19, 0.05, 0.3, 0.0, 2.0];
        let t = AliasTable::new(&weights).unwrap();
        let steps = 1u32 << 16;
        let mut counts = vec![0u64; t.len()];
        for bucket in 0..t.len() {
            for s in 0..steps {
                counts[t.sample(bucket, s as f64 / steps as f64)] += 1;
            }
        }
        let total = (steps as usize * t.len()) as f64;
        for (c, p) in counts.iter().zip(t.reconstructed_probs()) {
            assert!((*c as f64 / total - p).abs() <= 1.0 / (1u64 << 15) as f64);
        }
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(AliasTable::new(&[]), Err(Error::EmptyInput)));
        assert!(matches!(AliasTable::new(&[0.0, 0.0]), Err(Error::AllZeroWeights)));
        assert!(matches!(
            AliasTable::new(&[1.0, -1.0]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            AliasTable::new(&[1.0, f64::NAN]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
    }

    #[test]
    fn highly_skewed_weights_build() {
        assert_reconstructs(&[1e12, 1.0, 1.0, 1e-3], 1e-9);
        let mut w = vec![1.0; 1000];
        w[17] = 1e12;
        assert_reconstructs(&w, 1e-9);
    }

    #[test]
    fn zero_weight_is_never_sampled() {
        let t = AliasTable::new(&[1.0, 0.0, 1.0]).unwrap();
        let mut rng = StreamRng::new(StreamKey::block(1, 1));
        assert!((0..100_000).all(|_| t.sample_u64(rng.next_u64()) != 1));
    }

    proptest! {
        #[test]
        fn reconstruction_invariant(weights in prop::collection::vec(0.0f64..100.0, 1..300)) {
            prop_assume!(weights.iter().any(|&w| w > 0.0));
            assert_reconstructs(&weights, 1e-9);
        }

        #[test]
        fn deterministic_build(weights in prop::collection::vec(0.001f64..10.0, 1..64)) {
            prop_assert_eq!(AliasTable::new(&weights).unwrap(), AliasTable::new(&weights).unwrap());
        }

        #[test]
        fn u64_and_float_paths_agree(weights in prop::collection::vec(0.001f64..10.0, 1..64), x: u64) {
            let t = AliasTable::new(&weights).unwrap();
            let product = x as u128 * t.len() as u128;
            let bucket = (product >> 64) as usize;
            let fraction = (product as u64 >> 11) as f64 / (1u64 << 53) as f64;
            // The float path truncates the fraction to 53 bits; only draws
            // within that rounding of a threshold may disagree.
            let near = (fraction - t.threshold(bucket)).abs() < 1e-12;
            prop_assert!(near || t.sample(bucket, fraction) == t.sample_u64(x));
        }
    }
}
