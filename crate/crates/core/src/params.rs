//! Validated R-MAT model parameters.

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;
const NORMALIZED_SLACK: f64 = 4.0 * f64::EPSILON;
pub const MAX_K: u32 = 62;

/// Quadrant probabilities `(a, b, c, d)` and the node exponent `k`
/// (`n = 2^k` nodes).
///
/// Quadrant digits are numbered `2 * row_bit + col_bit`: `a` is the upper
/// left quadrant (row 0, col 0), `b` upper right, `c` lower left and `d`
/// lower right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    probs: [f64; 4],
    k: u32,
}

impl RmatParams {
    /// Probabilities used by the Graph 500 benchmark.
    pub const GRAPH500: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

    pub fn new(a: f64, b: f64, c: f64, d: f64, k: u32) -> Result<Self> {
        let raw = [a, b, c, d];
        for (value, name) in raw.into_iter().zip(['a', 'b', 'c', 'd']) {
            // `!(value > 0)` also rejects NaN.
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::NegativeOrZeroWeight { name, value });
            }
        }
        let sum: f64 = raw.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SumOutOfTolerance { sum });
        }
        if !(1..=MAX_K).contains(&k) {
            return Err(Error::BadExponent(k));
        }
        Ok(Self {
            probs: normalize(raw, sum),
            k,
        })
    }

    pub fn from_array(probs: [f64; 4], k: u32) -> Result<Self> {
        Self::new(probs[0], probs[1], probs[2], probs[3], k)
    }

    pub fn graph500(k: u32) -> Result<Self> {
        Self::from_array(Self::GRAPH500, k)
    }

    pub fn uniform(k: u32) -> Result<Self> {
        Self::new(0.25, 0.25, 0.25, 0.25, k)
    }

    /// Same probabilities, different node exponent.
    pub fn with_k(&self, k: u32) -> Result<Self> {
        Self::from_array(self.probs, k)
    }

    pub fn a(&self) -> f64 {
        self.probs[0]
    }

    pub fn b(&self) -> f64 {
        self.probs[1]
    }

    pub fn c(&self) -> f64 {
        self.probs[2]
    }

    pub fn d(&self) -> f64 {
        self.probs[3]
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Probabilities indexed by quadrant digit `2 * row_bit + col_bit`.
    pub fn quadrants(&self) -> [f64; 4] {
        self.probs
    }

    /// True when `b == c`, i.e. the model is symmetric under transposition.
    pub fn is_symmetric(&self) -> bool {
        self.probs[1] == self.probs[2]
    }

    /// Shannon entropy of one recursion level in bits.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|&p| p * p.log2()).sum::<f64>()
    }

    /// Upper bound `2 / H` on the reduction in table samples that variable
    /// length fragments can achieve over fixed length ones.
    pub fn speedup_bound(&self) -> f64 {
        2.0 / self.entropy()
    }
}

/// Divides by the raw sum unless it is already 1 up to summation rounding.
/// The stored sum is then within a few ulps of 1, which makes validation of
/// already-validated values a no-op.
fn normalize(raw: [f64; 4], sum: f64) -> [f64; 4] {
    if (sum - 1.0).abs() <= NORMALIZED_SLACK {
        raw
    } else {
        raw.map(|x| x / sum)
    }
}
