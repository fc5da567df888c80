//! Statistical checks: exact cell probabilities of the recursive process,
//! Pearson chi-square, and degree summaries.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::generator::Edge;
use crate::params::RmatParams;
use crate::{Error, Result};

pub const MAX_ENUMERATION_K: u32 = 12;
pub const DEFAULT_ALPHA: f64 = 1e-3;

fn check_enumerable(k: u32) -> Result<()> {
    if k > MAX_ENUMERATION_K {
        return Err(Error::KTooLargeForEnumeration(k));
    }
    Ok(())
}

/// Cell index used by [`exact_cell_probs`] and [`CellHistogram`].
#[inline]
pub fn cell_index(edge: Edge, k: u32) -> usize {
    ((edge.u << k) | edge.v) as usize
}

/// Probability of every adjacency cell after `k` levels, indexed by
/// `u * 2^k + v`.
pub fn exact_cell_probs(params: &RmatParams, k: u32) -> Result<Vec<f64>> {
    check_enumerable(k)?;
    let q = params.quadrants();
    let mut probs = vec![1.0];
    for level in 0..k {
        let side = 1usize << level;
        let mut next = vec![0.0; 4 * side * side];
        for u in 0..side {
            for v in 0..side {
                let p = probs[u * side + v];
                for (digit, &qd) in q.iter().enumerate() {
                    let (r, c) = (digit >> 1, digit & 1);
                    next[(2 * u + r) * 2 * side + 2 * v + c] = p * qd;
                }
            }
        }
        probs = next;
    }
    Ok(probs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellHistogram {
    k: u32,
    counts: Vec<u64>,
    total: u64,
}

impl CellHistogram {
    pub fn new(k: u32) -> Result<Self> {
        check_enumerable(k)?;
        Ok(Self {
            k,
            counts: vec![0; 1 << (2 * k)],
            total: 0,
        })
    }

    pub fn from_edges<'e>(k: u32, edges: impl IntoIterator<Item = &'e Edge>) -> Result<Self> {
        let mut h = Self::new(k)?;
        edges.into_iter().for_each(|&e| h.add(e));
        Ok(h)
    }

    /// Panics if the edge does not fit `2^k` nodes.
    #[inline]
    pub fn add(&mut self, edge: Edge) {
        assert!(
            edge.u >> self.k == 0 && edge.v >> self.k == 0,
            "edge ({}, {}) outside 2^{} nodes",
            edge.u,
            edge.v,
            self.k
        );
        self.counts[cell_index(edge, self.k)] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &CellHistogram) {
        assert_eq!(self.k, other.k);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn from_counts(k: u32, counts: Vec<u64>) -> Result<Self> {
        check_enumerable(k)?;
        if counts.len() != 1 << (2 * k) {
            return Err(Error::InvalidConfig(format!(
                "histogram for k = {k} needs {} cells, got {}",
                1u64 << (2 * k),
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(Self { k, counts, total })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub threshold: f64,
    pub alpha: f64,
    pub pass: bool,
}

impl fmt::Display for ChiSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "statistic={:.4} dof={} threshold={:.4} alpha={} verdict={}",
            self.statistic,
            self.dof,
            self.threshold,
            self.alpha,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

fn validate_expected(observed: &CellHistogram, expected: &[f64]) -> Result<()> {
    if expected.len() != observed.counts.len() {
        return Err(Error::InvalidExpectedVector(format!(
            "{} probabilities for {} cells",
            expected.len(),
            observed.counts.len()
        )));
    }
    if let Some(bad) = expected.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidExpectedVector(format!("entry {bad}")));
    }
    let sum: f64 = expected.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidExpectedVector(format!("sums to {sum}")));
    }
    Ok(())
}

/// Pearson goodness of fit over every cell. Requires at least `5 / p_min`
/// observations so that each expected count is at least 5.
pub fn chi_square(observed: &CellHistogram, expected: &[f64], alpha: f64) -> Result<ChiSquare> {
    validate_expected(observed, expected)?;
    let p_min = expected
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let needed = 5.0 / p_min;
    // Relative slack absorbs rounding in products such as 0.05^4.
    if (observed.total as f64) < needed * (1.0 - 1e-9) {
        return Err(Error::SampleTooSmall {
            total: observed.total,
            needed,
        });
    }
    let bins = observed.counts.iter().zip(expected).map(|(&o, &p)| (o, p));
    Ok(pearson(bins, observed.total, alpha))
}

/// Like [`chi_square`], but cells whose expected count is below 5 are
/// pooled (smallest first) into one bin until that bin's expected count
/// reaches 5. Used where the cell probabilities span many orders of
/// magnitude and the strict rule would need impractically many samples.
pub fn chi_square_pooled(observed: &CellHistogram, expected: &[f64], alpha: f64) -> Result<ChiSquare> {
    validate_expected(observed, expected)?;
    let n = observed.total as f64;
    let mut order: Vec<usize> = (0..expected.len()).filter(|&i| expected[i] > 0.0).collect();
    order.sort_by(|&i, &j| expected[i].total_cmp(&expected[j]).then(i.cmp(&j)));

    let mut pooled = (0u64, 0.0f64);
    let mut split = 0;
    while split < order.len() && (expected[order[split]] * n < 5.0 || (pooled.1 > 0.0 && pooled.1 * n < 5.0)) {
        let i = order[split];
        pooled.0 += observed.counts[i];
        pooled.1 += expected[i];
        split += 1;
    }
    let mut bins: Vec<(u64, f64)> = order[split..].iter().map(|&i| (observed.counts[i], expected[i])).collect();
    if pooled.1 > 0.0 {
        bins.push(pooled);
    }
    // Observations in zero-probability cells make the fit impossible.
    let impossible: u64 = (0..expected.len())
        .filter(|&i| expected[i] == 0.0)
        .map(|i| observed.counts[i])
        .sum();
    bins.push((impossible, 0.0));
    let pooled_too_small = pooled.1 > 0.0 && pooled.1 * n < 5.0;
    if pooled_too_small || bins.iter().filter(|b| b.1 > 0.0).count() < 2 {
        return Err(Error::SampleTooSmall {
            total: observed.total,
            needed: 5.0 / expected.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min),
        });
    }
    Ok(pearson(bins.into_iter(), observed.total, alpha))
}

fn pearson(bins: impl Iterator<Item = (u64, f64)>, total: u64, alpha: f64) -> ChiSquare {
    let n = total as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (o, p) in bins {
        if p > 0.0 {
            let e = n * p;
            statistic += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else if o > 0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = cells.saturating_sub(1).max(1);
    let threshold = chi_square_quantile(1.0 - alpha, dof as f64);
    ChiSquare {
        statistic,
        dof,
        threshold,
        alpha,
        pass: statistic <= threshold,
    }
}

/// Upper quantile of the chi-square distribution by the Wilson–Hilferty
/// cube-root normal approximation.
pub fn chi_square_quantile(prob: f64, dof: f64) -> f64 {
    let z = normal_quantile(prob);
    let h = 2.0 / (9.0 * dof);
    (dof * (1.0 - h + z * h.sqrt()).powi(3)).max(0.0)
}

/// Standard normal quantile (Acklam's rational approximation, relative
/// error below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.02425;
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeStats {
    /// Out-degree to number of nodes with that out-degree, including
    /// degree 0.
    pub out_degree_histogram: BTreeMap<u64, u64>,
    pub max_out_degree: u64,
    /// Nodes with no incident edge in either direction.
    pub isolated_nodes: u64,
}

pub fn degree_stats(edges: &[Edge], k: u32) -> DegreeStats {
    let nodes = 1u64 << k;
    let mut out: HashMap<u64, u64> = HashMap::new();
    let mut touched: HashSet<u64> = HashSet::new();
    for e in edges {
        *out.entry(e.u).or_default() += 1;
        touched.insert(e.u);
        touched.insert(e.v);
    }
    let mut hist = BTreeMap::new();
    for &d in out.values() {
        *hist.entry(d).or_default() += 1;
    }
    let zero = nodes - out.len() as u64;
    if zero > 0 {
        hist.insert(0, zero);
    }
    DegreeStats {
        max_out_degree: out.values().copied().max().unwrap_or(0),
        isolated_nodes: nodes - touched.len() as u64,
        out_degree_histogram: hist,
    }
}

/// Geometric buckets `[2^j, 2^(j+1))` over positive degrees. Each bucket is
/// `(lower bound, nodes per unit degree)`.
pub fn geometric_buckets(hist: &BTreeMap<u64, u64>) -> Vec<(u64, f64)> {
    let mut buckets: BTreeMap<u32, u64> = BTreeMap::new();
    for (&d, &n) in hist.range(1..) {
        *buckets.entry(63 - d.leading_zeros()).or_default() += n;
    }
    let Some(&top) = buckets.keys().last() else {
        return Vec::new();
    };
    (0..=top)
        .map(|j| {
            let n = buckets.get(&j).copied().unwrap_or(0);
            (1u64 << j, n as f64 / (1u64 << j) as f64)
        })
        .collect()
}

/// Fraction of consecutive bucket pairs after the densest bucket whose
/// density does not increase.
pub fn fraction_decreasing_after_mode(buckets: &[(u64, f64)]) -> f64 {
    let Some(mode) = (0..buckets.len()).max_by(|&i, &j| buckets[i].1.total_cmp(&buckets[j].1).then(j.cmp(&i)))
    else {
        return 1.0;
    };
    let tail = &buckets[mode..];
    if tail.len() < 2 {
        return 1.0;
    }
    let ok = tail.windows(2).filter(|w| w[1].1 <= w[0].1).count();
    ok as f64 / (tail.len() - 1) as f64
}
