//! Throughput sweeps over table size and thread count.
//!
//! Timings cover edge generation only: tables are built before the clock
//! starts and edges are discarded as they are produced.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::generator::{GenConfig, Generator, DEFAULT_BLOCK_SIZE};
use crate::params::RmatParams;
use crate::table::{FragmentTable, TableSpec};
use crate::Result;

pub const MIN_REPETITIONS: usize = 3;

/// Runs `f` once untimed, then `max(reps, 3)` timed times; returns the
/// median wall time in seconds.
pub fn median_seconds(reps: usize, mut f: impl FnMut()) -> f64 {
    f();
    let mut times: Vec<f64> = (0..reps.max(MIN_REPETITIONS))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub params: RmatParams,
    pub edge_count: u64,
    pub seed: u64,
    pub threads: usize,
    pub block_size: usize,
    pub repetitions: usize,
}

impl SweepConfig {
    pub fn new(params: RmatParams, edge_count: u64, seed: u64) -> Self {
        Self {
            params,
            edge_count,
            seed,
            threads: crate::generator::default_threads(),
            block_size: DEFAULT_BLOCK_SIZE,
            repetitions: MIN_REPETITIONS,
        }
    }

    fn gen_config(&self, threads: usize) -> GenConfig {
        GenConfig::new(self.params.k(), self.edge_count, self.seed)
            .with_block_size(self.block_size)
            .with_threads(threads)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSizeRow {
    pub size: usize,
    pub kind: &'static str,
    pub edges_per_sec: f64,
    pub samples_per_edge: f64,
    pub expected_depth: f64,
}

/// Measures one table: returns (edges/s, samples per edge).
pub fn measure_table(cfg: &SweepConfig, table: &FragmentTable, threads: usize) -> (f64, f64) {
    let generator = Generator::new(table, cfg.gen_config(threads));
    let mut samples = 0;
    let secs = median_seconds(cfg.repetitions, || samples = generator.run_discarding());
    let m = cfg.edge_count.max(1) as f64;
    (cfg.edge_count as f64 / secs, samples as f64 / m)
}

/// One row per `(size, spec)`; `size` is the requested table size.
pub fn sweep_table_sizes(cfg: &SweepConfig, specs: &[(usize, TableSpec)]) -> Result<Vec<TableSizeRow>> {
    specs
        .iter()
        .map(|&(size, spec)| {
            let table = spec.build(&cfg.params)?;
            let (edges_per_sec, samples_per_edge) = measure_table(cfg, &table, cfg.threads);
            Ok(TableSizeRow {
                size,
                kind: spec.kind_name(),
                edges_per_sec,
                samples_per_edge,
                expected_depth: table.stats().expected_depth,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreadRow {
    pub threads: usize,
    pub edges_per_sec: f64,
    pub speedup_vs_1: f64,
}

/// Throughput per thread count, normalized to a single-thread run of the
/// same table.
pub fn sweep_threads(cfg: &SweepConfig, table: &FragmentTable, threads: &[usize]) -> Vec<ThreadRow> {
    let mut rows: Vec<ThreadRow> = threads
        .iter()
        .map(|&n| ThreadRow {
            threads: n.max(1),
            edges_per_sec: measure_table(cfg, table, n.max(1)).0,
            speedup_vs_1: 0.0,
        })
        .collect();
    let base = rows
        .iter()
        .find(|r| r.threads == 1)
        .map(|r| r.edges_per_sec)
        .unwrap_or_else(|| measure_table(cfg, table, 1).0);
    for r in rows.iter_mut() {
        r.speedup_vs_1 = r.edges_per_sec / base;
    }
    rows
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const TABLESIZE_HEADER: &str = "size,kind,edges_per_sec,samples_per_edge,expected_depth";
pub const THREADS_HEADER: &str = "threads,edges_per_sec,speedup_vs_1";

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(k: u32) -> SweepConfig {
        let mut cfg = SweepConfig::new(RmatParams::graph500(k).unwrap(), 20_000, 1);
        cfg.threads = 1;
        cfg
    }

    #[test]
    fn median_of_odd_and_even() {
        let mut calls = 0;
        median_seconds(1, || calls += 1);
        assert_eq!(calls, 1 + MIN_REPETITIONS);
    }

    #[test]
    fn fixed_samples_per_edge_is_k_over_depth() {
        let cfg = quick(60);
        let specs: Vec<_> = [256, 1024, 4096]
            .iter()
            .map(|&s| (s, TableSpec::fixed_with_size(s).unwrap()))
            .collect();
        let rows = sweep_table_sizes(&cfg, &specs).unwrap();
        for (row, depth) in rows.iter().zip([4.0, 5.0, 6.0]) {
            assert_eq!(row.samples_per_edge, 60.0 / depth);
            assert_eq!(row.expected_depth, depth);
            assert_eq!(row.kind, "fixed");
        }
    }

    #[test]
    fn single_thread_speedup_is_one() {
        let cfg = quick(20);
        let t = FragmentTable::fixed(&cfg.params, 4).unwrap();
        let rows = sweep_threads(&cfg, &t, &[1]);
        assert_eq!(rows[0].speedup_vs_1, 1.0);
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        let row = ThreadRow {
            threads: 1,
            edges_per_sec: 2.5,
            speedup_vs_1: 1.0,
        };
        write_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), THREADS_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "1,2.5,1.0");

        let mut buf = Vec::new();
        let row = TableSizeRow {
            size: 4,
            kind: "variable",
            edges_per_sec: 1.0,
            samples_per_edge: 2.0,
            expected_depth: 1.0,
        };
        write_csv(&mut buf, &[row]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().next().unwrap(), TABLESIZE_HEADER);
    }

    #[test]
    fn fixed_size_must_be_power_of_four() {
        assert!(TableSpec::fixed_with_size(512).is_err());
        assert!(TableSpec::fixed_with_size(1).is_err());
        assert_eq!(TableSpec::fixed_with_size(4096).unwrap(), TableSpec::Fixed { depth: 6 });
    }
}
