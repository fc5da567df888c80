use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rmat");

fn rmat(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("RMAT_THREADS")
        .output()
        .expect("run rmat")
}

fn ok(args: &[&str]) -> String {
    let out = rmat(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn summary_field<'s>(line: &'s str, key: &str) -> &'s str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
        .unwrap_or_else(|| panic!("no {key} in {line:?}"))
}

const GRAPH500: [&str; 8] = ["-a", ".57", "-b", ".19", "-c", ".19", "-d", ".05"];

#[test]
fn binary_output_has_sixteen_bytes_per_edge_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["generate"];
        args.extend(GRAPH500);
        args.extend(["-k", "20", "-m", "1000000", "--table", "fixed", "--depth", "8", "--seed", "1", "-o"]);
        args.push(path_str(&out));
        let line = ok(&args);
        assert_eq!(summary_field(&line, "edges"), "1000000");
        fs::read(out).unwrap()
    };
    let first = run("a.bin");
    assert_eq!(first.len(), 16_000_000);
    assert_eq!(first, run("b.bin"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("t{threads}.bin"));
        ok(&["generate", "-k", "16", "-m", "300000", "--threads", threads, "-o", path_str(&out)]);
        fs::read(out).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn threads_flag_overrides_environment() {
    let out = Command::new(BIN)
        .args(["generate", "-k", "10", "-m", "10", "--format", "none", "--threads", "1"])
        .env("RMAT_THREADS", "0")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(BIN)
        .args(["generate", "-k", "10", "-m", "10", "--format", "none"])
        .env("RMAT_THREADS", "0")
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn format_none_reports_throughput() {
    let line = ok(&["generate", "-k", "24", "-m", "200000", "--format", "none"]);
    assert_eq!(line.lines().count(), 1);
    assert_eq!(summary_field(&line, "edges"), "200000");
    assert!(summary_field(&line, "edges_per_sec").parse::<f64>().unwrap() > 0.0);
    assert!(summary_field(&line, "samples_per_edge").parse::<f64>().unwrap() > 1.0);
}

#[test]
fn text_format_lines_fit_the_node_range() {
    let text = ok(&["generate", "-k", "5", "-m", "1000", "--format", "text", "--undirected"]);
    let pairs: Vec<(u64, u64)> = text
        .lines()
        .map(|l| {
            let (u, v) = l.split_once(' ').unwrap();
            (u.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(pairs.len(), 1000);
    assert!(pairs.iter().all(|&(u, v)| u < 32 && v <= u));
}

#[test]
fn failure_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.bin");
    let res = rmat(&["generate", "-a", "0.9", "-k", "4", "-o", path_str(&out)]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8(res.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

    let res = rmat(&["generate", "--part", "0"]);
    assert!(!res.status.success());
    assert_eq!(String::from_utf8(res.stderr).unwrap().lines().count(), 1);
}

#[test]
fn verify_prints_one_parseable_line() {
    let line = ok(&["verify", "-k", "4", "-m", "1000000", "--table", "fixed", "--depth", "2"]);
    assert_eq!(line.lines().count(), 1);
    for key in ["statistic", "dof", "threshold", "alpha"] {
        summary_field(&line, key).parse::<f64>().unwrap();
    }
    assert_eq!(summary_field(&line, "verdict"), "pass");

    let empty = rmat(&["verify", "-k", "4", "--input", "/dev/null"]);
    assert_eq!(empty.status.code(), Some(1));
}

#[test]
fn verify_rejects_edges_from_another_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.bin");
    ok(&["generate", "-k", "4", "-m", "1000000", "-a", ".4", "-b", ".2", "-c", ".2", "-d", ".2", "-o", path_str(&out)]);
    let line = ok(&["verify", "-k", "4", "--input", path_str(&out)]);
    assert_eq!(summary_field(&line, "verdict"), "fail");
}

#[test]
fn verify_reads_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.bin");
    ok(&["generate", "-k", "4", "-m", "500000", "--seed", "9", "-o", path_str(&out)]);
    let line = ok(&["verify", "-k", "4", "--input", path_str(&out)]);
    assert_eq!(summary_field(&line, "verdict"), "pass");
}

#[test]
fn parts_concatenate_to_the_single_part_run() {
    let dir = tempfile::tempdir().unwrap();
    let whole = dir.path().join("whole.bin");
    ok(&["generate", "-k", "10", "-m", "100000", "--tiles", "2", "--parts", "1", "-o", path_str(&whole)]);
    let mut merged = Vec::new();
    for part in 0..4 {
        let out = dir.path().join(format!("p{part}.bin"));
        let i = part.to_string();
        ok(&["generate", "-k", "10", "-m", "100000", "--tiles", "2", "--parts", "4", "--part", &i, "-o", path_str(&out)]);
        merged.extend(fs::read(out).unwrap());
    }
    assert_eq!(merged.len(), 1_600_000);
    assert_eq!(merged, fs::read(whole).unwrap());
}

#[test]
fn bench_csv_headers() {
    let csv = ok(&["bench-threads", "-k", "16", "-m", "20000", "--thread-list", "1", "--repetitions", "3"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("threads,edges_per_sec,speedup_vs_1"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[2].parse::<f64>().unwrap(), 1.0);

    let csv = ok(&["bench-tablesize", "-k", "60", "-m", "20000", "--table", "fixed", "--sizes", "253,1021,4093"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("size,kind,edges_per_sec,samples_per_edge,expected_depth"));
    let spe: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(spe, [15.0, 12.0, 10.0]);
}

#[test]
fn table_dump_lists_every_entry() {
    let text = ok(&["table-dump", "-k", "8", "--table", "variable", "--size", "13"]);
    let total: f64 = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            assert_eq!(f.len(), 4);
            let depth: usize = f[2].parse().unwrap();
            assert_eq!((f[0].len(), f[1].len()), (depth, depth));
            f[3].parse::<f64>().unwrap()
        })
        .sum();
    assert_eq!(text.lines().count(), 13);
    assert!((total - 1.0).abs() < 1e-12);
}
