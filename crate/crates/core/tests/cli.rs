use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alsvre::data_io::{read_trace_csv, read_vector_file};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alsvre"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/auc_small.libsvm")
}

/// `key=value` from the final summary line of `run`.
fn field(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from {line:?}"))
        .to_string()
}

fn data_rows(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn balanced_quadratic_lsvre_reaches_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = run(&[
        "run",
        "--problem",
        "quadratic:n=16,l=4,mu=0.5",
        "--solver",
        "lsvre",
        "--budget-iters",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = read_trace_csv(fs::File::open(&out).map(std::io::BufReader::new).unwrap()).unwrap();
    let d = table.column("dist2").unwrap();
    assert!(
        *d.last().unwrap() < 1e-6,
        "final dist2 {}",
        d.last().unwrap()
    );
    assert_eq!(
        table.column("iteration").unwrap().last().copied(),
        Some(2000.0)
    );
    assert!(stdout(&o).contains("solver=lsvre"));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = run(&[
        "run",
        "--problem",
        "quadratic:n=4",
        "--solver",
        "sgd",
        "--budget-iters",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--suite", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "run",
        "--problem",
        "quadratic:n=4,colour=red",
        "--solver",
        "eg",
        "--budget-iters",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["run", "--problem", "quadratic:n=4", "--solver", "eg"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "bench",
        "--problem",
        "quadratic:n=4",
        "--solvers",
        "eg",
        "--budget-iters",
        "5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for suite in ["projections", "zero_chain"] {
        let o = run(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).lines().count() > 1);
    }
}

#[test]
fn duplicate_solver_gives_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "bench",
        "--problem",
        "quadratic:n=8,l=2,mu=0.2",
        "--solvers",
        "lsvre,lsvre",
        "--seeds",
        "3",
        "--budget-iters",
        "300",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = data_rows(&dir.path().join("lsvre_seed3.csv"));
    let b = data_rows(&dir.path().join("lsvre-2_seed3.csv"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn auc_fixture_bench_writes_three_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let problem = format!("auc:file={},lambda=1e-4", fixture().display());
    let o = run(&[
        "bench",
        "--problem",
        &problem,
        "--solvers",
        "eg,lsvre,alsvre",
        "--seeds",
        "0",
        "--budget-epochs",
        "5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["eg", "lsvre", "alsvre"] {
        let path = dir.path().join(format!("{name}_seed0.csv"));
        let table =
            read_trace_csv(fs::File::open(&path).map(std::io::BufReader::new).unwrap()).unwrap();
        assert!(table.rows.len() >= 2, "{name}");
        assert!(table.rows.iter().flatten().all(|v| v.is_finite()));
    }
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    for name in ["eg", "lsvre", "alsvre"] {
        assert!(summary.lines().any(|l| l.starts_with(name)), "{summary}");
    }
}

#[test]
fn wireless_bench_with_tuned_steps_orders_alsvre_before_eg() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "bench",
        "--problem",
        "wireless:n=50,r=1,lo=0,hi=10,seed=7",
        "--solvers",
        "eg,alsvre",
        "--num-seeds",
        "3",
        "--budget-epochs",
        "200",
        "--trace-every",
        "0",
        "--sweep-tau",
        "wireless",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mean = |name: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("{text}"));
        field(line, "grad_mapping").parse().unwrap()
    };
    assert!(mean("alsvre") <= mean("eg"), "{text}");
}

#[test]
fn gen_data_ranges_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    for (n, hi, seed) in [(500usize, 10.0, 1u64), (1000, 50.0, 2)] {
        let a = dir.path().join(format!("a{seed}.txt"));
        let b = dir.path().join(format!("b{seed}.txt"));
        for path in [&a, &b] {
            let o = run(&[
                "gen-data",
                "--kind",
                "wireless",
                "--n",
                &n.to_string(),
                "--lo",
                "0",
                "--hi",
                &hi.to_string(),
                "--radius",
                "1",
                "--seed",
                &seed.to_string(),
                "--out",
                path.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        let values = read_vector_file(fs::read(&a).unwrap().as_slice()).unwrap();
        assert_eq!(values.len(), n);
        assert!(values.iter().all(|v| (0.0..=hi).contains(v)));
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}

#[test]
fn alsvre_without_prox_term_runs_the_plain_inner_loop() {
    let common = [
        "--problem",
        "quadratic:n=8,l=2,mu=0.3",
        "--seed",
        "4",
        "--trace-every",
        "0",
    ];
    let o = run(&[
        &[
            "run",
            "--solver",
            "lsvre",
            "--budget-iters",
            "40",
            "--params",
            "tau=0.1,p=0.25",
        ],
        &common[..],
    ]
    .concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let plain = stdout(&o);
    let o = run(&[
        &[
            "run",
            "--solver",
            "alsvre",
            "--budget-iters",
            "1",
            "--params",
            "beta=0,tau=0.1,p=0.25,inner=40",
        ],
        &common[..],
    ]
    .concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let acc = stdout(&o);
    let csv_meta: Vec<&str> = acc.lines().filter(|l| l.starts_with('#')).collect();
    assert!(csv_meta.contains(&"# beta=0"), "{acc}");
    assert!(csv_meta.contains(&"# gamma=0"), "{acc}");
    let sfo = |s: &str| -> f64 {
        let table = read_trace_csv(s.as_bytes()).unwrap();
        *table.column("sfo_calls").unwrap().last().unwrap()
    };
    // same draws, so the same number of snapshot refreshes; the round adds
    // only the correction step's full gradient
    let (sfo_plain, sfo_acc) = (sfo(&plain), sfo(&acc));
    assert_eq!(sfo_acc, sfo_plain + 8.0);
}
