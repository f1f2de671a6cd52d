//! Runs the installed binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

use el_sched::analysis::{rtilde_fixed, WcrtBounds};
use el_sched::sim::TRACE_HEADER;
use el_sched::{PriorityAssignment, TaskSet};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn el_sched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_el-sched")).args(args).env("EL_SCHED_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `(R̃, status)` per task row of an analyze report.
fn report_rows(text: &str) -> Vec<(u64, String)> {
    text.lines()
        .filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit()))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[6].parse().unwrap(), f[7..].join(" "))
        })
        .collect()
}

#[test]
fn fig1_fixed_window_gives_no_decision() {
    let o = el_sched(&["analyze", &data("fig1.ts"), "--policy", "explicit", "--pp", "4,10", "--test", "fixed"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("verdict: no decision"));

    // Grid minima of the fixed-window bound, step 1 for both deadlines.
    let ts = TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap();
    let pa = PriorityAssignment::new(vec![4, 10]);
    let grid_min = |k: usize, r: Vec<u64>| {
        (0..ts[k].deadline).map(|b| rtilde_fixed(k, b, &WcrtBounds::new(r.clone()), &ts, &pa).unwrap()).min().unwrap()
    };
    // τ2 is evaluated first, against the deadlines; τ1 then sees τ2's bound.
    let r2 = grid_min(1, vec![5, 16]);
    let r1 = grid_min(0, vec![5, r2]);
    assert_eq!(r2, 15);
    assert!(r1 > 5);
    assert_eq!(report_rows(&text), vec![(5, "no bound".to_string()), (r2, "bounded".to_string())]);
}

#[test]
fn two_task_edf_is_schedulable() {
    let o = el_sched(&["analyze", &data("two.ts"), "--policy", "edf", "--test", "fixed"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = report_rows(&stdout(&o));
    assert!(rows.iter().all(|(_, s)| s == "bounded"));
    let v = el_sched(&["analyze", &data("two.ts"), "--test", "variable"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(report_rows(&stdout(&v)), rows);
}

#[test]
fn analyze_csv_row() {
    let o = el_sched(&["analyze", &data("two.ts"), "--csv"]);
    assert_eq!(
        stdout(&o).lines().collect::<Vec<_>>(),
        vec!["taskset_id,policy,verdict,iterations,R1,R2", "two,edf,true,3,1,6"]
    );
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("neg.ts");
    std::fs::write(&bad, "# el-sched taskset v1\n-1 0 5 5\n").unwrap();
    for args in [
        vec!["analyze", bad.to_str().unwrap()],
        vec!["analyze", &data("fig1.ts"), "--policy", "explicit"],
        vec!["analyze", &data("fig1.ts"), "--policy", "explicit", "--pp", "1"],
        vec!["analyze", &data("fig1.ts"), "--eta", "0"],
        vec!["simulate", &data("fig1.ts"), "--horizon", "0"],
        vec!["frobnicate"],
    ] {
        let o = el_sched(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn every_subcommand_help_lists_test_defaults() {
    for sub in ["analyze", "sweep", "lambda-sweep", "verify", "bench"] {
        let o = el_sched(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert!(text.contains("--eta") && text.contains("0.01"), "{sub}");
        assert!(text.contains("--depth") && text.contains("default: 5"), "{sub}");
        assert!(text.contains("--max-a") && text.contains("default: 10"), "{sub}");
    }
}

#[test]
fn simulate_writes_the_fig1_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("fig1.trace");
    let o = el_sched(&[
        "simulate",
        &data("fig1.ts"),
        "--policy",
        "explicit",
        "--pp",
        "4,10",
        "--horizon",
        "15",
        "--release-model",
        "periodic",
        "--suspension-model",
        "max-block",
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("feasible: true"));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with(TRACE_HEADER));
    // One suspension of S = 3 after τ2's first tick at 2.
    assert!(text.contains("# susp 3 6 1 0"));
    assert!(text.contains("13 15 exec 0 2"));
}

#[test]
fn generate_is_deterministic_and_feeds_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.ts");
    let args = ["generate", "--n", "6", "--u", "0.4", "--seed", "11"];
    let a = el_sched(&args);
    assert_eq!(stdout(&a), stdout(&el_sched(&args)));
    let o = el_sched(&[&args[..], &["-o", f.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&f).unwrap(), stdout(&a));
    assert!(matches!(el_sched(&["analyze", f.to_str().unwrap()]).status.code(), Some(0 | 1)));

    let batch = el_sched(&["generate", "--n", "3", "--count", "3", "--seed", "11"]);
    assert_eq!(stdout(&batch).lines().count(), 3);
    assert!(stdout(&batch).starts_with("{\"id\":0,"));
}

#[test]
fn verify_fixed_vs_variable_finds_no_discrepancy() {
    let o = el_sched(&["verify", "fixed-vs-variable", "--budget", "1000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("fixed-vs-variable: PASS (1000 examined, 1000 checks, 0 failures)"));
}

#[test]
fn verify_small_campaigns() {
    for args in [
        vec!["verify", "soundness", "--budget", "20", "--sims", "5", "--n", "4"],
        vec!["verify", "tfp-equivalence", "--budget", "50", "--sims", "3", "--n", "4"],
        vec!["verify", "overload", "--budget", "100"],
        vec!["verify", "partition", "--budget", "5", "--sims", "1", "--probes", "10", "--n", "3"],
        vec!["verify", "non-dominance", "--budget", "4000", "--seed", "1"],
    ] {
        let o = el_sched(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    }
}

#[test]
fn sweep_and_lambda_sweep_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "name = \"small\"\nmaster_seed = 4\nutilizations_percent = [20, 60]\nsets_per_point = 5\nn = 4\nlambdas = [-1, 0, 1]\nfamily = \"saedf\"\n\n[[policies]]\npolicy = \"edf\"\n\n[[policies]]\npolicy = \"edf\"\ntest = \"baseline\"\n",
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    let o = el_sched(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_small_4.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let o = el_sched(&["lambda-sweep", "--config", cfg.to_str().unwrap(), "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_small_saedf_4.csv")).unwrap();
    // Two cells of λ ∈ {-1, 0, 1} plus the best-λ row.
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    assert!(csv.contains("saedf:best"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "nonsense = 1\n").unwrap();
    assert_eq!(el_sched(&["sweep", "--config", bad.to_str().unwrap(), "--out-dir", out]).status.code(), Some(2));
}

#[test]
fn bench_reports_one_row_per_size() {
    let o = el_sched(&["bench", "--n-list", "3,5", "--utilizations", "0.5", "--reps", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,sets,mean_seconds,max_seconds");
    assert!(rows[1].starts_with("3,2,") && rows[2].starts_with("5,2,"));
}
