use std::fs;
use std::process::{Command, Output};

fn atop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atop")).args(args).output().unwrap()
}

fn atop_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atop")).env("ATOP_THREADS", threads).args(args).output().unwrap()
}

#[test]
fn toy_demo_prints_exact_diagonals() {
    let out = atop(&["toy-demo", "--N", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "M1+M1- diag: 0,1,1,1,1\n[M1+,M1-] diag: -1,0,0,0,1\n");
}

#[test]
fn basis_check_passes_and_writes_rule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rule.csv");
    let out = atop(&["basis-check", "--N", "16", "--rule-out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(path).unwrap();
    assert!(csv.starts_with("tau,theta,weight\n"));
    assert_eq!(csv.lines().count(), 1 + 16 * 33);
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let out = atop(&["toy-demo", "--N", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--N"));

    let out = atop(&["cn-table", "--N", "8", "--window", "box:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--window"));

    let out = atop(&["curve-op", "--curve", "omega", "--N", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--curve"));

    let out = atop_env(&["toy-demo", "--N", "4"], "zero");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ATOP_THREADS"));
}

#[test]
fn tolerance_failure_exits_1() {
    let out = atop(&["atoeplitz-roundtrip", "--N", "12", "--matrix", "m1", "--tau-panels", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["rel_frobenius"].as_f64().unwrap() > 1e-6);
}

#[test]
fn roundtrip_report_schema() {
    let out = atop(&["atoeplitz-roundtrip", "--N", "8", "--matrix", "m2-beta"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n"], 8);
    assert_eq!(report["n_theta"], 32);
    assert!(report["rel_frobenius"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["residuals"].as_array().unwrap().len(), 8);
}

#[test]
fn matrix_dump_schema() {
    let out = atop(&["matrix", "--N", "3", "--name", "m1-plus", "--dump"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 3);
    assert_eq!(v["re"][1][0], 1.0);
    assert_eq!(v["re"][0][1], 0.0);
    assert_eq!(v["im"].as_array().unwrap().len(), 3);
}

#[test]
fn color_one_delta_is_minus_m1() {
    let out = atop(&["curve-op", "--curve", "delta", "--N", "6", "--color", "1", "--dump"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for i in 0..6usize {
        for j in 0..6 {
            let want = if i.abs_diff(j) == 1 { -1.0 } else { 0.0 };
            assert_eq!(v["re"][i][j].as_f64().unwrap(), want);
        }
    }
}

#[test]
fn cn_table_schema() {
    let out = atop(&["cn-table", "--N", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,C_n,C_n-1,N*(C_n-1)"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.62648418196129600083).abs() < 1e-10);
    assert!((first[3] - 16.0 * first[2]).abs() < 1e-12);
}

#[test]
fn symbol_vs_trace_csv() {
    let out = atop(&["symbol-vs-trace", "--curve", "gamma", "--color", "3", "--Ns", "32,64,128", "--window", "0.3,0.7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("N,hbar,err,fitted_p\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn symbol_dump_grid_columns() {
    let out = atop(&["symbol", "--N", "5", "--matrix", "m2-beta", "--z", "0.4,0.3", "--dump-grid"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,re[k=-2],im[k=-2],re[k=2],im[k=2]"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let runs = [
        vec!["atoeplitz-roundtrip", "--N", "10", "--matrix", "m1-alpha"],
        vec!["husimi-rate", "--Ns", "16,32"],
        vec!["cn-table", "--N", "32", "--window", "gaussian:0.4,0.25"],
    ];
    for args in &runs {
        let a = atop_env(args, "1");
        let b = atop_env(args, "4");
        let c = atop_env(args, "4");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(b.stdout, c.stdout, "{args:?}");
        assert_eq!(a.status.code(), Some(0));
    }
}
