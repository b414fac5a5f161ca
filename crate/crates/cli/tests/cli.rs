use std::path::{Path, PathBuf};

use rtf_cli::{run_command, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO, EXIT_OK};
use rtf_local::report::{parse_report_csv, parse_stability_csv};
use serde_json::Value;

fn demo_coeffs() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/newforms_demo.jsonl").to_string()
}

/// Runs `rtf <args> --out <dir>/<name>` and returns (exit code, file contents).
fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let out: PathBuf = dir.join(name);
    let mut argv = vec!["rtf".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.to_string_lossy().into_owned());
    let code = run_command(argv);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn code(args: &[&str]) -> i32 {
    run_command(std::iter::once("rtf").chain(args.iter().copied()))
}

#[test]
fn orbital_eval_example() {
    let dir = tempfile::tempdir().unwrap();
    let (c, text) = run_to(
        dir.path(),
        "o.json",
        &["orbital-eval", "--p", "3", "--n", "1", "--m", "0", "--chi", "p:3,n:1,g:1", "--t", "10/9"],
    );
    assert_eq!(c, EXIT_OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    for key in ["value", "support_hit", "branch_trace"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    // the two branch terms cancel exactly here
    assert_eq!(v["value"]["re"].as_f64(), Some(0.0));
    assert!(v["branch_trace"].as_array().unwrap().len() >= 2);
}

#[test]
fn degenerate_t_is_a_domain_error() {
    assert_eq!(code(&["orbital-eval", "--p", "3", "--n", "1", "--m", "0", "--chi", "p:3,n:1,g:1", "--t", "1"]), EXIT_DOMAIN);
    assert_eq!(code(&["orbital-eval", "--p", "3", "--chi", "p:3,n:1,g:1", "--t", "0"]), EXIT_DOMAIN);
}

#[test]
fn configuration_errors() {
    assert_eq!(code(&["orbital-eval", "--p", "3", "--chi", "p:3,n:1,g:1"]), EXIT_CONFIG);
    assert_eq!(code(&["orbital-eval", "--p", "3", "--chi", "p:3,n:1,g:1", "--t", "0.5"]), EXIT_CONFIG);
    assert_eq!(code(&["orbital-eval", "--p", "3", "--chi", "p:3,n:1,g:x", "--t", "2"]), EXIT_CONFIG);
    assert_eq!(code(&["orbital-eval", "--p", "3", "--n", "2", "--chi", "p:3,n:1,g:1", "--t", "2"]), EXIT_CONFIG);
    assert_eq!(code(&["orbital-eval", "--p", "4", "--t", "1/2"]), EXIT_CONFIG);
    assert_eq!(code(&["stability-scan", "--m-max", "5"]), EXIT_CONFIG);
    assert_eq!(code(&["stability-scan", "--q", "5", "--m-min", "9", "--m-max", "5"]), EXIT_CONFIG);
    assert_eq!(code(&["moment", "--threads", "0"]), EXIT_CONFIG);
    assert_eq!(code(&["nonsense"]), EXIT_CONFIG);
    assert_eq!(code(&["--help"]), EXIT_OK);
}

#[test]
fn io_errors() {
    assert_eq!(code(&["moment", "--coeffs", "/nonexistent/forms.jsonl"]), EXIT_IO);
    assert_eq!(code(&["stability-scan", "--q", "5", "--m-max", "3", "--out", "/nonexistent/dir/x.csv"]), EXIT_IO);
}

#[test]
fn stability_scan_rows_and_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["stability-scan", "--q", "5", "--m-max", "200", "--umax", "1"];
    let (c, csv) = run_to(dir.path(), "s.csv", &args);
    assert_eq!(c, EXIT_OK);
    assert_eq!(csv.lines().count(), 201);
    let rows = parse_stability_csv(&csv).unwrap();
    assert_eq!(rows.len(), 200);

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let (c, json) = run_to(dir.path(), "s.json", &json_args);
    assert_eq!(c, EXIT_OK);
    let v: Value = serde_json::from_str(&json).unwrap();
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (r, j) in rows.iter().zip(jrows) {
        assert_eq!(j["M"].as_u64(), Some(r.level));
        assert_eq!(j["support_size"].as_u64(), Some(r.support_size as u64));
        assert_eq!(j["empty"].as_bool(), Some(r.empty));
        assert_eq!(j["finite_part_abs"].as_f64(), Some(r.finite_part_abs));
    }
}

#[test]
fn reports_are_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = demo_coeffs();
    for base in [
        vec!["moment", "--coeffs", coeffs.as_str(), "--q", "5"],
        vec!["stability-scan", "--q", "4", "--m-max", "40"],
        vec!["orbital-scan", "--p", "5", "--chi", "p:5,n:1,g:1,u:1/3", "--m-max", "2", "--count", "50"],
    ] {
        let mut outs = vec![];
        for (i, threads) in ["1", "8", "1"].iter().enumerate() {
            for format in ["csv", "json"] {
                let mut a = base.clone();
                a.extend(["--threads", threads, "--format", format]);
                let (c, text) = run_to(dir.path(), &format!("r{i}.{format}"), &a);
                assert_eq!(c, EXIT_OK, "{a:?}");
                outs.push((format, text));
            }
        }
        for w in outs.chunks(2).collect::<Vec<_>>().windows(2) {
            assert_eq!(w[0], w[1], "{base:?}");
        }
    }
}

#[test]
fn moment_csv_round_trip_and_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = demo_coeffs();
    let (c, csv) = run_to(dir.path(), "m.csv", &["moment", "--coeffs", &coeffs, "--chi", "kronecker:-4"]);
    assert_eq!(c, EXIT_OK);
    let rows = parse_report_csv(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.q == 4));
    let (c, json) = run_to(dir.path(), "m.json", &["moment", "--coeffs", &coeffs, "--chi", "kronecker:-4", "--format", "json"]);
    assert_eq!(c, EXIT_OK);
    let v: Value = serde_json::from_str(&json).unwrap();
    let entries: Vec<&Value> = v.as_array().unwrap().iter().flat_map(|r| r["entries"].as_array().unwrap()).collect();
    for (r, e) in rows.iter().zip(entries) {
        assert_eq!(e["label"].as_str(), Some(r.label.as_str()));
        assert_eq!(e["abs_l2"].as_f64(), Some(r.abs_l2));
    }
    let (c, empty) = run_to(dir.path(), "e.csv", &["moment", "--coeffs", &coeffs, "--level", "999"]);
    assert_eq!(c, EXIT_OK);
    assert_eq!(empty, "N,k,q,label,L_re,L_im,absL2\n");
}

#[test]
fn local_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let (c, csv) = run_to(dir.path(), "c.csv", &["charsum", "--p", "5", "--chi", "p:5,n:1,g:1", "--format", "csv"]);
    assert_eq!(c, EXIT_OK);
    // G(m) = φ(5) from m = 2n on
    assert!(csv.lines().last().unwrap().starts_with("3,4.0,"));
    let (c, json) = run_to(dir.path(), "c.json", &["charsum", "--p", "5", "--chi", "p:5,n:1,g:1"]);
    assert_eq!(c, EXIT_OK);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert!((v["gauss_sum"]["abs2"]["re"].as_f64().unwrap() - 5.0).abs() < 1e-12);

    let (c, csv) = run_to(dir.path(), "s.csv", &["smallcell", "--p", "7", "--m", "1", "--chi", "p:7,n:0,u:1/3", "--s", "1/4"]);
    assert_eq!(c, EXIT_OK);
    assert_eq!(csv.lines().count(), 10);
    assert_eq!(code(&["smallcell", "--p", "7", "--chi", "p:7,n:0", "--s", "-1/2"]), EXIT_CONFIG);

    let (c, csv) = run_to(dir.path(), "d.csv", &["dualkernel", "--p", "5", "--m", "1", "--chi", "p:5,n:1,g:1", "--ex-min", "-6", "--ex-max", "2"]);
    assert_eq!(c, EXIT_OK);
    assert_eq!(csv.lines().count(), 10);
    assert_eq!(code(&["dualkernel", "--p", "5", "--chi", "p:5,n:0"]), EXIT_DOMAIN);
}
