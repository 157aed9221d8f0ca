use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use timeavg_cli::{execute, run_cli, Cli};

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn cli(args: &[&str]) -> i32 {
    run_cli(std::iter::once("timeavg").chain(args.iter().copied()))
}

fn error_of(args: &[&str]) -> String {
    let parsed = Cli::try_parse_from(std::iter::once("timeavg").chain(args.iter().copied())).unwrap();
    execute(&parsed.command).unwrap_err().to_string()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn one_step_solve_writes_one_trace_row() {
    let dir = tempfile::tempdir().unwrap();
    let toy = problems().join("toy.toml");
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["solve", "--problem", toy.to_str().unwrap(), "--horizon", "1", "--out", out]), 0);

    let mut reader = csv::Reader::from_path(dir.path().join("trace.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..5], ["t", "x_1", "y_1", "w_1", "z_1"]);
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    // z = 0 picks the smallest level; a zero multiplier leaves y at the box bottom.
    assert_eq!(&rows[0][0], "0");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);

    let summary: toml::Table = toml::from_str(&fs::read_to_string(dir.path().join("summary.toml")).unwrap()).unwrap();
    assert!(summary.contains_key("f_xbar"), "{summary:?}");
}

#[test]
fn solving_a_file_matches_the_builtin_problem() {
    let dir = tempfile::tempdir().unwrap();
    let file = problems().join("polyhedral.toml");
    let (a, b) = (dir.path().join("file"), dir.path().join("builtin"));
    let common = ["--horizon", "500", "--V", "20"];
    let mut args = vec!["solve", "--problem", file.to_str().unwrap(), "--out", a.to_str().unwrap()];
    args.extend(common);
    assert_eq!(cli(&args), 0);
    let mut args = vec!["solve", "--figure", "2", "--out", b.to_str().unwrap()];
    args.extend(common);
    assert_eq!(cli(&args), 0);
    assert_eq!(fs::read(a.join("trace.csv")).unwrap(), fs::read(b.join("trace.csv")).unwrap());
}

#[test]
fn non_convex_piece_is_rejected_with_its_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = fs::read_to_string(problems().join("polyhedral.toml"))
        .unwrap()
        .replacen("kind = \"linear\"\nslope = 1.0", "kind = \"quadratic\"\ncurvature = -1.0", 1);
    fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();
    let out = dir.path().join("out");
    let args = ["solve", "--problem", p, "--horizon", "5", "--out", out.to_str().unwrap()];
    assert_eq!(cli(&args), 1);
    let message = error_of(&args);
    assert!(message.contains("objective[2]") && message.contains("non-convex"), "{message}");
    assert!(!out.exists());
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let garbage = dir.path().join("garbage.toml");
    fs::write(&garbage, "dimension = \"two\"").unwrap();
    assert_eq!(cli(&["solve", "--problem", garbage.to_str().unwrap(), "--out", out]), 1);
    assert_eq!(cli(&["solve", "--problem", "/nonexistent/problem.toml", "--out", out]), 1);
    assert_eq!(cli(&["solve", "--figure", "7", "--out", out]), 1);
    assert!(error_of(&["solve", "--figure", "7", "--out", out]).contains("no figure 7"));
    assert_eq!(cli(&["reproduce", "--figure", "1", "--out", out]), 1);
    assert_eq!(cli(&["solve", "--out", out]), 1);
    assert_eq!(cli(&["solve", "--figure", "2", "--V", "0.5", "--out", out]), 1);
    assert_eq!(cli(&["frobnicate"]), 1);
}

#[test]
fn reproduce_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        // A short horizon misses the tolerance, which is exit code 3.
        let code = cli(&["reproduce", "--figure", "2,3", "--horizon", "3000", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 3);
    }
    for name in ["figure2.csv", "figure2.toml", "figure3.csv", "figure3.toml"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let rows = csv_rows(&a.join("figure2.csv"));
    assert_eq!(rows.last().unwrap()[0].parse::<usize>().unwrap(), 3000);
}

#[test]
fn sweep_writes_one_row_per_v() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["sweep", "--figure", "3", "--V", "5,10", "--horizon", "4000", "--f-opt", "0.5", "--out", out];
    assert_eq!(cli(&args), 0);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 5.0);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.1);
    assert!(dir.path().join("sweep_summary.toml").exists());
}

#[test]
fn diagnose_writes_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["diagnose", "--figure", "2", "--horizon", "2000", "--out", out]), 0);
    let rows = csv_rows(&dir.path().join("certificates.csv"));
    assert_eq!(rows.len(), 2000);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() >= -1e-9));
    assert!(dir.path().join("diagnose.toml").exists());
}
