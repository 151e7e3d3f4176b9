use std::process::Command;

use steklov::cli::{exit_code, run};
use steklov::Error;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn steklov(args: &str) -> Output {
    let argv = std::iter::once("steklov").chain(args.split_whitespace());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn rows(csv: &str) -> Vec<Vec<&str>> {
    csv.lines().map(|l| l.split(',').collect()).collect()
}

fn summary<'a>(csv: &'a str, key: &str) -> &'a str {
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("summary,"), "{last}");
    last.split(',').find_map(|c| c.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap()
}

#[test]
fn spectrum_rows() {
    let o = steklov("spectrum --problem p1 --n 2 --m-max 2");
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.stdout, "index,value,multiplicity,cumulative_count\r\n0,2,1,1\r\n1,4,2,3\r\n2,6,2,5\r\n");

    let o = steklov("spectrum --problem p2 --m-max 1");
    let r = rows(&o.stdout);
    assert_eq!(r[1], ["0", "0", "1", "1"]);
    assert_eq!(r[2][0], "1");
    assert!(r[2][1].starts_with("1.587401"));
    assert_eq!(&r[2][2..], ["2", "3"]);
}

#[test]
fn validation_failures_exit_2_with_one_line() {
    for args in [
        "spectrum --problem p1 --n 1 --m-max 2",
        "spectrum --problem p4",
        "spectrum --n two",
        "weyl --problem p1 --rho 1+*2",
        "weyl --problem p1 --rho -1",
        "halfspace --h 0",
        "halfspace --h 0.3 --L 1",
    ] {
        let o = steklov(args);
        assert_eq!(o.code, 2, "{args}: {}", o.stderr);
        assert_eq!(o.stderr.trim_end().lines().count(), 1, "{args}: {}", o.stderr);
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn numerical_failures_map_to_3() {
    assert_eq!(exit_code(&Error::Singular("pivot".into())), 3);
    assert_eq!(exit_code(&Error::Numerical("nan".into())), 3);
    assert_eq!(exit_code(&Error::Domain("n".into())), 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_steklov");
    let ok = Command::new(bin).args(["spectrum", "--m-max", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("index,value"));
    let bad = Command::new(bin).args(["spectrum", "--n", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn weyl_ball_disk_is_exact() {
    let o = steklov("weyl --problem p1 --n 2 --m-max 50");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let r = rows(&o.stdout);
    assert_eq!(r[0], ["tau", "count", "predicted", "residual_scaled"]);
    for row in &r[1..r.len() - 1] {
        assert_eq!(row[0], row[2], "predicted equals tau");
        assert_eq!(row[3], "-1");
    }
    assert_eq!(summary(&o.stdout, "leading_coefficient"), "1");
}

#[test]
fn weyl_disk_dirichlet_trace_is_sharp() {
    let o = steklov("weyl --problem p2 --m-max 10000");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let est: f64 = summary(&o.stdout, "second_coeff_estimate").parse().unwrap();
    assert!((est - 1.0 / 3.0).abs() < 1e-3, "{est}");
    assert_eq!(summary(&o.stdout, "sharp_verdict"), "true");
}

#[test]
fn weyl_harmonic_constant() {
    let o = steklov("weyl --problem harmonic --m-max 100");
    assert_eq!(summary(&o.stdout, "leading_coefficient"), "2");
}

#[test]
fn halfspace_ladder_is_second_order() {
    let o = steklov("halfspace --problem p1 --h 0.001953125");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let r = rows(&o.stdout);
    assert_eq!(r[0], ["h", "recovered", "target", "rel_error"]);
    let body = &r[1..r.len() - 1];
    assert_eq!(body.len(), 4);
    let errs: Vec<f64> = body.iter().map(|row| row[3].parse().unwrap()).collect();
    for row in body {
        assert_eq!(row[2], "2");
    }
    for w in errs.windows(2) {
        assert!((3.5..4.5).contains(&(w[0] / w[1])), "{errs:?}");
    }
}

#[test]
fn halfspace_kernel_mode() {
    let o = steklov("halfspace --mode kernel");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let max: f64 = summary(&o.stdout, "max_abs_diff").parse().unwrap();
    assert!(max < 1e-4);
}

#[test]
fn reals_use_dot_and_round_trip() {
    let o = steklov("weyl --problem p2 --m-max 40");
    for row in &rows(&o.stdout)[1..] {
        if row[0] == "summary" {
            continue;
        }
        for c in row {
            let v: f64 = c.parse().unwrap_or_else(|_| panic!("{c}"));
            assert!(v.is_finite());
        }
    }
}

#[test]
fn output_is_deterministic_per_seed() {
    let a = steklov("symbol --n 3 --seed 7 --samples 2000");
    let b = steklov("symbol --n 3 --seed 7 --samples 2000");
    let c = steklov("symbol --n 3 --seed 8 --samples 2000");
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "problem = \"p1\"\nn = 3\nm_max = 4\n").unwrap();
    let path = cfg.display();

    let o = steklov(&format!("spectrum --config {path}"));
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(rows(&o.stdout).len(), 6);
    assert_eq!(rows(&o.stdout)[1][1], "3");

    let o = steklov(&format!("spectrum --config {path} --m-max 1 --n 2"));
    assert_eq!(o.stdout, "index,value,multiplicity,cumulative_count\r\n0,2,1,1\r\n1,4,2,3\r\n");
}

#[test]
fn bad_config_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["n = 3\ncolour = \"red\"\n", "n = \"three\"\n", "n = [", "rho = \"cos(\"\n"] {
        let cfg = dir.path().join("bad.toml");
        std::fs::write(&cfg, text).unwrap();
        let o = steklov(&format!("spectrum --config {}", cfg.display()));
        assert_eq!(o.code, 2, "{text:?}");
    }
    assert_eq!(steklov("spectrum --config /nonexistent/steklov.toml").code, 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = steklov(&format!("spectrum --m-max 2 --out {}", out.display()));
    assert_eq!(o.code, 0);
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, steklov("spectrum --m-max 2").stdout);
}

#[test]
fn identity_check_rows() {
    let o = steklov("identity-check --n 12");
    let r = rows(&o.stdout);
    assert_eq!(r.len(), 12);
    for row in &r[1..] {
        let d: f64 = row[3].parse().unwrap();
        assert!(d < 1e-12);
    }
}
