use std::path::Path;
use std::process::{Command, Output};

fn rotodec(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rotodec"));
    cmd.args(args).env_remove("ROTODEC_THREADS");
    if let Some(t) = threads {
        cmd.env("ROTODEC_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(csv: &str, column: &str) -> String {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    row[idx].to_owned()
}

#[test]
fn rate_defaults() {
    let o = rotodec(&["rate"], None);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("# rotodec-csv v1\n"));
    let lambda: f64 = field(&csv, "lambda_closed_per_s").parse().unwrap();
    assert!((lambda / 0.012649260235027456 - 1.0).abs() < 1e-12);
    assert_eq!(field(&csv, "pol_convention"), "avg-avg");
    assert_eq!(field(&csv, "converged"), "true");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\ntemp_K = 77\nomega-rad=0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&rotodec(&["rate", "--config", cfg], None));
    assert_eq!(field(&from_file, "T_K").parse::<f64>().unwrap(), 77.0);
    assert_eq!(field(&from_file, "omega_rad").parse::<f64>().unwrap(), 0.5);
    let flagged = stdout(&rotodec(&["--temp-K", "10", "rate", "--config", cfg], None));
    assert_eq!(field(&flagged, "T_K").parse::<f64>().unwrap(), 10.0);
    assert_eq!(field(&flagged, "omega_rad").parse::<f64>().unwrap(), 0.5);
}

#[test]
fn invalid_input_exits_2() {
    for args in [
        vec!["rate", "--temp-K", "-3"],
        vec!["rate", "--alpha-vol-m3", "1e-25,2e-25"],
        vec!["rate", "--grid-order", "2"],
        vec!["rate", "--pol-convention", "bogus"],
        vec!["partialwave", "--lmax", "9"],
        vec!["scan", "--steps", "1"],
        vec!["evolve", "--angles", "0,0"],
        vec!["evolve", "--times", "5,1"],
        vec!["rate", "--config", "/nonexistent/cfg"],
        vec!["frobnicate"],
    ] {
        let o = rotodec(&args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(rotodec(&["rate"], Some("many")).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let o = rotodec(&["scan", "--axis", "anisotropy", "--steps", "3", "--out", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(text.contains("# axis=anisotropy"));
    // first point has no anisotropy and no decoherence
    assert_eq!(field(&text, "lambda_closed_per_s"), "0.0000000000000000e0");
}

#[test]
fn evolve_with_density_file() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.txt");
    std::fs::write(&rho, "0,0,0.5,0\n1,1,0.5,0\n0,1,0.5,0\n").unwrap();
    let o = rotodec(
        &["evolve", "--angles", "0,1.5707963267948966", "--times", "0,79.05600655055457", "--rho0", rho.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let last_coherence = csv.lines().rfind(|l| l.contains(",0,1,")).unwrap();
    let abs: f64 = last_coherence.split(',').nth(5).unwrap().parse().unwrap();
    // one lifetime at the reference rate
    assert!((abs / (0.5 * (-1.0f64).exp()) - 1.0).abs() < 1e-12);
    std::fs::write(&rho, "0,0,0.9,0\n1,1,0.5,0\n").unwrap();
    let bad = rotodec(&["evolve", "--angles", "0,1", "--rho0", rho.to_str().unwrap()], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn outputs_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen: Vec<(String, String)> = Vec::new();
    for threads in ["1", "4", "8"] {
        let p = dir.path().join(format!("pw{threads}.csv"));
        let o = rotodec(&["partialwave", "--lmax", "2", "--out", p.to_str().unwrap()], Some(threads));
        assert_eq!(o.status.code(), Some(0));
        let rate = stdout(&rotodec(&["rate", "--omega-rad", "0.7"], Some(threads)));
        seen.push((std::fs::read_to_string(&p).unwrap(), rate));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn verify_passes_and_fails_honestly() {
    let ok = rotodec(&["verify"], None);
    assert_eq!(ok.status.code(), Some(0));
    let report = stdout(&ok);
    assert!(report.lines().filter(|l| l.starts_with("PASS ")).count() >= 15);
    assert!(!report.contains("FAIL "));

    let coarse = rotodec(&["verify", "--grid-order", "2"], None);
    assert_eq!(coarse.status.code(), Some(1));
    assert!(stdout(&coarse).contains("FAIL closed_vs_numeric_rate"));

    let wrong = rotodec(&["verify", "--pol-convention", "avg-sum"], None);
    assert_eq!(wrong.status.code(), Some(1));
    assert!(stdout(&wrong).contains("mean_ratio=2.000000"));
}

#[test]
fn verify_csv_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["1", "4", "8"]
        .iter()
        .map(|t| {
            let p = dir.path().join(format!("v{t}.csv"));
            let o = rotodec(&["verify", "--out", p.to_str().unwrap()], Some(t));
            assert_eq!(o.status.code(), Some(0));
            p
        })
        .collect();
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_eq!(read(&paths[0]), read(&paths[2]));
}

#[test]
fn help_exits_zero() {
    let o = rotodec(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for sub in ["rate", "scan", "partialwave", "evolve", "verify"] {
        assert!(text.contains(sub));
    }
}
