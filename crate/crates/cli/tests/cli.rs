use std::path::Path;
use std::process::{Command, Output};

fn frpmg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frpmg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn operators_for_degree_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = frpmg(
        &["operators", "--p", "0", "--nodes", "legendre"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("operators.csv")).unwrap();
    assert!(csv.starts_with("# command=operators\n"));
    let rows = data_rows(&csv);
    let find = |name: &str| rows.iter().find(|r| r[0] == name).unwrap().clone();
    assert_eq!(find("D")[3].parse::<f64>().unwrap(), 0.0);
    // Fully upwind single point: C_0 = 1/2, C_- = -1/2.
    assert_eq!(find("C0")[3].parse::<f64>().unwrap(), 0.5);
    assert_eq!(find("C-")[3].parse::<f64>().unwrap(), -0.5);
    assert!(dir.path().join("config.resolved.json").exists());
}

#[test]
fn verify_preset_reports_small_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let out = frpmg(&["verify", "--preset", "fig3b-k8"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let line = stdout
        .lines()
        .find(|l| l.starts_with("max relative deviation"))
        .unwrap();
    let value: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(value < 1e-8);
    let snap = std::fs::read_to_string(dir.path().join("snapshot.csv")).unwrap();
    let header = snap.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "element,node,x,re,im");
    assert_eq!(data_rows(&snap).len(), 16 * 5);
}

#[test]
fn cycle_run_emits_one_row_per_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"space": {"p": 3, "mu": 0.5}, "dualtime": {"dt": 0.07, "dtau": 0.007},
            "cycle": {"n_cycles": 6}, "sweep": {"k_hat_over_pi": [0.125]}}"#,
    );
    let out = frpmg(
        &["cycle-run", "--cycle", "vap", "--config", &cfg],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("cycle_run_0.csv")).unwrap();
    assert!(csv.contains("# cycle=vap\n"));
    assert!(csv.contains("cycle,tau,error,error_exact,beta0,beta1\n"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 7);
    let err: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(err[6] < err[0]);
}

#[test]
fn output_is_identical_across_pool_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"space": {"p": 3, "mu": 0.1}, "dualtime": {"dt": 1.0, "dtau": 0.01},
            "cycle": {"preset": "v1"},
            "sweep": {"k_over_pi": 0.25, "ratios": {"start": 2.0, "stop": 500.0, "n": 9, "log": true}}}"#,
    );
    let read = |jobs: &str| {
        let d = dir.path().join(format!("j{jobs}"));
        let out = frpmg(&["contraction", "--config", &cfg, "--jobs", jobs], &d);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read(d.join("contraction.csv")).unwrap()
    };
    let a = read("1");
    assert_eq!(a, read("4"));
    let text = String::from_utf8(a).unwrap();
    let marks: usize = data_rows(&text)
        .iter()
        .map(|r| r[5].parse::<usize>().unwrap())
        .sum();
    assert_eq!(marks, 1);
}

#[test]
fn stability_writes_contours() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"sweep": {"stability": {"nx": 71, "ny": 101, "ms": [1, 10]}}}"#,
    );
    let out = frpmg(&["stability", "--config", &cfg], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    let rows = data_rows(&csv);
    for label in ["m=1", "m=10", "erk"] {
        assert!(rows.iter().any(|r| r[0] == label), "{label}");
    }
}

#[test]
fn cfl_and_error_and_modes_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"space": {"p": 2}, "dualtime": {"dt": 0.1, "dtau": 0.01, "m": 5},
            "cycle": {"n_cycles": 2},
            "sweep": {"ps": [1, 2], "mus": [0.01], "n_k": 8, "cycles": ["none", "v1"],
                      "k_hat_over_pi": [0.25, 0.5]}}"#,
    );
    for (cmd, file, rows) in [
        ("cfl", "cfl.csv", 2),
        ("error", "error.csv", 2 * 6),
        ("modes", "modes.csv", 2 * 2 * 3 * 3),
    ] {
        let out = frpmg(&[cmd, "--config", &cfg], dir.path());
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let csv = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(data_rows(&csv).len(), rows, "{cmd}");
    }
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = frpmg(&["cfl", "--preset", "nope"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));

    let cfg = write_config(dir.path(), r#"{"space": {"p": "four"}}"#);
    let out = frpmg(&["cfl", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());

    let out = Command::new(env!("CARGO_BIN_EXE_frpmg"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn unrepresentable_wavenumber_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"space": {"n_elements": 7}, "sweep": {"k_hat_over_pi": [0.125]}}"#,
    );
    let out = frpmg(&["verify", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a Fourier mode"));
}
