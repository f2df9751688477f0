//! End-to-end runs of the `ricci` binary: exit codes, emitted files and a
//! re-read of the CSV rows against the relations they came from.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const GOLD: &str = "n = 3\nphi = \"8\"\npsi = \"8 - 4*t^2\"\nt_max = 0.5\n";

fn ricci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ricci")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(command: &str, config: &Path, out: &Path) -> Output {
    ricci(&[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Header and numeric rows of a CSV file.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn report_value(path: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in {}", path.display()))
}

#[test]
fn gold_solve_reproduces_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gold.cfg", GOLD);
    let out = dir.path().join("gold");
    let o = run("solve", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("gold_solution.csv"));
    assert_eq!(header, ["t", "w", "p", "r", "rp", "f", "fp", "res_rr", "res_tt"]);
    let first = &rows[0];
    assert_eq!((first[0], first[3], first[4], first[5]), (0.0, 0.0, 1.0, 0.0));
    let last = rows.last().unwrap();
    assert_eq!(last[0], 0.5);
    assert!((last[1] - 0.5).abs() <= 1e-6);
    assert!((last[3] - 0.5).abs() <= 1e-6);
    assert!((last[5] + 0.25).abs() <= 1e-6);
    for row in &rows[1..] {
        let (t, w, p, r, rp, fp) = (row[0], row[1], row[2], row[3], row[4], row[6]);
        // (n−1) w′ r′ = φ r and (n−1) w′ f′ = −w φ
        assert!((2.0 * p * rp - 8.0 * r).abs() < 1e-10, "t = {t}");
        assert!((2.0 * p * fp + 8.0 * w).abs() < 1e-10, "t = {t}");
        assert!(rp > 0.0);
    }
    let report = dir.path().join("gold_report.txt");
    assert_eq!(report_value(&report, "status"), "ok");
    assert_eq!(report_value(&report, "lambda1").parse::<f64>().unwrap(), 16.0);
    assert_eq!(report_value(&report, "lambda2").parse::<f64>().unwrap(), -8.0);
    for key in ["ricci_residual_rr", "ricci_residual_tt"] {
        assert!(report_value(&report, key).parse::<f64>().unwrap() <= 1e-6);
    }
}

#[test]
fn singular_tensor_exits_with_validation_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", "n = 3\nphi = \"t\"\npsi = \"t\"\nt_max = 1\n");
    let o = run("solve", &cfg, &dir.path().join("s"));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("singular tensor at t = 0"), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(!dir.path().join("s_solution.csv").exists());
}

#[test]
fn two_dimensional_quadrature() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "p.cfg", "n = 2\nphi = \"1\"\npsi = \"1\"\nt_max = 1\n");
    let o = run("solve", &cfg, &dir.path().join("p"));
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("p_solution.csv"));
    let last = rows.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 0.5).abs() <= 1e-12, "w(1) = {}", last[1]);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "g.cfg", GOLD);
    for prefix in ["a", "b"] {
        assert!(run("solve", &cfg, &dir.path().join(prefix)).status.success());
        assert!(run("portrait", &cfg, &dir.path().join(prefix)).status.success());
    }
    for suffix in ["_solution.csv", "_report.txt", "_portrait.csv"] {
        let a = std::fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert!(a == b, "{suffix} differs");
    }
}

#[test]
fn fold_contact_writes_files_then_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "f.cfg", "n = 3\nphi = \"1\"\npsi = \"1 - 4*t^2\"\nt_max = 0.49\n");
    let o = run("solve", &cfg, &dir.path().join("f"));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("fold contact"), "{}", stderr(&o));
    let report = dir.path().join("f_report.txt");
    assert!(report_value(&report, "status").starts_with("fold contact at t = 0.41"));
    let (_, rows) = read_csv(&dir.path().join("f_solution.csv"));
    assert!(rows.last().unwrap()[0] < 0.42);
}

#[test]
fn configuration_errors_exit_with_code_one() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(dir.path(), "bad.cfg", "n = 3\ncolour = \"red\"\n");
    let o = run("solve", &bad, &dir.path().join("x"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key `colour`"));
    let missing = run("solve", &dir.path().join("nope.cfg"), &dir.path().join("x"));
    assert_eq!(missing.status.code(), Some(1));
    let no_psi = write_config(dir.path(), "np.cfg", "n = 3\nphi = \"1\"\nt_max = 1\n");
    let o = run("solve", &no_psi, &dir.path().join("x"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing key `psi`"));
    assert_eq!(ricci(&["solve"]).status.code(), Some(1));
}

#[test]
fn verify_rereads_a_solved_profile() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gold.cfg", GOLD);
    assert!(run("solve", &cfg, &dir.path().join("gold")).status.success());
    let good = write_config(
        dir.path(),
        "v.cfg",
        "n = 3\nphi = \"8\"\npsi = \"8 - 4*t^2\"\nprofile = \"gold_solution.csv\"\n",
    );
    let o = run("verify", &good, &dir.path().join("v"));
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("v_verify.csv"));
    assert_eq!(header, ["t", "phi_hat", "psi_hat", "res_rr", "res_tt"]);
    assert!(rows.iter().filter(|r| r[0] >= 0.025).all(|r| (r[1] - 8.0).abs() < 1e-6));
    let wrong = write_config(
        dir.path(),
        "w.cfg",
        "n = 3\nphi = \"8\"\npsi = \"8 - 3*t^2\"\nprofile = \"gold_solution.csv\"\n",
    );
    let o = run("verify", &wrong, &dir.path().join("w"));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ricci residual"));
}

#[test]
fn hypersurface_table_for_unit_sphere() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", "n = 3\nh = \"sqrt(1 - t)\"\nr_max = 0.9\nsamples = 10\n");
    let o = run("hypersurface", &cfg, &dir.path().join("s"));
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("s_hypersurface.csv"));
    assert_eq!(header, ["r", "f", "Ric_rr", "Ric_tt_unit", "h1", "h2", "scalar"]);
    assert_eq!(rows.len(), 10);
    for row in rows {
        let (r, f) = (row[0], row[1]);
        // Einstein with constant 2: Ric = 2g
        assert!((row[2] - 2.0 * f).abs() < 1e-8);
        assert!((row[3] - 2.0 * r * r).abs() < 1e-8);
        assert!((row[6] - 6.0).abs() < 1e-8);
    }
}

#[test]
fn analyze_and_portrait_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "g.cfg", GOLD);
    let o = run("analyze", &cfg, &dir.path().join("g"));
    assert!(o.status.success(), "{}", stderr(&o));
    let report = dir.path().join("g_analysis.txt");
    assert_eq!(report_value(&report, "w2").parse::<f64>().unwrap(), 4.0);
    assert_eq!(report_value(&report, "global_verdict"), "global continuation expected");
    let (_, fold) = read_csv(&dir.path().join("g_fold.csv"));
    assert!(fold.iter().all(|r| r[1] <= r[2]));

    assert!(run("portrait", &cfg, &dir.path().join("g")).status.success());
    let text = std::fs::read_to_string(dir.path().join("g_portrait.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("branch,t,w,p,F"));
    let mut labels = std::collections::BTreeSet::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        labels.insert(cells[0].to_string());
        let f: f64 = cells[4].parse().unwrap();
        assert!(f.abs() <= 1e-9, "{line}");
    }
    let expected = ["fold-lower", "fold-upper", "other+", "other-", "separatrix+", "separatrix-"];
    assert_eq!(labels.into_iter().collect::<Vec<_>>(), expected);
}

#[test]
fn sweep_runs_configs_independently() {
    let dir = TempDir::new().unwrap();
    let cfgs = dir.path().join("cfgs");
    std::fs::create_dir(&cfgs).unwrap();
    write_config(&cfgs, "gold.cfg", GOLD);
    write_config(&cfgs, "plane.cfg", "n = 2\nphi = \"1\"\npsi = \"1\"\nt_max = 1\n");
    write_config(&cfgs, "singular.cfg", "n = 3\nphi = \"t\"\npsi = \"t\"\nt_max = 1\n");
    let out = dir.path().join("out");
    let o = ricci(&["solve", "--sweep", cfgs.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("gold.cfg: ok") && stdout.contains("plane.cfg: ok"));
    assert!(stderr(&o).contains("singular.cfg: error[validation]"));
    assert!(out.join("gold_solution.csv").exists());
    assert!(out.join("plane_solution.csv").exists());
    assert!(!out.join("singular_solution.csv").exists());
    let solo = dir.path().join("solo");
    assert!(run("solve", &cfgs.join("gold.cfg"), &solo).status.success());
    let a = std::fs::read(out.join("gold_solution.csv")).unwrap();
    let b = std::fs::read(dir.path().join("solo_solution.csv")).unwrap();
    assert!(a == b);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = TempDir::new().unwrap();
    for (name, command, code) in [
        ("gold.cfg", "solve", 0),
        ("plane.cfg", "solve", 0),
        ("singular.cfg", "solve", 2),
        ("fold.cfg", "solve", 3),
        ("sphere.cfg", "hypersurface", 0),
        ("paraboloid.cfg", "hypersurface", 0),
    ] {
        let o = run(command, &root.join(name), &dir.path().join(name));
        assert_eq!(o.status.code(), Some(code), "{name}: {}", stderr(&o));
    }
}
