//! End-to-end runs of the `warpdisp` binary on temporary configs.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn run(sub: &str, config: &str, dir: &Path, extra: &[&str]) -> (i32, String, String) {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_warpdisp"))
        .arg(sub)
        .arg("--config")
        .arg(&path)
        .arg("--output")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const HYPERBOLIC: &str = r#"
n = 3
[profile]
kind = "hyperbolic"
alpha = 1.0
[grid]
r_max = 30.0
points = 600
[time]
t_final = 1.0
snapshots = 40
[check]
theorem = "exp"
[resolvent]
lambda_min = 0.0
lambda_max = 6.0
lambda_count = 7
eps = [0.2, 0.1]
[resolvent.potential]
kind = "inverse_bracket"
beta = 1.0
"#;

const EUCLIDEAN: &str = r#"
n = 3
[profile]
kind = "euclidean"
[grid]
r_max = 40.0
points = 800
[time]
t_final = 2.0
snapshots = 100
"#;

#[test]
fn every_subcommand_runs_and_writes_hashed_csv() {
    let dir = TempDir::new().unwrap();
    for (sub, file) in [
        ("describe", None),
        ("check", Some("check.json")),
        ("solve", Some("solve.csv")),
        ("norms", Some("norms.csv")),
        ("resolvent", Some("resolvent.csv")),
        ("scatter", Some("scatter.csv")),
    ] {
        let (code, _, err) = run(sub, HYPERBOLIC, dir.path(), &[]);
        assert_eq!(code, 0, "{sub}: {err}");
        if let Some(name) = file.filter(|f| f.ends_with(".csv")) {
            let text = std::fs::read_to_string(dir.path().join("out").join(name)).unwrap();
            let first = text.lines().next().unwrap();
            let hash = first.strip_prefix("# config-hash: ").expect("hash header");
            assert_eq!(hash.len(), 64);
            assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for sub in ["solve", "resolvent", "norms"] {
        assert_eq!(run(sub, HYPERBOLIC, a.path(), &[]).0, 0);
        assert_eq!(run(sub, HYPERBOLIC, b.path(), &[]).0, 0);
    }
    for name in ["solve.csv", "solve_diagnostics.csv", "resolvent.csv", "norms.csv"] {
        let x = std::fs::read(a.path().join("out").join(name)).unwrap();
        let y = std::fs::read(b.path().join("out").join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cubic = "n = 3\n[profile]\nkind = \"odd_polynomial\"\ncoeffs = [1.0, 1.0]\n";
    let (code, stdout, _) = run("check", cubic, dir.path(), &["--theorem", "poly"]);
    assert_eq!(code, 0, "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/check.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);

    let (code, _, err) = run("check", EUCLIDEAN, dir.path(), &["--theorem", "exp"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let low_dim = EUCLIDEAN.replace("n = 3", "n = 2");
    assert_eq!(run("describe", &low_dim, dir.path(), &[]).0, 2);

    let missing_d3 = r#"
n = 3
[profile]
kind = "closed_form"
name = "partial"
phi3_at_0 = 0.0
phi = [{ coef = 1.0, power = 1.0 }]
dphi = [{ coef = 1.0 }]
d2phi = [{ coef = 0.0 }]
"#;
    let (code, _, err) = run("solve", missing_d3, dir.path(), &[]);
    assert_eq!(code, 2, "{err}");

    let unknown = format!("{EUCLIDEAN}\nbogus = 1\n");
    assert_eq!(run("solve", &unknown, dir.path(), &[]).0, 2);

    assert_eq!(run("solve", "n = 3", dir.path(), &[]).0, 2);
}

#[test]
fn euclidean_mass_is_conserved_in_diagnostics() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run("solve", EUCLIDEAN, dir.path(), &[]).0, 0);
    let text = std::fs::read_to_string(dir.path().join("out/solve_diagnostics.csv")).unwrap();
    let mass: Vec<f64> = data_rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(mass.len(), 101);
    let m0 = mass[0];
    assert!(mass.iter().all(|m| (m - m0).abs() <= 1e-10 * m0), "{mass:?}");
}

#[test]
fn resolvent_scaled_column_is_bounded() {
    let dir = TempDir::new().unwrap();
    let (code, _, err) = run("resolvent", HYPERBOLIC, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("out/resolvent.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 14);
    for row in rows {
        let scaled: f64 = row[3].parse().unwrap();
        assert!(scaled.is_finite() && scaled > 0.0 && scaled < 10.0, "{row:?}");
        assert_eq!(row[4], "true");
    }
}
