use std::path::Path;
use std::process::{Command, Output};

fn gpswf(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gpswf"));
    cmd.args(args).env_remove("GPSWF_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("GPSWF_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn basis_table_inside_bracket() {
    let o = gpswf(&["basis", "--alpha", "0.5", "--c", "6.28", "--nmax", "10", "--format", "csv"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        let (chi, lo, hi): (f64, f64, f64) = (f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap());
        assert!(lo <= chi && chi <= hi && f[4] == "true");
    }
}

#[test]
fn spectrum_json_is_decreasing_and_repeatable() {
    let args = ["spectrum", "--alpha", "0", "--c", "2", "--nmax", "8", "--format", "json"];
    let a = gpswf(&args, None);
    let b = gpswf(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rows.len(), 8);
    let lam: Vec<f64> = rows.iter().map(|r| r["lambda"].as_f64().unwrap()).collect();
    assert!(lam.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn exit_codes() {
    let bad_alpha = gpswf(&["basis", "--alpha", "-1", "--c", "1", "--nmax", "3"], None);
    assert_eq!(bad_alpha.status.code(), Some(1));
    let bad_c = gpswf(&["spectrum", "--alpha", "0", "--c", "0", "--nmax", "3"], None);
    assert_eq!(bad_c.status.code(), Some(1));
    let unknown = gpswf(&["basis", "--alpha", "0", "--c", "1", "--nmax", "3", "--bogus"], None);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    let truncated = gpswf(&["basis", "--alpha", "0", "--c", "60", "--nmax", "10", "--max-trunc", "20"], None);
    assert_eq!(truncated.status.code(), Some(2));
    let help = gpswf(&["--help"], None);
    assert_eq!(help.status.code(), Some(0));
    let text = stdout(&help);
    for flag in ["--format", "--quad-order", "--seed", "--cache-dir", "--threads"] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn bounds_and_project() {
    let o = gpswf(&["bounds", "--alpha", "0.25", "--c", "2", "--nmax", "12"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("all bounds hold"));
    let fns = ["wm:s=1,k=6", "exp:k=2", "brownian:s=1.5,k=50", "jacobi:k=3", r#"{"kind":"periodic_exponential","k":1}"#];
    for f in fns {
        let o = gpswf(&["project", "--alpha", "0.5", "--c", "5", "--nmax", "30", "--fn", f, "--N", "12", "--seed", "4"], None);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("l2w_error"));
    }
    let bad = gpswf(&["project", "--alpha", "0.5", "--c", "5", "--nmax", "30", "--fn", "wm:q=1", "--N", "12"], None);
    assert_eq!(bad.status.code(), Some(1));
    let too_many = gpswf(&["project", "--alpha", "0.5", "--c", "5", "--nmax", "10", "--fn", "exp:k=1", "--N", "12"], None);
    assert_eq!(too_many.status.code(), Some(1));
}

#[test]
fn experiment_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("reports");
    let config = dir.path().join("ld.json");
    std::fs::write(&config, r#"{"name": "lambda-decay", "nmax": 12, "alpha_list": [1.0, 2.0]}"#).unwrap();
    let run = |cache_dir: Option<&Path>| {
        gpswf(
            &["experiment", "--name", "lambda-decay", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()],
            cache_dir,
        )
    };
    let cold = run(Some(&cache));
    assert_eq!(cold.status.code(), Some(0), "{}", String::from_utf8_lossy(&cold.stderr));
    let warm = run(Some(&cache));
    assert_eq!(cold.stdout, warm.stdout);
    let runs: Vec<_> = std::fs::read_dir(out.join("lambda-decay")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 2);
    let csvs: Vec<String> = runs.iter().map(|d| std::fs::read_to_string(d.join("lambda_decay.csv")).unwrap()).collect();
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0].lines().count(), 1 + 2 * 12);
    assert!(runs[0].join("config.json").exists());

    let ls = gpswf(&["cache", "ls", "--format", "csv"], Some(&cache));
    assert_eq!(ls.status.code(), Some(0));
    assert_eq!(stdout(&ls).lines().count(), 3);
    let clear = gpswf(&["cache", "clear"], Some(&cache));
    assert_eq!(clear.status.code(), Some(0));
    let ls = gpswf(&["cache", "ls", "--format", "csv"], Some(&cache));
    assert_eq!(stdout(&ls).lines().count(), 1);
    let no_dir = gpswf(&["cache", "ls"], None);
    assert_eq!(no_dir.status.code(), Some(1));
}
