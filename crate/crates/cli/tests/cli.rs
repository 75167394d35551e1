use std::path::Path;
use std::process::{Command, Output};

use nbiot_rach_cli::output::read_csv;

fn nbiot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbiot-rach"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn availability_defaults_to_lower_plateau() {
    let o = nbiot(&["availability"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let eta: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("eta0="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((eta - 0.3).abs() < 1e-3, "{text}");
}

#[test]
fn empty_config_resolves_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.cfg", "# nothing set\n");
    let o = nbiot(&["validate", "--config", &cfg]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("valid\n"));
    assert!(text.contains("n_t=1\n") && text.contains("m0=161\n"), "{text}");
}

#[test]
fn config_errors_exit_3_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [("alpha = 1.5\n", "alpha"), ("colour = red\n", "colour"), ("n_t = 1\nn_t = 2\n", "n_t")] {
        let cfg = write(dir.path(), "bad.cfg", text);
        let o = nbiot(&["validate", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(3), "{text}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(field), "{text}");
    }
}

#[test]
fn missing_file_exits_5() {
    let o = nbiot(&["validate", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn analytic_sweep_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5.csv");
    let o = nbiot(&["sweep", "--preset", "fig5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(table.parameter, "n_t");
    assert!(table.failure.is_none());
    assert!(!table.rows.is_empty());
    let upper = table.series.iter().position(|s| s.contains("upper") && s.contains("margin160")).unwrap();
    let first = table.rows[0].cells[upper].analytic.unwrap();
    assert!((first - 0.92).abs() < 0.02);
    assert!(dir.path().join("fig5.csv.runtime.csv").exists());
}

#[test]
fn failing_point_keeps_earlier_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "custom.cfg",
        "target = availability\nsweep = mu0\nvalues = 0.05, 0.01, -0.01, -0.02\n",
    );
    let out = dir.path().join("partial.csv");
    let o = nbiot(&["sweep", "--config", &cfg, "--preset", "custom", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[3].contains("error"), "{text}");
    let table = read_csv(text.as_bytes()).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(table.failure.is_some());
}

#[test]
fn simulated_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", "trials = 2000\n");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = nbiot(&[
            "sweep", "--config", &cfg, "--preset", "fig9", "--engine", "sim", "--seed", "5", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}
