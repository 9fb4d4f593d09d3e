use std::path::Path;
use std::process::{Command, Output};

fn rsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsr"))
        .args(args)
        .env_remove("RSR_WORKERS")
        .output()
        .expect("run rsr")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_then_fit_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let trace = dir.path().join("trace.csv");
    let g = rsr(&[
        "gen", "-D", "10", "-d", "2", "--n-in", "40", "--n-out", "10", "--magnitude", "1e3", "--seed", "5", "-o",
        p(&data),
    ]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let f = rsr(&["fit", p(&data), "--trace", p(&trace)]);
    assert_eq!(f.status.code(), Some(0));
    let line = stdout(&f);
    assert!(line.starts_with("estimator=sggd theta1="));
    let theta: f64 = line
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("theta1="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(theta < 1e-6);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().next(), Some("iter,energy,theta1,step,gradnorm"));
    assert!(csv.lines().count() > 2);

    let r = rsr(&["fit", p(&data), "--estimator", "ransac", "--seed", "1"]);
    assert!(stdout(&r).contains("consensus=40"));
}

#[test]
fn gen_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for path in [&a, &b] {
        let o = rsr(&[
            "gen", "--model", "haystack", "-D", "6", "-d", "2", "--n-in", "8", "--n-out", "4", "--noise-eps", "1e-3",
            "--seed", "9", "-o", p(path),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn oracle_statuses_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for (n_out, status) in [(4, "well_defined"), (5, "tie"), (6, "beaten")] {
        let data = dir.path().join(format!("ex{n_out}.txt"));
        let n = n_out.to_string();
        let g = rsr(&[
            "gen", "--model", "split-axes", "-D", "3", "-d", "2", "--n-in", "10", "--n-out", &n, "-o", p(&data),
        ]);
        assert!(g.status.success());
        let o = rsr(&["oracle", p(&data)]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert_eq!(out.lines().count(), 1);
        assert!(out.contains(&format!("well_defined={status} ")), "{out}");
    }

    let degenerate = dir.path().join("deg.txt");
    std::fs::write(&degenerate, "3 3 2\n1 0 0\n2 0 0\n0 0 1\n1 1 0\n1 0 0\n0 1 0\n").unwrap();
    let o = rsr(&["oracle", p(&degenerate)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("well_defined=degenerate"));
}

#[test]
fn diag_prints_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let report = dir.path().join("diag.csv");
    rsr(&["gen", "-D", "8", "-d", "2", "--n-in", "30", "--n-out", "5", "-o", p(&data)]);
    for _ in 0..2 {
        let o = rsr(&["diag", p(&data), "--csv", p(&report)]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert!(out.lines().all(|l| l.contains('=')));
        assert!(out.contains("kappa_d="));
        assert!(out.contains("n_in=30\n"));
    }
    let csv = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("dataset,gamma,d,"));
    assert_eq!(lines[1], lines[2]);
}

const CONFIG: &str = r#"
base_seed = 3
trials_per_cell = 4
output_dir = "OUT"

[model]
kind = "adversarial_line"
ambient_dim = [8]
subspace_dim = [2]
n_in = [20]
snr = [1.0, 4.0]
magnitude = 100.0

[[estimators]]
name = "spca"

[[estimators]]
name = "sggd"
max_iter = 300
"#;

fn sweep_with(dir: &Path, out: &str, workers: &str, seed: Option<&str>) -> Vec<u8> {
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out_dir = dir.join(out);
    let mut args = vec!["sweep", p(&cfg), "--output-dir", p(&out_dir)];
    if let Some(s) = seed {
        args.extend(["--seed", s]);
    }
    let o = Command::new(env!("CARGO_BIN_EXE_rsr"))
        .args(&args)
        .env("RSR_WORKERS", workers)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains(&format!("workers={workers}")));
    std::fs::read(out_dir.join("trials.csv")).unwrap()
}

#[test]
fn sweep_determinism_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let serial = sweep_with(dir.path(), "serial", "1", None);
    let parallel = sweep_with(dir.path(), "parallel", "3", None);
    assert_eq!(serial, parallel);
    let reseeded = sweep_with(dir.path(), "reseeded", "2", Some("4"));
    assert_ne!(serial, reseeded);

    let summary = dir.path().join("serial").join("summary.csv");
    let curves = dir.path().join("curves");
    let o = rsr(&["report", p(&summary), "--curves", p(&curves)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("estimator=sggd"));
    assert!(out.contains("crossing="));
    assert!(curves.read_dir().unwrap().count() >= 2);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "base_seed = 1\ntrials_per_cell = 2\nbogus = 3\n").unwrap();
    assert_eq!(rsr(&["sweep", p(&cfg)]).status.code(), Some(1));

    std::fs::write(&cfg, CONFIG).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rsr"))
        .args(["sweep", p(&cfg)])
        .env("RSR_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(rsr(&["fit"]).status.code(), Some(1));
    assert_eq!(rsr(&["fit", "/nonexistent/data.txt"]).status.code(), Some(1));
    assert_eq!(rsr(&["report", "/nonexistent/summary.csv"]).status.code(), Some(1));
    assert_eq!(rsr(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("zero.txt");
    // A zero column cannot be spherized.
    std::fs::write(&data, "2 3 0\n1 0\n0 0\n0 1\n1 1 1\n").unwrap();
    let o = rsr(&["fit", p(&data), "--dim", "1", "--estimator", "spca"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
