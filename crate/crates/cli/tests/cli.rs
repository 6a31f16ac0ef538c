use std::path::Path;
use std::process::{Command, Output};

const CANTOR: &str = r#"
[ifs]
ratios = [0.3333333333333333, 0.3333333333333333]
offsets = [0.0, 0.6666666666666666]
weights = [0.5, 0.5]
boundary = "dirichlet"

[numerics]
level = 4
dt = 0.01
horizon = 0.5
paths = 40
seed = 5

[task]
sites = [0.6666666666666666]
times = [0.25, 0.5]
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cantorwave"));
    c.env_remove("CANTORWAVE_OUT");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn exponents_cantor_and_lebesgue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CANTOR);
    let o = run(&["exponents", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("exponents.json"))).unwrap();
    let g = v["exponents"]["gamma"].as_f64().unwrap();
    assert!((g - 2f64.ln() / 6f64.ln()).abs() < 1e-10);
    assert_eq!(v["hypothesis_i_satisfied"], true);
    assert_eq!(v["meta"]["config_sha256"].as_str().unwrap().len(), 64);

    let leb = CANTOR
        .replace("[0.3333333333333333, 0.3333333333333333]", "[0.5, 0.5]")
        .replace("[0.0, 0.6666666666666666]", "[0.0, 0.5]");
    let cfg = write_config(dir.path(), "l.toml", &leb);
    let o = run(&["exponents", "--config", &cfg, "--out", "leb"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("leb/exponents.json"))).unwrap();
    assert_eq!(v["hypothesis_i_satisfied"], false);
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "w.toml", &CANTOR.replace("[0.5, 0.5]", "[0.5, -0.5]"));
    let o = run(&["exponents", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ifs.weights"));

    let cfg = write_config(dir.path(), "u.toml", &format!("{CANTOR}\nspeed = 3\n"));
    let o = run(&["spectrum", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));

    let cfg = write_config(dir.path(), "s.toml", &CANTOR.replace("sites = [0.6666666666666666]", "sites = [0.5]"));
    let o = run(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("task.sites"));

    let o = run(&["spectrum"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CANTOR);
    for cmd in ["exponents", "spectrum", "simulate", "hoelder", "intermittency", "figures"] {
        let o = run(&[cmd, "--config", &cfg, "--dry-run", "--out", "out"], dir.path());
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn outputs_are_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CANTOR);
    for (out, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        for cmd in ["simulate", "spectrum", "resolvent"] {
            let o = run(&[cmd, "--config", &cfg, "--out", out, "--threads", threads], dir.path());
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    for name in ["ensemble.csv", "summary.csv", "spectrum.csv", "resolvent.csv"] {
        let a = read(dir.path().join("a").join(name));
        assert!(a.starts_with("# command="));
        assert!(a.contains("# config_sha256="));
        assert_eq!(a, read(dir.path().join("b").join(name)), "{name}");
        assert_eq!(a, read(dir.path().join("c").join(name)), "{name}");
    }
    let o = run(&["simulate", "--config", &cfg, "--out", "d", "--seed", "6"], dir.path());
    assert!(o.status.success());
    assert_ne!(read(dir.path().join("a/ensemble.csv")), read(dir.path().join("d/ensemble.csv")));
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("cfgs");
    std::fs::create_dir(&sub).unwrap();
    let plain = write_config(&sub, "p.toml", CANTOR);
    let env_dir = dir.path().join("env");
    let o = bin()
        .args(["exponents", "--config", &plain])
        .env("CANTORWAVE_OUT", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_dir.join("exponents.json").exists());

    let flag_dir = dir.path().join("flag");
    let o = bin()
        .args(["exponents", "--config", &plain, "--out", flag_dir.to_str().unwrap()])
        .env("CANTORWAVE_OUT", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_dir.join("exponents.json").exists());

    let rel = write_config(&sub, "r.toml", &format!("output = \"rel\"\n{CANTOR}"));
    let o = run(&["exponents", "--config", &rel], dir.path());
    assert!(o.status.success());
    assert!(sub.join("rel/exponents.json").exists());
}

#[test]
fn figures_follow_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figures", "--out", "."], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fig2 = read(dir.path().join("fig2_cantor_weights.csv"));
    let rows: Vec<(f64, f64)> = fig2
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert!(!rows.is_empty());
    for (mu, t) in rows {
        assert!(mu > 0.18 && mu <= 0.5 + 1e-12);
        assert!((t - 1.0 / (1.0 - mu.ln() / 3f64.ln())).abs() < 1e-9);
    }
    let fig1 = read(dir.path().join("fig1_exponents.csv"));
    assert!(fig1.lines().any(|l| l == "d_H,spatial,temporal"));
    for l in fig1.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[2] - 1.0 / (v[0] + 1.0)).abs() < 1e-9);
    }
}

#[test]
fn hoelder_report_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = CANTOR
        .replace("level = 4", "level = 5")
        .replace("horizon = 0.5", "horizon = 1.0")
        .replace("dt = 0.01", "dt = 0.002")
        .replace("times = [0.25, 0.5]", "pair_levels = [2, 5]\nlag_powers = [2, 6]");
    let cfg = write_config(dir.path(), "h.toml", &text);
    let o = run(&["hoelder", "--config", &cfg, "--out", "h"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("h/hoelder.json"))).unwrap();
    let csv = read(dir.path().join("h/hoelder_spatial.csv"));
    let r = cantorwave::regularity::HoelderReport::<f64>::from_csv(&csv).unwrap();
    assert_eq!(serde_json::to_value(&r).unwrap(), v["spatial"]);
}
