use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ising-qoc");

const SMALL_OPTIMIZE: &str = r#"
n_spins = 3
beta = 50.0
f0_start = 0.7
f0_stop = 0.9
f0_step = 0.1
duration = "pi/4"
n_steps = 100
eta_error = 1e-4
eta_change = 1e-4
max_superiterations = 2
max_evaluations = 40
seed = 7
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn ising(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn quench_sweep_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "q.toml",
        "n_spins = 3\nf0_start = 0.1\nf0_stop = 0.5\nf0_step = 0.1\n",
    );
    let out = dir.path().join("q.csv");
    let res = ising(&["sweep-quench", "--config", s(&cfg), "--out", s(&out)]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with(
        "f0,fT,protocol,avg_work,delta_f,s_irr,w_fric,s_qvol,n_evaluations,stopping_reason\n"
    ));
    assert_eq!(rows(&csv).len(), 5);
    let meta = std::fs::read_to_string(dir.path().join("q.csv.meta.json")).unwrap();
    assert!(meta.trim_start().starts_with('{'));
    assert!(meta.contains("\"seed\": 0"));
    assert!(meta.contains("\"wall_time_seconds\""));
}

#[test]
fn stdout_when_no_output_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "r.toml",
        "n_spins = 2\nf0_start = 0.5\nf0_stop = 0.6\nf0_step = 0.1\nn_steps = 20\n",
    );
    let res = ising(&["sweep-ramp", "--config", s(&cfg)]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert_eq!(rows(&stdout).len(), 2);
    assert!(rows(&stdout).iter().all(|r| r[2] == "linear_ramp"));
}

#[test]
fn zero_field_change_gives_zero_quantifiers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "z.toml",
        "n_spins = 3\ndelta_f = 0.0\nf0_start = 0.2\nf0_stop = 1.2\nf0_step = 0.25\n",
    );
    let res = ising(&["sweep-quench", "--config", s(&cfg)]);
    assert!(res.status.success());
    for row in rows(&String::from_utf8(res.stdout).unwrap()) {
        for col in [3, 4, 5, 6, 7] {
            let x: f64 = row[col].parse().unwrap();
            assert!(x.abs() < 1e-10, "column {col} = {x}");
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "o.toml", SMALL_OPTIMIZE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert!(
        ising(&["sweep-optimize", "--config", s(&cfg), "--out", s(&a)])
            .status
            .success()
    );
    assert!(
        ising(&["sweep-optimize", "--config", s(&cfg), "--out", s(&b)])
            .status
            .success()
    );
    assert!(ising(&[
        "sweep-optimize",
        "--config",
        s(&cfg),
        "--out",
        s(&c),
        "--sequential"
    ])
    .status
    .success());
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    assert_eq!(a, std::fs::read(c).unwrap());

    let d = dir.path().join("d.csv");
    assert!(ising(&[
        "sweep-optimize",
        "--config",
        s(&cfg),
        "--out",
        s(&d),
        "--seed",
        "8"
    ])
    .status
    .success());
    assert_ne!(a, std::fs::read(d).unwrap());
}

#[test]
fn optimize_then_transfer() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "o.toml", SMALL_OPTIMIZE);
    let pulses = dir.path().join("pulses");
    let out = dir.path().join("opt.csv");
    let res = ising(&[
        "sweep-optimize",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--pulse-dir",
        s(&pulses),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let optimized = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(optimized.len(), 9);
    assert_eq!(std::fs::read_dir(&pulses).unwrap().count(), 3);

    // same ring size: the transferred rows reproduce the optimized ones
    let same = dir.path().join("same.csv");
    let res = ising(&[
        "transfer",
        "--config",
        s(&cfg),
        "--pulse",
        s(&pulses),
        "--out",
        s(&same),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let transferred = rows(&std::fs::read_to_string(&same).unwrap());
    assert_eq!(transferred.len(), 9);
    for (t, o) in transferred.iter().zip(&optimized) {
        assert_eq!(t[2], o[2]);
        for col in 0..8 {
            if col == 2 {
                continue;
            }
            let (x, y): (f64, f64) = (t[col].parse().unwrap(), o[col].parse().unwrap());
            assert!((x - y).abs() <= 1e-12, "col {col}: {x} vs {y}");
        }
    }

    let bigger = write_config(
        &dir,
        "big.toml",
        &SMALL_OPTIMIZE.replace("n_spins = 3", "n_spins = 4"),
    );
    let res = ising(&["transfer", "--config", s(&bigger), "--pulse", s(&pulses)]);
    assert!(res.status.success());
    assert_eq!(rows(&String::from_utf8(res.stdout).unwrap()).len(), 9);
}

#[test]
fn trace_has_monotone_best_cost() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "t.toml", SMALL_OPTIMIZE);
    let res = ising(&["trace", "--config", s(&cfg)]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("nu,superiteration,cost,s_irr,w_fric,s_qvol,best_cost,"));
    let best: Vec<f64> = rows(&text).iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(best.len() > 1);
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn convergence_and_work_compare_verbs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", SMALL_OPTIMIZE);
    let res = ising(&["convergence", "--config", s(&cfg)]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("f0,fT,protocol,n_steps,n_steps_doubled,max_abs_difference\n"));
    assert_eq!(rows(&text)[0][4], "200");

    let res = ising(&["work-compare", "--config", s(&cfg)]);
    assert!(res.status.success());
    let protocols: Vec<String> = rows(&String::from_utf8(res.stdout).unwrap())
        .into_iter()
        .map(|r| r[2].clone())
        .collect();
    assert_eq!(protocols, ["sudden_quench", "dcrab_pulse"].repeat(3));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        ising(&["sweep-quench", "--config", s(&missing)])
            .status
            .code(),
        Some(1)
    );

    let bad = write_config(&dir, "bad.toml", "f0_step = -0.1\n");
    assert_eq!(
        ising(&["sweep-quench", "--config", s(&bad)]).status.code(),
        Some(1)
    );

    let typo = write_config(&dir, "typo.toml", "n_spin = 4\n");
    assert_eq!(
        ising(&["sweep-quench", "--config", s(&typo)]).status.code(),
        Some(1)
    );

    assert_eq!(ising(&["no-such-verb"]).status.code(), Some(1));
    assert_eq!(ising(&["transfer"]).status.code(), Some(1));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"format\": \"ising-qoc-pulse/1\"}").unwrap();
    assert_eq!(
        ising(&["transfer", "--pulse", s(&junk)]).status.code(),
        Some(1)
    );

    // infinite temperature leaves the free energy difference undefined
    let hot = write_config(
        &dir,
        "hot.toml",
        "beta = 0.0\nf0_start = 0.5\nf0_stop = 0.5\n",
    );
    let res = ising(&["sweep-quench", "--config", s(&hot)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("numerical failure"));

    assert_eq!(ising(&["--help"]).status.code(), Some(0));
}
