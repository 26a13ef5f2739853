use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isbel::io::{read_state_csv, read_table};

const BIN: &str = env!("CARGO_BIN_EXE_isbel");

fn config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn with_config<'a>(cfg: &'a str, args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(["--config", cfg]);
    v
}

#[test]
fn solve_writes_state_and_observables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path();
    let o = run(&with_config(cfg.to_str().unwrap(), &["solve", "--voltage", "150", "--rates"]), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    for prefix in ["state_V", "observables_V", "rates_V"] {
        assert!(files.iter().any(|f| f.starts_with(prefix)), "{files:?}");
    }
    let state = files.iter().find(|f| f.starts_with("state_V")).unwrap();
    let text = std::fs::read_to_string(dir.path().join(state)).unwrap();
    let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.iter().any(|l| l.contains("config_hash")));
    assert!(meta.iter().any(|l| l.contains("code_version")));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "family,axis,n1,n2,na");

    let (bias, occ, eps, q) = read_state_csv(&dir.path().join(state)).unwrap();
    assert_eq!(bias.v, 150.0);
    assert_eq!(occ.n1.len(), 40);
    assert_eq!(eps.len(), 40);
    assert_eq!(q.len(), 16);
    assert!(occ.within_bounds(0.0));
    let d = isbel::Device::reference_default();
    let c = isbel::ContactModel::reference_default(d.params.e12);
    let direct = isbel::solve_at(bias, &c, &d, &isbel::SolverConfig::default()).unwrap();
    assert_eq!(occ, direct.occupations);
    assert_eq!(eps, d.grids.eps);

    let obs = files.iter().find(|f| f.starts_with("observables_V")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(obs)).unwrap()).unwrap();
    assert!(json["meta"]["config_hash"].is_string());
    assert!(json["data"]["observables"]["I"].as_f64().unwrap() > 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = config_path();
    let args = with_config(cfg.to_str().unwrap(), &["solve", "--voltage", "120"]);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&run(&args, a.path())), 0);
    assert_eq!(code(&run(&args, b.path())), 0);
    for e in std::fs::read_dir(a.path()).unwrap() {
        let name = e.unwrap().file_name();
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
}

#[test]
fn missing_physics_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config_path()).unwrap().replace("theta_res = 70.0\n", "");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta_res"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config_path()).unwrap().replace("[contacts]\n", "[contacts]\nleft_width = 3.0\n");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("left_width"));
}

#[test]
fn invalid_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path();
    let o = run(&with_config(cfg.to_str().unwrap(), &["solve", "--set", "physics.T=-4"]), dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn partially_failed_sweep_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path();
    let args = with_config(
        cfg.to_str().unwrap(),
        &[
            "sweep",
            "--set",
            "solver.max_iter=2",
            "--set",
            "solver.pseudo_transient=false",
            "--set",
            "sweep.v_start=0",
            "--set",
            "sweep.v_step=30",
        ],
    );
    let o = run(&args, dir.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&dir.path().join("sweep.csv")).unwrap();
    let c = t.column("status").unwrap();
    let status: Vec<&str> = t.rows.iter().map(|r| r[c].as_str()).collect();
    assert!(status.contains(&"ok") && status.contains(&"failed"), "{status:?}");
}

#[test]
fn sweep_tables_share_bias_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path();
    let args = with_config(
        cfg.to_str().unwrap(),
        &["sweep", "--jobs", "2", "--trace", "--set", "sweep.v_start=90", "--set", "sweep.v_stop=150", "--set", "sweep.v_step=15"],
    );
    let o = run(&args, dir.path());
    assert_eq!(code(&o), 0);
    let trace = String::from_utf8_lossy(&o.stderr);
    assert!(trace.lines().filter(|l| l.contains("\"converged\"")).count() >= 5);
    for name in ["sweep.csv", "iv.csv", "p_vs_i.csv", "densities.csv", "splitting.csv"] {
        let t = read_table(&dir.path().join(name)).unwrap();
        assert_eq!(t.rows.len(), 5, "{name}");
        assert!(t.meta.get("config_hash").is_some(), "{name}");
    }
    let iv = read_table(&dir.path().join("iv.csv")).unwrap();
    let i = iv.numbers(iv.header[1].as_str()).unwrap();
    assert!(i.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn spectrum_command_normalizes_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path();
    let args = with_config(
        cfg.to_str().unwrap(),
        &["spectrum", "--normalize-spectrum", "--set", "spectrum.n_modes=5", "--set", "spectrum.n_omega=201"],
    );
    let o = run(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&dir.path().join("spectrum_resonant.csv")).unwrap();
    let y = t.numbers("intensity").unwrap();
    let top = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((top - 1.0).abs() < 1e-12, "{top}");
}

#[test]
fn zero_jobs_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path();
    let o = run(&with_config(cfg.to_str().unwrap(), &["solve", "--jobs", "0"]), dir.path());
    assert_eq!(code(&o), 2);
}
