use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stirap_tomo::analytic::{attenuation_factor, predicted_pa};
use stirap_tomo::{DensityMatrix, PulseConfig, C};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_stirap-tomo");

fn paper_cfg() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/paper.cfg")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_cfg(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Paper config with selected keys replaced or added.
fn variant(dir: &TempDir, name: &str, overrides: &[(&str, &str)]) -> PathBuf {
    let base = std::fs::read_to_string(paper_cfg()).unwrap();
    let mut lines: Vec<String> = base
        .lines()
        .filter(|l| !overrides.iter().any(|(k, _)| l.split('=').next().map(str::trim) == Some(*k)))
        .map(String::from)
        .collect();
    lines.extend(overrides.iter().map(|(k, v)| format!("{k} = {v}")));
    write_cfg(dir, name, &(lines.join("\n") + "\n"))
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# stirap-tomo"));
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        Table { header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }

    fn last(&self, name: &str) -> f64 {
        *self.col(name).last().unwrap()
    }
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn simulate(cfg: &Path) -> Table {
    Table::parse(&stdout_of(&["simulate", "--config", cfg.to_str().unwrap()]))
}

fn measure(cfg: &Path) -> serde_json::Value {
    serde_json::from_str(&stdout_of(&["measure", "--config", cfg.to_str().unwrap()])).unwrap()
}

#[test]
fn paper_config_empties_the_coupled_state() {
    let t = simulate(&paper_cfg());
    assert!(t.last("c_population") <= 1e-3);
    // The decoupled half of the initial state stays put.
    assert!((t.last("d_population") - 0.5).abs() <= 1e-8);
    assert_eq!(t.header.len(), 1 + 32 + 4);
    // Every value carries 17 significant digits.
    let text = stdout_of(&["simulate", "--config", paper_cfg().to_str().unwrap()]);
    let sample = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    assert_eq!(sample.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn json_mirror_matches_key_value_config() {
    let json = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/paper.json");
    let a = stdout_of(&["simulate", "--config", paper_cfg().to_str().unwrap()]);
    let b = stdout_of(&["simulate", "--config", json.to_str().unwrap()]);
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn zero_field_gives_a_flat_trajectory() {
    let dir = TempDir::new().unwrap();
    let t = simulate(&variant(&dir, "off.cfg", &[("pulse.omega_max", "0")]));
    assert!(t.rows.len() > 2);
    let first = &t.rows[0];
    for row in &t.rows {
        for (k, (x, y)) in row.iter().zip(first).enumerate().skip(1) {
            assert!((x - y).abs() <= 1e-14, "column {} drifts: {x} vs {y}", t.header[k]);
        }
    }
}

#[test]
fn strong_auxiliary_decay_empties_the_target() {
    let paper = PulseConfig::<f64>::paper();
    // Bound set by the decay formula at Γ_a = 3 (amplitude rate 1.5).
    let predicted = attenuation_factor(&paper, 1.5).unwrap();
    assert!(predicted < 1e-10, "{predicted}");

    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "lossy.cfg", &[("decay.gamma_a", "3.0")]);
    let t = simulate(&cfg);
    let rho = DensityMatrix::from_elements(0.5, 0.5, C::new(0.0, 0.5), 0.0).unwrap();
    let p_a = predicted_pa(&rho, paper.alpha, paper.beta);
    assert!(t.last("rho_aa_re") <= 0.05 * p_a);
    // What left |a⟩ shows up as fluorescence.
    assert!(t.last("signal_integral") > 0.9 * p_a);
}

#[test]
fn measure_recovers_a_ground_population() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(
        &dir,
        "m.cfg",
        &[
            ("decay.gamma_e", "0"),
            ("state.rho_mm", "1"),
            ("state.rho_nn", "0"),
            ("state.rho_mn_re", "0"),
            ("state.rho_mn_im", "0"),
        ],
    );
    let report = measure(&cfg);
    assert_eq!(report["records"].as_array().unwrap().len(), 4);
    let mm = report["estimate"]["rho_mm"].as_f64().unwrap();
    assert!((mm - 1.0).abs() <= 5e-3, "{mm}");
    assert_eq!(report["truth"]["rho_mm"].as_f64().unwrap(), 1.0);
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn dark_state_gives_an_empty_third_record() {
    let dir = TempDir::new().unwrap();
    // |D⟩ for α = π/4, β = 0 is (−|m⟩ + |n⟩)/√2.
    let cfg = variant(
        &dir,
        "d.cfg",
        &[("state.rho_mm", "0.5"), ("state.rho_nn", "0.5"), ("state.rho_mn_re", "-0.5"), ("state.rho_mn_im", "0")],
    );
    let report = measure(&cfg);
    let third = &report["records"][2];
    assert_eq!(third["setting"]["alpha"].as_f64().unwrap(), std::f64::consts::FRAC_PI_4);
    assert!(third["calibrated_pa"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn fluorescence_readout_with_decay() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "f.cfg", &[("decay.gamma_a", "0.5")]);
    let out = stdout_of(&["measure", "--config", cfg.to_str().unwrap(), "--signal-mode", "fluorescence"]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["records"][0]["setting"]["signal_mode"], "integrated_fluorescence");
    let truth = &report["truth"];
    for key in ["delta_mm", "delta_nn"] {
        assert!(truth[key].as_f64().unwrap().abs() <= 2e-2);
    }
    for part in 0..2 {
        assert!(truth["delta_mn"][part].as_f64().unwrap().abs() <= 2e-2);
    }
}

#[test]
fn gamma_sweep_covers_the_paper_range() {
    let out =
        stdout_of(&["sweep", "--config", paper_cfg().to_str().unwrap(), "--param", "gamma_a", "--grid", "0:3:13"]);
    let t = Table::parse(&out);
    assert_eq!(t.header, ["gamma_a", "final_pa", "decay_prediction", "ratio", "max_rho_ee", "final_c_pop"]);
    let grid = t.col("gamma_a");
    assert_eq!(grid.len(), 13);
    for (k, g) in grid.iter().enumerate() {
        assert!((g - 0.25 * k as f64).abs() < 1e-15);
    }
    let pa = t.col("final_pa");
    assert!(pa.windows(2).all(|w| w[1] <= w[0]));
    assert!(t.col("final_c_pop").iter().all(|&c| c <= 1e-3));
}

#[test]
fn single_point_sweep_matches_simulate() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "p.cfg", &[("decay.gamma_a", "0.7")]);
    let sim = simulate(&cfg);
    let out = stdout_of(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "gamma_a", "--grid", "0.7"]);
    let sweep = Table::parse(&out);
    assert_eq!(sweep.rows.len(), 1);
    assert_eq!(sweep.last("final_pa"), sim.last("rho_aa_re"));
    assert_eq!(sweep.last("final_c_pop"), sim.last("c_population"));
    let peak = sim.col("rho_ee").into_iter().fold(0.0, f64::max);
    assert_eq!(sweep.last("max_rho_ee"), peak);
}

#[test]
fn ratio_tends_to_one_as_decay_vanishes() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "r.cfg", &[("decay.gamma_e", "0")]);
    let out =
        stdout_of(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "gamma_a", "--grid", "0.1, 0.01, 0.001, 0"]);
    let gaps: Vec<f64> = Table::parse(&out).col("ratio").iter().map(|r| (r - 1.0).abs()).collect();
    assert!(gaps[3] <= 1e-3, "{gaps:?}");
    assert!(gaps[2] <= 1e-3, "{gaps:?}");
    assert!(gaps[3] <= gaps[0]);
}

#[test]
fn sweep_parameters_apply() {
    for (param, grid) in
        [("omega_max", "4, 8"), ("delay_tau", "2.5, 4"), ("delta", "0, -0.5"), ("alpha", "0, pi/2"), ("beta", "-pi, 1")]
    {
        let t = Table::parse(&stdout_of(&[
            "sweep",
            "--config",
            paper_cfg().to_str().unwrap(),
            "--param",
            param,
            "--grid",
            grid,
        ]));
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.header[0], param);
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write_cfg(&dir, "bad.cfg", "pulse.delta = 0.3\npulse.omega_max = six\n");
    let out = run(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:2: pulse.omega_max"), "{err}");

    let out = run(&["simulate", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let unknown = write_cfg(&dir, "unknown.cfg", "pulse.omega = 1\n");
    assert_eq!(run(&["measure", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));

    let cfg = paper_cfg();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(run(&["sweep", "--config", cfg, "--param", "gamma_e", "--grid", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", cfg, "--param", "alpha", "--grid", "3"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", cfg, "--param", "delta", "--grid", "1,,2"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--config", cfg, "--tol", "-1"]).status.code(), Some(2));

    // Fluorescence without auxiliary decay carries no signal to calibrate.
    let out = run(&["measure", "--config", cfg, "--signal-mode", "fluorescence"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}

#[test]
fn reruns_differ_only_in_the_timestamp() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "seed.cfg", &[("decay.gamma_a", "0.5")]);
    let cfg = cfg.to_str().unwrap();
    for (cmd, extra) in
        [("simulate", vec![]), ("measure", vec![]), ("sweep", vec!["--param", "delta", "--grid", "0:0.6:4"])]
    {
        let mut texts = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{cmd}{k}.out"));
            let mut args =
                vec![cmd, "--config", cfg, "--out", path.to_str().unwrap(), "--jobs", if k == 0 { "1" } else { "3" }];
            args.extend(&extra);
            assert!(run(&args).status.success());
            texts.push(std::fs::read_to_string(path).unwrap());
        }
        let a: Vec<&str> = texts[0].lines().collect();
        let b: Vec<&str> = texts[1].lines().collect();
        assert_eq!(a.len(), b.len());
        let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        assert!(differing <= 1, "{cmd}: {differing} lines differ");
        let stamp = if cmd == "measure" { 1 } else { 0 };
        assert!(a.iter().zip(&b).enumerate().all(|(i, (x, y))| i == stamp || x == y));
    }
}

#[test]
fn random_state_is_seeded() {
    let dir = TempDir::new().unwrap();
    let text = "state.random = true\nrun.seed = 42\n";
    let cfg = write_cfg(&dir, "rand.cfg", text);
    let a = measure(&cfg);
    let b = measure(&cfg);
    assert_eq!(a["truth"], b["truth"]);
    let other = write_cfg(&dir, "rand2.cfg", "state.random = true\nrun.seed = 43\n");
    assert_ne!(measure(&other)["truth"], a["truth"]);
}
