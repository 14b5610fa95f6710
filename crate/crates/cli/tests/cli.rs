//! End-to-end runs of the `cslqp` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cslqp_cli::record::ResultRecord;

const SMALL: &str = r#"
temperatures = [0.02]

[material]
preset = "aluminum"

[csl]
lambda = 1e-10
r_c = 1e-7

[solver]
n_nodes = 60

[crossover]
curve_points = 12

[budget]
t1_s = 1e6
"#;

fn cslqp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cslqp"))
        .current_dir(dir)
        .env_remove("CSLQP_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn only_record(out_dir: &Path, analysis: &str) -> (PathBuf, ResultRecord) {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(out_dir).unwrap() {
        let path = entry.unwrap().path().join(format!("{analysis}.json"));
        if path.exists() {
            found.push(path);
        }
    }
    assert_eq!(found.len(), 1, "expected one {analysis} record in {}", out_dir.display());
    let record = serde_json::from_str(&std::fs::read_to_string(&found[0]).unwrap()).unwrap();
    (found[0].parent().unwrap().to_path_buf(), record)
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn identical_scenarios_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s.toml", SMALL);
    let config = config.to_str().unwrap();
    for out in ["a", "b"] {
        let o = cslqp(dir.path(), &["--config", config, "--out", out, "steady-state"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a_dir, a) = only_record(&dir.path().join("a"), "steady-state");
    let (b_dir, b) = only_record(&dir.path().join("b"), "steady-state");
    assert_eq!(a.payload_hash, b.payload_hash);
    assert_eq!(a.scenario_hash, b.scenario_hash);
    let mut compared = 0;
    for entry in std::fs::read_dir(&a_dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let other = b_dir.join(path.file_name().unwrap());
            assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(other).unwrap(), "{}", path.display());
            compared += 1;
        }
    }
    assert!(compared >= 4);
}

#[test]
fn steady_state_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s.toml", SMALL);
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "--out", "o", "steady-state"]);
    assert_eq!(code(&o), 0);
    let (rdir, record) = only_record(&dir.path().join("o"), "steady-state");
    let text = std::fs::read_to_string(rdir.join("steady-state-numeric_T20mK.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[1].starts_with("# units: x=gap, f=1, log10_f=1, flag=label"));
    assert_eq!(lines[2], "x,f,log10_f,flag");
    assert_eq!(lines.len(), 3 + 60);
    for q in record.outputs.values() {
        assert!(!q.unit.is_empty());
    }
    assert!(record.notes.iter().any(|n| n.contains("published")));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("r_c = 1e-7", "r_c = 1e-7\nrc = 2");
    let config = write_config(dir.path(), "bad.toml", &text);
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "rates"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`csl.rc`"), "{err}");
    assert!(!dir.path().join("results").exists());
}

#[test]
fn empty_temperature_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "t.toml", &SMALL.replace("[0.02]", "[]"));
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "steady-state"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`temperatures`"));
}

#[test]
fn missing_scenario_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&cslqp(dir.path(), &["rates"])), 2);
    assert_eq!(code(&cslqp(dir.path(), &["--preset", "nope", "rates"])), 2);
}

#[test]
fn empty_workload_list_gives_frontier_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "w.toml", &format!("workloads = []\n{SMALL}"));
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "--out", "o", "budget"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (rdir, record) = only_record(&dir.path().join("o"), "budget");
    assert!(record.table("frontier").is_some());
    assert!(record.table("verdicts").is_none());
    assert!(!record.outputs.keys().any(|k| k.starts_with("verdict.")));
    assert!(rdir.join("budget-frontier.csv").exists());
    assert!(!rdir.join("budget-verdicts.csv").exists());
}

#[test]
fn config_supplied_workload_is_judged() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{SMALL}\n[[workloads]]\nname = \"pricing\"\nn_qubits = 10\nn_gates = 1e6\nsource = \"user estimate\"\n"
    );
    let config = write_config(dir.path(), "w.toml", &text);
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "--out", "o", "budget"]);
    assert_eq!(code(&o), 0);
    let (_, record) = only_record(&dir.path().join("o"), "budget");
    assert_eq!(record.value("verdict.pricing.feasible"), Some(1.0));
    assert_eq!(record.value("verdict.pricing.max_gates"), Some(1e9));
}

#[test]
fn zero_lambda_gives_zero_collapse_entries() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "z.toml", &SMALL.replace("lambda = 1e-10", "lambda = 0.0"));
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "--out", "o", "rates"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, record) = only_record(&dir.path().join("o"), "rates");
    for key in [
        "reduction_rate",
        "total_generation_rate",
        "power_density",
        "csl_generation_at_gap",
        "csl_generation_first_node",
    ] {
        assert_eq!(record.value(key), Some(0.0), "{key}");
    }
    for name in ["csl_generation", "csl_generation_vs_temperature"] {
        let t = record.table(name).unwrap();
        let values = t.reals("rate").or_else(|| t.reals("value")).unwrap();
        assert!(values.iter().all(|&v| v == 0.0), "{name}");
    }
}

#[test]
fn narrowed_range_fails_bracketing_but_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("curve_points = 12", "curve_points = 12\nt_max_k = 0.03");
    let config = write_config(dir.path(), "c.toml", &text);
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "--out", "o", "crossover"]);
    assert_eq!(code(&o), 4);
    let (rdir, record) = only_record(&dir.path().join("o"), "crossover");
    assert!(record.value("generation_crossover").is_none());
    for name in ["d1", "d2", "csl_generation", "eph_generation", "recombination"] {
        assert!(rdir.join(format!("crossover-{name}.csv")).exists(), "{name}");
    }
}

#[test]
fn non_convergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("n_nodes = 60", "n_nodes = 60\nmax_steps = 2");
    let config = write_config(dir.path(), "n.toml", &text);
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "--out", "o", "steady-state"]);
    assert_eq!(code(&o), 3);
    let (rdir, record) = only_record(&dir.path().join("o"), "steady-state");
    assert!(record.warnings.iter().any(|w| w.contains("did not converge")));
    assert!(rdir.join("steady-state-numeric_T20mK.csv").exists());
}

#[test]
fn out_flag_beats_environment_which_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[output]\ndirectory = \"from_config\"\nformats = [\"json\"]\n");
    let config = write_config(dir.path(), "o.toml", &text);
    let config = config.to_str().unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cslqp"));
        cmd.current_dir(dir.path()).env_remove("CSLQP_OUT_DIR");
        if let Some(e) = env {
            cmd.env("CSLQP_OUT_DIR", e);
        }
        let mut args = vec!["--config", config];
        args.extend_from_slice(extra);
        args.push("budget");
        assert_eq!(cmd.args(&args).output().unwrap().status.code(), Some(0));
    };
    run(&[], None);
    assert!(dir.path().join("from_config").exists());
    run(&[], Some("from_env"));
    assert!(dir.path().join("from_env").exists());
    run(&["--out", "from_flag"], Some("from_env2"));
    assert!(dir.path().join("from_flag").exists());
    assert!(!dir.path().join("from_env2").exists());
    let (rdir, _) = only_record(&dir.path().join("from_flag"), "budget");
    assert!(!rdir.join("budget-frontier.csv").exists(), "json-only format writes no CSV");
}

#[test]
fn single_value_sweep_matches_direct_command() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s.toml", SMALL);
    let config = config.to_str().unwrap();
    let o = cslqp(dir.path(), &["--config", config, "--out", "direct", "rates"]);
    assert_eq!(code(&o), 0);
    let o = cslqp(
        dir.path(),
        &["--config", config, "--out", "swept", "sweep", "--axis", "csl.lambda", "--values", "1e-10", "--analysis", "rates"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, direct) = only_record(&dir.path().join("direct"), "rates");
    let (_, swept) = only_record(&dir.path().join("swept"), "rates");
    assert_eq!(direct.payload_hash, swept.payload_hash);
    assert_eq!(direct.scenario_hash, swept.scenario_hash);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s.toml", SMALL);
    let config = config.to_str().unwrap();
    let args = |out: &'static str, threads: &'static str| {
        vec![
            "--config", config, "--out", out, "--threads", threads, "sweep", "--axis", "csl.lambda", "--values",
            "1e-12,1e-10,1e-8",
        ]
    };
    assert_eq!(code(&cslqp(dir.path(), &args("serial", "1"))), 0);
    assert_eq!(code(&cslqp(dir.path(), &args("parallel", "4"))), 0);
    let (s_dir, serial) = only_record(&dir.path().join("serial"), "sweep");
    let (p_dir, parallel) = only_record(&dir.path().join("parallel"), "sweep");
    assert_eq!(serial.payload_hash, parallel.payload_hash);
    assert_eq!(
        std::fs::read(s_dir.join("sweep-summary.csv")).unwrap(),
        std::fs::read(p_dir.join("sweep-summary.csv")).unwrap()
    );
    // The excess density responds linearly to λ while blocking is negligible.
    let summary = serial.table("summary").unwrap();
    let x = summary.reals("T20mK.xqp_numeric").unwrap();
    assert!((x[1] / x[0] / 100.0 - 1.0).abs() < 0.01, "{x:?}");
    assert!((x[2] / x[1] / 100.0 - 1.0).abs() < 0.01, "{x:?}");
}

#[test]
fn sweep_rejects_non_numeric_axis() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s.toml", SMALL);
    let o = cslqp(
        dir.path(),
        &["--config", config.to_str().unwrap(), "sweep", "--axis", "material.preset", "--values", "1"],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a numeric field"));
}

#[test]
fn show_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = cslqp(dir.path(), &["--preset", "paper-baseline", "show-config"]);
    assert_eq!(code(&o), 0);
    let config = write_config(dir.path(), "p.toml", &String::from_utf8(o.stdout).unwrap());
    let o = cslqp(dir.path(), &["--config", config.to_str().unwrap(), "show-config"]);
    assert_eq!(code(&o), 0);
}
