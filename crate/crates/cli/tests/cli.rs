use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn unlearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unlearn")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("unlearn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn example(name: &str) -> String {
    std::fs::read_to_string(configs().join(name)).unwrap()
}

#[test]
fn convex_recipe_report() {
    let o = unlearn(&["recipe", "--config", configs().join("recipe_convex.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k_learn"], 104);
    assert_eq!(v["k_delete"], 48);
    assert!((v["sigma2"].as_f64().unwrap() - 8e-4).abs() < 1e-15);
    assert_eq!(v["bindings"][0]["constraint"], "privacy");
}

#[test]
fn deletion_budget_above_privacy_budget_is_rejected() {
    let p = scratch("dd.toml", &example("recipe_convex.toml").replace("eps_dd = 0.1", "eps_dd = 2.0"));
    let o = unlearn(&["recipe", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps_dd"));
}

#[test]
fn missing_field_is_named() {
    let text: String = example("recipe_convex.toml")
        .lines()
        .filter(|l| !l.starts_with("lipschitz"))
        .map(|l| format!("{l}\n"))
        .collect();
    let p = scratch("missing.toml", &text);
    let o = unlearn(&["recipe", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing field `lipschitz`"));
}

#[test]
fn unknown_version_and_missing_table_are_rejected() {
    let p = scratch("v2.toml", "version = 2\n");
    assert_eq!(unlearn(&["accountant", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    let cfg = configs().join("recipe_convex.toml");
    let o = unlearn(&["verify-deletion", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("deletion"));
}

#[test]
fn failed_assertion_exits_3() {
    let p = scratch("pgd1.toml", &example("attack_pgd.toml").replace("releases = 20", "releases = 1"));
    let o = unlearn(&["attack", "pgd", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn counting_with_no_observations_is_a_coin_flip() {
    let p = scratch("count0.toml", &example("attack_counting.toml").replace("observed = 200", "observed = 0"));
    let o = unlearn(&["attack", "counting", "--config", p.to_str().unwrap(), "--trials", "400"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["success_rate"], 0.5);
}

#[test]
fn accountant_report_shape() {
    let cfg = configs().join("accountant_conversion.toml");
    let o = unlearn(&["accountant", "--config", cfg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rule"], "one_sided_conversion");
    assert_eq!(v["q"], 2.0);
    assert_eq!(v["inputs"]["epsilon"], 0.5);
    assert!((v["epsilon"].as_f64().unwrap() - (0.5 + 1e5f64.ln())).abs() < 1e-12);
}

#[test]
fn seed_flag_overrides_config() {
    let cfg = configs().join("attack_median.toml");
    let cfg = cfg.to_str().unwrap();
    let a = unlearn(&["attack", "--config", cfg, "--trials", "200", "--seed", "1"]);
    let b = unlearn(&["attack", "--config", cfg, "--trials", "200", "--seed", "1"]);
    let c = unlearn(&["attack", "--config", cfg, "--trials", "200", "--seed", "2"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}
