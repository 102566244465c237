use std::process::{Command, Output};

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("FINSLER_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn classify_euclidean_config() {
    let out = finsler(&["classify", "examples/euclidean.cfg", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "BERWALD");
}

#[test]
fn classify_expect_mismatch_fails() {
    let out = finsler(&["classify", "examples/generic.cfg", "--expect", "BERWALD"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unicorn_alpha_beta_is_landsberg_not_berwald() {
    let out = finsler(&["unicorn", "--alpha", "1", "--beta", "1", "--k", "exp(x0)", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "LANDSBERG_NOT_BERWALD");
}

#[test]
fn configuration_and_usage_errors_exit_2() {
    for args in [
        &["classify", "missing.cfg"][..],
        &["unicorn", "--g1", "1", "--g2", "2", "--g3", "1"],
        &["unicorn", "--alpha", "1"],
        &["psi-test", "--theta", "s^"],
        &["spray", "examples/euclidean.cfg", "--point", "0,0.5"],
        &["validate", "examples/euclidean.cfg", "--threads", "0"],
        &["nonsense"],
    ] {
        let out = finsler(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn missing_config_message() {
    let out = finsler(&["classify", "missing.cfg"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn spray_csv_and_validate() {
    let out = finsler(&["spray", "examples/randers.cfg", "--point", "0.1,0.5,-0.2,1.0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command,check,value,relation,tolerance,pass"));
    let out = finsler(&["validate", "examples/randers.cfg", "--format", "json"]);
    assert_eq!(json(&out)["verdict"], "VALID");
}

#[test]
fn curvature_commands() {
    let out = finsler(&["berwald", "examples/generic.cfg", "--oracle-points", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "NONZERO");
    let out = finsler(&["landsberg", "examples/euclidean.cfg", "--oracle-points", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "VANISHES");
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(["psi-test", "--theta", "s*z", "--format", "json"])
        .env("FINSLER_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out).get("wall_time_s").is_none());
}
