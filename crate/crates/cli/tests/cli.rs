//! Drives the built binary end to end: the packaged demo scenario, the
//! structured-output schema, exit codes, key/whitelist round trips, and a
//! live service conversation over HTTP.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn pact() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pact"))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn pact")
}

#[test]
fn packaged_demo_scenario_shows_one_alert() {
    let scenario = workspace_root().join("scenarios/two_agents.scn");
    let out = run(pact().arg("simulate").arg(&scenario));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("alerts: 1"), "{stdout}");
    assert!(stdout.contains("oracle agreement: exact"), "{stdout}");

    // Structured mode is machine-parseable with a stable shape.
    let out = run(pact()
        .arg("--format")
        .arg("json")
        .arg("simulate")
        .arg(&scenario));
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["alerts"], 1);
    assert_eq!(parsed["matches_oracle"], true);
    assert_eq!(parsed["alerted"][0], "bob");
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = run(&mut pact());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "{err}");

    let out = run(pact().arg("frobnicate"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_service_exits_three() {
    let out = run(pact()
        .arg("entries")
        .arg("fetch")
        .arg("--registry")
        .arg("http://127.0.0.1:9"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_emits_schema_stable_table() {
    let out = run(pact()
        .arg("--format")
        .arg("json")
        .arg("bench")
        .arg("--protocol")
        .arg("core")
        .arg("--l")
        .arg("1,2,4")
        .arg("--store")
        .arg("8")
        .arg("--delta")
        .arg("32"));
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &parsed["reports"][0];
    assert_eq!(report["points"].as_array().unwrap().len(), 3);
    assert!(report["r_squared"].is_number());
    assert!(report["slope"].is_number());
    assert_eq!(report["points"][2]["l"], 4);
}

#[test]
fn keygen_whitelist_and_live_services_roundtrip() {
    let dir = std::env::temp_dir().join("pact-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let key_path = dir.join("authority.json");
    let wl_path = dir.join("narrowcast-wl.json");
    std::fs::remove_file(&wl_path).ok();

    // keygen → whitelist add (narrowcast).
    let out = run(pact().arg("keygen").arg("--out").arg(&key_path));
    assert!(out.status.success());
    let key: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&key_path).unwrap()).unwrap();
    let out = run(pact()
        .arg("whitelist")
        .arg("add")
        .arg("--service")
        .arg("narrowcast")
        .arg("--file")
        .arg(&wl_path)
        .arg("--cert-id")
        .arg("city-health")
        .arg("--vk")
        .arg(key["vk_hex"].as_str().unwrap()));
    assert!(out.status.success());

    // Start a narrowcast service on an ephemeral port and talk to it. The
    // child must not inherit our stdio (a leaked pipe would outlive the
    // test) and must die even if an assertion below fails first.
    struct KillOnDrop(std::process::Child);
    impl Drop for KillOnDrop {
        fn drop(&mut self) {
            self.0.kill().ok();
            self.0.wait().ok();
        }
    }
    let mut service = KillOnDrop(
        pact()
            .arg("narrowcast")
            .arg("serve")
            .arg("--addr")
            .arg("127.0.0.1:0")
            .arg("--whitelist")
            .arg(&wl_path)
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap(),
    );
    let addr = {
        use std::io::{BufRead, BufReader};
        let stderr = service.0.stderr.take().unwrap();
        let mut line = String::new();
        BufReader::new(stderr).read_line(&mut line).unwrap();
        line.trim()
            .rsplit_once(' ')
            .map(|(_, addr)| addr.to_string())
            .expect("listen line")
    };
    let base = format!("http://{addr}");

    let announce = run(pact()
        .arg("narrowcast")
        .arg("announce")
        .arg("--narrowcast")
        .arg(&base)
        .arg("--lat")
        .arg("40.71455")
        .arg("--lon")
        .arg("-74.00712")
        .arg("--radius-m")
        .arg("250")
        .arg("--begin")
        .arg("0")
        .arg("--end")
        .arg("99999999999")
        .arg("--message")
        .arg("playground closed for decontamination")
        .arg("--signer")
        .arg("city-health")
        .arg("--key")
        .arg(&key_path));
    assert!(
        announce.status.success(),
        "{}",
        String::from_utf8_lossy(&announce.stderr)
    );

    let query = run(pact()
        .arg("--format")
        .arg("json")
        .arg("narrowcast")
        .arg("query")
        .arg("--narrowcast")
        .arg(&base)
        .arg("--lat")
        .arg("40.7")
        .arg("--lon")
        .arg("-74.0")
        .arg("--lat-bits")
        .arg("8")
        .arg("--lon-bits")
        .arg("8"));
    assert!(query.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&query.stdout).unwrap();
    assert_eq!(parsed["messages"].as_array().unwrap().len(), 1);

    drop(service);
    std::fs::remove_file(&key_path).ok();
    std::fs::remove_file(&wl_path).ok();
}

#[test]
fn endpoint_precedence_flag_over_env_over_config() {
    let dir = std::env::temp_dir().join("pact-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, "registry_url = \"http://127.0.0.1:9\"\n").unwrap();

    // Config file alone: the (dead) endpoint from the file is used → exit 3.
    let out = run(pact()
        .arg("--config")
        .arg(&config_path)
        .arg("entries")
        .arg("fetch"));
    assert_eq!(out.status.code(), Some(3));

    // Env overrides file; flag overrides env. Both dead here, but the
    // error text names the target, which proves precedence.
    let out = run(pact()
        .arg("--config")
        .arg(&config_path)
        .env("PACT_REGISTRY_URL", "http://127.0.0.2:9")
        .arg("entries")
        .arg("fetch"));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("127.0.0.2"));

    let out = run(pact()
        .arg("--config")
        .arg(&config_path)
        .env("PACT_REGISTRY_URL", "http://127.0.0.2:9")
        .arg("entries")
        .arg("fetch")
        .arg("--registry")
        .arg("http://127.0.0.3:9"));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("127.0.0.3"));
    std::fs::remove_file(&config_path).ok();
}
