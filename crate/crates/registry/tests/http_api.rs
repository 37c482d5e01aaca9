//! Exercises the wire surface end to end on an ephemeral port.

use std::time::{SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ed25519_dalek::{Signer, SigningKey};
use pact_alt_sig::AltReport;
use pact_core::{Entry, Params, Seed};
use pact_registry::{serve, Registry, RegistryConfig, SignaturePolicy, Tier};
use serde_json::{json, Value};

fn wall_clock() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap()
        .as_secs()
}

#[test]
fn report_fetch_countersign_over_http() {
    let params = Params::new(128, 900, 8, 0).unwrap();
    let lab = SigningKey::from_bytes(&[5u8; 32]);
    let mut policy = SignaturePolicy::new();
    policy.add(
        "lab",
        lab.verifying_key().to_bytes(),
        Tier::HealthcareValidated,
    );

    let mut config = RegistryConfig::new(params);
    config.delay = 0; // exercise the wire, not the release schedule
    let handle = serve(Registry::new(config, policy), "127.0.0.1:0", wall_clock).unwrap();
    let base = format!("http://{}", handle.addr());

    // Health.
    let health: Value = ureq::get(format!("{base}/health"))
        .call()
        .unwrap()
        .body_mut()
        .read_json()
        .unwrap();
    assert_eq!(health["status"], "ok");

    // Submit a fresh entry.
    let now = wall_clock();
    let entry = Entry::new(Seed::from_bytes(vec![9u8; 16]), now - 1800, now - 900);
    let body = json!({"entry": entry, "source": "test-client"});
    let accepted: Value = ureq::post(format!("{base}/report"))
        .send_json(&body)
        .unwrap()
        .body_mut()
        .read_json()
        .unwrap();
    assert_eq!(accepted["status"], "accepted");

    // A future-dated entry is rejected with a reason.
    let bad = Entry::new(Seed::from_bytes(vec![8u8; 16]), now, now + 7200);
    let response = ureq::post(format!("{base}/report"))
        .send_json(json!({"entry": bad, "source": "test-client"}))
        .unwrap_err();
    match response {
        ureq::Error::StatusCode(code) => assert_eq!(code, 422),
        other => panic!("unexpected error {other:?}"),
    }

    // Countersign, then fetch and observe the tier.
    let sig = lab.sign(&entry.signing_bytes()).to_bytes();
    let counter: Value = ureq::post(format!("{base}/countersign"))
        .send_json(json!({
            "locator_b64": B64.encode(entry.window_seed.as_bytes()),
            "cert_id": "lab",
            "signature_b64": B64.encode(sig),
        }))
        .unwrap()
        .body_mut()
        .read_json()
        .unwrap();
    assert_eq!(counter["status"], "ok");

    // Give the serving thread a tick to release.
    std::thread::sleep(std::time::Duration::from_millis(200));
    let fetched: Value = ureq::get(format!("{base}/entries?cursor=0&limit=10"))
        .call()
        .unwrap()
        .body_mut()
        .read_json()
        .unwrap();
    let entries = fetched["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["tier"], "healthcare-validated");
    assert_eq!(fetched["next_cursor"], 1);

    // Alt lane: wire-format report in, key groups out.
    let report = AltReport {
        verification_keys: vec![[3u8; 32]],
    };
    let alt: Value = ureq::post(format!("{base}/alt-report"))
        .send_json(json!({"report_b64": B64.encode(report.encode()), "source": "test-client"}))
        .unwrap()
        .body_mut()
        .read_json()
        .unwrap();
    assert_eq!(alt["status"], "accepted");
    std::thread::sleep(std::time::Duration::from_millis(200));
    let keys: Value = ureq::get(format!("{base}/alt-keys?cursor=0&limit=10"))
        .call()
        .unwrap()
        .body_mut()
        .read_json()
        .unwrap();
    assert_eq!(keys["groups"].as_array().unwrap().len(), 1);

    // Unknown route.
    let missing = ureq::get(format!("{base}/nope")).call().unwrap_err();
    match missing {
        ureq::Error::StatusCode(code) => assert_eq!(code, 404),
        other => panic!("unexpected error {other:?}"),
    }

    handle.shutdown();
}
