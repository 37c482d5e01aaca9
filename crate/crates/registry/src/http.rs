//! Request/response adapter over the in-process registry. Transport-level
//! authentication (TLS) is assumed to be provided by the deployment; this
//! server speaks plain HTTP for desk-scale runs and tests.
//!
//! Routes: `POST /report`, `POST /countersign`, `POST /alt-report`,
//! `GET /entries?cursor=N&limit=K`, `GET /alt-keys?cursor=N&limit=K`,
//! `GET /health`. All byte fields are base64 inside JSON wrappers; times are
//! u64 seconds.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use pact_alt_sig::AltReport;
use pact_core::Entry;
use serde::Deserialize;
use serde_json::json;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::registry::Registry;

pub struct ServiceHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<()>>,
    pub registry: Arc<Mutex<Registry>>,
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(join) = self.join.take() {
            join.join().ok();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(join) = self.join.take() {
            join.join().ok();
        }
    }
}

/// Starts the registry server on `addr` (use port 0 for an ephemeral port).
/// `clock` supplies wall time for intake checks and release ticks, which run
/// continuously on the serving thread.
pub fn serve(
    registry: Registry,
    addr: &str,
    clock: impl Fn() -> u64 + Send + 'static,
) -> std::io::Result<ServiceHandle> {
    let server = Server::http(addr).map_err(std::io::Error::other)?;
    let local = match server.server_addr() {
        tiny_http::ListenAddr::IP(a) => a,
        #[allow(unreachable_patterns)]
        _ => return Err(std::io::Error::other("unsupported listener")),
    };
    let registry = Arc::new(Mutex::new(registry));
    let stop = Arc::new(AtomicBool::new(false));
    let join = {
        let registry = Arc::clone(&registry);
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || {
            while !stop.load(Ordering::SeqCst) {
                registry.lock().unwrap().release_tick(clock());
                match server.recv_timeout(Duration::from_millis(50)) {
                    Ok(Some(request)) => handle(&registry, request, clock()),
                    Ok(None) => {}
                    Err(_) => break,
                }
            }
        })
    };
    Ok(ServiceHandle {
        addr: local,
        stop,
        join: Some(join),
        registry,
    })
}

#[derive(Deserialize)]
struct ReportBody {
    entry: Entry,
    source: Option<String>,
}

#[derive(Deserialize)]
struct CountersignBody {
    locator_b64: String,
    cert_id: String,
    signature_b64: String,
}

#[derive(Deserialize)]
struct AltReportBody {
    report_b64: String,
    source: Option<String>,
}

fn handle(registry: &Arc<Mutex<Registry>>, mut request: Request, now: u64) {
    let url = request.url().to_string();
    let (path, query) = match url.split_once('?') {
        Some((p, q)) => (p.to_string(), q.to_string()),
        None => (url.clone(), String::new()),
    };
    let remote = request
        .remote_addr()
        .map(|a| a.ip().to_string())
        .unwrap_or_else(|| "unknown".to_string());

    let mut body = String::new();
    if request.as_reader().read_to_string(&mut body).is_err() {
        respond_json(request, 400, &json!({"error": "unreadable body"}));
        return;
    }

    match (request.method().clone(), path.as_str()) {
        (Method::Get, "/health") => {
            let reg = registry.lock().unwrap();
            respond_json(
                request,
                200,
                &json!({
                    "status": "ok",
                    "published": reg.published_len(),
                    "pending": reg.pending_len(),
                    "alt_published": reg.alt_published_len(),
                }),
            );
        }
        (Method::Get, "/entries") => {
            let cursor = query_u64(&query, "cursor").unwrap_or(0);
            let limit = query_u64(&query, "limit").unwrap_or(100) as usize;
            let (batch, next) = registry.lock().unwrap().fetch(cursor, limit.min(1000));
            respond_json(
                request,
                200,
                &json!({"entries": batch, "next_cursor": next}),
            );
        }
        (Method::Get, "/alt-keys") => {
            let cursor = query_u64(&query, "cursor").unwrap_or(0);
            let limit = query_u64(&query, "limit").unwrap_or(100) as usize;
            let (batch, next) = registry.lock().unwrap().fetch_alt(cursor, limit.min(1000));
            let groups: Vec<serde_json::Value> = batch
                .iter()
                .map(|g| {
                    json!({
                        "published_at": g.published_at,
                        "keys_b64": g.keys.iter().map(|k| B64.encode(k)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            respond_json(
                request,
                200,
                &json!({"groups": groups, "next_cursor": next}),
            );
        }
        (Method::Post, "/report") => match serde_json::from_str::<ReportBody>(&body) {
            Ok(parsed) => {
                let source = parsed.source.unwrap_or(remote);
                let outcome = registry.lock().unwrap().submit(parsed.entry, &source, now);
                let status = if outcome.is_accepted() { 200 } else { 422 };
                respond_json(request, status, &serde_json::to_value(&outcome).unwrap());
            }
            Err(e) => respond_json(request, 400, &json!({"error": e.to_string()})),
        },
        (Method::Post, "/countersign") => match serde_json::from_str::<CountersignBody>(&body) {
            Ok(parsed) => {
                let locator = match B64.decode(&parsed.locator_b64) {
                    Ok(l) => l,
                    Err(e) => {
                        respond_json(request, 400, &json!({"error": e.to_string()}));
                        return;
                    }
                };
                let signature = match B64.decode(&parsed.signature_b64) {
                    Ok(s) => s,
                    Err(e) => {
                        respond_json(request, 400, &json!({"error": e.to_string()}));
                        return;
                    }
                };
                let result =
                    registry
                        .lock()
                        .unwrap()
                        .countersign(&locator, &parsed.cert_id, &signature);
                match result {
                    Ok(tier) => respond_json(request, 200, &json!({"status": "ok", "tier": tier})),
                    Err(e) => respond_json(request, 422, &json!({"error": e.to_string()})),
                }
            }
            Err(e) => respond_json(request, 400, &json!({"error": e.to_string()})),
        },
        (Method::Post, "/alt-report") => match serde_json::from_str::<AltReportBody>(&body) {
            Ok(parsed) => {
                let wire = match B64.decode(&parsed.report_b64) {
                    Ok(w) => w,
                    Err(e) => {
                        respond_json(request, 400, &json!({"error": e.to_string()}));
                        return;
                    }
                };
                match AltReport::decode(&wire) {
                    Ok(report) => {
                        let source = parsed.source.unwrap_or(remote);
                        let outcome = registry
                            .lock()
                            .unwrap()
                            .submit_alt_report(&report, &source, now);
                        let status = if outcome.is_accepted() { 200 } else { 422 };
                        respond_json(request, status, &serde_json::to_value(&outcome).unwrap());
                    }
                    Err(e) => respond_json(request, 400, &json!({"error": e.to_string()})),
                }
            }
            Err(e) => respond_json(request, 400, &json!({"error": e.to_string()})),
        },
        _ => respond_json(request, 404, &json!({"error": "no such route"})),
    }
}

fn query_u64(query: &str, key: &str) -> Option<u64> {
    query.split('&').find_map(|pair| {
        let (k, v) = pair.split_once('=')?;
        (k == key).then(|| v.parse().ok()).flatten()
    })
}

fn respond_json(request: Request, status: u16, body: &serde_json::Value) {
    let header =
        Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).expect("static header");
    let response = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header);
    request.respond(response).ok();
}
