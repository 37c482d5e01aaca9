//! Wire adapter. Query handlers deserialize a [`RegionQuery`] and nothing
//! else — the schema has no field a full-precision location could ride in
//! on, which is the privacy-by-construction property the tests pin down.
//!
//! Routes: `GET /narrowcast/messages`, `GET /narrowcast/size` (same
//! parameters), `POST /narrowcast/announce`.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::geo::{Area, Region};
use crate::service::{response_size, Narrowcast};

/// The entire request schema for both read endpoints: a coarsened region
/// and a resume timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionQuery {
    pub lat_prefix: i64,
    pub lon_prefix: i64,
    pub lat_bits: u8,
    pub lon_bits: u8,
    pub since: u64,
}

impl RegionQuery {
    pub fn region(&self) -> Region {
        Region {
            lat_prefix: self.lat_prefix,
            lon_prefix: self.lon_prefix,
            lat_bits: self.lat_bits,
            lon_bits: self.lon_bits,
        }
    }

    /// Parses from a URL query string, rejecting unknown keys.
    pub fn from_query(query: &str) -> Result<RegionQuery, String> {
        let mut map = serde_json::Map::new();
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("bad pair {pair:?}"))?;
            let n: i64 = v.parse().map_err(|_| format!("bad value for {k}"))?;
            map.insert(k.to_string(), json!(n));
        }
        serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| e.to_string())
    }
}

#[derive(Deserialize)]
struct AnnounceBody {
    area: Area,
    message_b64: String,
    signer: String,
    signature_b64: String,
}

pub struct ServiceHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<()>>,
    pub service: Arc<Mutex<Narrowcast>>,
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

pub fn serve(
    service: Narrowcast,
    addr: &str,
    clock: impl Fn() -> u64 + Send + 'static,
) -> std::io::Result<ServiceHandle> {
    let server = Server::http(addr).map_err(std::io::Error::other)?;
    let local = match server.server_addr() {
        tiny_http::ListenAddr::IP(a) => a,
        #[allow(unreachable_patterns)]
        _ => return Err(std::io::Error::other("unsupported listener")),
    };
    let service = Arc::new(Mutex::new(service));
    let stop = Arc::new(AtomicBool::new(false));
    let join = {
        let service = Arc::clone(&service);
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || {
            while !stop.load(Ordering::SeqCst) {
                match server.recv_timeout(Duration::from_millis(50)) {
                    Ok(Some(request)) => handle(&service, request, clock()),
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
        service,
    })
}

fn handle(service: &Arc<Mutex<Narrowcast>>, mut request: Request, now: u64) {
    let url = request.url().to_string();
    let (path, query) = match url.split_once('?') {
        Some((p, q)) => (p.to_string(), q.to_string()),
        None => (url.clone(), String::new()),
    };
    let mut body = String::new();
    if request.as_reader().read_to_string(&mut body).is_err() {
        respond_json(request, 400, &json!({"error": "unreadable body"}));
        return;
    }

    match (request.method().clone(), path.as_str()) {
        (Method::Get, "/narrowcast/messages") => match RegionQuery::from_query(&query) {
            Ok(q) => {
                let result = service.lock().unwrap().get_messages(&q.region(), q.since);
                match result {
                    Ok(hits) => respond_json(request, 200, &json!({ "messages": hits })),
                    Err(e) => respond_json(request, 422, &json!({"error": e.to_string()})),
                }
            }
            Err(e) => respond_json(request, 400, &json!({ "error": e })),
        },
        (Method::Get, "/narrowcast/size") => match RegionQuery::from_query(&query) {
            Ok(q) => {
                let result = service.lock().unwrap().get_messages(&q.region(), q.since);
                match result {
                    Ok(hits) => respond_json(request, 200, &json!({"bytes": response_size(&hits)})),
                    Err(e) => respond_json(request, 422, &json!({"error": e.to_string()})),
                }
            }
            Err(e) => respond_json(request, 400, &json!({ "error": e })),
        },
        (Method::Post, "/narrowcast/announce") => {
            match serde_json::from_str::<AnnounceBody>(&body) {
                Ok(parsed) => {
                    let message = match B64.decode(&parsed.message_b64) {
                        Ok(m) => m,
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
                    let outcome = service.lock().unwrap().announce(
                        parsed.area,
                        message,
                        &parsed.signer,
                        &signature,
                        now,
                    );
                    let status = if outcome == crate::service::AnnounceOutcome::Accepted {
                        200
                    } else {
                        422
                    };
                    respond_json(request, status, &serde_json::to_value(&outcome).unwrap());
                }
                Err(e) => respond_json(request, 400, &json!({"error": e.to_string()})),
            }
        }
        _ => respond_json(request, 404, &json!({"error": "no such route"})),
    }
}

fn respond_json(request: Request, status: u16, body: &serde_json::Value) {
    let header =
        Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).expect("static header");
    let response = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header);
    request.respond(response).ok();
}
