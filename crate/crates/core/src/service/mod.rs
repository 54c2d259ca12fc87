//! HTTP service exposing stores as SPARQL protocol endpoints.

mod http;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufReader;
use std::net::{Ipv4Addr, Ipv6Addr, Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::endpoint::Latency;
use crate::gate::Gate;
use crate::rdf::{NTriplesError, Store};
use crate::sparql::results::RESULTS_JSON_MEDIA_TYPE;
use crate::sparql::{evaluate, parse_query, serialize_results};

pub const DEFAULT_MAX_CONCURRENT: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid service config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("binding {path}: {source}")]
    Data {
        path: String,
        #[source]
        source: NTriplesError,
    },
    #[error("cannot listen on {addr}: {message}")]
    Bind { addr: String, message: String },
}

/// Service config file (TOML).
///
/// ```toml
/// port = 8890
/// host = "127.0.0.1"          # optional
/// max_concurrent = 8          # per binding
///
/// [[binding]]
/// path = "/drugbank/sparql"
/// data = ["drugbank.nt"]      # relative to this file
/// latency_ms = 0
/// jitter_ms = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub port: u32,
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_max_concurrent")]
    pub max_concurrent: usize,
    #[serde(default, rename = "binding")]
    pub bindings: Vec<BindingConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingConfig {
    pub path: String,
    #[serde(default)]
    pub data: Vec<PathBuf>,
    #[serde(default)]
    pub latency_ms: u64,
    #[serde(default)]
    pub jitter_ms: u64,
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_max_concurrent() -> usize {
    DEFAULT_MAX_CONCURRENT
}

impl ServiceConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ServiceError> {
        let config: ServiceConfig = toml::from_str(text)
            .map_err(|e| ServiceError::Config { path: origin.to_owned(), message: e.to_string() })?;
        config.validate().map_err(|message| ServiceError::Config { path: origin.to_owned(), message })?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| ServiceError::Io { path: path.to_owned(), source })?;
        let mut config = ServiceConfig::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for b in &mut config.bindings {
            for d in &mut b.data {
                if d.is_relative() {
                    *d = base.join(&*d);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(1..=65535).contains(&self.port) {
            return Err(format!("port {} outside [1, 65535]", self.port));
        }
        if self.max_concurrent == 0 {
            return Err("max_concurrent must be positive".into());
        }
        let mut seen = HashSet::new();
        for b in &self.bindings {
            if !b.path.starts_with('/') {
                return Err(format!("binding path {:?} must start with '/'", b.path));
            }
            if !seen.insert(b.path.as_str()) {
                return Err(format!("duplicate binding path {:?}", b.path));
            }
        }
        Ok(())
    }
}

struct Binding {
    store: Arc<Store>,
    latency: Latency,
    gate: Gate,
}

/// Minimal view of an HTTP request.
#[derive(Debug, Clone, Default)]
pub struct HttpRequest {
    pub method: String,
    /// Path plus optional `?query-string`.
    pub url: String,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
}

impl HttpResponse {
    fn text(status: u16, message: impl Into<String>) -> Self {
        HttpResponse { status, content_type: "text/plain; charset=utf-8", body: message.into().into_bytes() }
    }
}

/// A set of path-bound stores answering SPARQL protocol requests.
pub struct Service {
    bindings: BTreeMap<String, Binding>,
}

impl Service {
    pub fn new() -> Self {
        Service { bindings: BTreeMap::new() }
    }

    /// Loads every binding's data; the first failing file aborts with its
    /// binding path.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let mut service = Service::new();
        for b in &config.bindings {
            let mut store = Store::new();
            for file in &b.data {
                store.load_file_into(file).map_err(|source| ServiceError::Data { path: b.path.clone(), source })?;
            }
            info!("binding {} loaded {} triples", b.path, store.len());
            service.bind(&b.path, store, Latency::from_millis(b.latency_ms, b.jitter_ms), config.max_concurrent);
        }
        Ok(service)
    }

    pub fn bind(&mut self, path: &str, store: impl Into<Arc<Store>>, latency: Latency, max_concurrent: usize) {
        let binding = Binding { store: store.into(), latency, gate: Gate::new(max_concurrent) };
        self.bindings.insert(path.to_owned(), binding);
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    pub fn triple_counts(&self) -> BTreeMap<String, usize> {
        self.bindings.iter().map(|(p, b)| (p.clone(), b.store.len())).collect()
    }

    /// Answers one SPARQL protocol request. Injected latency is applied after
    /// evaluation and before the response is handed back for writing.
    pub fn handle_request(&self, request: &HttpRequest) -> HttpResponse {
        let (path, query_string) = match request.url.split_once('?') {
            Some((p, q)) => (p, q),
            None => (request.url.as_str(), ""),
        };
        let Some(binding) = self.bindings.get(path) else {
            return HttpResponse::text(404, format!("no endpoint at {path}"));
        };
        let text = match request.method.as_str() {
            "GET" => form_value(query_string.as_bytes(), "query"),
            "POST" => {
                let ct = request.content_type.as_deref().unwrap_or("");
                if ct.starts_with("application/sparql-query") {
                    String::from_utf8(request.body.clone()).ok()
                } else {
                    form_value(&request.body, "query").or_else(|| form_value(query_string.as_bytes(), "query"))
                }
            }
            other => return HttpResponse::text(405, format!("method {other} not allowed")),
        };
        let Some(text) = text else {
            return HttpResponse::text(400, "missing query parameter");
        };
        let response = {
            let _permit = binding.gate.acquire();
            answer(&binding.store, &text)
        };
        binding.latency.apply();
        response
    }

    /// Starts serving on `addr` (port 0 picks a free port).
    pub fn start(self, addr: impl ToSocketAddrs + std::fmt::Debug) -> Result<ServiceHandle, ServiceError> {
        let shown = format!("{addr:?}");
        let bind_err = |e: std::io::Error| ServiceError::Bind { addr: shown.clone(), message: e.to_string() };
        let listener = TcpListener::bind(addr).map_err(bind_err)?;
        let local = listener.local_addr().map_err(bind_err)?;
        let shared = Arc::new(Shared { stopping: AtomicBool::new(false), connections: Mutex::default() });
        let service = Arc::new(self);
        let acceptor = {
            let shared = Arc::clone(&shared);
            std::thread::spawn(move || {
                let mut next_id = 0u64;
                for stream in listener.incoming() {
                    if shared.stopping.load(Ordering::SeqCst) {
                        break;
                    }
                    let stream = match stream {
                        Ok(s) => s,
                        Err(e) => {
                            warn!("accept failed: {e}");
                            continue;
                        }
                    };
                    let id = next_id;
                    next_id += 1;
                    if let Ok(clone) = stream.try_clone() {
                        lock(&shared.connections).insert(id, clone);
                    }
                    let (service, shared) = (Arc::clone(&service), Arc::clone(&shared));
                    std::thread::spawn(move || {
                        serve_connection(&service, stream);
                        lock(&shared.connections).remove(&id);
                    });
                }
            })
        };
        info!("serving SPARQL endpoints on http://{local}");
        Ok(ServiceHandle { addr: local, shared, acceptor: Some(acceptor) })
    }
}

impl Default for Service {
    fn default() -> Self {
        Service::new()
    }
}

fn answer(store: &Store, text: &str) -> HttpResponse {
    let query = match parse_query(text) {
        Ok(q) => q,
        Err(e) => return HttpResponse::text(400, e.to_string()),
    };
    let results = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| evaluate(&query, store)));
    match results {
        Ok(r) => HttpResponse { status: 200, content_type: RESULTS_JSON_MEDIA_TYPE, body: serialize_results(&r) },
        Err(_) => HttpResponse::text(500, "internal error during evaluation"),
    }
}

fn form_value(encoded: &[u8], key: &str) -> Option<String> {
    url::form_urlencoded::parse(encoded).find(|(k, _)| k == key).map(|(_, v)| v.into_owned())
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Closes connections idle for this long.
const IDLE_TIMEOUT: Duration = Duration::from_secs(60);

fn serve_connection(service: &Service, stream: TcpStream) {
    let _ = stream.set_nodelay(true);
    let _ = stream.set_read_timeout(Some(IDLE_TIMEOUT));
    let Ok(mut writer) = stream.try_clone() else { return };
    let mut reader = BufReader::new(stream);
    loop {
        let (response, keep_alive) = match http::read_request(&mut reader) {
            Ok(http::Incoming::Request { request, keep_alive }) => {
                let res = service.handle_request(&request);
                debug!("{} {} -> {}", request.method, request.url.split('?').next().unwrap_or(""), res.status);
                (res, keep_alive)
            }
            Ok(http::Incoming::Reject(res)) => (res, false),
            Ok(http::Incoming::Closed) | Err(_) => return,
        };
        if let Err(e) = http::write_response(&mut writer, &response, keep_alive) {
            debug!("client went away: {e}");
            return;
        }
        if !keep_alive {
            let _ = writer.shutdown(Shutdown::Both);
            return;
        }
    }
}

struct Shared {
    stopping: AtomicBool,
    connections: Mutex<HashMap<u64, TcpStream>>,
}

/// A running service. Dropping the handle shuts it down.
pub struct ServiceHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
}

/// Stops the acceptor of the service listening on `addr` and closes open
/// connections.
fn request_stop(shared: &Shared, addr: SocketAddr) {
    if shared.stopping.swap(true, Ordering::SeqCst) {
        return;
    }
    let mut wake = addr;
    if wake.ip().is_unspecified() {
        wake.set_ip(if addr.is_ipv4() { Ipv4Addr::LOCALHOST.into() } else { Ipv6Addr::LOCALHOST.into() });
    }
    let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
    for (_, c) in lock(&shared.connections).drain() {
        let _ = c.shutdown(Shutdown::Both);
    }
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL of the endpoint bound at `path`.
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    /// Blocks until the service is stopped through a [`ServiceHandle::stopper`].
    pub fn wait(mut self) {
        if let Some(t) = self.acceptor.take() {
            let _ = t.join();
        }
    }

    /// A callback that stops the service from another thread, e.g. a signal
    /// handler.
    pub fn stopper(&self) -> impl Fn() + Send + Sync + 'static {
        let (shared, addr) = (Arc::clone(&self.shared), self.addr);
        move || request_stop(&shared, addr)
    }

    fn stop(&mut self) {
        request_stop(&self.shared, self.addr);
        if let Some(t) = self.acceptor.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Loads the configured bindings and listens on `host:port`.
pub fn serve(config: &ServiceConfig) -> Result<ServiceHandle, ServiceError> {
    config.validate().map_err(|message| ServiceError::Config { path: PathBuf::new(), message })?;
    let service = Service::from_config(config)?;
    service.start((config.host.as_str(), config.port as u16))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(service: &Service, url: &str) -> HttpResponse {
        service.handle_request(&HttpRequest { method: "GET".into(), url: url.into(), ..Default::default() })
    }

    #[test]
    fn status_codes() {
        let mut s = Service::new();
        s.bind("/e", Store::new(), Latency::ZERO, 2);
        assert_eq!(get(&s, "/e").status, 400);
        assert_eq!(get(&s, "/e?query=SELEC").status, 400);
        assert_eq!(get(&s, "/e?query=CONSTRUCT+%7B%7D+WHERE+%7B%7D").status, 400);
        assert_eq!(get(&s, "/nope?query=ASK+%7B%7D").status, 404);
        let ok = get(&s, "/e?query=ASK+%7B+%3Fs+%3Fp+%3Fo+%7D");
        assert_eq!(ok.status, 200);
        assert_eq!(ok.body, br#"{"head":{},"boolean":false}"#);
    }

    #[test]
    fn config_validation() {
        let p = Path::new("s.toml");
        assert!(ServiceConfig::from_toml("port = 0", p).is_err());
        assert!(ServiceConfig::from_toml("port = 70000", p).is_err());
        let dup = "port = 1\n[[binding]]\npath='/a'\n[[binding]]\npath='/a'\n";
        assert!(ServiceConfig::from_toml(dup, p).is_err());
        let c = ServiceConfig::from_toml("port = 8890\n[[binding]]\npath='/a'\nlatency_ms=3\n", p).unwrap();
        assert_eq!(c.max_concurrent, DEFAULT_MAX_CONCURRENT);
        assert_eq!(ServiceConfig::from_toml(&c.to_toml(), p).unwrap(), c);
    }
}
