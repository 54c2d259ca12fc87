//! The HTTP endpoint service and remote members talking to it.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fedmesh::endpoint::{Endpoint, Latency, RemoteOptions};
use fedmesh::rdf::{parse_ntriples_str, Store, TermPattern, TriplePattern};
use fedmesh::service::{Service, ServiceHandle};
use fedmesh::sparql::{evaluate, parse_query};

const DATA: &str = r#"
<http://e/a> <http://e/p> <http://e/b> .
<http://e/b> <http://e/p> <http://e/c> .
<http://e/c> <http://e/name> "c" .
"#;

fn store() -> Arc<Store> {
    Arc::new(Store::from_triples(parse_ntriples_str(DATA).unwrap()))
}

fn start(latency: Latency) -> ServiceHandle {
    let mut s = Service::new();
    s.bind("/sparql", store(), latency, 4);
    s.start("127.0.0.1:0").unwrap()
}

fn raw(handle: &ServiceHandle, request: &str) -> (u16, String) {
    let mut conn = TcpStream::connect(handle.addr()).unwrap();
    conn.write_all(request.as_bytes()).unwrap();
    let mut out = String::new();
    conn.read_to_string(&mut out).unwrap();
    let status = out[9..12].parse().unwrap();
    let body = out.split_once("\r\n\r\n").unwrap().1.to_owned();
    (status, body)
}

fn post(handle: &ServiceHandle, content_type: &str, body: &str) -> (u16, String) {
    raw(
        handle,
        &format!(
            "POST /sparql HTTP/1.1\r\nHost: x\r\nConnection: close\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n\r\n{body}",
            body.len()
        ),
    )
}

#[test]
fn protocol_errors() {
    let h = start(Latency::ZERO);
    assert_eq!(raw(&h, "GET /sparql HTTP/1.1\r\nConnection: close\r\n\r\n").0, 400);
    assert_eq!(raw(&h, "GET /other?query=ASK%7B%7D HTTP/1.1\r\nConnection: close\r\n\r\n").0, 404);
    assert_eq!(raw(&h, "DELETE /sparql HTTP/1.1\r\nConnection: close\r\n\r\n").0, 405);
    assert_eq!(raw(&h, "GET /sparql?query=SELECT+%3Fx HTTP/1.1\r\nConnection: close\r\n\r\n").0, 400);
    assert_eq!(raw(&h, "garbage\r\n\r\n").0, 400);
    h.shutdown();
}

#[test]
fn post_bodies() {
    let h = start(Latency::ZERO);
    let (status, body) = post(&h, "application/sparql-query", "ASK { ?s <http://e/name> \"c\" }");
    assert_eq!((status, body.as_str()), (200, r#"{"head":{},"boolean":true}"#));
    let (status, body) =
        post(&h, "application/x-www-form-urlencoded", "query=ASK+%7B+%3Fs+%3Fp+%3Chttp%3A%2F%2Fe%2Fz%3E+%7D");
    assert_eq!((status, body.as_str()), (200, r#"{"head":{},"boolean":false}"#));
    h.shutdown();
}

#[test]
fn keep_alive_serves_several_requests_on_one_connection() {
    let h = start(Latency::ZERO);
    let mut conn = TcpStream::connect(h.addr()).unwrap();
    let request = "GET /sparql?query=ASK%7B%3Fs%3Fp%3Fo%7D HTTP/1.1\r\nHost: x\r\n\r\n";
    conn.write_all(format!("{request}{request}").as_bytes()).unwrap();
    conn.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    let mut seen = String::new();
    let mut buf = [0; 4096];
    while seen.matches("\"boolean\":true").count() < 2 {
        let n = conn.read(&mut buf).unwrap();
        assert!(n > 0, "connection closed early: {seen}");
        seen.push_str(std::str::from_utf8(&buf[..n]).unwrap());
    }
    h.shutdown();
}

#[test]
fn remote_results_equal_in_process_results() {
    let h = start(Latency::ZERO);
    let remote = Endpoint::remote("r", h.url("/sparql"), RemoteOptions::default());
    let local = Endpoint::in_process("l", store());
    for text in [
        "SELECT * WHERE { ?x <http://e/p> ?y . ?y <http://e/p> ?z }",
        "SELECT ?x ?n WHERE { ?x ?p ?o OPTIONAL { ?x <http://e/name> ?n } } ORDER BY ?x",
        "SELECT (COUNT(?x) AS ?c) WHERE { ?x ?p ?o }",
    ] {
        let expected = evaluate(&parse_query(text).unwrap(), &store()).into_solutions().unwrap();
        assert_eq!(remote.select_text(text).unwrap(), expected, "{text}");
        assert_eq!(local.select_text(text).unwrap(), expected, "{text}");
    }
    let p = TriplePattern::new(TermPattern::var("s"), TermPattern::var("p"), TermPattern::var("s"));
    assert!(!remote.ask(&p).unwrap());
    assert_eq!(remote.stats().requests(), 4);
    h.shutdown();
}

#[test]
fn injected_latency_delays_each_response() {
    let h = start(Latency::from_millis(40, 0));
    let remote = Endpoint::remote("r", h.url("/sparql"), RemoteOptions::default());
    let started = Instant::now();
    for _ in 0..3 {
        remote.select_text("SELECT * WHERE { ?s ?p ?o }").unwrap();
    }
    assert!(started.elapsed() >= Duration::from_millis(120));
    let local = Endpoint::in_process("l", store()).with_latency(Duration::from_millis(30), Duration::from_millis(10));
    let started = Instant::now();
    local.select_text("SELECT * WHERE { ?s ?p ?o }").unwrap();
    let took = started.elapsed();
    assert!(took >= Duration::from_millis(30), "{took:?}");
    h.shutdown();
}

#[test]
fn concurrent_clients() {
    let h = start(Latency::from_millis(20, 0));
    let url = h.url("/sparql");
    let started = Instant::now();
    let threads: Vec<_> = (0..8)
        .map(|_| {
            let remote = Endpoint::remote("r", url.clone(), RemoteOptions::default());
            std::thread::spawn(move || remote.select_text("SELECT * WHERE { ?s <http://e/p> ?o }").unwrap().len())
        })
        .collect();
    for t in threads {
        assert_eq!(t.join().unwrap(), 2);
    }
    // 8 requests at 20 ms each would take 160 ms one at a time.
    assert!(started.elapsed() < Duration::from_millis(150), "{:?}", started.elapsed());
    h.shutdown();
}

#[test]
fn unreachable_member_is_reported() {
    let h = start(Latency::ZERO);
    let url = h.url("/sparql");
    h.shutdown();
    let remote = Endpoint::remote("gone", url, RemoteOptions { timeout: Duration::from_secs(2), ..Default::default() });
    let err = remote.select_text("SELECT * WHERE { ?s ?p ?o }").unwrap_err();
    assert!(err.is_unreachable(), "{err}");
    assert_eq!(err.endpoint_id(), "gone");
}
