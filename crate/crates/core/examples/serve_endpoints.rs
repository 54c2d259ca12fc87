//! Serve two stores over HTTP and query them with remote endpoint clients.

use std::time::Instant;

use fedmesh::endpoint::{Endpoint, Latency, RemoteOptions};
use fedmesh::rdf::{parse_ntriples_str, Store};
use fedmesh::service::Service;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let people = Store::from_triples(parse_ntriples_str(
        "<http://example.org/ann> <http://example.org/worksAt> <http://example.org/acme> .\n",
    )?);
    let orgs =
        Store::from_triples(parse_ntriples_str("<http://example.org/acme> <http://example.org/city> \"Berlin\" .\n")?);

    let mut service = Service::new();
    service.bind("/people/sparql", people, Latency::ZERO, 8);
    service.bind("/orgs/sparql", orgs, Latency::from_millis(25, 5), 8);
    let handle = service.start("127.0.0.1:0")?;

    for path in ["/people/sparql", "/orgs/sparql"] {
        let endpoint = Endpoint::remote(path, handle.url(path), RemoteOptions::default());
        let started = Instant::now();
        let rows = endpoint.select_text("SELECT * WHERE { ?s ?p ?o }")?;
        println!("{path}: {} rows in {:?}", rows.len(), started.elapsed());
    }
    handle.shutdown();
    Ok(())
}
