//! Delay three members by 50 ms and compare query times against the
//! undelayed federation, sequentially and with 16 requests in flight.

use std::collections::BTreeMap;
use std::time::Instant;

use fedmesh::bench::builtin_query;
use fedmesh::bench::fixtures::{generate_members, FixtureSpec, DELAYED_MEMBERS};
use fedmesh::endpoint::{Federation, Latency};
use fedmesh::mediator::{mediate, MediatorOptions, SelectionCache};

fn millis(federation: &Federation, text: &str, parallelism: usize) -> Result<(f64, u64), Box<dyn std::error::Error>> {
    let cache = SelectionCache::new();
    let options = MediatorOptions { parallelism, ..Default::default() };
    mediate(text, federation, &cache, &options)?;
    let started = Instant::now();
    let m = mediate(text, federation, &cache, &options)?;
    Ok((started.elapsed().as_secs_f64() * 1000.0, m.trace.requests_to(DELAYED_MEMBERS)))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let local = Federation::from_stores(generate_members(&FixtureSpec::new(1, 29).scale(10)))?;
    let delays: BTreeMap<String, Latency> =
        DELAYED_MEMBERS.iter().map(|id| (id.to_string(), Latency::from_millis(50, 0))).collect();
    let hybrid = local.with_latency_overrides(&delays);

    for name in ["LLD1", "LS1", "LLD5", "LS3"] {
        let text = builtin_query(name).unwrap().text;
        for parallelism in [1, 16] {
            let (l, r) = millis(&local, &text, parallelism)?;
            let (h, _) = millis(&hybrid, &text, parallelism)?;
            println!("{name:<5} parallelism {parallelism:>2}: {r:>3} delayed requests, local {l:>8.1} ms, hybrid {h:>8.1} ms");
        }
    }
    Ok(())
}
