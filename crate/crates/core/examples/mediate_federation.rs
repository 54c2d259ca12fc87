//! Answer one query over a generated 29-member federation and show the plan
//! and request counts.

use fedmesh::bench::builtin_query;
use fedmesh::bench::fixtures::{generate_members, FixtureSpec};
use fedmesh::endpoint::Federation;
use fedmesh::mediator::{mediate, MediatorOptions, SelectionCache};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "LS3".into());
    let query = builtin_query(&name).ok_or_else(|| format!("no corpus query named {name}"))?;
    let federation = Federation::from_stores(generate_members(&FixtureSpec::new(1, 29).scale(50)))?;

    let m = mediate(&query.text, &federation, &SelectionCache::new(), &MediatorOptions::default())?;
    print!("{}", m.plan);
    println!(
        "{}: {} results, {} select and {} ASK requests",
        name, m.trace.result_count, m.trace.select_requests, m.trace.ask_requests
    );
    for (id, r) in &m.trace.per_endpoint {
        println!("  {id:<18} select {:>4}  ask {:>3}", r.select_requests, r.ask_requests);
    }
    Ok(())
}
