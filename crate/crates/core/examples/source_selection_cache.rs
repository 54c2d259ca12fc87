//! ASK probes on a cold cache versus a warm one.

use fedmesh::bench::builtin_corpus;
use fedmesh::bench::fixtures::{generate_members, FixtureSpec};
use fedmesh::endpoint::Federation;
use fedmesh::mediator::{mediate, MediatorOptions, SelectionCache};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let federation = Federation::from_stores(generate_members(&FixtureSpec::new(1, 29).scale(20)))?;
    let options = MediatorOptions::default();
    println!("{:<6} {:>9} {:>9} {:>7}", "query", "cold ASK", "warm ASK", "saved");
    for q in builtin_corpus() {
        let cache = SelectionCache::new();
        let cold = mediate(&q.text, &federation, &cache, &options)?.trace;
        let warm = mediate(&q.text, &federation, &cache, &options)?.trace;
        println!("{:<6} {:>9} {:>9} {:>7}", q.name, cold.ask_requests, warm.ask_requests, warm.ask_saved);
    }
    Ok(())
}
