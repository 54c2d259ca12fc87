//! Write a small federation with configs, corpus, and manifest to a directory.

use fedmesh::bench::fixtures::{write_fixtures, FixtureSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/fixtures".into());
    let manifest = write_fixtures(&FixtureSpec::new(1, 29).scale(100), out.as_ref())?;
    for (member, triples) in &manifest.triples {
        println!("{member:<18} {triples:>6} triples");
    }
    for (query, rows) in &manifest.cardinalities {
        println!("{query:<6} {rows:>6} rows");
    }
    println!("serve with: fedmesh serve --config {out}/service.toml");
    Ok(())
}
