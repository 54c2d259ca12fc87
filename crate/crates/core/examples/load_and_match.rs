//! Parse N-Triples into a store and look up triple patterns.

use fedmesh::rdf::{parse_ntriples_str, Store, Term, TermPattern, TriplePattern};

const DATA: &str = r#"
<http://example.org/alice> <http://xmlns.com/foaf/0.1/knows> <http://example.org/bob> .
<http://example.org/alice> <http://xmlns.com/foaf/0.1/name> "Alice"@en .
<http://example.org/bob> <http://xmlns.com/foaf/0.1/knows> <http://example.org/carol> .
<http://example.org/bob> <http://xmlns.com/foaf/0.1/age> "42"^^<http://www.w3.org/2001/XMLSchema#integer> .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = Store::from_triples(parse_ntriples_str(DATA)?);
    println!("{} triples", store.len());

    let knows = Term::iri("http://xmlns.com/foaf/0.1/knows")?;
    let pattern = TriplePattern::new(TermPattern::var("who"), TermPattern::Term(knows), TermPattern::var("whom"));
    for row in store.match_pattern(&pattern) {
        println!("{} knows {}", row.get_name("who").unwrap(), row.get_name("whom").unwrap());
    }

    let self_loop = TriplePattern::new(TermPattern::var("x"), TermPattern::var("p"), TermPattern::var("x"));
    println!("any self loops: {}", store.ask(&self_loop));
    Ok(())
}
