//! Evaluate SPARQL over a single in-memory store and print JSON results.

use fedmesh::rdf::{parse_ntriples_str, Store};
use fedmesh::sparql::{evaluate, parse_query, serialize_results};

const DATA: &str = r#"
<http://example.org/d1> <http://example.org/name> "aspirin" .
<http://example.org/d1> <http://example.org/mass> "180.16"^^<http://www.w3.org/2001/XMLSchema#decimal> .
<http://example.org/d2> <http://example.org/name> "caffeine" .
<http://example.org/d2> <http://example.org/mass> "194.19"^^<http://www.w3.org/2001/XMLSchema#decimal> .
<http://example.org/d3> <http://example.org/name> "water" .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = Store::from_triples(parse_ntriples_str(DATA)?);
    let query = parse_query(
        "PREFIX e: <http://example.org/>
         SELECT ?name ?mass WHERE {
           ?d e:name ?name
           OPTIONAL { ?d e:mass ?mass }
           FILTER(!BOUND(?mass) || ?mass > 185)
         } ORDER BY ?name",
    )?;
    let results = evaluate(&query, &store);
    println!("{}", String::from_utf8(serialize_results(&results))?);
    Ok(())
}
