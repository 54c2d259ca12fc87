//! Store lookups and BGP evaluation against brute-force references.

use std::collections::BTreeMap;

use proptest::prelude::*;

use fedmesh::rdf::{
    parse_ntriples_str, write_ntriples, BindingRow, Store, Term, TermPattern, Triple, TriplePattern, Variable,
};
use fedmesh::sparql::{evaluate, evaluate_bgp, parse_query, parse_results, serialize_results, QueryResults};

fn term(i: u8) -> Term {
    match i % 4 {
        0 | 1 => Term::iri(format!("http://t.example/r{}", i % 6)).unwrap(),
        2 => Term::literal(format!("v{}", i % 3)),
        _ => Term::integer((i % 5) as i64),
    }
}

fn iri(i: u8) -> Term {
    Term::iri(format!("http://t.example/r{}", i % 6)).unwrap()
}

fn triples() -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec((0u8..6, 0u8..3, 0u8..24), 0..40)
        .prop_map(|v| v.into_iter().map(|(s, p, o)| Triple::new(iri(s), iri(p), term(o)).unwrap()).collect())
}

fn position(var_names: &'static [&'static str], constant: Term) -> impl Strategy<Value = TermPattern> {
    prop_oneof![Just(TermPattern::Term(constant)), prop::sample::select(var_names).prop_map(TermPattern::var),]
}

fn pattern() -> impl Strategy<Value = TriplePattern> {
    const VARS: &[&str] = &["a", "b", "c"];
    (0u8..6, 0u8..3, 0u8..24).prop_flat_map(|(s, p, o)| {
        (position(VARS, iri(s)), position(VARS, iri(p)), position(VARS, term(o)))
            .prop_map(|(s, p, o)| TriplePattern::new(s, p, o))
    })
}

/// Extends `row` so that `pattern` maps onto `triple`, if possible.
fn unify(row: &BindingRow, pattern: &TriplePattern, triple: &Triple) -> Option<BindingRow> {
    let mut out = row.clone();
    for (pos, t) in pattern.positions().into_iter().zip([triple.subject(), triple.predicate(), triple.object()]) {
        match pos {
            TermPattern::Term(c) if c != t => return None,
            TermPattern::Term(_) => {}
            TermPattern::Variable(v) => match out.get(v) {
                Some(b) if b != t => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), t.clone());
                }
            },
        }
    }
    Some(out)
}

/// Nested loops over the full triple list.
fn naive_bgp(patterns: &[TriplePattern], all: &[Triple]) -> Vec<BindingRow> {
    let mut rows = vec![BindingRow::new()];
    for p in patterns {
        rows = rows.iter().flat_map(|r| all.iter().filter_map(move |t| unify(r, p, t))).collect();
    }
    rows.sort();
    rows
}

fn dedup(mut ts: Vec<Triple>) -> Vec<Triple> {
    ts.sort();
    ts.dedup();
    ts
}

proptest! {
    #[test]
    fn lookups_match_a_linear_scan(ts in triples(), p in pattern()) {
        let store = Store::from_triples(ts.clone());
        let all = dedup(ts);
        prop_assert_eq!(store.len(), all.len());
        let mut expected: Vec<BindingRow> = all.iter().filter_map(|t| unify(&BindingRow::new(), &p, t)).collect();
        expected.sort();
        let mut got = store.match_pattern(&p);
        got.sort();
        prop_assert_eq!(store.ask(&p), !expected.is_empty());
        prop_assert_eq!(store.count(&p), expected.len());
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn bgp_evaluation_matches_nested_loops(ts in triples(), ps in prop::collection::vec(pattern(), 1..4)) {
        let store = Store::from_triples(ts.clone());
        let mut got = evaluate_bgp(&ps, &store);
        got.sort();
        prop_assert_eq!(got, naive_bgp(&ps, &dedup(ts)));
    }

    #[test]
    fn ntriples_round_trip(ts in triples()) {
        let mut buf = Vec::new();
        write_ntriples(&mut buf, &ts).unwrap();
        let back = parse_ntriples_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back, ts);
    }

    #[test]
    fn results_json_round_trip(ts in triples(), p in pattern()) {
        let store = Store::from_triples(ts);
        let q = parse_query(&format!("SELECT * WHERE {{ {p} }}")).unwrap();
        let results = evaluate(&q, &store);
        let back = parse_results(&serialize_results(&results)).unwrap();
        prop_assert_eq!(back, results);
    }
}

fn store(nt: &str) -> Store {
    Store::from_triples(parse_ntriples_str(nt).unwrap())
}

fn rows(results: &QueryResults) -> Vec<BTreeMap<String, String>> {
    results
        .solutions()
        .unwrap()
        .rows
        .iter()
        .map(|r| r.iter().map(|(v, t)| (v.name().to_owned(), t.lexical().to_owned())).collect())
        .collect()
}

const DATA: &str = r#"
<http://e/a> <http://e/p> "3"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://e/b> <http://e/p> "10"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://e/c> <http://e/p> "7"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://e/a> <http://e/name> "alpha"@en .
<http://e/b> <http://e/name> "beta" .
<http://e/a> <http://e/kind> <http://e/K1> .
<http://e/b> <http://e/kind> <http://e/K1> .
<http://e/c> <http://e/kind> <http://e/K2> .
"#;

#[test]
fn optional_filter_and_order() {
    let s = store(DATA);
    let q = parse_query(
        "PREFIX e: <http://e/> SELECT ?x ?n WHERE { ?x e:p ?v . OPTIONAL { ?x e:name ?n } FILTER(?v > 5) } ORDER BY DESC(?v)",
    )
    .unwrap();
    let r = rows(&evaluate(&q, &s));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["x"], "http://e/b");
    assert_eq!(r[0]["n"], "beta");
    assert_eq!(r[1]["x"], "http://e/c");
    assert!(!r[1].contains_key("n"));
}

#[test]
fn union_distinct_limit_offset() {
    let s = store(DATA);
    let text = "PREFIX e: <http://e/> SELECT DISTINCT ?x WHERE { { ?x e:kind e:K1 } UNION { ?x e:p ?v } } ORDER BY ?x";
    let all = rows(&evaluate(&parse_query(text).unwrap(), &s));
    assert_eq!(all.iter().map(|r| r["x"].as_str()).collect::<Vec<_>>(), ["http://e/a", "http://e/b", "http://e/c"]);
    let page = rows(&evaluate(&parse_query(&format!("{text} LIMIT 1 OFFSET 1")).unwrap(), &s));
    assert_eq!(page, all[1..2]);
}

#[test]
fn group_by_count() {
    let s = store(DATA);
    let q =
        parse_query("PREFIX e: <http://e/> SELECT ?k (COUNT(?x) AS ?n) WHERE { ?x e:kind ?k } GROUP BY ?k ORDER BY ?k")
            .unwrap();
    let r = rows(&evaluate(&q, &s));
    assert_eq!((r[0]["k"].as_str(), r[0]["n"].as_str()), ("http://e/K1", "2"));
    assert_eq!((r[1]["k"].as_str(), r[1]["n"].as_str()), ("http://e/K2", "1"));
    let empty = parse_query("SELECT (COUNT(?x) AS ?n) WHERE { ?x <http://e/none> ?y }").unwrap();
    assert_eq!(rows(&evaluate(&empty, &s))[0]["n"], "0");
}

#[test]
fn filter_functions() {
    let s = store(DATA);
    let lang =
        parse_query(r#"SELECT ?x WHERE { ?x <http://e/name> ?n FILTER(LANG(?n) = "en" && regex(STR(?n), "^al")) }"#)
            .unwrap();
    assert_eq!(rows(&evaluate(&lang, &s)).len(), 1);
    let unbound = parse_query(
        "SELECT ?x WHERE { ?x <http://e/p> ?v OPTIONAL { ?x <http://e/name> ?n } FILTER(!BOUND(?n) && isIRI(?x)) }",
    )
    .unwrap();
    assert_eq!(rows(&evaluate(&unbound, &s))[0]["x"], "http://e/c");
}

#[test]
fn ask_queries() {
    let s = store(DATA);
    let yes = parse_query("ASK { <http://e/a> ?p ?o }").unwrap();
    let no = parse_query("ASK { <http://e/z> ?p ?o }").unwrap();
    assert_eq!(evaluate(&yes, &s).boolean(), Some(true));
    assert_eq!(evaluate(&no, &s).boolean(), Some(false));
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_query("SELECT * WHERE {\n  ?s ?p }").unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
    assert!(parse_query("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }").is_err());
    assert!(parse_query("SELECT ?x WHERE { ?x a ?y } GROUP BY ?y").is_err());
}

#[test]
fn variables_are_interned_by_name() {
    assert_eq!(Variable::new("x"), Variable::new("x"));
    assert_ne!(Variable::new("x"), Variable::new("y"));
}
