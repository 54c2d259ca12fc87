//! Single-store query evaluation.

use std::collections::BTreeSet;

use super::algebra;
use super::ast::{GraphPattern, Query, QueryForm};
use super::{QueryResults, SolutionSeq};
use crate::rdf::{BindingRow, Store, TriplePattern, Variable};

pub fn evaluate(query: &Query, store: &Store) -> QueryResults {
    let rows = evaluate_pattern(&query.pattern, store);
    match query.form {
        QueryForm::Ask => QueryResults::Boolean(!rows.is_empty()),
        QueryForm::Select => QueryResults::Solutions(algebra::apply_modifiers(query, rows)),
    }
}

/// Convenience wrapper returning solutions for SELECT and an empty sequence
/// for ASK.
pub fn evaluate_select(query: &Query, store: &Store) -> SolutionSeq {
    match evaluate(query, store) {
        QueryResults::Solutions(s) => s,
        QueryResults::Boolean(_) => SolutionSeq::default(),
    }
}

pub fn evaluate_pattern(pattern: &GraphPattern, store: &Store) -> Vec<BindingRow> {
    match pattern {
        GraphPattern::Bgp(ps) => evaluate_bgp(ps, store),
        GraphPattern::Join(l, r) => algebra::join(&evaluate_pattern(l, store), &evaluate_pattern(r, store)),
        GraphPattern::Union(l, r) => {
            let mut rows = evaluate_pattern(l, store);
            rows.extend(evaluate_pattern(r, store));
            rows
        }
        GraphPattern::Optional(l, r) => algebra::left_join(&evaluate_pattern(l, store), &evaluate_pattern(r, store)),
        GraphPattern::Filter(inner, e) => algebra::filter(evaluate_pattern(inner, store), e),
    }
}

/// Index nested-loop join, seeded by the pattern with the fewest matches and
/// then extended preferring patterns connected to already-bound variables.
pub fn evaluate_bgp(patterns: &[TriplePattern], store: &Store) -> Vec<BindingRow> {
    let order = join_order(patterns, store);
    let mut rows = vec![BindingRow::new()];
    for idx in order {
        let pattern = &patterns[idx];
        let mut next = Vec::new();
        for row in &rows {
            let bound = row.instantiate(pattern);
            for extension in store.match_pattern(&bound) {
                next.push(row.merge(&extension));
            }
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    rows
}

fn join_order(patterns: &[TriplePattern], store: &Store) -> Vec<usize> {
    let counts: Vec<usize> = patterns.iter().map(|p| store.count(p)).collect();
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut bound: BTreeSet<Variable> = BTreeSet::new();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| {
                let connected = order.is_empty() || !patterns[i].variables().is_disjoint(&bound);
                (!connected, counts[i], i)
            })
            .map(|(pos, _)| pos)
            .expect("non-empty");
        let i = remaining.remove(best);
        bound.extend(patterns[i].variables());
        order.push(i);
    }
    order
}

/// Set union of the member stores.
pub fn merge_stores<'a>(stores: impl IntoIterator<Item = &'a Store>) -> Store {
    let mut merged = Store::new();
    for s in stores {
        merged.extend(s.iter());
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Term, Triple};
    use crate::sparql::parse_query;

    fn iri(s: &str) -> Term {
        Term::iri(format!("http://x/{s}")).unwrap()
    }

    fn store() -> Store {
        [("a", "p", "o"), ("b", "p", "o"), ("a", "q", "o")]
            .into_iter()
            .map(|(s, p, o)| Triple::new(iri(s), iri(p), iri(o)).unwrap())
            .collect()
    }

    #[test]
    fn ask_on_empty_store() {
        let q = parse_query("ASK { ?s ?p ?o }").unwrap();
        assert_eq!(evaluate(&q, &Store::new()), QueryResults::Boolean(false));
    }

    #[test]
    fn simple_lookup() {
        let q = parse_query("SELECT ?s WHERE { ?s <http://x/p> <http://x/o> }").unwrap();
        let mut got: Vec<_> =
            evaluate_select(&q, &store()).rows.into_iter().map(|r| r.get_name("s").unwrap().clone()).collect();
        got.sort();
        assert_eq!(got, vec![iri("a"), iri("b")]);
    }

    #[test]
    fn count_with_and_without_groups() {
        let q = parse_query("SELECT (COUNT(*) AS ?n) WHERE { ?s <http://x/zzz> ?o }").unwrap();
        let res = evaluate_select(&q, &store());
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].get_name("n"), Some(&Term::integer(0)));

        let q = parse_query("SELECT ?p (COUNT(?s) AS ?n) WHERE { ?s ?p ?o } GROUP BY ?p ORDER BY ?p").unwrap();
        let res = evaluate_select(&q, &store());
        assert_eq!(res.rows.len(), 2);
        assert_eq!(res.rows[0].get_name("n"), Some(&Term::integer(2)));
        assert_eq!(res.rows[1].get_name("n"), Some(&Term::integer(1)));

        let q = parse_query("SELECT ?p (COUNT(*) AS ?n) WHERE { ?s <http://x/zzz> ?p } GROUP BY ?p").unwrap();
        assert!(evaluate_select(&q, &store()).rows.is_empty());
    }

    #[test]
    fn optional_and_distinct() {
        let q =
            parse_query("SELECT DISTINCT ?s ?x WHERE { ?s <http://x/p> ?o OPTIONAL { ?s <http://x/q> ?x } }").unwrap();
        let res = evaluate_select(&q, &store());
        assert_eq!(res.rows.len(), 2);
        let with_x = res.rows.iter().filter(|r| r.get_name("x").is_some()).count();
        assert_eq!(with_x, 1);
    }

    #[test]
    fn merge_identity_and_disjoint() {
        let s = store();
        assert_eq!(merge_stores([&s]).len(), s.len());
        let other: Store = (0..20).map(|i| Triple::new(iri(&format!("n{i}")), iri("r"), iri("o")).unwrap()).collect();
        assert_eq!(merge_stores([&s, &other]).len(), 23);
    }
}
