//! SPARQL 1.1 Query Results JSON.

use serde_json::{json, Map, Value};

use super::{QueryResults, SolutionSeq};
use crate::rdf::{BindingRow, Term, Variable};

pub const RESULTS_JSON_MEDIA_TYPE: &str = "application/sparql-results+json";

#[derive(Debug, thiserror::Error)]
pub enum ResultsError {
    #[error("invalid results JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed results document: {0}")]
    Shape(String),
}

pub fn to_json(results: &QueryResults) -> Value {
    match results {
        QueryResults::Boolean(b) => json!({ "head": {}, "boolean": b }),
        QueryResults::Solutions(s) => solutions_to_json(s),
    }
}

fn solutions_to_json(s: &SolutionSeq) -> Value {
    let vars: Vec<Value> = s.variables.iter().map(|v| Value::from(v.name())).collect();
    let bindings: Vec<Value> = s
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for v in &s.variables {
                if let Some(t) = row.get(v) {
                    obj.insert(v.name().to_owned(), term_to_json(t));
                }
            }
            Value::Object(obj)
        })
        .collect();
    json!({ "head": { "vars": vars }, "results": { "bindings": bindings } })
}

pub fn term_to_json(t: &Term) -> Value {
    let mut obj = Map::new();
    match t {
        Term::Iri(v) => {
            obj.insert("type".into(), "uri".into());
            obj.insert("value".into(), Value::from(&**v));
        }
        Term::BlankNode(v) => {
            obj.insert("type".into(), "bnode".into());
            obj.insert("value".into(), Value::from(&**v));
        }
        Term::Literal(l) => {
            obj.insert("type".into(), "literal".into());
            obj.insert("value".into(), Value::from(l.lexical()));
            if let Some(d) = l.datatype() {
                obj.insert("datatype".into(), Value::from(d));
            }
            if let Some(lang) = l.language() {
                obj.insert("xml:lang".into(), Value::from(lang));
            }
        }
    }
    Value::Object(obj)
}

pub fn serialize_results(results: &QueryResults) -> Vec<u8> {
    serde_json::to_vec(&to_json(results)).expect("JSON values always serialize")
}

pub fn parse_results(bytes: &[u8]) -> Result<QueryResults, ResultsError> {
    let doc: Value = serde_json::from_slice(bytes)?;
    let shape = |m: &str| ResultsError::Shape(m.to_owned());
    if let Some(b) = doc.get("boolean") {
        return b.as_bool().map(QueryResults::Boolean).ok_or_else(|| shape("boolean must be a bool"));
    }
    let vars = doc
        .pointer("/head/vars")
        .and_then(Value::as_array)
        .ok_or_else(|| shape("missing head.vars"))?
        .iter()
        .map(|v| v.as_str().map(Variable::new).ok_or_else(|| shape("variable names must be strings")))
        .collect::<Result<Vec<_>, _>>()?;
    let bindings =
        doc.pointer("/results/bindings").and_then(Value::as_array).ok_or_else(|| shape("missing results.bindings"))?;
    let mut rows = Vec::with_capacity(bindings.len());
    for b in bindings {
        let obj = b.as_object().ok_or_else(|| shape("binding must be an object"))?;
        let mut row = BindingRow::new();
        for (name, value) in obj {
            row.insert(Variable::new(name), term_from_json(value)?);
        }
        rows.push(row);
    }
    Ok(QueryResults::Solutions(SolutionSeq { variables: vars, rows }))
}

fn term_from_json(v: &Value) -> Result<Term, ResultsError> {
    let shape = |m: String| ResultsError::Shape(m);
    let kind = v.get("type").and_then(Value::as_str).ok_or_else(|| shape("term without type".into()))?;
    let value = v.get("value").and_then(Value::as_str).ok_or_else(|| shape("term without value".into()))?;
    match kind {
        "uri" => Term::iri(value).map_err(|e| shape(e.to_string())),
        "bnode" => Term::blank(value).map_err(|e| shape(e.to_string())),
        "literal" | "typed-literal" => {
            if let Some(lang) = v.get("xml:lang").and_then(Value::as_str) {
                Ok(Term::lang_literal(value, lang))
            } else if let Some(dt) = v.get("datatype").and_then(Value::as_str) {
                Ok(Term::typed_literal(value, dt))
            } else {
                Ok(Term::literal(value))
            }
        }
        other => Err(shape(format!("unknown term type {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::XSD_INTEGER;

    #[test]
    fn empty_solutions() {
        let s = SolutionSeq { variables: vec![Variable::new("s")], rows: vec![] };
        let v = to_json(&QueryResults::Solutions(s));
        assert_eq!(v, json!({"head": {"vars": ["s"]}, "results": {"bindings": []}}));
    }

    #[test]
    fn one_uri_binding() {
        let row: BindingRow = [(Variable::new("s"), Term::iri("http://x/a").unwrap())].into_iter().collect();
        let s = SolutionSeq { variables: vec![Variable::new("s")], rows: vec![row] };
        let v = to_json(&QueryResults::Solutions(s));
        assert_eq!(v["results"]["bindings"][0], json!({"s": {"type": "uri", "value": "http://x/a"}}));
    }

    #[test]
    fn ask_and_literals_round_trip() {
        let b = QueryResults::Boolean(true);
        assert_eq!(parse_results(&serialize_results(&b)).unwrap(), b);
        let row: BindingRow = [
            (Variable::new("a"), Term::typed_literal("4", XSD_INTEGER)),
            (Variable::new("b"), Term::lang_literal("hi", "en")),
            (Variable::new("c"), Term::blank("n1").unwrap()),
        ]
        .into_iter()
        .collect();
        let s = QueryResults::Solutions(SolutionSeq {
            variables: vec![Variable::new("a"), Variable::new("b"), Variable::new("c"), Variable::new("d")],
            rows: vec![row, BindingRow::new()],
        });
        assert_eq!(parse_results(&serialize_results(&s)).unwrap(), s);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_results(b"{").is_err());
        assert!(parse_results(br#"{"head":{}}"#).is_err());
        assert!(parse_results(
            br#"{"head":{"vars":["x"]},"results":{"bindings":[{"x":{"type":"weird","value":"1"}}]}}"#
        )
        .is_err());
    }
}
