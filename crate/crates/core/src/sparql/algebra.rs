//! Solution-sequence operators shared by the single-store evaluator and the
//! federation mediator.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::{Expression, Query};
use super::expr::filter_passes;
use super::order::compare_terms;
use super::SolutionSeq;
use crate::rdf::{BindingRow, Term, Variable};

/// Variables bound in every row.
fn certain_variables(rows: &[BindingRow]) -> BTreeSet<Variable> {
    let mut iter = rows.iter();
    let Some(first) = iter.next() else { return BTreeSet::new() };
    let mut vars: BTreeSet<Variable> = first.variables().cloned().collect();
    for r in iter {
        vars.retain(|v| r.contains(v));
        if vars.is_empty() {
            break;
        }
    }
    vars
}

fn key(row: &BindingRow, vars: &[Variable]) -> Vec<Term> {
    vars.iter().map(|v| row.get(v).cloned().expect("certain variable")).collect()
}

/// Inner join on compatible rows. Output order follows `left`.
pub fn join(left: &[BindingRow], right: &[BindingRow]) -> Vec<BindingRow> {
    if left.is_empty() || right.is_empty() {
        return Vec::new();
    }
    let shared: Vec<Variable> = certain_variables(left).intersection(&certain_variables(right)).cloned().collect();
    let mut out = Vec::new();
    if shared.is_empty() {
        for l in left {
            for r in right {
                if l.is_compatible(r) {
                    out.push(l.merge(r));
                }
            }
        }
        return out;
    }
    let mut table: HashMap<Vec<Term>, Vec<&BindingRow>> = HashMap::new();
    for r in right {
        table.entry(key(r, &shared)).or_default().push(r);
    }
    for l in left {
        if let Some(matches) = table.get(&key(l, &shared)) {
            for r in matches {
                if l.is_compatible(r) {
                    out.push(l.merge(r));
                }
            }
        }
    }
    out
}

/// Left outer join: every left row survives, extended by each compatible
/// right row when there is one.
pub fn left_join(left: &[BindingRow], right: &[BindingRow]) -> Vec<BindingRow> {
    let mut out = Vec::new();
    for l in left {
        let before = out.len();
        for r in right {
            if l.is_compatible(r) {
                out.push(l.merge(r));
            }
        }
        if out.len() == before {
            out.push(l.clone());
        }
    }
    out
}

pub fn filter(rows: Vec<BindingRow>, expr: &Expression) -> Vec<BindingRow> {
    rows.into_iter().filter(|r| filter_passes(expr, r)).collect()
}

/// GROUP BY/COUNT, ORDER BY, projection, DISTINCT, OFFSET, LIMIT, in that
/// order.
pub fn apply_modifiers(query: &Query, rows: Vec<BindingRow>) -> SolutionSeq {
    let m = &query.modifiers;
    let mut rows = if query.is_aggregate() { aggregate(query, rows) } else { rows };
    if !m.order_by.is_empty() {
        rows.sort_by(|a, b| {
            for k in &m.order_by {
                let o = compare_terms(a.get(&k.variable), b.get(&k.variable));
                let o = if k.descending { o.reverse() } else { o };
                if o.is_ne() {
                    return o;
                }
            }
            std::cmp::Ordering::Equal
        });
    }
    let vars = query.result_variables();
    let mut rows: Vec<BindingRow> = rows.iter().map(|r| r.project(&vars)).collect();
    if m.distinct {
        let mut seen = HashSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    let offset = m.offset.unwrap_or(0);
    let rows: Vec<BindingRow> = rows.into_iter().skip(offset).take(m.limit.unwrap_or(usize::MAX)).collect();
    SolutionSeq { variables: vars, rows }
}

fn aggregate(query: &Query, rows: Vec<BindingRow>) -> Vec<BindingRow> {
    let group_vars = &query.modifiers.group_by;
    let mut order: Vec<Vec<Option<Term>>> = Vec::new();
    let mut groups: HashMap<Vec<Option<Term>>, Vec<BindingRow>> = HashMap::new();
    if group_vars.is_empty() {
        order.push(Vec::new());
        groups.insert(Vec::new(), Vec::new());
    }
    for r in rows {
        let k: Vec<Option<Term>> = group_vars.iter().map(|v| r.get(v).cloned()).collect();
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(r);
    }
    let counts = query.count_specs();
    order
        .into_iter()
        .map(|k| {
            let members = &groups[&k];
            let mut out = BindingRow::new();
            for (v, t) in group_vars.iter().zip(k) {
                if let Some(t) = t {
                    out.insert(v.clone(), t);
                }
            }
            for spec in &counts {
                let n = match (&spec.argument, spec.distinct) {
                    (None, false) => members.len(),
                    (None, true) => members.iter().collect::<HashSet<_>>().len(),
                    (Some(v), false) => members.iter().filter(|r| r.contains(v)).count(),
                    (Some(v), true) => members.iter().filter_map(|r| r.get(v)).collect::<HashSet<_>>().len(),
                };
                out.insert(spec.alias.clone(), Term::integer(n as i64));
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(pairs: &[(&str, &str)]) -> BindingRow {
        pairs.iter().map(|(v, t)| (Variable::new(v), Term::iri(format!("http://x/{t}")).unwrap())).collect()
    }

    #[test]
    fn join_matches_nested_loop() {
        let left = vec![r(&[("a", "1"), ("b", "2")]), r(&[("a", "3")])];
        let right = vec![r(&[("a", "1"), ("c", "9")]), r(&[("a", "3"), ("c", "8")]), r(&[("a", "4")])];
        let got = join(&left, &right);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0], r(&[("a", "1"), ("b", "2"), ("c", "9")]));
    }

    #[test]
    fn join_with_partially_bound_rows() {
        // ?b is not bound everywhere on the right, so it cannot be a hash key
        let left = vec![r(&[("a", "1"), ("b", "2")])];
        let right = vec![r(&[("a", "1")]), r(&[("a", "1"), ("b", "3")]), r(&[("a", "1"), ("b", "2")])];
        assert_eq!(join(&left, &right).len(), 2);
    }

    #[test]
    fn left_join_keeps_unmatched() {
        let left = vec![r(&[("a", "1")]), r(&[("a", "2")])];
        let right = vec![r(&[("a", "1"), ("z", "9")])];
        let got = left_join(&left, &right);
        assert_eq!(got, vec![r(&[("a", "1"), ("z", "9")]), r(&[("a", "2")])]);
    }
}
