use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::Ordering;
use std::time::Duration;

use serde::Serialize;

use super::plan::PlanNode;
use super::pool::{parallel_try_map, Tally};
use crate::endpoint::{EndpointError, Federation};
use crate::rdf::{BindingRow, TermPattern, TriplePattern};
use crate::sparql::{algebra, Expression, GraphPattern, Query};
use crate::Gate;

/// Requests one call sent to one member.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EndpointRequests {
    pub select_requests: u64,
    pub ask_requests: u64,
}

/// Request accounting and timing for one mediated query.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExecutionTrace {
    pub select_requests: u64,
    pub ask_requests: u64,
    /// ASK probes answered from the selection cache.
    pub ask_saved: u64,
    /// Members that received at least one request.
    pub per_endpoint: BTreeMap<String, EndpointRequests>,
    pub skipped_endpoints: Vec<String>,
    #[serde(rename = "elapsed_ms", serialize_with = "millis")]
    pub elapsed: Duration,
    pub result_count: usize,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

impl ExecutionTrace {
    pub fn requests(&self) -> u64 {
        self.select_requests + self.ask_requests
    }

    /// Select plus ASK requests sent to the given members.
    pub fn requests_to<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> u64 {
        ids.into_iter().filter_map(|id| self.per_endpoint.get(id)).map(|r| r.select_requests + r.ask_requests).sum()
    }

    pub(crate) fn from_tally(tally: &Tally, federation: &Federation) -> Self {
        let mut trace = ExecutionTrace::default();
        for (i, member) in federation.members().iter().enumerate() {
            let select_requests = tally.select[i].load(Ordering::Relaxed);
            let ask_requests = tally.ask[i].load(Ordering::Relaxed);
            trace.select_requests += select_requests;
            trace.ask_requests += ask_requests;
            if select_requests + ask_requests > 0 {
                trace.per_endpoint.insert(member.id().to_owned(), EndpointRequests { select_requests, ask_requests });
            }
        }
        trace
    }
}

pub(crate) struct Context<'a> {
    pub federation: &'a Federation,
    pub tally: &'a Tally,
    /// Bounds in-flight select requests across the whole call.
    pub gate: Gate,
    pub parallelism: usize,
}

impl Context<'_> {
    fn member(&self, id: &str) -> usize {
        self.federation.index_of(id).unwrap_or_else(|| panic!("plan refers to unknown member {id:?}"))
    }

    fn fetch(&self, member: usize, query: &Query) -> Result<Vec<BindingRow>, EndpointError> {
        let _permit = self.gate.acquire();
        self.tally.select(member);
        Ok(self.federation.members()[member].select(query)?.rows)
    }

    pub fn eval(&self, node: &PlanNode) -> Result<Vec<BindingRow>, EndpointError> {
        match node {
            PlanNode::Empty { .. } => Ok(Vec::new()),
            PlanNode::ExclusiveGroup { patterns, endpoint, filters } => {
                let bgp = GraphPattern::Bgp(patterns.clone());
                let pattern = match Expression::and_all(filters.clone()) {
                    Some(e) => GraphPattern::Filter(Box::new(bgp), e),
                    None => bgp,
                };
                self.fetch(self.member(endpoint), &Query::select_all(pattern))
            }
            PlanNode::ExclusiveSubquery { pattern, endpoint } => {
                self.fetch(self.member(endpoint), &Query::select_all(pattern.clone()))
            }
            PlanNode::Pattern { pattern, endpoints } => {
                let query = Query::select_all(GraphPattern::Bgp(vec![pattern.clone()]));
                let members: Vec<usize> = endpoints.iter().map(|id| self.member(id)).collect();
                let parts = parallel_try_map(&members, self.parallelism, |&m| self.fetch(m, &query))?;
                Ok(union_distinct(parts))
            }
            PlanNode::Join(children) => self.eval_join(children),
            PlanNode::Union(l, r) => {
                let (left, right) = std::thread::scope(|s| {
                    let right = s.spawn(|| self.eval(r));
                    let left = self.eval(l);
                    (left, right.join().expect("union branch panicked"))
                });
                let mut rows = left?;
                rows.extend(right?);
                Ok(rows)
            }
            PlanNode::LeftJoin(l, r) => {
                let left = self.eval(l)?;
                if left.is_empty() {
                    return Ok(left);
                }
                Ok(algebra::left_join(&left, &self.eval(r)?))
            }
            PlanNode::Filter(inner, e) => Ok(algebra::filter(self.eval(inner)?, e)),
        }
    }

    fn eval_join(&self, children: &[PlanNode]) -> Result<Vec<BindingRow>, EndpointError> {
        let mut rows: Option<Vec<BindingRow>> = None;
        for child in children {
            let next = match rows {
                None => self.eval(child)?,
                Some(rows) if rows.is_empty() => return Ok(rows),
                Some(rows) => match child {
                    PlanNode::Pattern { pattern, endpoints } => self.bound_join(&rows, pattern, endpoints)?,
                    other => algebra::join(&rows, &self.eval(other)?),
                },
            };
            rows = Some(next);
        }
        Ok(rows.unwrap_or_else(|| vec![BindingRow::new()]))
    }

    /// One request per (input row, relevant endpoint), each with the pattern
    /// instantiated by the row. Work is row-major, so each row's answers from
    /// its endpoints are adjacent.
    fn bound_join(
        &self,
        rows: &[BindingRow],
        pattern: &TriplePattern,
        endpoints: &[String],
    ) -> Result<Vec<BindingRow>, EndpointError> {
        let members: Vec<usize> = endpoints.iter().map(|id| self.member(id)).collect();
        let work: Vec<(usize, usize)> = (0..rows.len()).flat_map(|r| members.iter().map(move |&m| (r, m))).collect();
        let parts = parallel_try_map(&work, self.parallelism, |&(r, m)| {
            let row = &rows[r];
            let query = Query::select_all(GraphPattern::Bgp(vec![instantiate(row, pattern)]));
            let found = self.fetch(m, &query)?;
            Ok::<_, EndpointError>(
                found.into_iter().filter(|f| row.is_compatible(f)).map(|f| row.merge(&f)).collect::<Vec<_>>(),
            )
        })?;
        Ok(parts.chunks(members.len().max(1)).flat_map(|per_row| union_distinct(per_row.to_vec())).collect())
    }
}

/// Union of one pattern's matches from several members. A triple stored at
/// more than one member yields its solution once, as it would over the
/// merged graph.
fn union_distinct(parts: Vec<Vec<BindingRow>>) -> Vec<BindingRow> {
    if parts.len() <= 1 {
        return parts.into_iter().flatten().collect();
    }
    let mut seen = HashSet::new();
    parts.into_iter().flatten().filter(|r| seen.insert(r.clone())).collect()
}

/// Substitutes bound variables, except those bound to blank nodes: a blank
/// node in a query would act as a fresh variable, so those stay free and are
/// matched by the compatibility check instead.
fn instantiate(row: &BindingRow, pattern: &TriplePattern) -> TriplePattern {
    let sub = |p: &TermPattern| match p {
        TermPattern::Variable(v) => match row.get(v) {
            Some(t) if !t.is_blank() => TermPattern::Term(t.clone()),
            _ => p.clone(),
        },
        term => term.clone(),
    };
    TriplePattern::new(sub(&pattern.subject), sub(&pattern.predicate), sub(&pattern.object))
}
