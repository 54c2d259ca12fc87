//! Federated query mediation: source selection with ASK probes and a cache,
//! exclusive groups, greedy join reordering, and parallel execution with
//! bound joins.

mod cache;
mod exec;
mod plan;
mod pool;
mod select;

use std::sync::Arc;
use std::time::Instant;

pub use cache::{NormalizedPattern, Relevance, SelectionCache, Slot};
pub use exec::{EndpointRequests, ExecutionTrace};
pub use plan::{form_exclusive_groups, node_score, reorder_joins, PlanNode, QueryPlan};
pub use select::{select_sources, Provenance, SourceEntry, SourceSelection, UnreachablePolicy};

use crate::endpoint::{EndpointError, Federation};
use crate::sparql::{algebra, parse_query, Query, QueryError, QueryForm, QueryResults};
use crate::Gate;
use exec::Context;
use pool::Tally;

pub const DEFAULT_PARALLELISM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MediatorOptions {
    /// Answer known (pattern, member) relevance from the selection cache.
    pub caching: bool,
    pub exclusive_groups: bool,
    /// Upper bound on in-flight select requests.
    pub parallelism: usize,
    pub unreachable: UnreachablePolicy,
}

impl Default for MediatorOptions {
    fn default() -> Self {
        MediatorOptions {
            caching: true,
            exclusive_groups: true,
            parallelism: DEFAULT_PARALLELISM,
            unreachable: UnreachablePolicy::Fail,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MediatorError {
    #[error(transparent)]
    Query(#[from] QueryError),
    /// A member failed; `trace` covers the requests sent before the failure.
    #[error("{source}")]
    Endpoint {
        #[source]
        source: EndpointError,
        trace: Box<ExecutionTrace>,
    },
}

impl MediatorError {
    pub fn trace(&self) -> Option<&ExecutionTrace> {
        match self {
            MediatorError::Endpoint { trace, .. } => Some(trace),
            MediatorError::Query(_) => None,
        }
    }
}

/// Output of [`optimize`]: the plan and the source-selection part of the
/// trace.
#[derive(Debug, Clone)]
pub struct Optimized {
    pub plan: QueryPlan,
    pub selection: SourceSelection,
}

/// Outcome of one mediated query.
#[derive(Debug, Clone)]
pub struct Mediation {
    pub results: QueryResults,
    pub trace: ExecutionTrace,
    pub plan: QueryPlan,
}

fn failure(source: EndpointError, tally: &Tally, federation: &Federation, started: Instant) -> MediatorError {
    let mut trace = ExecutionTrace::from_tally(tally, federation);
    trace.elapsed = started.elapsed();
    MediatorError::Endpoint { source, trace: Box::new(trace) }
}

fn optimize_inner(
    query: &Query,
    federation: &Federation,
    cache: &SelectionCache,
    options: &MediatorOptions,
    tally: &Tally,
) -> Result<Optimized, EndpointError> {
    let patterns: Vec<_> = query.triple_patterns().into_iter().cloned().collect();
    let selection =
        select::select_sources_inner(&patterns, federation, cache, options.caching, options.unreachable, tally)?;
    let root = plan::plan_pattern(&query.pattern, &selection.entries, options.exclusive_groups);
    Ok(Optimized { plan: QueryPlan { query: query.clone(), root }, selection })
}

/// Source selection, exclusive grouping, and join reordering for every basic
/// graph pattern of `query`.
pub fn optimize(
    query: &Query,
    federation: &Federation,
    cache: &SelectionCache,
    options: &MediatorOptions,
) -> Result<Optimized, MediatorError> {
    let started = Instant::now();
    let tally = Tally::new(federation.len());
    optimize_inner(query, federation, cache, options, &tally).map_err(|e| failure(e, &tally, federation, started))
}

fn execute_inner(
    plan: &QueryPlan,
    federation: &Federation,
    options: &MediatorOptions,
    tally: &Tally,
) -> Result<QueryResults, EndpointError> {
    let parallelism = options.parallelism.max(1);
    let ctx = Context { federation, tally, gate: Gate::new(parallelism), parallelism };
    let rows = ctx.eval(&plan.root)?;
    Ok(match plan.query.form {
        QueryForm::Ask => QueryResults::Boolean(!rows.is_empty()),
        QueryForm::Select => QueryResults::Solutions(algebra::apply_modifiers(&plan.query, rows)),
    })
}

/// Runs a plan against the federation.
pub fn execute(
    plan: &QueryPlan,
    federation: &Federation,
    options: &MediatorOptions,
) -> Result<(QueryResults, ExecutionTrace), MediatorError> {
    let started = Instant::now();
    let tally = Tally::new(federation.len());
    let results =
        execute_inner(plan, federation, options, &tally).map_err(|e| failure(e, &tally, federation, started))?;
    let mut trace = ExecutionTrace::from_tally(&tally, federation);
    trace.elapsed = started.elapsed();
    trace.result_count = results.cardinality();
    Ok((results, trace))
}

/// Parses, optimizes, and executes `text` over the federation.
pub fn mediate(
    text: &str,
    federation: &Federation,
    cache: &SelectionCache,
    options: &MediatorOptions,
) -> Result<Mediation, MediatorError> {
    let started = Instant::now();
    let query = parse_query(text)?;
    let tally = Tally::new(federation.len());
    let run = || -> Result<(Optimized, QueryResults), EndpointError> {
        let optimized = optimize_inner(&query, federation, cache, options, &tally)?;
        let results = execute_inner(&optimized.plan, federation, options, &tally)?;
        Ok((optimized, results))
    };
    let (optimized, results) = run().map_err(|e| failure(e, &tally, federation, started))?;
    let mut trace = ExecutionTrace::from_tally(&tally, federation);
    trace.ask_saved = optimized.selection.savings_count;
    trace.skipped_endpoints = optimized.selection.skipped.clone();
    trace.result_count = results.cardinality();
    trace.elapsed = started.elapsed();
    Ok(Mediation { results, trace, plan: optimized.plan })
}

/// A federation with its own selection cache and options.
#[derive(Debug)]
pub struct Mediator {
    federation: Arc<Federation>,
    cache: SelectionCache,
    options: MediatorOptions,
}

impl Mediator {
    pub fn new(federation: impl Into<Arc<Federation>>) -> Self {
        Mediator { federation: federation.into(), cache: SelectionCache::new(), options: MediatorOptions::default() }
    }

    pub fn with_options(mut self, options: MediatorOptions) -> Self {
        self.options = options;
        self
    }

    pub fn federation(&self) -> &Federation {
        &self.federation
    }

    pub fn cache(&self) -> &SelectionCache {
        &self.cache
    }

    pub fn options(&self) -> &MediatorOptions {
        &self.options
    }

    pub fn set_options(&mut self, options: MediatorOptions) {
        self.options = options;
    }

    pub fn flush_cache(&self) {
        self.cache.flush();
    }

    pub fn mediate(&self, text: &str) -> Result<Mediation, MediatorError> {
        mediate(text, &self.federation, &self.cache, &self.options)
    }
}
