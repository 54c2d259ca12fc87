use std::io::Read;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::stats::{Counters, RequestKind};
use super::{Latency, RequestStats};
use crate::rdf::{Store, TriplePattern};
use crate::sparql::results::RESULTS_JSON_MEDIA_TYPE;
use crate::sparql::{
    evaluate, parse_query, parse_results, GraphPattern, Query, QueryError, QueryForm, QueryResults, SolutionSeq,
};

/// Queries whose GET URL would exceed this many bytes are sent as POST.
pub const GET_URL_LIMIT: usize = 2048;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_POOL_SIZE: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum EndpointError {
    #[error("endpoint {id} unreachable: {reason}")]
    Unreachable { id: String, reason: String },
    #[error("endpoint {id} answered HTTP {status}: {body}")]
    Protocol { id: String, status: u16, body: String },
    #[error("endpoint {id} sent an unreadable response: {message}")]
    InvalidResponse { id: String, message: String },
    #[error("endpoint {id} rejected the query: {source}")]
    Query {
        id: String,
        #[source]
        source: QueryError,
    },
}

impl EndpointError {
    pub fn endpoint_id(&self) -> &str {
        match self {
            EndpointError::Unreachable { id, .. }
            | EndpointError::Protocol { id, .. }
            | EndpointError::InvalidResponse { id, .. }
            | EndpointError::Query { id, .. } => id,
        }
    }

    pub fn is_unreachable(&self) -> bool {
        matches!(self, EndpointError::Unreachable { .. })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RemoteOptions {
    pub timeout: Duration,
    /// Idle keep-alive connections kept for the endpoint host.
    pub pool_size: usize,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        RemoteOptions { timeout: DEFAULT_TIMEOUT, pool_size: DEFAULT_POOL_SIZE }
    }
}

#[derive(Clone)]
enum Target {
    InProcess(Arc<Store>),
    Remote { url: String, agent: ureq::Agent, timeout: Duration },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    InProcess,
    Remote,
}

/// One federation member: an in-process store or a remote SPARQL endpoint.
pub struct Endpoint {
    id: String,
    target: Target,
    latency: Latency,
    counters: Arc<Counters>,
}

impl std::fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let target = match &self.target {
            Target::InProcess(s) => format!("in-process ({} triples)", s.len()),
            Target::Remote { url, .. } => url.clone(),
        };
        f.debug_struct("Endpoint")
            .field("id", &self.id)
            .field("target", &target)
            .field("latency", &self.latency)
            .finish()
    }
}

impl Endpoint {
    pub fn in_process(id: impl Into<String>, store: impl Into<Arc<Store>>) -> Self {
        Endpoint::with_target(id.into(), Target::InProcess(store.into()))
    }

    pub fn remote(id: impl Into<String>, url: impl Into<String>, options: RemoteOptions) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(options.timeout)
            .max_idle_connections_per_host(options.pool_size.max(1))
            .build();
        let target = Target::Remote { url: url.into(), agent, timeout: options.timeout };
        Endpoint::with_target(id.into(), target)
    }

    fn with_target(id: String, target: Target) -> Self {
        Endpoint { id, target, latency: Latency::ZERO, counters: Arc::default() }
    }

    /// Delays every subsequent request by `fixed` plus a uniform sample from
    /// `[0, jitter]`.
    pub fn with_latency(mut self, fixed: Duration, jitter: Duration) -> Self {
        self.latency = Latency::new(fixed, jitter);
        self
    }

    /// Same target and latency, fresh counters.
    pub fn duplicate(&self) -> Endpoint {
        Endpoint { id: self.id.clone(), target: self.target.clone(), latency: self.latency, counters: Arc::default() }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> EndpointKind {
        match self.target {
            Target::InProcess(_) => EndpointKind::InProcess,
            Target::Remote { .. } => EndpointKind::Remote,
        }
    }

    pub fn url(&self) -> Option<&str> {
        match &self.target {
            Target::Remote { url, .. } => Some(url),
            Target::InProcess(_) => None,
        }
    }

    pub fn store(&self) -> Option<&Arc<Store>> {
        match &self.target {
            Target::InProcess(s) => Some(s),
            Target::Remote { .. } => None,
        }
    }

    pub fn latency(&self) -> Latency {
        self.latency
    }

    pub fn stats(&self) -> RequestStats {
        self.counters.snapshot()
    }

    pub fn reset_stats(&self) {
        self.counters.reset();
    }

    /// Runs a SELECT query and returns its solutions.
    pub fn select(&self, query: &Query) -> Result<SolutionSeq, EndpointError> {
        let results = self.request(RequestKind::Select, query, || query.to_string())?;
        match results {
            QueryResults::Solutions(s) => Ok(s),
            QueryResults::Boolean(_) => Err(self.invalid("expected solutions, got a boolean")),
        }
    }

    /// Parses `text` and runs it as a SELECT query.
    pub fn select_text(&self, text: &str) -> Result<SolutionSeq, EndpointError> {
        let query = parse_query(text).map_err(|source| EndpointError::Query { id: self.id.clone(), source })?;
        self.select(&query)
    }

    /// Asks whether any triple matches `pattern`.
    pub fn ask(&self, pattern: &TriplePattern) -> Result<bool, EndpointError> {
        let query = Query::ask(GraphPattern::bgp(vec![pattern.clone()]));
        match self.request(RequestKind::Ask, &query, || query.to_string())? {
            QueryResults::Boolean(b) => Ok(b),
            QueryResults::Solutions(_) => Err(self.invalid("expected a boolean, got solutions")),
        }
    }

    fn invalid(&self, message: &str) -> EndpointError {
        EndpointError::InvalidResponse { id: self.id.clone(), message: message.to_owned() }
    }

    fn request(
        &self,
        kind: RequestKind,
        query: &Query,
        text: impl FnOnce() -> String,
    ) -> Result<QueryResults, EndpointError> {
        let waited = self.latency.apply();
        let outcome = match &self.target {
            Target::InProcess(store) => Ok((in_process(store, query), 0)),
            Target::Remote { url, agent, timeout } => self.http(agent, url, *timeout, &text()),
        };
        let bytes = outcome.as_ref().map_or(0, |(_, b)| *b);
        self.counters.record(kind, bytes, waited);
        outcome.map(|(r, _)| r)
    }

    fn http(
        &self,
        agent: &ureq::Agent,
        url: &str,
        timeout: Duration,
        text: &str,
    ) -> Result<(QueryResults, u64), EndpointError> {
        let encoded: String = url::form_urlencoded::Serializer::new(String::new()).append_pair("query", text).finish();
        let sep = if url.contains('?') { '&' } else { '?' };
        let started = Instant::now();
        let response = if url.len() + 1 + encoded.len() <= GET_URL_LIMIT {
            agent.get(&format!("{url}{sep}{encoded}")).set("Accept", RESULTS_JSON_MEDIA_TYPE).timeout(timeout).call()
        } else {
            agent
                .post(url)
                .set("Accept", RESULTS_JSON_MEDIA_TYPE)
                .set("Content-Type", "application/x-www-form-urlencoded")
                .timeout(timeout)
                .send_string(&encoded)
        };
        let response = match response {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                return Err(EndpointError::Protocol { id: self.id.clone(), status, body: excerpt(&body) });
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(EndpointError::Unreachable { id: self.id.clone(), reason: t.to_string() });
            }
        };
        let mut body = Vec::new();
        if let Err(e) = response.into_reader().read_to_end(&mut body) {
            let reason = format!("reading response after {:?}: {e}", started.elapsed());
            return Err(EndpointError::Unreachable { id: self.id.clone(), reason });
        }
        let results = parse_results(&body).map_err(|e| self.invalid(&e.to_string()))?;
        Ok((results, body.len() as u64))
    }
}

fn in_process(store: &Store, query: &Query) -> QueryResults {
    if query.form == QueryForm::Ask {
        if let GraphPattern::Bgp(ps) = &query.pattern {
            if let [p] = ps.as_slice() {
                return QueryResults::Boolean(store.ask(p));
            }
        }
    }
    evaluate(query, store)
}

fn excerpt(body: &str) -> String {
    const MAX: usize = 200;
    match body.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_owned(),
    }
}

/// Selects over one endpoint; equivalent to [`Endpoint::select`].
pub fn endpoint_select(endpoint: &Endpoint, query: &Query) -> Result<SolutionSeq, EndpointError> {
    endpoint.select(query)
}

/// ASK probe for one pattern; equivalent to [`Endpoint::ask`].
pub fn endpoint_ask(endpoint: &Endpoint, pattern: &TriplePattern) -> Result<bool, EndpointError> {
    endpoint.ask(pattern)
}
