//! Federation members: in-process stores and remote SPARQL endpoints behind
//! one interface, with request accounting and injectable latency.

mod federation;
mod latency;
mod member;
mod stats;

pub use federation::{snapshot_counters, Federation, FederationConfig, FederationError, MemberConfig};
pub use latency::Latency;
pub use member::{
    endpoint_ask, endpoint_select, Endpoint, EndpointError, EndpointKind, RemoteOptions, DEFAULT_POOL_SIZE,
    DEFAULT_TIMEOUT, GET_URL_LIMIT,
};
pub use stats::RequestStats;
