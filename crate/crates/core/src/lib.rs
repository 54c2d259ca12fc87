//! Federated SPARQL query processing over a federation of endpoints.

pub mod bench;
pub mod endpoint;
mod gate;
pub mod mediator;
pub mod rdf;
pub mod service;
pub mod sparql;

pub use gate::{Gate, Permit};
