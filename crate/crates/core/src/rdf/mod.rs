//! RDF data model: terms, triples, triple patterns, and the indexed
//! in-memory [`Store`].

mod binding;
pub mod ntriples;
mod pattern;
mod store;
mod term;

pub use binding::BindingRow;
pub use ntriples::{parse_ntriples, parse_ntriples_str, write_ntriples, NTriplesError, NTriplesReader};
pub use pattern::{TermPattern, Triple, TripleError, TriplePattern, Variable};
pub use store::Store;
pub use term::{
    Literal, LiteralAnnotation, Term, TermError, TermKind, XSD, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER,
    XSD_STRING,
};
