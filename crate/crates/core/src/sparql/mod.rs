//! The supported SPARQL subset: parsing, single-store evaluation, and
//! results serialization.
//!
//! Supported: SELECT/ASK, PREFIX, basic graph patterns, UNION, OPTIONAL,
//! FILTER (comparisons, `&&`/`||`/`!`, BOUND, REGEX, STR, LANG, isIRI,
//! isLiteral, isBlank), DISTINCT, LIMIT, OFFSET, ORDER BY on variables,
//! GROUP BY on variables, and COUNT.

pub mod algebra;
mod ast;
mod eval;
pub mod expr;
pub mod order;
mod parser;
pub mod results;

pub use ast::{
    CompareOp, CountSpec, Expression, GraphPattern, Modifiers, OrderKey, Projection, ProjectionItem, Query, QueryForm,
};
pub use eval::{evaluate, evaluate_bgp, evaluate_pattern, evaluate_select, merge_stores};
pub use parser::parse_query;
pub use results::{parse_results, serialize_results, ResultsError};

use crate::rdf::{BindingRow, Variable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, offset: usize, message: String },
    #[error("unsupported SPARQL feature: {0}")]
    Unsupported(String),
    #[error("invalid query: {0}")]
    Invalid(String),
}

impl QueryError {
    pub(crate) fn syntax(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |i| offset - i - 1) + 1;
        QueryError::Syntax { line, column, offset, message: message.into() }
    }
}

/// An ordered sequence of solutions with its projected variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolutionSeq {
    pub variables: Vec<Variable>,
    pub rows: Vec<BindingRow>,
}

impl SolutionSeq {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows sorted structurally, for order-insensitive comparison.
    pub fn sorted_rows(&self) -> Vec<BindingRow> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    /// Distinct rows, sorted structurally.
    pub fn distinct_rows(&self) -> Vec<BindingRow> {
        let mut rows = self.sorted_rows();
        rows.dedup();
        rows
    }
}

/// Outcome of a query: solutions for SELECT, a boolean for ASK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResults {
    Solutions(SolutionSeq),
    Boolean(bool),
}

impl QueryResults {
    pub fn solutions(&self) -> Option<&SolutionSeq> {
        match self {
            QueryResults::Solutions(s) => Some(s),
            QueryResults::Boolean(_) => None,
        }
    }

    pub fn into_solutions(self) -> Option<SolutionSeq> {
        match self {
            QueryResults::Solutions(s) => Some(s),
            QueryResults::Boolean(_) => None,
        }
    }

    pub fn boolean(&self) -> Option<bool> {
        match self {
            QueryResults::Boolean(b) => Some(*b),
            QueryResults::Solutions(_) => None,
        }
    }

    /// Result cardinality; an ASK result counts as one row.
    pub fn cardinality(&self) -> usize {
        match self {
            QueryResults::Solutions(s) => s.len(),
            QueryResults::Boolean(_) => 1,
        }
    }
}
