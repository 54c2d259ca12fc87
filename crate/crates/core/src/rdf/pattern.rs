use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::term::{Term, TermKind};

/// A named query variable (without the leading `?`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl AsRef<str>) -> Self {
        Variable(name.as_ref().into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl From<&str> for Variable {
    fn from(name: &str) -> Self {
        Variable::new(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TripleError {
    #[error("triple subject must be an IRI or blank node, got {0}")]
    LiteralSubject(Term),
    #[error("triple predicate must be an IRI, got {0}")]
    NonIriPredicate(Term),
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TripleError> {
        if subject.is_literal() {
            return Err(TripleError::LiteralSubject(subject));
        }
        if !predicate.is_iri() {
            return Err(TripleError::NonIriPredicate(predicate));
        }
        Ok(Triple { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// One position of a triple pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermPattern {
    Term(Term),
    Variable(Variable),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Variable(Variable::new(name))
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            TermPattern::Term(t) => Some(t),
            TermPattern::Variable(_) => None,
        }
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            TermPattern::Variable(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, TermPattern::Variable(_))
    }
}

impl From<Term> for TermPattern {
    fn from(t: Term) -> Self {
        TermPattern::Term(t)
    }
}

impl From<Variable> for TermPattern {
    fn from(v: Variable) -> Self {
        TermPattern::Variable(v)
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Term(t) => t.fmt(f),
            TermPattern::Variable(v) => v.fmt(f),
        }
    }
}

/// A triple with a term or a variable in each position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<TermPattern>,
        predicate: impl Into<TermPattern>,
        object: impl Into<TermPattern>,
    ) -> Self {
        TriplePattern { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    pub fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Variables occurring in the pattern.
    pub fn variables(&self) -> BTreeSet<Variable> {
        self.positions().into_iter().filter_map(TermPattern::as_variable).cloned().collect()
    }

    pub fn is_ground(&self) -> bool {
        self.positions().iter().all(|p| !p.is_variable())
    }

    /// Whether `triple` matches, including repeated-variable constraints
    /// such as `?x <p> ?x`.
    pub fn matches(&self, triple: &Triple) -> bool {
        let values = [triple.subject(), triple.predicate(), triple.object()];
        let positions = self.positions();
        for i in 0..3 {
            match positions[i] {
                TermPattern::Term(t) => {
                    if t != values[i] {
                        return false;
                    }
                }
                TermPattern::Variable(v) => {
                    for j in 0..i {
                        if positions[j].as_variable() == Some(v) && values[j] != values[i] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// A pattern can only match anything when the subject is not a literal
    /// and the predicate is an IRI.
    pub fn is_satisfiable(&self) -> bool {
        let subject_ok = self.subject.as_term().is_none_or(|t| t.kind() != TermKind::Literal);
        let predicate_ok = self.predicate.as_term().is_none_or(Term::is_iri);
        subject_ok && predicate_ok
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Term {
        Term::iri(format!("http://x/{s}")).unwrap()
    }

    #[test]
    fn triple_rejects_bad_positions() {
        assert!(Triple::new(Term::literal("a"), iri("p"), iri("o")).is_err());
        assert!(Triple::new(iri("s"), Term::blank("b").unwrap(), iri("o")).is_err());
        assert!(Triple::new(Term::blank("b").unwrap(), iri("p"), Term::literal("o")).is_ok());
    }

    #[test]
    fn variables_follow_positions() {
        let p = TriplePattern::new(TermPattern::var("s"), iri("p"), TermPattern::var("o"));
        let vars: Vec<_> = p.variables().into_iter().map(|v| v.name().to_owned()).collect();
        assert_eq!(vars, vec!["o", "s"]);
        let ground = TriplePattern::new(iri("s"), iri("p"), iri("o"));
        assert!(ground.variables().is_empty());
        assert!(ground.is_ground());
        let repeated = TriplePattern::new(TermPattern::var("x"), iri("p"), TermPattern::var("x"));
        assert_eq!(repeated.variables().len(), 1);
    }

    #[test]
    fn repeated_variable_matching() {
        let p = TriplePattern::new(TermPattern::var("x"), iri("p"), TermPattern::var("x"));
        assert!(p.matches(&Triple::new(iri("a"), iri("p"), iri("a")).unwrap()));
        assert!(!p.matches(&Triple::new(iri("a"), iri("p"), iri("b")).unwrap()));
    }
}
