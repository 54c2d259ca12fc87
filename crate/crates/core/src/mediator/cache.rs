use std::collections::HashMap;
use std::sync::RwLock;

use crate::rdf::{Term, TermPattern, TriplePattern};

/// One position of a normalized pattern: a ground term or the index of the
/// variable's first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Term(Term),
    Var(u8),
}

/// A triple pattern with variable names replaced by positional markers, so
/// that `?a <p> ?b` and `?x <p> ?y` share one key while `?a <p> ?a` does not.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizedPattern(pub [Slot; 3]);

impl NormalizedPattern {
    pub fn of(pattern: &TriplePattern) -> Self {
        let mut seen = Vec::with_capacity(3);
        let slots = pattern.positions().map(|p| match p {
            TermPattern::Term(t) => Slot::Term(t.clone()),
            TermPattern::Variable(v) => {
                let idx = match seen.iter().position(|s| s == v) {
                    Some(i) => i,
                    None => {
                        seen.push(v.clone());
                        seen.len() - 1
                    }
                };
                Slot::Var(idx as u8)
            }
        });
        NormalizedPattern(slots)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relevance {
    Relevant,
    Irrelevant,
    Unknown,
}

/// Memo of per-(pattern, endpoint) relevance. Entries never expire; use
/// [`SelectionCache::flush`] to forget everything.
#[derive(Debug, Default)]
pub struct SelectionCache {
    entries: RwLock<HashMap<NormalizedPattern, HashMap<String, bool>>>,
}

impl SelectionCache {
    pub fn new() -> Self {
        SelectionCache::default()
    }

    pub fn lookup(&self, pattern: &NormalizedPattern, endpoint: &str) -> Relevance {
        let entries = self.entries.read().unwrap_or_else(|e| e.into_inner());
        match entries.get(pattern).and_then(|m| m.get(endpoint)) {
            Some(true) => Relevance::Relevant,
            Some(false) => Relevance::Irrelevant,
            None => Relevance::Unknown,
        }
    }

    pub fn record(&self, pattern: &NormalizedPattern, endpoint: &str, relevant: bool) {
        let mut entries = self.entries.write().unwrap_or_else(|e| e.into_inner());
        entries.entry(pattern.clone()).or_default().insert(endpoint.to_owned(), relevant);
    }

    /// Number of known (pattern, endpoint) entries.
    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flush(&self) {
        self.entries.write().unwrap_or_else(|e| e.into_inner()).clear();
    }
}
