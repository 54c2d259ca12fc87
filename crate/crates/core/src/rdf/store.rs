//! Indexed in-memory triple store.
//!
//! Terms are interned to `u32` ids; triples are kept in three ordered
//! indexes (SPO, POS, OSP). Every one of the eight pattern shapes maps onto
//! a prefix range of one of them, so no lookup needs a full scan unless the
//! pattern is fully unconstrained.

use std::collections::{BTreeSet, HashMap};
use std::ops::RangeInclusive;
use std::path::Path;

use super::binding::BindingRow;
use super::ntriples::{self, NTriplesError};
use super::pattern::{TermPattern, Triple, TriplePattern};
use super::term::Term;

type Id = u32;
type Key = [Id; 3];

#[derive(Debug, Default, Clone)]
pub struct Store {
    terms: Vec<Term>,
    ids: HashMap<Term, Id>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

#[derive(Debug, Clone, Copy)]
enum Index {
    Spo,
    Pos,
    Osp,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut store = Store::new();
        store.extend(triples);
        store
    }

    /// Parse an N-Triples file into a fresh store. Blank node labels are
    /// scoped to the file.
    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, NTriplesError> {
        let mut store = Store::new();
        store.load_file_into(path)?;
        Ok(store)
    }

    pub fn load_file_into(&mut self, path: impl AsRef<Path>) -> Result<usize, NTriplesError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| NTriplesError::io(path, e))?;
        let doc = ntriples::document_id(path);
        let before = self.len();
        for triple in ntriples::NTriplesReader::new(std::io::BufReader::new(file)).with_document_id(doc) {
            self.insert(triple?);
        }
        Ok(self.len() - before)
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// Insert a triple. Returns `false` when it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let (s, p, o) = triple.into_parts();
        let key = [self.intern(s), self.intern(p), self.intern(o)];
        if !self.spo.insert(key) {
            return false;
        }
        let [s, p, o] = key;
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        match (self.ids.get(triple.subject()), self.ids.get(triple.predicate()), self.ids.get(triple.object())) {
            (Some(&s), Some(&p), Some(&o)) => self.spo.contains(&[s, p, o]),
            _ => false,
        }
    }

    fn intern(&mut self, term: Term) -> Id {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = Id::try_from(self.terms.len()).expect("term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(move |k| self.triple(*k))
    }

    fn triple(&self, [s, p, o]: Key) -> Triple {
        Triple::new(self.terms[s as usize].clone(), self.terms[p as usize].clone(), self.terms[o as usize].clone())
            .expect("stored triples are well formed")
    }

    /// Triples matching `pattern`, in index order.
    pub fn triples_matching<'a>(&'a self, pattern: &'a TriplePattern) -> Box<dyn Iterator<Item = Triple> + 'a> {
        let lookup = |p: &TermPattern| -> Result<Option<Id>, ()> {
            match p {
                TermPattern::Variable(_) => Ok(None),
                TermPattern::Term(t) => self.ids.get(t).copied().map(Some).ok_or(()),
            }
        };
        let (s, p, o) = match (lookup(&pattern.subject), lookup(&pattern.predicate), lookup(&pattern.object)) {
            (Ok(s), Ok(p), Ok(o)) => (s, p, o),
            _ => return Box::new(std::iter::empty()),
        };
        let (index, prefix): (Index, Vec<Id>) = match (s, p, o) {
            (Some(s), Some(p), Some(o)) => (Index::Spo, vec![s, p, o]),
            (Some(s), Some(p), None) => (Index::Spo, vec![s, p]),
            (Some(s), None, None) => (Index::Spo, vec![s]),
            (None, Some(p), Some(o)) => (Index::Pos, vec![p, o]),
            (None, Some(p), None) => (Index::Pos, vec![p]),
            (None, None, Some(o)) => (Index::Osp, vec![o]),
            (Some(s), None, Some(o)) => (Index::Osp, vec![o, s]),
            (None, None, None) => (Index::Spo, vec![]),
        };
        let has_repeats = {
            let vars: Vec<_> = pattern.positions().into_iter().filter_map(TermPattern::as_variable).collect();
            let unique: BTreeSet<_> = vars.iter().collect();
            unique.len() != vars.len()
        };
        let keys = self.range(index, &prefix).map(move |k| match index {
            Index::Spo => k,
            Index::Pos => [k[2], k[0], k[1]],
            Index::Osp => [k[1], k[2], k[0]],
        });
        let triples = keys.map(move |k| self.triple(k));
        if has_repeats {
            Box::new(triples.filter(move |t| pattern.matches(t)))
        } else {
            Box::new(triples)
        }
    }

    fn range(&self, index: Index, prefix: &[Id]) -> impl Iterator<Item = Key> + '_ {
        let set = match index {
            Index::Spo => &self.spo,
            Index::Pos => &self.pos,
            Index::Osp => &self.osp,
        };
        set.range(prefix_range(prefix)).copied()
    }

    /// One binding row per matching triple, binding exactly the pattern's
    /// variables.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<BindingRow> {
        self.triples_matching(pattern).map(|t| bind(pattern, &t)).collect()
    }

    /// Whether at least one triple matches. Stops at the first match.
    pub fn ask(&self, pattern: &TriplePattern) -> bool {
        self.triples_matching(pattern).next().is_some()
    }

    /// Exact number of matching triples.
    pub fn count(&self, pattern: &TriplePattern) -> usize {
        self.triples_matching(pattern).count()
    }
}

fn prefix_range(prefix: &[Id]) -> RangeInclusive<Key> {
    let mut lo = [Id::MIN; 3];
    let mut hi = [Id::MAX; 3];
    for (i, &v) in prefix.iter().enumerate() {
        lo[i] = v;
        hi[i] = v;
    }
    lo..=hi
}

/// Bind the variables of `pattern` against a triple known to match it.
pub(crate) fn bind(pattern: &TriplePattern, triple: &Triple) -> BindingRow {
    let mut row = BindingRow::new();
    let values = [triple.subject(), triple.predicate(), triple.object()];
    for (pos, value) in pattern.positions().into_iter().zip(values) {
        if let TermPattern::Variable(v) = pos {
            row.insert(v.clone(), value.clone());
        }
    }
    row
}

impl Extend<Triple> for Store {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl FromIterator<Triple> for Store {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Store::from_triples(iter)
    }
}
