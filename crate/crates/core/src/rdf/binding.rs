use std::collections::BTreeMap;
use std::fmt;

use super::pattern::{TermPattern, TriplePattern, Variable};
use super::term::Term;

/// A solution mapping: a partial function from variables to terms.
/// Unbound variables are simply absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingRow(BTreeMap<Variable, Term>);

impl BindingRow {
    pub fn new() -> Self {
        BindingRow(BTreeMap::new())
    }

    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn get_name(&self, name: &str) -> Option<&Term> {
        self.0.get(&Variable::new(name))
    }

    pub fn insert(&mut self, var: Variable, term: Term) -> Option<Term> {
        self.0.insert(var, term)
    }

    pub fn remove(&mut self, var: &Variable) -> Option<Term> {
        self.0.remove(var)
    }

    pub fn contains(&self, var: &Variable) -> bool {
        self.0.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.0.keys()
    }

    /// Two rows are compatible when they agree on every shared variable.
    pub fn is_compatible(&self, other: &BindingRow) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.0.iter().all(|(v, t)| large.0.get(v).is_none_or(|u| u == t))
    }

    /// Union of two compatible rows.
    pub fn merge(&self, other: &BindingRow) -> BindingRow {
        let mut out = self.clone();
        for (v, t) in &other.0 {
            out.0.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out
    }

    pub fn project(&self, vars: &[Variable]) -> BindingRow {
        BindingRow(vars.iter().filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone()))).collect())
    }

    /// Replace bound variables of `pattern` by their values.
    pub fn instantiate(&self, pattern: &TriplePattern) -> TriplePattern {
        let sub = |p: &TermPattern| match p {
            TermPattern::Variable(v) => match self.0.get(v) {
                Some(t) => TermPattern::Term(t.clone()),
                None => p.clone(),
            },
            TermPattern::Term(_) => p.clone(),
        };
        TriplePattern {
            subject: sub(&pattern.subject),
            predicate: sub(&pattern.predicate),
            object: sub(&pattern.object),
        }
    }
}

impl FromIterator<(Variable, Term)> for BindingRow {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        BindingRow(iter.into_iter().collect())
    }
}

impl fmt::Display for BindingRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}
