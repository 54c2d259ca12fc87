//! Parsed query representation.
//!
//! `Display` renders an AST back to SPARQL text with absolute IRIs; the
//! mediator uses that to ship subqueries to remote endpoints.

use std::collections::BTreeSet;
use std::fmt;

use crate::rdf::{Term, TriplePattern, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryForm {
    Select,
    Ask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub form: QueryForm,
    pub projection: Projection,
    pub pattern: GraphPattern,
    pub modifiers: Modifiers,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// `SELECT *`; ASK queries also use this.
    All,
    Items(Vec<ProjectionItem>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionItem {
    Variable(Variable),
    Count(CountSpec),
}

/// `(COUNT([DISTINCT] ?v | *) AS ?alias)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSpec {
    pub distinct: bool,
    /// `None` counts rows (`COUNT(*)`).
    pub argument: Option<Variable>,
    pub alias: Variable,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Modifiers {
    pub distinct: bool,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
    pub order_by: Vec<OrderKey>,
    pub group_by: Vec<Variable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderKey {
    pub variable: Variable,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphPattern {
    Bgp(Vec<TriplePattern>),
    Join(Box<GraphPattern>, Box<GraphPattern>),
    Union(Box<GraphPattern>, Box<GraphPattern>),
    Optional(Box<GraphPattern>, Box<GraphPattern>),
    Filter(Box<GraphPattern>, Expression),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Variable(Variable),
    Constant(Term),
    Or(Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    Bound(Variable),
    Regex { text: Box<Expression>, pattern: Box<Expression>, flags: Option<Box<Expression>> },
    Str(Box<Expression>),
    Lang(Box<Expression>),
    IsIri(Box<Expression>),
    IsLiteral(Box<Expression>),
    IsBlank(Box<Expression>),
}

impl Query {
    /// `SELECT * WHERE { pattern }`
    pub fn select_all(pattern: GraphPattern) -> Self {
        Query { form: QueryForm::Select, projection: Projection::All, pattern, modifiers: Modifiers::default() }
    }

    pub fn ask(pattern: GraphPattern) -> Self {
        Query { form: QueryForm::Ask, projection: Projection::All, pattern, modifiers: Modifiers::default() }
    }

    /// All triple patterns in the query, in textual order.
    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.pattern.collect_triple_patterns(&mut out);
        out
    }

    pub fn count_specs(&self) -> Vec<&CountSpec> {
        match &self.projection {
            Projection::All => Vec::new(),
            Projection::Items(items) => items
                .iter()
                .filter_map(|i| match i {
                    ProjectionItem::Count(c) => Some(c),
                    ProjectionItem::Variable(_) => None,
                })
                .collect(),
        }
    }

    pub fn is_aggregate(&self) -> bool {
        !self.modifiers.group_by.is_empty() || !self.count_specs().is_empty()
    }

    /// Result variables: explicit projection, or every in-scope variable in
    /// order of first appearance for `SELECT *`.
    pub fn result_variables(&self) -> Vec<Variable> {
        match &self.projection {
            Projection::All => self.pattern.in_scope_variables(),
            Projection::Items(items) => items
                .iter()
                .map(|i| match i {
                    ProjectionItem::Variable(v) => v.clone(),
                    ProjectionItem::Count(c) => c.alias.clone(),
                })
                .collect(),
        }
    }
}

impl GraphPattern {
    pub fn bgp(patterns: Vec<TriplePattern>) -> Self {
        GraphPattern::Bgp(patterns)
    }

    pub fn collect_triple_patterns<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        match self {
            GraphPattern::Bgp(ps) => out.extend(ps.iter()),
            GraphPattern::Join(l, r) | GraphPattern::Union(l, r) | GraphPattern::Optional(l, r) => {
                l.collect_triple_patterns(out);
                r.collect_triple_patterns(out);
            }
            GraphPattern::Filter(inner, _) => inner.collect_triple_patterns(out),
        }
    }

    /// Variables that may be bound by solutions of this pattern, in order
    /// of first appearance.
    pub fn in_scope_variables(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        let mut patterns = Vec::new();
        self.collect_triple_patterns(&mut patterns);
        for p in patterns {
            for pos in p.positions() {
                if let Some(v) = pos.as_variable() {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }
}

impl Expression {
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Expression::Variable(v) | Expression::Bound(v) => {
                out.insert(v.clone());
            }
            Expression::Constant(_) => {}
            Expression::Or(a, b) | Expression::And(a, b) | Expression::Compare(_, a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Expression::Not(a)
            | Expression::Str(a)
            | Expression::Lang(a)
            | Expression::IsIri(a)
            | Expression::IsLiteral(a)
            | Expression::IsBlank(a) => a.collect_variables(out),
            Expression::Regex { text, pattern, flags } => {
                text.collect_variables(out);
                pattern.collect_variables(out);
                if let Some(f) = flags {
                    f.collect_variables(out);
                }
            }
        }
    }

    /// Split a conjunction into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expression> {
        match self {
            Expression::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    pub fn and_all(mut exprs: Vec<Expression>) -> Option<Expression> {
        let first = if exprs.is_empty() { return None } else { exprs.remove(0) };
        Some(exprs.into_iter().fold(first, |acc, e| Expression::And(Box::new(acc), Box::new(e))))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            QueryForm::Ask => f.write_str("ASK")?,
            QueryForm::Select => {
                f.write_str("SELECT")?;
                if self.modifiers.distinct {
                    f.write_str(" DISTINCT")?;
                }
                match &self.projection {
                    Projection::All => f.write_str(" *")?,
                    Projection::Items(items) => {
                        for item in items {
                            match item {
                                ProjectionItem::Variable(v) => write!(f, " {v}")?,
                                ProjectionItem::Count(c) => {
                                    f.write_str(" (COUNT(")?;
                                    if c.distinct {
                                        f.write_str("DISTINCT ")?;
                                    }
                                    match &c.argument {
                                        Some(v) => write!(f, "{v}")?,
                                        None => f.write_str("*")?,
                                    }
                                    write!(f, ") AS {})", c.alias)?;
                                }
                            }
                        }
                    }
                }
                f.write_str(" WHERE")?;
            }
        }
        f.write_str(" ")?;
        write_group(f, &self.pattern)?;
        let m = &self.modifiers;
        if !m.group_by.is_empty() {
            f.write_str(" GROUP BY")?;
            for v in &m.group_by {
                write!(f, " {v}")?;
            }
        }
        if !m.order_by.is_empty() {
            f.write_str(" ORDER BY")?;
            for k in &m.order_by {
                if k.descending {
                    write!(f, " DESC({})", k.variable)?;
                } else {
                    write!(f, " ASC({})", k.variable)?;
                }
            }
        }
        if let Some(l) = m.limit {
            write!(f, " LIMIT {l}")?;
        }
        if let Some(o) = m.offset {
            write!(f, " OFFSET {o}")?;
        }
        Ok(())
    }
}

/// Writes `{ ... }` such that reparsing yields the same tree.
fn write_group(f: &mut fmt::Formatter<'_>, p: &GraphPattern) -> fmt::Result {
    f.write_str("{ ")?;
    write_group_body(f, p)?;
    f.write_str("}")
}

fn write_group_body(f: &mut fmt::Formatter<'_>, p: &GraphPattern) -> fmt::Result {
    match p {
        GraphPattern::Bgp(ps) => {
            for tp in ps {
                write!(f, "{tp} . ")?;
            }
            Ok(())
        }
        GraphPattern::Filter(inner, e) => {
            write_join_operand(f, inner)?;
            write!(f, "FILTER({e}) ")
        }
        GraphPattern::Optional(l, r) => {
            write_join_operand(f, l)?;
            f.write_str("OPTIONAL ")?;
            write_group(f, r)?;
            f.write_str(" ")
        }
        GraphPattern::Join(l, r) => {
            write_join_operand(f, l)?;
            write_group(f, r)?;
            f.write_str(" ")
        }
        GraphPattern::Union(..) => {
            write_union(f, p)?;
            f.write_str(" ")
        }
    }
}

/// Left operands are inlined when the parser would rebuild them unchanged;
/// anything else is wrapped in its own group.
fn write_join_operand(f: &mut fmt::Formatter<'_>, p: &GraphPattern) -> fmt::Result {
    match p {
        GraphPattern::Bgp(ps) if ps.is_empty() => Ok(()),
        GraphPattern::Bgp(_) | GraphPattern::Optional(..) | GraphPattern::Join(..) => write_group_body(f, p),
        GraphPattern::Union(..) => {
            write_union(f, p)?;
            f.write_str(" ")
        }
        GraphPattern::Filter(..) => {
            write_group(f, p)?;
            f.write_str(" ")
        }
    }
}

fn write_union(f: &mut fmt::Formatter<'_>, p: &GraphPattern) -> fmt::Result {
    match p {
        GraphPattern::Union(l, r) => {
            write_union(f, l)?;
            f.write_str(" UNION ")?;
            write_group(f, r)
        }
        other => write_group(f, other),
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Variable(v) => write!(f, "{v}"),
            Expression::Constant(t) => write!(f, "{t}"),
            Expression::Or(a, b) => write!(f, "({a} || {b})"),
            Expression::And(a, b) => write!(f, "({a} && {b})"),
            Expression::Not(a) => write!(f, "(!{a})"),
            Expression::Compare(op, a, b) => write!(f, "({a} {op} {b})"),
            Expression::Bound(v) => write!(f, "BOUND({v})"),
            Expression::Regex { text, pattern, flags } => match flags {
                Some(fl) => write!(f, "REGEX({text}, {pattern}, {fl})"),
                None => write!(f, "REGEX({text}, {pattern})"),
            },
            Expression::Str(a) => write!(f, "STR({a})"),
            Expression::Lang(a) => write!(f, "LANG({a})"),
            Expression::IsIri(a) => write!(f, "isIRI({a})"),
            Expression::IsLiteral(a) => write!(f, "isLiteral({a})"),
            Expression::IsBlank(a) => write!(f, "isBlank({a})"),
        }
    }
}
