use std::collections::BTreeSet;
use std::fmt;

use super::select::SourceEntry;
use crate::rdf::{TriplePattern, Variable};
use crate::sparql::{Expression, GraphPattern, Query};

#[derive(Debug, Clone, PartialEq)]
pub enum PlanNode {
    /// Patterns whose only relevant source is `endpoint`, shipped together as
    /// one subquery along with any filters pushed into it.
    ExclusiveGroup {
        patterns: Vec<TriplePattern>,
        endpoint: String,
        filters: Vec<Expression>,
    },
    /// A union, optional, or filter subtree whose patterns are all answerable
    /// only at `endpoint`, shipped there as one subquery.
    ExclusiveSubquery {
        pattern: GraphPattern,
        endpoint: String,
    },
    /// One pattern evaluated at each of its relevant endpoints.
    Pattern {
        pattern: TriplePattern,
        endpoints: Vec<String>,
    },
    /// Children in execution order.
    Join(Vec<PlanNode>),
    Union(Box<PlanNode>, Box<PlanNode>),
    LeftJoin(Box<PlanNode>, Box<PlanNode>),
    Filter(Box<PlanNode>, Expression),
    /// A basic graph pattern with a pattern no member can answer; yields no
    /// rows and sends no requests.
    Empty {
        patterns: Vec<TriplePattern>,
    },
}

impl PlanNode {
    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_patterns(&mut out);
        out
    }

    fn collect_patterns<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        match self {
            PlanNode::ExclusiveGroup { patterns, .. } | PlanNode::Empty { patterns } => out.extend(patterns),
            PlanNode::Pattern { pattern, .. } => out.push(pattern),
            PlanNode::Join(children) => children.iter().for_each(|c| c.collect_patterns(out)),
            PlanNode::Union(l, r) | PlanNode::LeftJoin(l, r) => {
                l.collect_patterns(out);
                r.collect_patterns(out);
            }
            PlanNode::Filter(inner, _) => inner.collect_patterns(out),
            PlanNode::ExclusiveSubquery { pattern, .. } => pattern.collect_triple_patterns(out),
        }
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.triple_patterns().into_iter().flat_map(TriplePattern::variables).collect()
    }

    /// Every exclusive group in the tree.
    pub fn groups(&self) -> Vec<(&[TriplePattern], &str)> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let PlanNode::ExclusiveGroup { patterns, endpoint, .. } = n {
                out.push((patterns.as_slice(), endpoint.as_str()));
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a PlanNode)) {
        f(self);
        match self {
            PlanNode::Join(children) => children.iter().for_each(|c| c.visit(f)),
            PlanNode::Union(l, r) | PlanNode::LeftJoin(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            PlanNode::Filter(inner, _) => inner.visit(f),
            _ => {}
        }
    }

    fn write_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        match self {
            PlanNode::ExclusiveGroup { patterns, endpoint, filters } => {
                writeln!(f, "{pad}ExclusiveGroup @{endpoint}")?;
                for p in patterns {
                    writeln!(f, "{pad}  {p}")?;
                }
                for e in filters {
                    writeln!(f, "{pad}  FILTER({e})")?;
                }
                Ok(())
            }
            PlanNode::Pattern { pattern, endpoints } => {
                writeln!(f, "{pad}Pattern {pattern} @{{{}}}", endpoints.join(", "))
            }
            PlanNode::Join(children) => {
                writeln!(f, "{pad}Join")?;
                children.iter().try_for_each(|c| c.write_tree(f, depth + 1))
            }
            PlanNode::Union(l, r) => {
                writeln!(f, "{pad}Union")?;
                l.write_tree(f, depth + 1)?;
                r.write_tree(f, depth + 1)
            }
            PlanNode::LeftJoin(l, r) => {
                writeln!(f, "{pad}LeftJoin")?;
                l.write_tree(f, depth + 1)?;
                r.write_tree(f, depth + 1)
            }
            PlanNode::Filter(inner, e) => {
                writeln!(f, "{pad}Filter {e}")?;
                inner.write_tree(f, depth + 1)
            }
            PlanNode::Empty { patterns } => writeln!(f, "{pad}Empty ({} patterns, no relevant source)", patterns.len()),
            PlanNode::ExclusiveSubquery { pattern, endpoint } => {
                writeln!(f, "{pad}ExclusiveSubquery @{endpoint}")?;
                let text = Query::select_all(pattern.clone()).to_string();
                text.lines().try_for_each(|l| writeln!(f, "{pad}  {l}"))
            }
        }
    }
}

impl fmt::Display for PlanNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tree(f, 0)
    }
}

/// An optimized query: the plan tree plus the original query, whose form and
/// solution modifiers are applied on top of the tree's rows.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub query: Query,
    pub root: PlanNode,
}

impl QueryPlan {
    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        self.root.triple_patterns()
    }
}

impl fmt::Display for QueryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.query.modifiers;
        let mut mods = Vec::new();
        if self.query.is_aggregate() {
            mods.push("aggregate".to_owned());
        }
        if !m.order_by.is_empty() {
            mods.push("order".to_owned());
        }
        if m.distinct {
            mods.push("distinct".to_owned());
        }
        if let Some(o) = m.offset {
            mods.push(format!("offset {o}"));
        }
        if let Some(l) = m.limit {
            mods.push(format!("limit {l}"));
        }
        writeln!(f, "{:?} [{}]", self.query.form, mods.join(", "))?;
        self.root.write_tree(f, 1)
    }
}

/// Groups patterns sharing the same single relevant endpoint. A group needs
/// at least two patterns; everything else becomes a pattern node. Nodes keep
/// the position of their first pattern.
pub fn form_exclusive_groups(patterns: &[TriplePattern], sources: &[SourceEntry]) -> Vec<PlanNode> {
    assert_eq!(patterns.len(), sources.len(), "one source entry per pattern");
    let single = |i: usize| match sources[i].relevant.as_slice() {
        [only] => Some(only.as_str()),
        _ => None,
    };
    let mut nodes = Vec::new();
    let mut taken = vec![false; patterns.len()];
    for i in 0..patterns.len() {
        if taken[i] {
            continue;
        }
        let members: Vec<usize> = match single(i) {
            Some(e) => (i..patterns.len()).filter(|&j| !taken[j] && single(j) == Some(e)).collect(),
            None => vec![i],
        };
        if members.len() >= 2 {
            for &j in &members {
                taken[j] = true;
            }
            nodes.push(PlanNode::ExclusiveGroup {
                patterns: members.iter().map(|&j| patterns[j].clone()).collect(),
                endpoint: single(i).expect("grouped").to_owned(),
                filters: Vec::new(),
            });
        } else {
            taken[i] = true;
            nodes.push(PlanNode::Pattern { pattern: patterns[i].clone(), endpoints: sources[i].relevant.clone() });
        }
    }
    nodes
}

fn free_variables(pattern: &TriplePattern, bound: &BTreeSet<Variable>) -> usize {
    pattern.variables().iter().filter(|v| !bound.contains(*v)).count()
}

/// Free-variable score of a node given already-bound variables; groups score
/// as their best pattern.
pub fn node_score(node: &PlanNode, bound: &BTreeSet<Variable>) -> usize {
    match node {
        PlanNode::Pattern { pattern, .. } => free_variables(pattern, bound),
        PlanNode::ExclusiveGroup { patterns, .. } | PlanNode::Empty { patterns } => {
            patterns.iter().map(|p| free_variables(p, bound)).min().unwrap_or(0)
        }
        other => other.variables().iter().filter(|v| !bound.contains(*v)).count(),
    }
}

/// Greedy join order: repeatedly place the node with the fewest free
/// variables, counting variables bound by already placed nodes as bound.
/// Ties keep the input order.
pub fn reorder_joins(nodes: Vec<PlanNode>) -> Vec<PlanNode> {
    let mut remaining: Vec<Option<PlanNode>> = nodes.into_iter().map(Some).collect();
    let mut bound = BTreeSet::new();
    let mut ordered = Vec::with_capacity(remaining.len());
    while ordered.len() < remaining.len() {
        let (idx, _) = remaining
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|n| (i, node_score(n, &bound))))
            .min_by_key(|&(i, score)| (score, i))
            .expect("nodes remain");
        let node = remaining[idx].take().expect("not yet placed");
        bound.extend(node.variables());
        ordered.push(node);
    }
    ordered
}

/// Builds the plan tree for `pattern`; `sources` lists one entry per triple
/// pattern in [`GraphPattern::collect_triple_patterns`] order.
pub(crate) fn plan_pattern(pattern: &GraphPattern, sources: &[SourceEntry], use_groups: bool) -> PlanNode {
    let mut cursor = 0;
    let node = build(pattern, sources, &mut cursor, use_groups);
    debug_assert_eq!(cursor, sources.len());
    node
}

/// The member a non-BGP subtree can be shipped to whole: every one of its
/// patterns has that member as its only source.
fn sole_source<'a>(pattern: &GraphPattern, entries: &'a [SourceEntry]) -> Option<&'a str> {
    if matches!(pattern, GraphPattern::Bgp(_)) {
        return None;
    }
    let first = match entries.first()?.relevant.as_slice() {
        [only] => only,
        _ => return None,
    };
    entries.iter().all(|e| e.relevant.as_slice() == std::slice::from_ref(first)).then_some(first.as_str())
}

fn build(pattern: &GraphPattern, sources: &[SourceEntry], cursor: &mut usize, use_groups: bool) -> PlanNode {
    if use_groups {
        let mut ps = Vec::new();
        pattern.collect_triple_patterns(&mut ps);
        let entries = &sources[*cursor..*cursor + ps.len()];
        if let Some(endpoint) = sole_source(pattern, entries) {
            *cursor += ps.len();
            return PlanNode::ExclusiveSubquery { pattern: pattern.clone(), endpoint: endpoint.to_owned() };
        }
    }
    match pattern {
        GraphPattern::Bgp(ps) => {
            let entries = &sources[*cursor..*cursor + ps.len()];
            *cursor += ps.len();
            plan_bgp(ps, entries, use_groups)
        }
        GraphPattern::Join(l, r) => {
            let l = build(l, sources, cursor, use_groups);
            let r = build(r, sources, cursor, use_groups);
            PlanNode::Join(vec![l, r])
        }
        GraphPattern::Union(l, r) => {
            let l = build(l, sources, cursor, use_groups);
            let r = build(r, sources, cursor, use_groups);
            PlanNode::Union(Box::new(l), Box::new(r))
        }
        GraphPattern::Optional(l, r) => {
            let l = build(l, sources, cursor, use_groups);
            let r = build(r, sources, cursor, use_groups);
            PlanNode::LeftJoin(Box::new(l), Box::new(r))
        }
        GraphPattern::Filter(inner, e) => {
            let node = build(inner, sources, cursor, use_groups);
            if matches!(**inner, GraphPattern::Bgp(_)) {
                push_filters(node, e)
            } else {
                PlanNode::Filter(Box::new(node), e.clone())
            }
        }
    }
}

fn plan_bgp(patterns: &[TriplePattern], entries: &[SourceEntry], use_groups: bool) -> PlanNode {
    if entries.iter().any(|e| e.relevant.is_empty()) {
        return PlanNode::Empty { patterns: patterns.to_vec() };
    }
    let nodes = if use_groups {
        form_exclusive_groups(patterns, entries)
    } else {
        patterns
            .iter()
            .zip(entries)
            .map(|(p, e)| PlanNode::Pattern { pattern: p.clone(), endpoints: e.relevant.clone() })
            .collect()
    };
    let mut ordered = reorder_joins(nodes);
    if ordered.len() == 1 {
        ordered.pop().expect("one node")
    } else {
        PlanNode::Join(ordered)
    }
}

/// Moves each conjunct of `expr` that only mentions variables of a single
/// exclusive group of `node` (a planned BGP) into that group's subquery.
fn push_filters(mut node: PlanNode, expr: &Expression) -> PlanNode {
    let mut rest = Vec::new();
    for conjunct in expr.conjuncts() {
        let vars = conjunct.variables();
        let target = match &mut node {
            PlanNode::ExclusiveGroup { .. } => Some(&mut node),
            PlanNode::Join(children) => children
                .iter_mut()
                .find(|c| matches!(c, PlanNode::ExclusiveGroup { .. }) && vars.is_subset(&c.variables())),
            _ => None,
        };
        match target {
            Some(group) if vars.is_subset(&group.variables()) => {
                if let PlanNode::ExclusiveGroup { filters, .. } = group {
                    filters.push(conjunct.clone());
                }
            }
            _ => rest.push(conjunct.clone()),
        }
    }
    match Expression::and_all(rest) {
        Some(e) => PlanNode::Filter(Box::new(node), e),
        None => node,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mediator::select::Provenance;
    use crate::rdf::{Term, TermPattern};

    fn tp(s: &str, p: &str, o: &str) -> TriplePattern {
        let part = |x: &str| match x.strip_prefix('?') {
            Some(v) => TermPattern::var(v),
            None => TermPattern::Term(Term::iri(format!("http://x/{x}")).unwrap()),
        };
        TriplePattern::new(part(s), part(p), part(o))
    }

    fn entry(ids: &[&str]) -> SourceEntry {
        SourceEntry { relevant: ids.iter().map(|s| s.to_string()).collect(), provenance: Provenance::Probed }
    }

    #[test]
    fn mixed_grouping() {
        let ps = vec![tp("?s", "p1", "?o"), tp("?s", "p2", "?x"), tp("?x", "p3", "?y")];
        let nodes = form_exclusive_groups(&ps, &[entry(&["A"]), entry(&["A"]), entry(&["A", "B"])]);
        assert_eq!(nodes.len(), 2);
        assert!(
            matches!(&nodes[0], PlanNode::ExclusiveGroup { patterns, endpoint, .. } if patterns.len() == 2 && endpoint == "A")
        );
        assert!(matches!(&nodes[1], PlanNode::Pattern { endpoints, .. } if endpoints.len() == 2));
    }

    #[test]
    fn ground_heavier_pattern_first() {
        let nodes = vec![
            PlanNode::Pattern { pattern: tp("?s", "?p", "?o"), endpoints: vec!["A".into()] },
            PlanNode::Pattern { pattern: tp("?s", "p", "o"), endpoints: vec!["A".into()] },
        ];
        let ordered = reorder_joins(nodes.clone());
        assert_eq!(ordered, vec![nodes[1].clone(), nodes[0].clone()]);
        assert_eq!(reorder_joins(vec![nodes[0].clone()]), vec![nodes[0].clone()]);
    }

    #[test]
    fn filter_pushdown_only_into_covering_group() {
        let ps = vec![tp("?s", "p1", "?o"), tp("?s", "p2", "?x"), tp("?x", "p3", "?y")];
        let e = Expression::and_all(vec![Expression::Bound(Variable::new("o")), Expression::Bound(Variable::new("y"))])
            .unwrap();
        let node = plan_bgp(&ps, &[entry(&["A"]), entry(&["A"]), entry(&["A", "B"])], true);
        let node = push_filters(node, &e);
        let PlanNode::Filter(inner, rest) = node else { panic!("residual filter expected") };
        assert_eq!(rest, Expression::Bound(Variable::new("y")));
        assert_eq!(inner.groups().len(), 1);
        let PlanNode::Join(children) = *inner else { panic!() };
        assert!(matches!(&children[0], PlanNode::ExclusiveGroup { filters, .. } if filters.len() == 1));
    }

    #[test]
    fn single_source_union_ships_whole() {
        let u = GraphPattern::Union(
            Box::new(GraphPattern::Bgp(vec![tp("?s", "p1", "?o")])),
            Box::new(GraphPattern::Bgp(vec![tp("?s", "p2", "?x"), tp("?x", "p3", "?o")])),
        );
        let node = plan_pattern(&u, &[entry(&["A"]), entry(&["A"]), entry(&["A"])], true);
        assert!(matches!(&node, PlanNode::ExclusiveSubquery { endpoint, .. } if endpoint == "A"));
        assert_eq!(node.triple_patterns().len(), 3);
        let split = plan_pattern(&u, &[entry(&["A"]), entry(&["A"]), entry(&["B"])], true);
        assert!(matches!(split, PlanNode::Union(..)));
        assert!(matches!(plan_pattern(&u, &vec![entry(&["A"]); 3], false), PlanNode::Union(..)));
    }

    #[test]
    fn empty_source_short_circuits() {
        let ps = vec![tp("?s", "p1", "?o"), tp("?s", "p2", "?x")];
        let node = plan_bgp(&ps, &[entry(&["A"]), entry(&[])], true);
        assert!(matches!(node, PlanNode::Empty { .. }));
    }
}
