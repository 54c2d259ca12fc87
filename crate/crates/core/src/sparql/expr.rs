//! FILTER expression evaluation. `None` stands for a SPARQL evaluation
//! error; a filter whose value is an error or not `true` drops the row.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;

use regex::{Regex, RegexBuilder};

use super::ast::{CompareOp, Expression};
use crate::rdf::{BindingRow, LiteralAnnotation, Term, XSD_BOOLEAN, XSD_STRING};

pub fn evaluate(expr: &Expression, row: &BindingRow) -> Option<Term> {
    match expr {
        Expression::Variable(v) => row.get(v).cloned(),
        Expression::Constant(t) => Some(t.clone()),
        Expression::Or(a, b) => {
            let left = evaluate(a, row).and_then(|t| ebv(&t));
            let right = evaluate(b, row).and_then(|t| ebv(&t));
            match (left, right) {
                (Some(true), _) | (_, Some(true)) => Some(Term::boolean(true)),
                (Some(false), Some(false)) => Some(Term::boolean(false)),
                _ => None,
            }
        }
        Expression::And(a, b) => {
            let left = evaluate(a, row).and_then(|t| ebv(&t));
            let right = evaluate(b, row).and_then(|t| ebv(&t));
            match (left, right) {
                (Some(false), _) | (_, Some(false)) => Some(Term::boolean(false)),
                (Some(true), Some(true)) => Some(Term::boolean(true)),
                _ => None,
            }
        }
        Expression::Not(a) => evaluate(a, row).and_then(|t| ebv(&t)).map(|b| Term::boolean(!b)),
        Expression::Compare(op, a, b) => {
            let left = evaluate(a, row)?;
            let right = evaluate(b, row)?;
            compare(*op, &left, &right).map(Term::boolean)
        }
        Expression::Bound(v) => Some(Term::boolean(row.contains(v))),
        Expression::Regex { text, pattern, flags } => {
            let text = evaluate(text, row)?;
            let text = text.as_literal().filter(|l| string_or_lang(l.annotation()))?;
            let pattern = evaluate(pattern, row)?;
            let pattern = pattern.as_literal().filter(|l| l.is_string_like())?;
            let flags = match flags {
                Some(f) => {
                    let f = evaluate(f, row)?;
                    f.as_literal().filter(|l| l.is_string_like())?.lexical().to_owned()
                }
                None => String::new(),
            };
            regex_match(pattern.lexical(), &flags, text.lexical()).map(Term::boolean)
        }
        Expression::Str(a) => match evaluate(a, row)? {
            Term::Iri(i) => Some(Term::literal(&*i)),
            Term::Literal(l) => Some(Term::literal(l.lexical())),
            Term::BlankNode(_) => None,
        },
        Expression::Lang(a) => match evaluate(a, row)? {
            Term::Literal(l) => Some(Term::literal(l.language().unwrap_or(""))),
            _ => None,
        },
        Expression::IsIri(a) => evaluate(a, row).map(|t| Term::boolean(t.is_iri())),
        Expression::IsLiteral(a) => evaluate(a, row).map(|t| Term::boolean(t.is_literal())),
        Expression::IsBlank(a) => evaluate(a, row).map(|t| Term::boolean(t.is_blank())),
    }
}

/// Whether `expr` evaluates to `true` for `row`.
pub fn filter_passes(expr: &Expression, row: &BindingRow) -> bool {
    evaluate(expr, row).and_then(|t| ebv(&t)) == Some(true)
}

/// Effective boolean value.
pub fn ebv(term: &Term) -> Option<bool> {
    let lit = term.as_literal()?;
    if lit.datatype() == Some(XSD_BOOLEAN) {
        return match lit.lexical() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => Some(false),
        };
    }
    if lit.is_string_like() {
        return Some(!lit.lexical().is_empty());
    }
    if lit.datatype().is_some() {
        return match lit.numeric_value() {
            Some(v) => Some(!(v == 0.0 || v.is_nan())),
            None => {
                if is_numeric_datatype(lit.datatype()) {
                    Some(false)
                } else {
                    None
                }
            }
        };
    }
    None
}

fn is_numeric_datatype(dt: Option<&str>) -> bool {
    let Some(dt) = dt else { return false };
    matches!(
        dt.strip_prefix(crate::rdf::XSD),
        Some("integer" | "decimal" | "double" | "float" | "int" | "long" | "short" | "byte")
    )
}

fn string_or_lang(a: &LiteralAnnotation) -> bool {
    match a {
        LiteralAnnotation::Plain | LiteralAnnotation::Language(_) => true,
        LiteralAnnotation::Datatype(d) => &**d == XSD_STRING,
    }
}

fn compare(op: CompareOp, a: &Term, b: &Term) -> Option<bool> {
    let ordering = value_ordering(a, b);
    match op {
        CompareOp::Eq => match ordering {
            Some(o) => Some(o == Ordering::Equal),
            None => equality_fallback(a, b),
        },
        CompareOp::Ne => match ordering {
            Some(o) => Some(o != Ordering::Equal),
            None => equality_fallback(a, b).map(|e| !e),
        },
        CompareOp::Lt => ordering.map(|o| o == Ordering::Less),
        CompareOp::Le => ordering.map(|o| o != Ordering::Greater),
        CompareOp::Gt => ordering.map(|o| o == Ordering::Greater),
        CompareOp::Ge => ordering.map(|o| o != Ordering::Less),
    }
}

/// Ordering between values of comparable types: numerics, simple strings,
/// language strings of the same language, and booleans.
fn value_ordering(a: &Term, b: &Term) -> Option<Ordering> {
    let (la, lb) = (a.as_literal()?, b.as_literal()?);
    if let (Some(x), Some(y)) = (la.numeric_value(), lb.numeric_value()) {
        return x.partial_cmp(&y);
    }
    if la.is_string_like() && lb.is_string_like() {
        return Some(la.lexical().cmp(lb.lexical()));
    }
    if let (Some(x), Some(y)) = (la.language(), lb.language()) {
        if x == y {
            return Some(la.lexical().cmp(lb.lexical()));
        }
        return None;
    }
    if la.datatype() == Some(XSD_BOOLEAN) && lb.datatype() == Some(XSD_BOOLEAN) {
        return Some(ebv(a)?.cmp(&ebv(b)?));
    }
    None
}

/// `=` on terms without a value ordering: identical terms are equal;
/// otherwise IRIs, blank nodes and differently-tagged literals are simply
/// unequal, while two literals of unknown datatypes are incomparable.
fn equality_fallback(a: &Term, b: &Term) -> Option<bool> {
    if a == b {
        return Some(true);
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => {
            let known = |l: &crate::rdf::Literal| {
                l.numeric_value().is_some()
                    || l.is_string_like()
                    || l.language().is_some()
                    || l.datatype() == Some(XSD_BOOLEAN)
            };
            if known(x) && known(y) {
                Some(false)
            } else {
                None
            }
        }
        _ => Some(false),
    }
}

thread_local! {
    static REGEX_CACHE: RefCell<HashMap<(String, String), Option<Regex>>> = RefCell::new(HashMap::new());
}

fn regex_match(pattern: &str, flags: &str, text: &str) -> Option<bool> {
    REGEX_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if cache.len() > 256 {
            cache.clear();
        }
        let re = cache.entry((pattern.to_owned(), flags.to_owned())).or_insert_with(|| build_regex(pattern, flags));
        re.as_ref().map(|r| r.is_match(text))
    })
}

fn build_regex(pattern: &str, flags: &str) -> Option<Regex> {
    let mut builder = RegexBuilder::new(pattern);
    for f in flags.chars() {
        match f {
            'i' => builder.case_insensitive(true),
            's' => builder.dot_matches_new_line(true),
            'm' => builder.multi_line(true),
            'x' => builder.ignore_whitespace(true),
            _ => return None,
        };
    }
    builder.build().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Variable, XSD_DECIMAL, XSD_INTEGER};

    fn row(pairs: &[(&str, Term)]) -> BindingRow {
        pairs.iter().map(|(v, t)| (Variable::new(v), t.clone())).collect()
    }

    fn c(t: Term) -> Box<Expression> {
        Box::new(Expression::Constant(t))
    }

    #[test]
    fn numeric_comparison_across_types() {
        let e = Expression::Compare(CompareOp::Lt, c(Term::integer(2)), c(Term::typed_literal("2.5", XSD_DECIMAL)));
        assert!(filter_passes(&e, &BindingRow::new()));
        let eq = Expression::Compare(CompareOp::Eq, c(Term::integer(1)), c(Term::typed_literal("1.0", XSD_DECIMAL)));
        assert!(filter_passes(&eq, &BindingRow::new()));
    }

    #[test]
    fn iri_vs_number_is_error_and_drops_row() {
        let e = Expression::Compare(CompareOp::Lt, c(Term::iri("http://x/a").unwrap()), c(Term::integer(3)));
        assert_eq!(evaluate(&e, &BindingRow::new()), None);
        assert!(!filter_passes(&e, &BindingRow::new()));
        // error || true = true
        let or = Expression::Or(Box::new(e.clone()), c(Term::boolean(true)));
        assert!(filter_passes(&or, &BindingRow::new()));
        // error && false = false, and negation of that is true
        let and = Expression::And(Box::new(e), c(Term::boolean(false)));
        assert_eq!(evaluate(&and, &BindingRow::new()), Some(Term::boolean(false)));
    }

    #[test]
    fn unbound_variable_is_error() {
        let e =
            Expression::Compare(CompareOp::Eq, Box::new(Expression::Variable(Variable::new("x"))), c(Term::integer(1)));
        assert!(!filter_passes(&e, &BindingRow::new()));
        assert!(!filter_passes(&Expression::Not(Box::new(e)), &BindingRow::new()));
        let b = Expression::Not(Box::new(Expression::Bound(Variable::new("x"))));
        assert!(filter_passes(&b, &BindingRow::new()));
    }

    #[test]
    fn regex_on_str_of_iri() {
        let r = row(&[("s", Term::iri("http://x/Drug12").unwrap())]);
        let direct = Expression::Regex {
            text: Box::new(Expression::Variable(Variable::new("s"))),
            pattern: c(Term::literal("drug")),
            flags: Some(c(Term::literal("i"))),
        };
        assert!(!filter_passes(&direct, &r), "regex over an IRI is a type error");
        let via_str = Expression::Regex {
            text: Box::new(Expression::Str(Box::new(Expression::Variable(Variable::new("s"))))),
            pattern: c(Term::literal("drug")),
            flags: Some(c(Term::literal("i"))),
        };
        assert!(filter_passes(&via_str, &r));
    }

    #[test]
    fn ebv_rules() {
        assert_eq!(ebv(&Term::literal("")), Some(false));
        assert_eq!(ebv(&Term::literal("x")), Some(true));
        assert_eq!(ebv(&Term::integer(0)), Some(false));
        assert_eq!(ebv(&Term::typed_literal("abc", XSD_INTEGER)), Some(false));
        assert_eq!(ebv(&Term::iri("http://x/a").unwrap()), None);
    }
}
