//! Total order on optional terms used by ORDER BY.
//!
//! unbound < blank nodes < IRIs < literals. Within a kind terms compare by
//! lexical byte order, except that numeric literals sort before all other
//! literals and compare by value among themselves.

use std::cmp::Ordering;

use crate::rdf::{Literal, Term};

pub fn compare_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(a), Some(b)) => compare_bound(a, b),
    }
}

fn rank(t: &Term) -> u8 {
    match t {
        Term::BlankNode(_) => 0,
        Term::Iri(_) => 1,
        Term::Literal(_) => 2,
    }
}

fn compare_bound(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => compare_literals(x, y),
        _ => rank(a).cmp(&rank(b)).then_with(|| a.lexical().as_bytes().cmp(b.lexical().as_bytes())),
    }
}

fn compare_literals(x: &Literal, y: &Literal) -> Ordering {
    let by_value = match (x.numeric_value(), y.numeric_value()) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (Some(_), None) => return Ordering::Less,
        (None, Some(_)) => return Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_value
        .then_with(|| x.lexical().as_bytes().cmp(y.lexical().as_bytes()))
        .then_with(|| x.annotation().cmp(y.annotation()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::XSD_INTEGER;

    #[test]
    fn kind_order() {
        let b = Term::blank("z").unwrap();
        let i = Term::iri("http://a").unwrap();
        let l = Term::literal("a");
        assert_eq!(compare_terms(None, Some(&b)), Ordering::Less);
        assert_eq!(compare_terms(Some(&b), Some(&i)), Ordering::Less);
        assert_eq!(compare_terms(Some(&i), Some(&l)), Ordering::Less);
    }

    #[test]
    fn numeric_by_value() {
        let nine = Term::typed_literal("9", XSD_INTEGER);
        let ten = Term::typed_literal("10", XSD_INTEGER);
        assert_eq!(compare_terms(Some(&nine), Some(&ten)), Ordering::Less);
        assert_eq!(compare_terms(Some(&Term::literal("10")), Some(&Term::literal("9"))), Ordering::Less);
    }

    #[test]
    fn sort_is_total_on_mixed_literals() {
        let mut terms = [
            Term::typed_literal("10", XSD_INTEGER),
            Term::literal("5x"),
            Term::typed_literal("9", XSD_INTEGER),
            Term::literal("10"),
            Term::lang_literal("10", "en"),
        ];
        terms.sort_by(|a, b| compare_terms(Some(a), Some(b)));
        assert_eq!(terms[0], Term::typed_literal("9", XSD_INTEGER));
        assert_eq!(terms[1], Term::typed_literal("10", XSD_INTEGER));
    }
}
