use std::fmt;
use std::sync::Arc;

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

/// Discriminant of an RDF term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    BlankNode,
    Iri,
    Literal,
}

/// An RDF term: IRI, literal, or blank node.
///
/// Strings are reference counted so cloning terms into binding rows is cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Arc<str>),
    BlankNode(Arc<str>),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: Arc<str>,
    annotation: LiteralAnnotation,
}

/// A literal carries at most one of a datatype or a language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralAnnotation {
    Plain,
    Datatype(Arc<str>),
    Language(Arc<str>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("IRI must be non-empty")]
    EmptyIri,
    #[error("IRI contains whitespace: {0:?}")]
    IriWhitespace(String),
    #[error("blank node label must be non-empty")]
    EmptyBlankNode,
}

impl Term {
    pub fn iri(value: impl AsRef<str>) -> Result<Self, TermError> {
        let value = value.as_ref();
        if value.is_empty() {
            return Err(TermError::EmptyIri);
        }
        if value.chars().any(char::is_whitespace) {
            return Err(TermError::IriWhitespace(value.to_owned()));
        }
        Ok(Term::Iri(value.into()))
    }

    pub fn blank(label: impl AsRef<str>) -> Result<Self, TermError> {
        let label = label.as_ref();
        if label.is_empty() {
            return Err(TermError::EmptyBlankNode);
        }
        Ok(Term::BlankNode(label.into()))
    }

    pub fn literal(lexical: impl AsRef<str>) -> Self {
        Term::Literal(Literal { lexical: lexical.as_ref().into(), annotation: LiteralAnnotation::Plain })
    }

    pub fn typed_literal(lexical: impl AsRef<str>, datatype: impl AsRef<str>) -> Self {
        Term::Literal(Literal {
            lexical: lexical.as_ref().into(),
            annotation: LiteralAnnotation::Datatype(datatype.as_ref().into()),
        })
    }

    pub fn lang_literal(lexical: impl AsRef<str>, language: impl AsRef<str>) -> Self {
        Term::Literal(Literal {
            lexical: lexical.as_ref().into(),
            annotation: LiteralAnnotation::Language(language.as_ref().to_ascii_lowercase().into()),
        })
    }

    pub fn integer(value: i64) -> Self {
        Term::typed_literal(value.to_string(), XSD_INTEGER)
    }

    pub fn boolean(value: bool) -> Self {
        Term::typed_literal(if value { "true" } else { "false" }, XSD_BOOLEAN)
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::BlankNode(_) => TermKind::BlankNode,
            Term::Literal(_) => TermKind::Literal,
        }
    }

    /// The lexical form: IRI string, blank node label, or literal value.
    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri(v) | Term::BlankNode(v) => v,
            Term::Literal(l) => &l.lexical,
        }
    }

    pub fn datatype(&self) -> Option<&str> {
        match self {
            Term::Literal(l) => l.datatype(),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match self {
            Term::Literal(l) => l.language(),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl Literal {
    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn annotation(&self) -> &LiteralAnnotation {
        &self.annotation
    }

    pub fn datatype(&self) -> Option<&str> {
        match &self.annotation {
            LiteralAnnotation::Datatype(d) => Some(d),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.annotation {
            LiteralAnnotation::Language(l) => Some(l),
            _ => None,
        }
    }

    /// Numeric value for xsd:integer, xsd:decimal, xsd:double (and the
    /// common integer subtypes). Ill-formed lexical forms yield `None`.
    pub fn numeric_value(&self) -> Option<f64> {
        let dt = self.datatype()?;
        let local = dt.strip_prefix(XSD)?;
        let lexical = self.lexical.trim();
        match local {
            "integer" | "int" | "long" | "short" | "byte" | "nonNegativeInteger" | "positiveInteger"
            | "negativeInteger" | "nonPositiveInteger" | "unsignedInt" | "unsignedLong" => {
                let digits = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                lexical.parse::<f64>().ok()
            }
            "decimal" => {
                let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
                let valid = !body.is_empty()
                    && body.bytes().all(|b| b.is_ascii_digit() || b == b'.')
                    && body.bytes().filter(|&b| b == b'.').count() <= 1
                    && body != ".";
                if valid {
                    lexical.parse::<f64>().ok()
                } else {
                    None
                }
            }
            "double" | "float" => match lexical {
                "INF" | "+INF" => Some(f64::INFINITY),
                "-INF" => Some(f64::NEG_INFINITY),
                "NaN" => Some(f64::NAN),
                _ if lexical.bytes().any(|b| b.is_ascii_alphabetic() && b != b'e' && b != b'E') => None,
                _ => lexical.parse::<f64>().ok(),
            },
            _ => None,
        }
    }

    pub fn is_string_like(&self) -> bool {
        matches!(self.annotation, LiteralAnnotation::Plain) || self.datatype() == Some(XSD_STRING)
    }
}

impl fmt::Display for Term {
    /// N-Triples / SPARQL surface syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{v}>"),
            Term::BlankNode(v) => write!(f, "_:{v}"),
            Term::Literal(l) => {
                f.write_str("\"")?;
                write_escaped(f, &l.lexical)?;
                f.write_str("\"")?;
                match &l.annotation {
                    LiteralAnnotation::Plain => Ok(()),
                    LiteralAnnotation::Datatype(d) => write!(f, "^^<{d}>"),
                    LiteralAnnotation::Language(lang) => write!(f, "@{lang}"),
                }
            }
        }
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, value: &str) -> fmt::Result {
    for c in value.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c => fmt::Write::write_char(f, c)?,
        }
    }
    Ok(())
}
