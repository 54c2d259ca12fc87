//! Line-oriented N-Triples reader and writer.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use super::pattern::Triple;
use super::term::Term;

#[derive(Debug, thiserror::Error)]
pub enum NTriplesError {
    #[error("line {line}: {message} near {fragment:?}")]
    Syntax { line: usize, fragment: String, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl NTriplesError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        NTriplesError::Io { path: path.to_owned(), source }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            NTriplesError::Syntax { line, .. } => Some(*line),
            NTriplesError::Io { .. } => None,
        }
    }
}

/// Deterministic blank-node scope for a file: the same path always yields
/// the same prefix, distinct paths (almost surely) differ.
pub fn document_id(path: &Path) -> String {
    let canonical = path.canonicalize().unwrap_or_else(|_| path.to_owned());
    let mut hasher = DefaultHasher::new();
    canonical.hash(&mut hasher);
    format!("d{:012x}", hasher.finish() & 0xffff_ffff_ffff)
}

/// Streaming reader yielding one triple per statement. Iteration ends after
/// the first error.
pub struct NTriplesReader<R> {
    input: R,
    line_no: usize,
    buf: String,
    document: Option<String>,
    failed: bool,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(input: R) -> Self {
        NTriplesReader { input, line_no: 0, buf: String::new(), document: None, failed: false }
    }

    /// Prefix blank node labels with `id` so that documents loaded into the
    /// same store never share blank nodes by accident.
    pub fn with_document_id(mut self, id: impl Into<String>) -> Self {
        self.document = Some(id.into());
        self
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple, NTriplesError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            self.line_no += 1;
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(NTriplesError::Syntax {
                        line: self.line_no,
                        fragment: String::new(),
                        message: format!("read error: {e}"),
                    }));
                }
            }
            match parse_line(&self.buf, self.document.as_deref()) {
                Ok(None) => continue,
                Ok(Some(t)) => return Some(Ok(t)),
                Err((fragment, message)) => {
                    self.failed = true;
                    return Some(Err(NTriplesError::Syntax { line: self.line_no, fragment, message }));
                }
            }
        }
    }
}

/// Parse a whole document, stopping at the first malformed line.
pub fn parse_ntriples(input: impl BufRead) -> Result<Vec<Triple>, NTriplesError> {
    NTriplesReader::new(input).collect()
}

pub fn parse_ntriples_str(input: &str) -> Result<Vec<Triple>, NTriplesError> {
    parse_ntriples(input.as_bytes())
}

pub fn write_ntriples<'a>(mut out: impl Write, triples: impl IntoIterator<Item = &'a Triple>) -> io::Result<()> {
    for t in triples {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

type LineError = (String, String);

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start_matches([' ', '\t']);
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> LineError {
        let fragment: String = self.rest().chars().take(40).collect();
        (fragment, message.into())
    }
}

fn parse_line(line: &str, document: Option<&str>) -> Result<Option<Triple>, LineError> {
    let line = line.trim_end_matches(['\n', '\r']);
    let mut cur = Cursor { text: line, pos: 0 };
    cur.skip_ws();
    if cur.rest().is_empty() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => read_iri(&mut cur)?,
        Some('_') => read_blank(&mut cur, document)?,
        _ => return Err(cur.error("expected IRI or blank node subject")),
    };
    cur.skip_ws();
    if cur.peek() != Some('<') {
        return Err(cur.error("expected IRI predicate"));
    }
    let predicate = read_iri(&mut cur)?;
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => read_iri(&mut cur)?,
        Some('_') => read_blank(&mut cur, document)?,
        Some('"') => read_literal(&mut cur)?,
        _ => return Err(cur.error("expected object term")),
    };
    cur.skip_ws();
    if cur.bump() != Some('.') {
        return Err(cur.error("expected '.' terminating the statement"));
    }
    cur.skip_ws();
    if !(cur.rest().is_empty() || cur.peek() == Some('#')) {
        return Err(cur.error("unexpected content after '.'"));
    }
    Triple::new(subject, predicate, object).map(Some).map_err(|e| (line.chars().take(40).collect(), e.to_string()))
}

fn read_iri(cur: &mut Cursor<'_>) -> Result<Term, LineError> {
    let start = cur.pos;
    cur.bump();
    let mut value = String::new();
    loop {
        match cur.bump() {
            None => {
                cur.pos = start;
                return Err(cur.error("unterminated IRI"));
            }
            Some('>') => break,
            Some('\\') => value.push(read_unicode_escape(cur)?),
            Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                cur.pos = start;
                return Err(cur.error("invalid character in IRI"));
            }
            Some(c) => value.push(c),
        }
    }
    Term::iri(value).map_err(|e| {
        cur.pos = start;
        cur.error(e.to_string())
    })
}

fn read_unicode_escape(cur: &mut Cursor<'_>) -> Result<char, LineError> {
    let len = match cur.bump() {
        Some('u') => 4,
        Some('U') => 8,
        _ => return Err(cur.error("invalid escape")),
    };
    let rest = cur.rest();
    if rest.len() < len || !rest.is_char_boundary(len) {
        return Err(cur.error("truncated unicode escape"));
    }
    let hex = &rest[..len];
    let code = u32::from_str_radix(hex, 16).map_err(|_| cur.error("invalid unicode escape"))?;
    let c = char::from_u32(code).ok_or_else(|| cur.error("invalid code point"))?;
    cur.pos += len;
    Ok(c)
}

fn read_blank(cur: &mut Cursor<'_>, document: Option<&str>) -> Result<Term, LineError> {
    if !cur.rest().starts_with("_:") {
        return Err(cur.error("expected blank node"));
    }
    cur.pos += 2;
    let start = cur.pos;
    while let Some(c) = cur.peek() {
        if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
            cur.bump();
        } else {
            break;
        }
    }
    // a trailing '.' belongs to the statement terminator
    while cur.pos > start && cur.text[..cur.pos].ends_with('.') {
        cur.pos -= 1;
    }
    let label = &cur.text[start..cur.pos];
    if label.is_empty() {
        return Err(cur.error("empty blank node label"));
    }
    let label = match document {
        Some(doc) => format!("{doc}_{label}"),
        None => label.to_owned(),
    };
    Term::blank(label).map_err(|e| cur.error(e.to_string()))
}

fn read_literal(cur: &mut Cursor<'_>) -> Result<Term, LineError> {
    let start = cur.pos;
    cur.bump();
    let mut value = String::new();
    loop {
        match cur.bump() {
            None => {
                cur.pos = start;
                return Err(cur.error("unterminated literal"));
            }
            Some('"') => break,
            Some('\\') => {
                let c = match cur.peek() {
                    Some('t') => '\t',
                    Some('b') => '\u{8}',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('u') | Some('U') => {
                        value.push(read_unicode_escape(cur)?);
                        continue;
                    }
                    _ => return Err(cur.error("invalid string escape")),
                };
                cur.bump();
                value.push(c);
            }
            Some(c) => value.push(c),
        }
    }
    match cur.peek() {
        Some('@') => {
            cur.bump();
            let tag_start = cur.pos;
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    cur.bump();
                } else {
                    break;
                }
            }
            let tag = &cur.text[tag_start..cur.pos];
            if tag.is_empty() || !tag.as_bytes()[0].is_ascii_alphabetic() {
                return Err(cur.error("invalid language tag"));
            }
            Ok(Term::lang_literal(value, tag))
        }
        Some('^') => {
            if !cur.rest().starts_with("^^<") {
                return Err(cur.error("expected ^^<datatype>"));
            }
            cur.pos += 2;
            let dt = read_iri(cur)?;
            Ok(Term::typed_literal(value, dt.lexical()))
        }
        _ => Ok(Term::literal(value)),
    }
}
