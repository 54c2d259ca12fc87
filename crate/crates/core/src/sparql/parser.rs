//! Recursive-descent parser for the supported SPARQL subset.

use std::collections::HashMap;

use super::ast::*;
use super::QueryError;
use crate::rdf::{Term, TermPattern, TriplePattern, Variable, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    BNode(String),
    Word(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

const PUNCTS: [&str; 21] =
    ["^^", "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", ".", ";", ",", "*", "=", "<", ">", "!", "/", "|", "^"];

impl<'a> Lexer<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> QueryError {
        QueryError::syntax(self.src, offset, message)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn tokens(mut self) -> Result<Vec<Token>, QueryError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws_and_comments();
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            let offset = self.pos;
            let tok = self.next_token()?;
            out.push(Token { tok, offset });
        }
    }

    fn skip_ws_and_comments(&mut self) {
        loop {
            let trimmed = self.rest().trim_start();
            self.pos = self.src.len() - trimmed.len();
            if trimmed.starts_with('#') {
                match trimmed.find('\n') {
                    Some(i) => self.pos += i + 1,
                    None => self.pos = self.src.len(),
                }
            } else {
                return;
            }
        }
    }

    fn next_token(&mut self) -> Result<Tok, QueryError> {
        let rest = self.rest();
        let c = rest.chars().next().expect("non-empty");
        let start = self.pos;
        if c == '<' {
            if let Some(iri) = scan_iriref(rest) {
                self.pos += iri.len() + 2;
                return Ok(Tok::Iri(iri.to_owned()));
            }
        }
        if c == '?' || c == '$' {
            let name_len = rest[1..].find(|ch: char| !(ch.is_alphanumeric() || ch == '_')).unwrap_or(rest.len() - 1);
            if name_len == 0 {
                self.pos += 1;
                return Ok(Tok::Punct("?"));
            }
            self.pos += 1 + name_len;
            return Ok(Tok::Var(rest[1..1 + name_len].to_owned()));
        }
        if c == '"' || c == '\'' {
            return self.string(c);
        }
        if c == '@' {
            let len = rest[1..].find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '-')).unwrap_or(rest.len() - 1);
            if len == 0 {
                return Err(self.error(start, "empty language tag"));
            }
            self.pos += 1 + len;
            return Ok(Tok::LangTag(rest[1..1 + len].to_owned()));
        }
        if c.is_ascii_digit()
            || ((c == '+' || c == '-' || c == '.') && rest[1..].starts_with(|d: char| d.is_ascii_digit()))
        {
            return Ok(self.number());
        }
        if let Some(label) = rest.strip_prefix("_:") {
            let len = label.find(|ch: char| !(ch.is_alphanumeric() || ch == '_' || ch == '-')).unwrap_or(label.len());
            self.pos += 2 + len;
            return Ok(Tok::BNode(label[..len].to_owned()));
        }
        if c.is_alphabetic() || c == ':' || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_alphanumeric() || matches!(ch, '_' | '-' | ':' | '.' | '%')))
                .unwrap_or(rest.len());
            let mut word = &rest[..len];
            // a trailing '.' terminates the triple, not the name
            while word.ends_with('.') {
                word = &word[..word.len() - 1];
            }
            self.pos += word.len();
            if let Some(colon) = word.find(':') {
                return Ok(Tok::PName(word[..colon].to_owned(), word[colon + 1..].to_owned()));
            }
            return Ok(Tok::Word(word.to_owned()));
        }
        for p in PUNCTS {
            if rest.starts_with(p) {
                self.pos += p.len();
                return Ok(Tok::Punct(p));
            }
        }
        if c == '+' || c == '-' {
            self.pos += 1;
            return Ok(Tok::Punct(if c == '+' { "+" } else { "-" }));
        }
        if c == '[' {
            self.pos += 1;
            return Ok(Tok::Punct("["));
        }
        Err(self.error(start, format!("unexpected character {c:?}")))
    }

    fn string(&mut self, quote: char) -> Result<Tok, QueryError> {
        let start = self.pos;
        let long: String = std::iter::repeat_n(quote, 3).collect();
        let is_long = self.rest().starts_with(&long);
        self.pos += if is_long { 3 } else { 1 };
        let mut value = String::new();
        loop {
            let rest = self.rest();
            if is_long && rest.starts_with(&long) {
                self.pos += 3;
                return Ok(Tok::Str(value));
            }
            let Some(c) = rest.chars().next() else {
                return Err(self.error(start, "unterminated string"));
            };
            self.pos += c.len_utf8();
            match c {
                c if c == quote && !is_long => return Ok(Tok::Str(value)),
                '\n' | '\r' if !is_long => return Err(self.error(start, "newline in string")),
                '\\' => {
                    let Some(e) = self.rest().chars().next() else {
                        return Err(self.error(start, "unterminated string"));
                    };
                    self.pos += e.len_utf8();
                    value.push(match e {
                        't' => '\t',
                        'n' => '\n',
                        'r' => '\r',
                        'b' => '\u{8}',
                        'f' => '\u{c}',
                        '"' => '"',
                        '\'' => '\'',
                        '\\' => '\\',
                        'u' | 'U' => {
                            let len = if e == 'u' { 4 } else { 8 };
                            let hex = self.rest().get(..len).ok_or_else(|| self.error(start, "bad escape"))?;
                            let ch = u32::from_str_radix(hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.error(start, "bad unicode escape"))?;
                            self.pos += len;
                            ch
                        }
                        _ => return Err(self.error(self.pos - 1, "invalid escape in string")),
                    });
                }
                c => value.push(c),
            }
        }
    }

    fn number(&mut self) -> Tok {
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if bytes[0] == b'+' || bytes[0] == b'-' {
            i += 1;
        }
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let mut kind = 0; // 0 integer, 1 decimal, 2 double
        if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
            kind = 1;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                kind = 2;
                i = j;
            }
        }
        let text = rest[..i].to_owned();
        self.pos += i;
        match kind {
            0 => Tok::Integer(text),
            1 => Tok::Decimal(text),
            _ => Tok::Double(text),
        }
    }
}

fn scan_iriref(s: &str) -> Option<&str> {
    let body = &s[1..];
    for (i, c) in body.char_indices() {
        match c {
            '>' => return Some(&body[..i]),
            c if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') => return None,
            _ => {}
        }
    }
    None
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let tokens = Lexer { src: text, pos: 0 }.tokens()?;
    let mut p = Parser { src: text, tokens, pos: 0, prefixes: HashMap::new() };
    let q = p.query()?;
    if p.pos < p.tokens.len() {
        return Err(p.error_here("unexpected trailing input"));
    }
    Ok(q)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    prefixes: HashMap<String, String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.src.len(), |t| t.offset)
    }

    fn error_here(&self, message: impl Into<String>) -> QueryError {
        QueryError::syntax(self.src, self.offset(), message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(x)) if *x == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), QueryError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected '{p}'")))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), QueryError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected {w}")))
        }
    }

    fn check_unsupported_word(&self) -> Result<(), QueryError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            let construct = match upper.as_str() {
                "CONSTRUCT" | "DESCRIBE" => Some(upper.clone()),
                "FROM" => Some("FROM dataset clauses".into()),
                "GRAPH" => Some("GRAPH".into()),
                "SERVICE" => Some("SERVICE".into()),
                "MINUS" => Some("MINUS".into()),
                "BIND" => Some("BIND".into()),
                "VALUES" => Some("VALUES".into()),
                "HAVING" => Some("HAVING".into()),
                "REDUCED" => Some("REDUCED".into()),
                "BASE" => Some("BASE".into()),
                "INSERT" | "DELETE" | "LOAD" | "CLEAR" | "DROP" | "CREATE" => Some("SPARQL Update".into()),
                _ => None,
            };
            if let Some(c) = construct {
                return Err(QueryError::Unsupported(c));
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            self.check_unsupported_word()?;
            if self.eat_word("PREFIX") {
                let (prefix, local) = match self.next() {
                    Some(Tok::PName(p, l)) => (p, l),
                    _ => return Err(self.error_here("expected prefix name")),
                };
                if !local.is_empty() {
                    return Err(self.error_here("prefix declaration must end with ':'"));
                }
                let iri = match self.next() {
                    Some(Tok::Iri(i)) => i,
                    _ => return Err(self.error_here("expected IRI in PREFIX declaration")),
                };
                self.prefixes.insert(prefix, iri);
            } else {
                break;
            }
        }
        self.check_unsupported_word()?;
        if self.eat_word("ASK") {
            self.eat_word("WHERE");
            let pattern = self.group()?;
            self.check_unsupported_word()?;
            return Ok(Query::ask(pattern));
        }
        if !self.eat_word("SELECT") {
            return Err(self.error_here("expected SELECT or ASK"));
        }
        let mut modifiers = Modifiers::default();
        self.check_unsupported_word()?;
        if self.eat_word("DISTINCT") {
            modifiers.distinct = true;
        }
        self.check_unsupported_word()?;
        let projection = if self.eat_punct("*") {
            Projection::All
        } else {
            let mut items = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Var(_)) => {
                        let Some(Tok::Var(v)) = self.next() else { unreachable!() };
                        items.push(ProjectionItem::Variable(Variable::new(v)));
                    }
                    Some(Tok::Punct("(")) => {
                        self.pos += 1;
                        items.push(ProjectionItem::Count(self.count_spec()?));
                    }
                    _ => break,
                }
            }
            if items.is_empty() {
                return Err(self.error_here("expected projection"));
            }
            Projection::Items(items)
        };
        self.check_unsupported_word()?;
        self.eat_word("WHERE");
        let pattern = self.group()?;
        loop {
            self.check_unsupported_word()?;
            if self.eat_word("GROUP") {
                self.expect_word("BY")?;
                while let Some(Tok::Var(v)) = self.peek().cloned() {
                    self.pos += 1;
                    modifiers.group_by.push(Variable::new(v));
                }
                if modifiers.group_by.is_empty() {
                    if self.is_punct("(") {
                        return Err(QueryError::Unsupported("GROUP BY expressions".into()));
                    }
                    return Err(self.error_here("expected variable after GROUP BY"));
                }
            } else if self.eat_word("ORDER") {
                self.expect_word("BY")?;
                loop {
                    if let Some(Tok::Var(v)) = self.peek().cloned() {
                        self.pos += 1;
                        modifiers.order_by.push(OrderKey { variable: Variable::new(v), descending: false });
                    } else if self.is_word("ASC") || self.is_word("DESC") {
                        let descending = self.is_word("DESC");
                        self.pos += 1;
                        self.expect_punct("(")?;
                        let v = match self.next() {
                            Some(Tok::Var(v)) => v,
                            _ => return Err(QueryError::Unsupported("ORDER BY expressions".into())),
                        };
                        self.expect_punct(")")?;
                        modifiers.order_by.push(OrderKey { variable: Variable::new(v), descending });
                    } else if self.is_punct("(") {
                        return Err(QueryError::Unsupported("ORDER BY expressions".into()));
                    } else {
                        break;
                    }
                }
                if modifiers.order_by.is_empty() {
                    return Err(self.error_here("expected ORDER BY key"));
                }
            } else if self.eat_word("LIMIT") {
                modifiers.limit = Some(self.nonneg_int()?);
            } else if self.eat_word("OFFSET") {
                modifiers.offset = Some(self.nonneg_int()?);
            } else {
                break;
            }
        }
        let q = Query { form: QueryForm::Select, projection, pattern, modifiers };
        validate_grouping(&q)?;
        Ok(q)
    }

    fn nonneg_int(&mut self) -> Result<usize, QueryError> {
        match self.next() {
            Some(Tok::Integer(s)) if !s.starts_with('-') => {
                s.trim_start_matches('+').parse().map_err(|_| self.error_here("integer out of range"))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error_here("expected non-negative integer"))
            }
        }
    }

    fn count_spec(&mut self) -> Result<CountSpec, QueryError> {
        let name = match self.next() {
            Some(Tok::Word(w)) => w,
            Some(Tok::Var(_)) => return Err(QueryError::Unsupported("projection expressions".into())),
            _ => return Err(self.error_here("expected aggregate")),
        };
        let upper = name.to_ascii_uppercase();
        if upper != "COUNT" {
            return Err(QueryError::Unsupported(match upper.as_str() {
                "SUM" | "AVG" | "MIN" | "MAX" | "SAMPLE" | "GROUP_CONCAT" => format!("{upper} aggregate"),
                _ => "projection expressions".into(),
            }));
        }
        self.expect_punct("(")?;
        let distinct = self.eat_word("DISTINCT");
        let argument = if self.eat_punct("*") {
            None
        } else {
            match self.next() {
                Some(Tok::Var(v)) => Some(Variable::new(v)),
                _ => return Err(QueryError::Unsupported("COUNT over expressions".into())),
            }
        };
        self.expect_punct(")")?;
        self.expect_word("AS")?;
        let alias = match self.next() {
            Some(Tok::Var(v)) => Variable::new(v),
            _ => return Err(self.error_here("expected alias variable")),
        };
        self.expect_punct(")")?;
        Ok(CountSpec { distinct, argument, alias })
    }

    /// `{ ... }` into an algebra tree.
    fn group(&mut self) -> Result<GraphPattern, QueryError> {
        self.expect_punct("{")?;
        if self.is_word("SELECT") {
            return Err(QueryError::Unsupported("subqueries".into()));
        }
        let mut current: Option<GraphPattern> = None;
        let mut pending: Vec<TriplePattern> = Vec::new();
        let mut filters: Vec<Expression> = Vec::new();
        loop {
            self.check_unsupported_word()?;
            if self.eat_punct("}") {
                break;
            }
            if self.eat_punct(".") {
                continue;
            }
            if self.eat_word("OPTIONAL") {
                flush(&mut current, &mut pending);
                let right = self.group()?;
                let left = current.take().unwrap_or(GraphPattern::Bgp(Vec::new()));
                current = Some(GraphPattern::Optional(Box::new(left), Box::new(right)));
            } else if self.eat_word("FILTER") {
                filters.push(self.constraint()?);
            } else if self.is_punct("{") {
                flush(&mut current, &mut pending);
                let mut u = self.group()?;
                while self.eat_word("UNION") {
                    let r = self.group()?;
                    u = GraphPattern::Union(Box::new(u), Box::new(r));
                }
                current = Some(match current.take() {
                    None => u,
                    Some(c) => GraphPattern::Join(Box::new(c), Box::new(u)),
                });
            } else if self.peek().is_none() {
                return Err(self.error_here("unterminated group pattern"));
            } else {
                self.triples_block(&mut pending)?;
            }
        }
        flush(&mut current, &mut pending);
        let mut pattern = current.unwrap_or(GraphPattern::Bgp(Vec::new()));
        if let Some(e) = Expression::and_all(filters) {
            pattern = GraphPattern::Filter(Box::new(pattern), e);
        }
        Ok(pattern)
    }

    fn triples_block(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.term_or_var("subject")?;
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.term_or_var("object")?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                if !self.eat_punct(",") {
                    break;
                }
            }
            if self.eat_punct(";") {
                while self.eat_punct(";") {}
                if self.is_punct(".") || self.is_punct("}") {
                    break;
                }
                continue;
            }
            break;
        }
        if !(self.is_punct(".")
            || self.is_punct("}")
            || self.is_word("FILTER")
            || self.is_word("OPTIONAL")
            || self.is_punct("{"))
        {
            self.check_unsupported_word()?;
            return Err(self.error_here("expected '.' or '}' after triple pattern"));
        }
        Ok(())
    }

    fn predicate(&mut self) -> Result<TermPattern, QueryError> {
        if matches!(self.peek(), Some(Tok::Punct("^" | "!" | "("))) {
            return Err(QueryError::Unsupported("property paths".into()));
        }
        let p = if self.is_word("a") {
            self.pos += 1;
            TermPattern::Term(Term::Iri(RDF_TYPE.into()))
        } else {
            self.term_or_var("predicate")?
        };
        if matches!(self.peek(), Some(Tok::Punct("/" | "|" | "*" | "+" | "?"))) {
            return Err(QueryError::Unsupported("property paths".into()));
        }
        Ok(p)
    }

    fn term_or_var(&mut self, position: &str) -> Result<TermPattern, QueryError> {
        match self.peek() {
            Some(Tok::Var(_)) => {
                let Some(Tok::Var(v)) = self.next() else { unreachable!() };
                Ok(TermPattern::Variable(Variable::new(v)))
            }
            Some(Tok::BNode(_)) | Some(Tok::Punct("[")) => {
                Err(QueryError::Unsupported("blank nodes in query patterns".into()))
            }
            Some(Tok::Punct("(")) => Err(QueryError::Unsupported("RDF collections".into())),
            _ => match self.term()? {
                Some(t) => Ok(TermPattern::Term(t)),
                None => Err(self.error_here(format!("expected {position}"))),
            },
        }
    }

    fn iri(&mut self) -> Result<Option<Term>, QueryError> {
        match self.peek().cloned() {
            Some(Tok::Iri(i)) => {
                self.pos += 1;
                Term::iri(i).map(Some).map_err(|e| self.error_here(e.to_string()))
            }
            Some(Tok::PName(prefix, local)) => {
                let Some(ns) = self.prefixes.get(&prefix) else {
                    return Err(self.error_here(format!("undeclared prefix '{prefix}:'")));
                };
                let full = format!("{ns}{}", unescape_local(&local));
                self.pos += 1;
                Term::iri(full).map(Some).map_err(|e| self.error_here(e.to_string()))
            }
            _ => Ok(None),
        }
    }

    /// IRI, literal, number, or boolean. `None` if the next token is none of those.
    fn term(&mut self) -> Result<Option<Term>, QueryError> {
        if let Some(t) = self.iri()? {
            return Ok(Some(t));
        }
        let t = match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::LangTag(l)) => {
                        self.pos += 1;
                        Term::lang_literal(s, l)
                    }
                    Some(Tok::Punct("^^")) => {
                        self.pos += 1;
                        match self.iri()? {
                            Some(dt) => Term::typed_literal(s, dt.lexical()),
                            None => return Err(self.error_here("expected datatype IRI")),
                        }
                    }
                    _ => Term::literal(s),
                }
            }
            Some(Tok::Integer(n)) => {
                self.pos += 1;
                Term::typed_literal(n, XSD_INTEGER)
            }
            Some(Tok::Decimal(n)) => {
                self.pos += 1;
                Term::typed_literal(n, XSD_DECIMAL)
            }
            Some(Tok::Double(n)) => {
                self.pos += 1;
                Term::typed_literal(n, XSD_DOUBLE)
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                self.pos += 1;
                Term::typed_literal(w, XSD_BOOLEAN)
            }
            _ => return Ok(None),
        };
        Ok(Some(t))
    }

    fn constraint(&mut self) -> Result<Expression, QueryError> {
        if self.is_punct("(") {
            self.pos += 1;
            let e = self.expression()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        match self.peek() {
            Some(Tok::Word(_)) => self.primary(),
            _ => Err(self.error_here("expected '(' or built-in call after FILTER")),
        }
    }

    fn expression(&mut self) -> Result<Expression, QueryError> {
        let mut left = self.and_expr()?;
        while self.eat_punct("||") {
            let right = self.and_expr()?;
            left = Expression::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expression, QueryError> {
        let mut left = self.relational()?;
        while self.eat_punct("&&") {
            let right = self.relational()?;
            left = Expression::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<Expression, QueryError> {
        let left = self.unary()?;
        let op = match self.peek() {
            Some(Tok::Punct("=")) => CompareOp::Eq,
            Some(Tok::Punct("!=")) => CompareOp::Ne,
            Some(Tok::Punct("<")) => CompareOp::Lt,
            Some(Tok::Punct("<=")) => CompareOp::Le,
            Some(Tok::Punct(">")) => CompareOp::Gt,
            Some(Tok::Punct(">=")) => CompareOp::Ge,
            Some(Tok::Punct("+" | "-" | "*" | "/")) => {
                return Err(QueryError::Unsupported("arithmetic expressions".into()))
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("IN") || w.eq_ignore_ascii_case("NOT") => {
                return Err(QueryError::Unsupported("IN / NOT IN".into()))
            }
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.unary()?;
        Ok(Expression::Compare(op, Box::new(left), Box::new(right)))
    }

    fn unary(&mut self) -> Result<Expression, QueryError> {
        if self.eat_punct("!") {
            return Ok(Expression::Not(Box::new(self.unary()?)));
        }
        if matches!(self.peek(), Some(Tok::Punct("-" | "+"))) {
            return Err(QueryError::Unsupported("arithmetic expressions".into()));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expression, QueryError> {
        if self.eat_punct("(") {
            let e = self.expression()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        if let Some(Tok::Var(v)) = self.peek().cloned() {
            self.pos += 1;
            return Ok(Expression::Variable(Variable::new(v)));
        }
        if let Some(Tok::Word(w)) = self.peek().cloned() {
            if w != "true" && w != "false" {
                self.pos += 1;
                return self.builtin(&w);
            }
        }
        if let Some(t) = self.term()? {
            if self.is_punct("(") {
                return Err(QueryError::Unsupported("extension function calls".into()));
            }
            return Ok(Expression::Constant(t));
        }
        Err(self.error_here("expected expression"))
    }

    fn builtin(&mut self, name: &str) -> Result<Expression, QueryError> {
        let upper = name.to_ascii_uppercase();
        let unary = |p: &mut Self| -> Result<Box<Expression>, QueryError> {
            p.expect_punct("(")?;
            let e = p.expression()?;
            p.expect_punct(")")?;
            Ok(Box::new(e))
        };
        match upper.as_str() {
            "BOUND" => {
                self.expect_punct("(")?;
                let v = match self.next() {
                    Some(Tok::Var(v)) => Variable::new(v),
                    _ => return Err(self.error_here("BOUND expects a variable")),
                };
                self.expect_punct(")")?;
                Ok(Expression::Bound(v))
            }
            "REGEX" => {
                self.expect_punct("(")?;
                let text = Box::new(self.expression()?);
                self.expect_punct(",")?;
                let pattern = Box::new(self.expression()?);
                let flags = if self.eat_punct(",") { Some(Box::new(self.expression()?)) } else { None };
                self.expect_punct(")")?;
                Ok(Expression::Regex { text, pattern, flags })
            }
            "STR" => Ok(Expression::Str(unary(self)?)),
            "LANG" => Ok(Expression::Lang(unary(self)?)),
            "ISIRI" | "ISURI" => Ok(Expression::IsIri(unary(self)?)),
            "ISLITERAL" => Ok(Expression::IsLiteral(unary(self)?)),
            "ISBLANK" => Ok(Expression::IsBlank(unary(self)?)),
            "EXISTS" | "NOT" => Err(QueryError::Unsupported("EXISTS / NOT EXISTS".into())),
            _ => Err(QueryError::Unsupported(format!("function {name}"))),
        }
    }
}

fn unescape_local(local: &str) -> String {
    let mut out = String::with_capacity(local.len());
    let mut chars = local.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn flush(current: &mut Option<GraphPattern>, pending: &mut Vec<TriplePattern>) {
    if pending.is_empty() {
        return;
    }
    let triples = std::mem::take(pending);
    *current = Some(match current.take() {
        None => GraphPattern::Bgp(triples),
        Some(GraphPattern::Bgp(mut existing)) => {
            existing.extend(triples);
            GraphPattern::Bgp(existing)
        }
        Some(other) => GraphPattern::Join(Box::new(other), Box::new(GraphPattern::Bgp(triples))),
    });
}

fn validate_grouping(q: &Query) -> Result<(), QueryError> {
    if !q.is_aggregate() {
        return Ok(());
    }
    let Projection::Items(items) = &q.projection else {
        return Err(QueryError::Invalid("SELECT * is not allowed with GROUP BY or aggregates".into()));
    };
    for item in items {
        if let ProjectionItem::Variable(v) = item {
            if !q.modifiers.group_by.contains(v) {
                return Err(QueryError::Invalid(format!("projected variable {v} must appear in GROUP BY")));
            }
        }
    }
    let mut seen = Vec::new();
    for v in q.result_variables() {
        if seen.contains(&v) {
            return Err(QueryError::Invalid(format!("variable {v} projected twice")));
        }
        seen.push(v);
    }
    Ok(())
}
