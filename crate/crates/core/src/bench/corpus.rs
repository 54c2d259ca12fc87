use std::path::{Path, PathBuf};

use crate::sparql::{parse_query, Query, QueryError};

/// A named query text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusQuery {
    pub name: String,
    pub text: String,
}

impl CorpusQuery {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        CorpusQuery { name: name.into(), text: text.into() }
    }

    pub fn parse(&self) -> Result<Query, QueryError> {
        parse_query(&self.text)
    }
}

macro_rules! corpus_file {
    ($name:literal) => {
        ($name, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus/", $name, ".rq")))
    };
}

const BUILTIN: [(&str, &str); 17] = [
    corpus_file!("LS1"),
    corpus_file!("LS2"),
    corpus_file!("LS3"),
    corpus_file!("LS4"),
    corpus_file!("LS5"),
    corpus_file!("LS6"),
    corpus_file!("LS7"),
    corpus_file!("LLD1"),
    corpus_file!("LLD2"),
    corpus_file!("LLD3"),
    corpus_file!("LLD4"),
    corpus_file!("LLD5"),
    corpus_file!("LLD6"),
    corpus_file!("LLD7"),
    corpus_file!("LLD8"),
    corpus_file!("LLD9"),
    corpus_file!("LLD10"),
];

/// The 17 life-science and linked-data queries written against the
/// synthetic federation, in benchmark order.
pub fn builtin_corpus() -> Vec<CorpusQuery> {
    BUILTIN.iter().map(|(n, t)| CorpusQuery::new(*n, *t)).collect()
}

pub fn builtin_query(name: &str) -> Option<CorpusQuery> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(n, t)| CorpusQuery::new(*n, *t))
}

/// Sorts LS before LLD and numerically within each family; other names sort
/// lexically after them.
fn order_key(name: &str) -> (u8, String, u64) {
    let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (prefix, digits) = name.split_at(split);
    let family = match prefix {
        "LS" => 0,
        "LLD" => 1,
        _ => 2,
    };
    match digits.parse() {
        Ok(n) => (family, prefix.to_owned(), n),
        Err(_) => (2, name.to_owned(), 0),
    }
}

/// Loads queries from `.rq` files and directories of `.rq` files. The query
/// name is the file stem.
pub fn load_corpus(paths: &[PathBuf]) -> std::io::Result<Vec<CorpusQuery>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "rq"))
                .collect();
            files.sort_by_key(|p| order_key(&stem(p)));
            for f in files {
                out.push(CorpusQuery::new(stem(&f), std::fs::read_to_string(&f)?));
            }
        } else {
            out.push(CorpusQuery::new(stem(path), std::fs::read_to_string(path)?));
        }
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Writes each query to `dir/<name>.rq`.
pub fn write_corpus(dir: &Path, queries: &[CorpusQuery]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for q in queries {
        std::fs::write(dir.join(format!("{}.rq", q.name)), &q.text)?;
    }
    Ok(())
}
