use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Measurements for one (query, scenario, caching mode).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub query: String,
    pub scenario: String,
    pub caching: bool,
    /// Elapsed milliseconds of each measured run.
    pub runs_ms: Vec<f64>,
    pub geomean_ms: f64,
    /// Select plus ASK requests of the last measured run.
    pub requests: u64,
    pub select_requests: u64,
    pub ask_count: u64,
    /// Requests of the last measured run that went to the members delayed in
    /// the hybrid scenario.
    pub delayed_requests: u64,
    /// Cold-run ASK count minus the last measured run's ASK count.
    pub savings: u64,
    pub cardinality: usize,
    pub per_endpoint: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Relevant-member counts of one query's patterns from an uncached selection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionStats {
    pub query: String,
    pub pattern_count: usize,
    pub min: usize,
    pub max: usize,
    pub avg: f64,
    pub per_pattern: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SelectionStats {
    pub fn from_counts(query: impl Into<String>, per_pattern: Vec<usize>) -> Self {
        let n = per_pattern.len();
        SelectionStats {
            query: query.into(),
            pattern_count: n,
            min: per_pattern.iter().copied().min().unwrap_or(0),
            max: per_pattern.iter().copied().max().unwrap_or(0),
            avg: if n == 0 { 0.0 } else { per_pattern.iter().sum::<usize>() as f64 / n as f64 },
            per_pattern,
            error: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub queries: Vec<QueryReport>,
    pub source_selection: Vec<SelectionStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Malformed(String),
}

pub const CSV_HEADER: [&str; 13] = [
    "query",
    "scenario",
    "caching",
    "runs_ms",
    "geomean_ms",
    "requests",
    "select_requests",
    "ask_count",
    "delayed_requests",
    "savings",
    "cardinality",
    "per_endpoint",
    "error",
];

pub fn round_ms(ms: f64) -> f64 {
    (ms * 1000.0).round() / 1000.0
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Malformed(e.to_string()))
    }

    /// One row per (query, scenario, caching mode). Lists are joined with
    /// `;`, per-endpoint counts as `id=n`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for q in &self.queries {
            let runs = q.runs_ms.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(";");
            let endpoints = q.per_endpoint.iter().map(|(id, n)| format!("{id}={n}")).collect::<Vec<_>>().join(";");
            w.write_record([
                q.query.clone(),
                q.scenario.clone(),
                on_off(q.caching).to_owned(),
                runs,
                q.geomean_ms.to_string(),
                q.requests.to_string(),
                q.select_requests.to_string(),
                q.ask_count.to_string(),
                q.delayed_requests.to_string(),
                q.savings.to_string(),
                q.cardinality.to_string(),
                endpoints,
                q.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
    }

    /// Reads the per-query rows written by [`Report::to_csv`].
    pub fn queries_from_csv(text: &str) -> Result<Vec<QueryReport>, ReportError> {
        let bad = |e: String| ReportError::Malformed(e);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut out = Vec::new();
        for record in r.records() {
            let rec = record.map_err(|e| bad(e.to_string()))?;
            let num = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[i])));
            let runs_ms = if rec[3].is_empty() {
                Vec::new()
            } else {
                rec[3].split(';').map(|s| s.parse::<f64>().map_err(|e| bad(e.to_string()))).collect::<Result<_, _>>()?
            };
            let mut per_endpoint = BTreeMap::new();
            for part in rec[11].split(';').filter(|s| !s.is_empty()) {
                let (id, n) = part.rsplit_once('=').ok_or_else(|| bad(format!("bad endpoint entry {part:?}")))?;
                per_endpoint.insert(id.to_owned(), n.parse().map_err(|e| bad(format!("{part}: {e}")))?);
            }
            out.push(QueryReport {
                query: rec[0].to_owned(),
                scenario: rec[1].to_owned(),
                caching: match &rec[2] {
                    "on" => true,
                    "off" => false,
                    other => return Err(bad(format!("caching must be on or off, got {other:?}"))),
                },
                runs_ms,
                geomean_ms: rec[4].parse().map_err(|e| bad(format!("geomean_ms: {e}")))?,
                requests: num(5)?,
                select_requests: num(6)?,
                ask_count: num(7)?,
                delayed_requests: num(8)?,
                savings: num(9)?,
                cardinality: num(10)? as usize,
                per_endpoint,
                error: Some(rec[12].to_owned()).filter(|e| !e.is_empty()),
            });
        }
        Ok(out)
    }

    /// Request/time table and source-selection table.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("## Query evaluation\n\n");
        s.push_str("| Query | Scenario | Cache | Time (ms) | #Req | #Req (delayed) | #ASK | #Savings | Results |\n");
        s.push_str("|---|---|---|---:|---:|---:|---:|---:|---:|\n");
        for q in &self.queries {
            if let Some(e) = &q.error {
                let _ =
                    writeln!(s, "| {} | {} | {} | error: {} | | | | | |", q.query, q.scenario, on_off(q.caching), e);
                continue;
            }
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {} | {} | {} | {} | {} |",
                q.query,
                q.scenario,
                on_off(q.caching),
                q.geomean_ms,
                q.requests,
                q.delayed_requests,
                q.ask_count,
                q.savings,
                q.cardinality
            );
        }
        s.push_str("\n## Source selection\n\n");
        s.push_str(&self.selection_table());
        s
    }

    /// Markdown table of min/max/avg relevant members per query.
    pub fn selection_table(&self) -> String {
        let mut s = String::new();
        s.push_str("| Query | #Patterns | Min | Max | Avg |\n|---|---:|---:|---:|---:|\n");
        for sel in &self.source_selection {
            match &sel.error {
                Some(e) => {
                    let _ = writeln!(s, "| {} | error: {} | | | |", sel.query, e);
                }
                None => {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {} | {:.2} |",
                        sel.query, sel.pattern_count, sel.min, sel.max, sel.avg
                    );
                }
            }
        }
        s
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }

    pub fn emit(&self, format: ReportFormat, path: &Path) -> Result<(), ReportError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| ReportError::Io { path: dir.to_owned(), source })?;
        }
        std::fs::write(path, self.render(format)).map_err(|source| ReportError::Io { path: path.to_owned(), source })
    }
}
