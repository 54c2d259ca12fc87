use std::collections::BTreeMap;
use std::time::Instant;

use super::config::{BenchConfig, BenchConfigError, Scenario};
use super::corpus::{load_corpus, CorpusQuery};
use super::geomean::geometric_mean;
use super::report::{round_ms, QueryReport, Report, ReportError, ReportFormat, SelectionStats};
use crate::endpoint::{EndpointError, Federation, FederationConfig, FederationError};
use crate::mediator::{mediate, select_sources, ExecutionTrace, MediatorOptions, SelectionCache};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] BenchConfigError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error("cannot read corpus: {0}")]
    Corpus(#[source] std::io::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Runs every query of `corpus` per scenario and caching arm: `warmup_runs`
/// unmeasured executions, then `measured_runs` timed ones. Each arm starts
/// from an empty selection cache. Queries run one at a time; a failing query
/// gets an error row and the run continues.
pub fn run_suite(federation: &Federation, corpus: &[CorpusQuery], config: &BenchConfig) -> Report {
    let delayed: Vec<String> = config.hybrid.keys().cloned().collect();
    let mut queries = Vec::new();
    for &scenario in &config.scenarios {
        let fed = match scenario {
            Scenario::Local => federation.with_latency_overrides(&BTreeMap::new()),
            Scenario::Hybrid => federation.with_latency_overrides(&config.hybrid_latencies()),
        };
        for q in corpus {
            for &caching in config.caching.arms() {
                let options = MediatorOptions { caching, parallelism: config.parallelism, ..Default::default() };
                let mut row = measure(&fed, q, &options, config.warmup_runs, config.measured_runs, &delayed);
                row.scenario = scenario.name().to_owned();
                queries.push(row);
            }
        }
    }
    Report { queries, source_selection: source_selection_report(corpus, federation) }
}

fn measure(
    federation: &Federation,
    query: &CorpusQuery,
    options: &MediatorOptions,
    warmup: usize,
    measured: usize,
    delayed: &[String],
) -> QueryReport {
    let mut row = QueryReport { query: query.name.clone(), caching: options.caching, ..Default::default() };
    let cache = SelectionCache::new();
    let mut cold_asks = None;
    let mut last: Option<ExecutionTrace> = None;
    let mut cardinality = None;
    for i in 0..warmup + measured {
        let started = Instant::now();
        let outcome = mediate(&query.text, federation, &cache, options);
        let elapsed = started.elapsed();
        let m = match outcome {
            Ok(m) => m,
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        };
        cold_asks.get_or_insert(m.trace.ask_requests);
        let n = m.results.cardinality();
        if *cardinality.get_or_insert(n) != n {
            row.error = Some(format!("result cardinality varied across runs ({} vs {n})", cardinality.unwrap()));
            return row;
        }
        if i >= warmup {
            row.runs_ms.push(round_ms(elapsed.as_secs_f64() * 1000.0));
        }
        last = Some(m.trace);
    }
    let trace = last.expect("at least one measured run");
    let positive: Vec<f64> = row.runs_ms.iter().map(|&r| r.max(1e-3)).collect();
    row.geomean_ms = round_ms(geometric_mean(&positive).expect("non-empty positive runs"));
    row.requests = trace.requests();
    row.select_requests = trace.select_requests;
    row.ask_count = trace.ask_requests;
    row.delayed_requests = trace.requests_to(delayed.iter().map(String::as_str));
    row.savings = cold_asks.unwrap_or(0).saturating_sub(trace.ask_requests);
    row.cardinality = cardinality.unwrap_or(0);
    row.per_endpoint =
        trace.per_endpoint.iter().map(|(id, r)| (id.clone(), r.select_requests + r.ask_requests)).collect();
    row
}

/// Relevant-member counts per pattern from a fresh, uncached selection.
pub fn source_selection_report(corpus: &[CorpusQuery], federation: &Federation) -> Vec<SelectionStats> {
    corpus
        .iter()
        .map(|q| match selection_counts(q, federation) {
            Ok(counts) => SelectionStats::from_counts(q.name.clone(), counts),
            Err(e) => SelectionStats { query: q.name.clone(), error: Some(e), ..Default::default() },
        })
        .collect()
}

fn selection_counts(q: &CorpusQuery, federation: &Federation) -> Result<Vec<usize>, String> {
    let query = q.parse().map_err(|e| e.to_string())?;
    let patterns: Vec<_> = query.triple_patterns().into_iter().cloned().collect();
    let selection = select_sources(&patterns, federation, &SelectionCache::new(), false)
        .map_err(|e: EndpointError| e.to_string())?;
    Ok(selection.entries.iter().map(|e| e.relevant.len()).collect())
}

/// Loads the federation and corpus named by `config`, runs the suite, and
/// writes the configured outputs.
pub fn run_benchmark(config: &BenchConfig) -> Result<Report, BenchError> {
    config.validate().map_err(|message| BenchConfigError::Invalid { path: "<config>".into(), message })?;
    let federation = FederationConfig::load(&config.federation)?.build()?;
    let corpus = load_corpus(&config.corpus).map_err(BenchError::Corpus)?;
    let report = run_suite(&federation, &corpus, config);
    let outputs = [
        (ReportFormat::Json, &config.output.json),
        (ReportFormat::Csv, &config.output.csv),
        (ReportFormat::Markdown, &config.output.markdown),
    ];
    for (format, path) in outputs {
        if let Some(path) = path {
            report.emit(format, path)?;
        }
    }
    Ok(report)
}
