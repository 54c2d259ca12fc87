//! Benchmark driver: synthetic fixtures, the query corpus, timed runs with
//! request accounting, and report output.

mod config;
mod corpus;
pub mod fixtures;
mod geomean;
mod report;
mod run;

pub use config::{BenchConfig, BenchConfigError, CachingMode, LatencyOverride, OutputPaths, Scenario};
pub use corpus::{builtin_corpus, builtin_query, load_corpus, write_corpus, CorpusQuery};
pub use fixtures::{FixtureManifest, FixtureSpec};
pub use geomean::{geometric_mean, geometric_mean_duration, GeometricMeanError};
pub use report::{QueryReport, Report, ReportError, ReportFormat, SelectionStats};
pub use run::{run_benchmark, run_suite, source_selection_report, BenchError};
