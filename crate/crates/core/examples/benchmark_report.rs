//! Run the corpus with caching on and off and print the Markdown report.

use fedmesh::bench::fixtures::{generate_members, FixtureSpec};
use fedmesh::bench::{builtin_corpus, run_suite, BenchConfig, ReportFormat};
use fedmesh::endpoint::Federation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let federation = Federation::from_stores(generate_members(&FixtureSpec::new(1, 29).scale(20)))?;
    let mut config = BenchConfig::new("in-memory", Vec::new());
    config.warmup_runs = 1;
    config.measured_runs = 3;
    let report = run_suite(&federation, &builtin_corpus(), &config);
    print!("{}", report.render(ReportFormat::Markdown));
    Ok(())
}
