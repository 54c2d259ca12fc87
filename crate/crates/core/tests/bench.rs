//! Fixture generation, benchmark runs, and report formats.

use std::path::PathBuf;

use proptest::prelude::*;

use fedmesh::bench::fixtures::{generate_members, write_fixtures, FixtureSpec};
use fedmesh::bench::{
    builtin_corpus, geometric_mean, load_corpus, run_benchmark, BenchConfig, CachingMode, FixtureManifest, Report,
    ReportFormat, Scenario,
};
use fedmesh::endpoint::FederationConfig;
use fedmesh::mediator::{mediate, MediatorOptions, SelectionCache};

proptest! {
    #[test]
    fn geomean_lies_between_min_and_max(values in prop::collection::vec(1e-9f64..1e9, 1..40)) {
        let g = geometric_mean(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        prop_assert!(g >= lo * (1.0 - 1e-12) && g <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn geomean_is_scale_equivariant(values in prop::collection::vec(1e-3f64..1e3, 1..40), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let a = geometric_mean(&scaled).unwrap();
        let b = c * geometric_mean(&values).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b);
    }
}

#[test]
fn generated_fixtures_reproduce_their_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FixtureSpec::new(7, 29).scale(6);
    let manifest = write_fixtures(&spec, dir.path()).unwrap();
    assert_eq!(manifest.triples.len(), 29);
    assert_eq!(FixtureManifest::load(&dir.path().join("manifest.toml")).unwrap(), manifest);

    let again = tempfile::tempdir().unwrap();
    assert_eq!(write_fixtures(&spec, again.path()).unwrap(), manifest);
    let a = std::fs::read(dir.path().join("data/drugbank.nt")).unwrap();
    let b = std::fs::read(again.path().join("data/drugbank.nt")).unwrap();
    assert_eq!(a, b);

    let fed = FederationConfig::load(dir.path().join("federation.toml")).unwrap().build().unwrap();
    let corpus = load_corpus(&[dir.path().join("corpus")]).unwrap();
    assert_eq!(corpus.len(), builtin_corpus().len());
    for q in &corpus {
        let m = mediate(&q.text, &fed, &SelectionCache::new(), &MediatorOptions::default()).unwrap();
        assert_eq!(m.results.cardinality(), manifest.cardinalities[&q.name], "{}", q.name);
    }
}

#[test]
fn members_cover_the_same_data_at_any_split() {
    let count =
        |members| generate_members(&FixtureSpec::new(3, members).scale(5)).iter().map(|(_, s)| s.len()).sum::<usize>();
    assert_eq!(count(5), count(29));
    assert_eq!(count(1), count(29));
}

#[test]
fn benchmark_run_writes_every_report_format() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(&FixtureSpec::new(1, 5).scale(4), dir.path()).unwrap();
    let mut config = BenchConfig::load(dir.path().join("bench.toml")).unwrap();
    config.corpus = vec![dir.path().join("corpus/LS2.rq"), dir.path().join("corpus/LLD9.rq")];
    config.warmup_runs = 1;
    config.measured_runs = 2;
    config.caching = CachingMode::Both;
    config.scenarios = vec![Scenario::Local, Scenario::Hybrid];
    for h in config.hybrid.values_mut() {
        h.latency_ms = 1;
    }
    let report = run_benchmark(&config).unwrap();
    assert_eq!(report.queries.len(), 2 * 2 * 2);
    assert_eq!(report.source_selection.len(), 2);
    for row in &report.queries {
        assert!(row.error.is_none(), "{row:?}");
        assert_eq!(row.runs_ms.len(), 2);
        assert!(row.geomean_ms > 0.0);
        if row.caching {
            assert_eq!(row.ask_count, 0, "{row:?}");
            let patterns = if row.query == "LS2" { 3 } else { 1 };
            assert_eq!(row.savings, 5 * patterns, "{row:?}");
        }
    }

    let json = std::fs::read_to_string(config.output.json.clone().unwrap()).unwrap();
    assert_eq!(Report::from_json(&json).unwrap(), report);
    let csv = std::fs::read_to_string(config.output.csv.clone().unwrap()).unwrap();
    let parsed = Report::queries_from_csv(&csv).unwrap();
    assert_eq!(parsed.len(), report.queries.len());
    for (a, b) in parsed.iter().zip(&report.queries) {
        assert_eq!((a.cardinality, a.savings, &a.per_endpoint), (b.cardinality, b.savings, &b.per_endpoint));
    }
    let md = std::fs::read_to_string(config.output.markdown.clone().unwrap()).unwrap();
    assert!(md.contains("LS2") && md.contains("LLD9"));
    assert_eq!(report.render(ReportFormat::Markdown), md);
}

#[test]
fn config_round_trips_and_rejects_nonsense() {
    let origin = PathBuf::from("/tmp/b.toml");
    let config = BenchConfig::new("/tmp/federation.toml", vec!["/tmp/corpus".into()]);
    assert_eq!(BenchConfig::from_toml(&config.to_toml(), &origin).unwrap(), config);
    let mut bad = config.clone();
    bad.measured_runs = 0;
    assert!(BenchConfig::from_toml(&bad.to_toml(), &origin).is_err());
    assert!(BenchConfig::from_toml("federation = 3", &origin).is_err());
}
