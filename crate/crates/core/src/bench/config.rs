use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fixtures::DELAYED_MEMBERS;
use crate::endpoint::Latency;
use crate::mediator::DEFAULT_PARALLELISM;

#[derive(Debug, thiserror::Error)]
pub enum BenchConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid bench config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CachingMode {
    On,
    Off,
    Both,
}

impl CachingMode {
    /// Arms to run, cache-off first so its probes count as the cold baseline.
    pub fn arms(self) -> &'static [bool] {
        match self {
            CachingMode::On => &[true],
            CachingMode::Off => &[false],
            CachingMode::Both => &[false, true],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Local,
    /// Local federation with added latency on selected members.
    Hybrid,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Local => "local",
            Scenario::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyOverride {
    pub latency_ms: u64,
    #[serde(default)]
    pub jitter_ms: u64,
}

impl From<LatencyOverride> for Latency {
    fn from(o: LatencyOverride) -> Self {
        Latency::from_millis(o.latency_ms, o.jitter_ms)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markdown: Option<PathBuf>,
}

/// Benchmark run description, read from TOML:
///
/// ```toml
/// federation = "federation.toml"
/// corpus = ["corpus"]
/// warmup_runs = 5
/// measured_runs = 5
/// caching = "both"
/// scenarios = ["local", "hybrid"]
/// parallelism = 16
///
/// [hybrid]
/// drugbank = { latency_ms = 50 }
///
/// [output]
/// json = "report.json"
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub federation: PathBuf,
    pub corpus: Vec<PathBuf>,
    #[serde(default = "default_runs")]
    pub warmup_runs: usize,
    #[serde(default = "default_runs")]
    pub measured_runs: usize,
    #[serde(default = "default_caching")]
    pub caching: CachingMode,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Per-member latency for the hybrid scenario; defaults to 50 ms on
    /// drugbank, uniprot and pubmed.
    #[serde(default = "default_hybrid")]
    pub hybrid: BTreeMap<String, LatencyOverride>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_runs() -> usize {
    5
}

fn default_caching() -> CachingMode {
    CachingMode::Both
}

fn default_scenarios() -> Vec<Scenario> {
    vec![Scenario::Local]
}

fn default_parallelism() -> usize {
    DEFAULT_PARALLELISM
}

pub fn default_hybrid() -> BTreeMap<String, LatencyOverride> {
    DELAYED_MEMBERS.iter().map(|id| (id.to_string(), LatencyOverride { latency_ms: 50, jitter_ms: 0 })).collect()
}

impl BenchConfig {
    pub fn new(federation: impl Into<PathBuf>, corpus: Vec<PathBuf>) -> Self {
        BenchConfig {
            federation: federation.into(),
            corpus,
            warmup_runs: default_runs(),
            measured_runs: default_runs(),
            caching: default_caching(),
            scenarios: default_scenarios(),
            parallelism: default_parallelism(),
            hybrid: default_hybrid(),
            output: OutputPaths::default(),
        }
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, BenchConfigError> {
        let invalid = |message: String| BenchConfigError::Invalid { path: origin.to_owned(), message };
        let config: BenchConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.validate().map_err(invalid)?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchConfigError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| BenchConfigError::Io { path: path.to_owned(), source })?;
        let mut config = Self::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.federation);
        config.corpus.iter_mut().for_each(resolve);
        for p in [&mut config.output.json, &mut config.output.csv, &mut config.output.markdown].into_iter().flatten() {
            resolve(p);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.measured_runs < 1 {
            return Err("measured_runs must be at least 1".into());
        }
        if self.parallelism < 1 {
            return Err("parallelism must be at least 1".into());
        }
        if self.scenarios.is_empty() {
            return Err("at least one scenario is required".into());
        }
        if self.corpus.is_empty() {
            return Err("at least one corpus path is required".into());
        }
        Ok(())
    }

    pub fn hybrid_latencies(&self) -> BTreeMap<String, Latency> {
        self.hybrid.iter().map(|(id, o)| (id.clone(), Latency::from(*o))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = BenchConfig::from_toml("federation = \"f.toml\"\ncorpus = [\"q\"]\n", Path::new("b.toml")).unwrap();
        assert_eq!((c.warmup_runs, c.measured_runs, c.caching), (5, 5, CachingMode::Both));
        assert_eq!(c.hybrid.len(), 3);
        assert_eq!(BenchConfig::from_toml(&c.to_toml(), Path::new("b.toml")).unwrap(), c);
    }

    #[test]
    fn rejects_zero_measured_runs() {
        let e = BenchConfig::from_toml("federation = \"f\"\ncorpus = [\"q\"]\nmeasured_runs = 0\n", Path::new("b"));
        assert!(matches!(e, Err(BenchConfigError::Invalid { .. })));
        let e = BenchConfig::from_toml("federation = \"f\"\ncorpus = [\"q\"]\nbogus = 1\n", Path::new("b"));
        assert!(e.is_err());
    }
}
