use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Endpoint, RemoteOptions, RequestStats};
use crate::rdf::{NTriplesError, Store};

#[derive(Debug, thiserror::Error)]
pub enum FederationError {
    #[error("a federation needs at least one member")]
    Empty,
    #[error("duplicate member id {0:?}")]
    DuplicateId(String),
    #[error("member {id:?}: {message}")]
    Member { id: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid federation config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Data(#[from] NTriplesError),
}

/// An ordered, non-empty list of members with distinct ids.
#[derive(Debug)]
pub struct Federation {
    members: Vec<Endpoint>,
}

impl Federation {
    pub fn new(members: Vec<Endpoint>) -> Result<Self, FederationError> {
        if members.is_empty() {
            return Err(FederationError::Empty);
        }
        let mut seen = HashSet::new();
        for m in &members {
            if !seen.insert(m.id()) {
                return Err(FederationError::DuplicateId(m.id().to_owned()));
            }
        }
        Ok(Federation { members })
    }

    /// One in-process member per `(id, store)` pair.
    pub fn from_stores<I, S>(stores: I) -> Result<Self, FederationError>
    where
        I: IntoIterator<Item = (S, Store)>,
        S: Into<String>,
    {
        Federation::new(stores.into_iter().map(|(id, s)| Endpoint::in_process(id, s)).collect())
    }

    pub fn members(&self) -> &[Endpoint] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Endpoint> {
        self.members.iter().find(|m| m.id() == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.members.iter().position(|m| m.id() == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(Endpoint::id)
    }

    /// Point-in-time copy of every member's counters.
    pub fn snapshot_counters(&self) -> BTreeMap<String, RequestStats> {
        self.members.iter().map(|m| (m.id().to_owned(), m.stats())).collect()
    }

    pub fn reset_counters(&self) {
        for m in &self.members {
            m.reset_stats();
        }
    }

    /// Copy of this federation with fresh counters, where listed members get
    /// a new latency and all others keep theirs.
    pub fn with_latency_overrides(&self, overrides: &BTreeMap<String, super::Latency>) -> Federation {
        let members = self
            .members
            .iter()
            .map(|m| match overrides.get(m.id()) {
                Some(l) => m.duplicate().with_latency(l.fixed, l.jitter),
                None => m.duplicate(),
            })
            .collect();
        Federation { members }
    }

    /// Copy of this federation with fresh counters and without `id`.
    pub fn without(&self, id: &str) -> Result<Federation, FederationError> {
        Federation::new(self.members.iter().filter(|m| m.id() != id).map(Endpoint::duplicate).collect())
    }
}

/// Snapshot convenience mirroring [`Federation::snapshot_counters`].
pub fn snapshot_counters(federation: &Federation) -> BTreeMap<String, RequestStats> {
    federation.snapshot_counters()
}

/// Federation config file (TOML).
///
/// ```toml
/// timeout_ms = 30000          # optional, remote members only
///
/// [[member]]
/// id = "drugbank"
/// data = ["drugbank.nt"]      # in-process member, paths relative to this file
/// latency_ms = 0
/// jitter_ms = 0
///
/// [[member]]
/// id = "uniprot"
/// url = "http://127.0.0.1:8890/uniprot/sparql"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[serde(default, rename = "member")]
    pub members: Vec<MemberConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data: Vec<PathBuf>,
    #[serde(default)]
    pub latency_ms: u64,
    #[serde(default)]
    pub jitter_ms: u64,
}

impl FederationConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, FederationError> {
        toml::from_str(text).map_err(|e| FederationError::Config { path: origin.to_owned(), message: e.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FederationError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| FederationError::Io { path: path.to_owned(), source })?;
        let mut config = FederationConfig::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for m in &mut config.members {
            for d in &mut m.data {
                if d.is_relative() {
                    *d = base.join(&*d);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Loads member data and connects remote members.
    pub fn build(&self) -> Result<Federation, FederationError> {
        let mut options = RemoteOptions::default();
        if let Some(ms) = self.timeout_ms {
            options.timeout = Duration::from_millis(ms);
        }
        if let Some(n) = self.pool_size {
            options.pool_size = n;
        }
        let mut members = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let endpoint = match (&m.url, m.data.is_empty()) {
                (Some(url), true) => Endpoint::remote(&m.id, url, options),
                (None, _) => {
                    let mut store = Store::new();
                    for path in &m.data {
                        store.load_file_into(path)?;
                    }
                    Endpoint::in_process(&m.id, Arc::new(store))
                }
                (Some(_), false) => {
                    return Err(FederationError::Member {
                        id: m.id.clone(),
                        message: "give either url or data, not both".into(),
                    })
                }
            };
            let latency = Duration::from_millis(m.latency_ms);
            members.push(endpoint.with_latency(latency, Duration::from_millis(m.jitter_ms)));
        }
        Federation::new(members)
    }
}
