use std::collections::{BTreeSet, HashMap};

use super::cache::{NormalizedPattern, Relevance, SelectionCache};
use super::pool::{parallel_try_map, Tally};
use crate::endpoint::{EndpointError, Federation};
use crate::rdf::TriplePattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// At least one member was asked.
    Probed,
    /// Every member's answer came from the cache.
    Cached,
}

/// Relevant members for one triple pattern, in federation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceEntry {
    pub relevant: Vec<String>,
    pub provenance: Provenance,
}

/// What to do when a member cannot be reached during source selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnreachablePolicy {
    #[default]
    Fail,
    /// Treat the member as irrelevant for the query.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSelection {
    /// One entry per input pattern.
    pub entries: Vec<SourceEntry>,
    pub ask_count: u64,
    /// Probes answered from the cache.
    pub savings_count: u64,
    /// Members skipped as unreachable.
    pub skipped: Vec<String>,
}

/// Determines the relevant members of every pattern with ASK probes.
/// α-equivalent patterns are probed once. With caching enabled, known
/// answers are reused and counted as savings; every probe answer is recorded
/// in the cache either way.
pub fn select_sources(
    patterns: &[TriplePattern],
    federation: &Federation,
    cache: &SelectionCache,
    caching_enabled: bool,
) -> Result<SourceSelection, EndpointError> {
    let tally = Tally::new(federation.len());
    select_sources_inner(patterns, federation, cache, caching_enabled, UnreachablePolicy::Fail, &tally)
}

pub(crate) fn select_sources_inner(
    patterns: &[TriplePattern],
    federation: &Federation,
    cache: &SelectionCache,
    caching_enabled: bool,
    policy: UnreachablePolicy,
    tally: &Tally,
) -> Result<SourceSelection, EndpointError> {
    let keys: Vec<NormalizedPattern> = patterns.iter().map(NormalizedPattern::of).collect();
    let mut distinct: Vec<usize> = Vec::new();
    let mut first_of: HashMap<&NormalizedPattern, usize> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        first_of.entry(k).or_insert_with(|| {
            distinct.push(i);
            i
        });
    }

    let members = federation.members();
    // answers[pattern index][member index]
    let mut answers: HashMap<usize, Vec<Option<bool>>> = HashMap::new();
    let mut probes: Vec<(usize, usize)> = Vec::new();
    let mut savings = 0;
    for &i in &distinct {
        let row = answers.entry(i).or_insert_with(|| vec![None; members.len()]);
        for (m, member) in members.iter().enumerate() {
            let known = if caching_enabled { cache.lookup(&keys[i], member.id()) } else { Relevance::Unknown };
            match known {
                Relevance::Relevant => row[m] = Some(true),
                Relevance::Irrelevant => row[m] = Some(false),
                Relevance::Unknown => probes.push((i, m)),
            }
            if known != Relevance::Unknown {
                savings += 1;
            }
        }
    }

    let probed_patterns: BTreeSet<usize> = probes.iter().map(|&(i, _)| i).collect();
    let workers = members.len().max(1);
    let outcomes = parallel_try_map(&probes, workers, |&(i, m)| {
        tally.ask(m);
        match members[m].ask(&patterns[i]) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.is_unreachable() && policy == UnreachablePolicy::Skip => Ok(None),
            Err(e) => Err(e),
        }
    })?;

    let mut skipped = BTreeSet::new();
    for (&(i, m), outcome) in probes.iter().zip(outcomes) {
        match outcome {
            Some(b) => {
                cache.record(&keys[i], members[m].id(), b);
                answers.get_mut(&i).expect("row exists")[m] = Some(b);
            }
            None => {
                skipped.insert(m);
            }
        }
    }

    let entries = keys
        .iter()
        .map(|k| {
            let i = first_of[k];
            let relevant = answers[&i]
                .iter()
                .enumerate()
                .filter(|(_, a)| **a == Some(true))
                .map(|(m, _)| members[m].id().to_owned())
                .collect();
            let provenance = if probed_patterns.contains(&i) { Provenance::Probed } else { Provenance::Cached };
            SourceEntry { relevant, provenance }
        })
        .collect();
    Ok(SourceSelection {
        entries,
        ask_count: probes.len() as u64,
        savings_count: savings,
        skipped: skipped.into_iter().map(|m| members[m].id().to_owned()).collect(),
    })
}
