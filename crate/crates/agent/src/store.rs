//! Local observation storage. Core-protocol observations are (id, time)
//! pairs deduplicated per (id, epoch); signature-protocol observations are
//! the timeless (σ, R, h) triples, bucketed by day solely so retention can
//! age them out — the triple itself carries no timestamp.

use std::collections::{BTreeMap, HashSet};

use pact_alt_sig::StoredId;
use pact_core::{Observation, Params, PseudonymId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedactionPolicy {
    /// Full match times in alerts.
    None,
    /// Alerts carry the day of exposure only.
    #[default]
    DayGranularity,
    /// A bare at-risk flag.
    SuppressTime,
}

#[derive(Debug, Clone, Default)]
pub struct ObservationStore {
    core: Vec<Observation>,
    core_seen: HashSet<(Vec<u8>, u64)>,
    alt: BTreeMap<u64, Vec<StoredId>>,
    alt_seen: HashSet<StoredId>,
}

impl ObservationStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a heard core id, one record per (id, epoch).
    pub fn add_core(&mut self, id: PseudonymId, heard_at: u64, params: &Params) -> bool {
        let epoch = params.epoch_at(heard_at).index;
        if !self.core_seen.insert((id.as_bytes().to_vec(), epoch)) {
            return false;
        }
        self.core.push(Observation { id, heard_at });
        true
    }

    /// Records a validated alt triple under its retention bucket.
    pub fn add_alt(&mut self, triple: StoredId, day: u64) -> bool {
        if !self.alt_seen.insert(triple.clone()) {
            return false;
        }
        self.alt.entry(day).or_default().push(triple);
        true
    }

    pub fn core_observations(&self) -> &[Observation] {
        &self.core
    }

    pub fn alt_triples(&self) -> Vec<StoredId> {
        self.alt.values().flatten().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.core.len() + self.alt.values().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops everything aged `retention` or more. Returns the removed count.
    pub fn purge(&mut self, now: u64, retention: u64, params: &Params) -> usize {
        let mut removed = 0;
        let cutoff = now.saturating_sub(retention);
        self.core.retain(|obs| {
            // age == retention is already stale (inclusive cutoff).
            let stale = now.saturating_sub(obs.heard_at) >= retention;
            if stale {
                self.core_seen.remove(&(
                    obs.id.as_bytes().to_vec(),
                    params.epoch_at(obs.heard_at).index,
                ));
                removed += 1;
            }
            !stale
        });

        let day_cutoff = cutoff / pact_alt_sig::SECONDS_PER_DAY;
        let stale_days: Vec<u64> = self.alt.range(..day_cutoff).map(|(day, _)| *day).collect();
        for day in stale_days {
            if let Some(triples) = self.alt.remove(&day) {
                removed += triples.len();
                for t in triples {
                    self.alt_seen.remove(&t);
                }
            }
        }
        removed
    }

    pub(crate) fn from_parts(
        core: Vec<Observation>,
        alt: BTreeMap<u64, Vec<StoredId>>,
        params: &Params,
    ) -> Self {
        let mut store = ObservationStore {
            core_seen: core
                .iter()
                .map(|o| (o.id.as_bytes().to_vec(), params.epoch_at(o.heard_at).index))
                .collect(),
            alt_seen: alt.values().flatten().cloned().collect(),
            core,
            alt,
        };
        store.core.sort_by_key(|o| o.heard_at);
        store
    }

    pub(crate) fn alt_buckets(&self) -> &BTreeMap<u64, Vec<StoredId>> {
        &self.alt
    }
}
