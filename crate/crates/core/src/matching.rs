//! The checking side: regenerate a reported window into timed candidate ids
//! and match them against locally heard broadcasts.

use std::collections::HashMap;

use crate::entry::{Entry, EntryError};
use crate::params::Params;
use crate::prg;
use crate::types::PseudonymId;

/// A regenerated candidate: one pseudonym and the estimated start of the
/// epoch in which it was broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedId {
    pub id: PseudonymId,
    pub epoch_start: u64,
}

/// One heard broadcast, as recorded by a collector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub id: PseudonymId,
    pub heard_at: u64,
}

/// A confirmed overlap between an observation and a reported window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureEvent {
    pub id: PseudonymId,
    pub heard_at: u64,
    pub candidate_epoch_start: u64,
}

/// Regenerates the sequence of ids a report reveals, oldest first, with
/// their estimated epochs.
///
/// The count is the number of grid epochs touched by `[t_start, t_end]`
/// (t_start rounded down, t_end up — erring toward detection), capped at Δ.
/// Epoch estimates anchor at t_start's epoch; for chains older than Δ the
/// estimate can lag the true broadcast epoch by one dt, which the matching
/// slack below absorbs.
pub fn regenerate(entry: &Entry, params: &Params) -> Result<Vec<TimedId>, EntryError> {
    entry.validate(params)?;
    let first = params.epoch_at(entry.t_start);
    let last = params.epoch_at(entry.t_end);
    let count = (last.index - first.index + 1).min(params.window_epochs());

    let binding: &[u8] = match &entry.si {
        Some(si) => &si.vk,
        None => &[],
    };
    let mut out = Vec::with_capacity(count as usize);
    let mut seed = entry.window_seed.clone();
    for j in 0..count {
        // Seed length already validated, so the step cannot fail.
        let (next, id) = prg::step(&seed, binding, params).expect("validated seed");
        seed = next;
        out.push(TimedId {
            id,
            epoch_start: first.start + j * params.epoch_seconds(),
        });
    }
    Ok(out)
}

/// Matches observations against regenerated candidates.
///
/// An observation counts as exposure when its id equals a candidate id and
/// `|heard_at − epoch_start| ≤ dt + time_tolerance`: one epoch of inherent
/// slack (the id is valid anywhere inside its epoch) plus the caller's
/// allowance for clock skew. Events are returned in observation order, full
/// detail included — any redaction of times happens at the presentation
/// layer, not here.
pub fn match_exposure(
    observations: &[Observation],
    candidates: &[TimedId],
    params: &Params,
    time_tolerance: u64,
) -> Vec<ExposureEvent> {
    let mut by_id: HashMap<&[u8], Vec<u64>> = HashMap::new();
    for c in candidates {
        by_id
            .entry(c.id.as_bytes())
            .or_default()
            .push(c.epoch_start);
    }
    let slack = params.epoch_seconds() + time_tolerance;
    let mut events = Vec::new();
    for obs in observations {
        if let Some(starts) = by_id.get(obs.id.as_bytes()) {
            for &start in starts {
                if obs.heard_at.abs_diff(start) <= slack {
                    events.push(ExposureEvent {
                        id: obs.id.clone(),
                        heard_at: obs.heard_at,
                        candidate_epoch_start: start,
                    });
                }
            }
        }
    }
    events
}
