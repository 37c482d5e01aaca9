//! Ground truth, computed from the schedule alone — no chains, no registry.
//!
//! A report consumes the identity before that tick's broadcast, so the
//! revealed window covers the Δ broadcast instants strictly before the
//! processing tick `P` (the first tick at or after the report time,
//! deferred by any positive clock skew). An agent is at risk from a
//! positive if some shared co-location contains an epoch tick `u` with
//! `P − Δ·dt ≤ u < P`.

use std::collections::BTreeSet;

use crate::scenario::Scenario;

/// The tick at which a positive's report is processed.
pub fn report_tick(scenario: &Scenario, positive_idx: usize) -> u64 {
    let positive = &scenario.positives[positive_idx];
    let skew = scenario
        .agents
        .iter()
        .find(|a| a.name == positive.agent)
        .map(|a| a.skew.max(0) as u64)
        .unwrap_or(0);
    let due = positive.report_at + skew;
    let first_tick = due.div_ceil(scenario.dt) * scenario.dt;
    // Anything due past the last loop tick is settled at the end.
    first_tick.min(scenario.end_time())
}

/// (at-risk agent, positive agent) pairs.
pub fn oracle_exposures(scenario: &Scenario) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    let window = scenario.delta * scenario.dt;
    for (pos_idx, positive) in scenario.positives.iter().enumerate() {
        let p = report_tick(scenario, pos_idx);
        let window_start = p.saturating_sub(window);
        for colocation in &scenario.colocations {
            let listener = if colocation.a == positive.agent {
                &colocation.b
            } else if colocation.b == positive.agent {
                &colocation.a
            } else {
                continue;
            };
            let stop = colocation.end.min(scenario.end_time()).min(p);
            let mut tick = colocation.start.div_ceil(scenario.dt) * scenario.dt;
            tick = tick.max(window_start);
            if tick < stop {
                out.insert((listener.clone(), positive.agent.clone()));
            }
        }
    }
    out
}

/// The agents the oracle marks at risk, regardless of which positive
/// exposed them.
pub fn oracle_at_risk(scenario: &Scenario) -> BTreeSet<String> {
    oracle_exposures(scenario)
        .into_iter()
        .map(|(listener, _)| listener)
        .collect()
}
