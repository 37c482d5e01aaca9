//! The simulator. One virtual clock drives epoch ticks; a co-location
//! interval delivers every broadcast emitted during it (lossless unless the
//! scenario says otherwise); reports, publication delays and syncs all run
//! against one in-process registry. Identical scenario + seed gives
//! identical results, bit for bit.
//!
//! Timing convention: agent-side times are `tick + skew` (clamped at zero);
//! the registry always runs on the global clock. Reports are submitted at
//! the first tick past `report_at` adjusted for positive skew, before that
//! tick's broadcasts, which keeps fast-clock entries out of the registry's
//! future-check for skews up to one epoch.

use std::collections::{BTreeMap, BTreeSet};

use pact_agent::{Agent, AgentConfig, Alert, BroadcastPayload, InProcessRegistry, ProtocolKind};
use pact_core::{Params, PseudonymId};
use pact_registry::{Registry, RegistryConfig, SignaturePolicy, SubmitOutcome};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::oracle::{oracle_at_risk, oracle_exposures};
use crate::scenario::{AttackSpec, Scenario, ScenarioError};

#[derive(Debug, Clone, Default, Serialize)]
pub struct AgentStats {
    pub adopter: bool,
    pub alerted: bool,
    pub broadcasts: u64,
    pub broadcast_bytes: u64,
    pub stored_observations: u64,
    pub submit_calls: u64,
    pub fetch_calls: u64,
    pub alerts: Vec<Alert>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AttackOutcome {
    pub kind: String,
    /// Agents alerted that the ground-truth oracle does not mark at risk.
    pub false_alerts: u64,
    /// Listening posts whose recordings linked to a published window.
    pub linked_posts: u64,
    pub accepted_submissions: u64,
    pub rejected_submissions: u64,
    /// Dual-scheme attacks: did the attack work there, and did the same
    /// attempt work against the seed chain.
    pub dual_succeeded: Option<bool>,
    pub core_succeeded: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub alerted: BTreeSet<String>,
    pub oracle_at_risk: BTreeSet<String>,
    pub oracle_pairs: BTreeSet<(String, String)>,
    pub per_agent: BTreeMap<String, AgentStats>,
    pub attack_outcomes: Vec<AttackOutcome>,
    pub published_entries: u64,
}

/// Runs a scenario (attacks included if declared) to completion, including
/// the settlement phase: a final release past the publication delay and one
/// last sync so nothing in flight is missed.
pub fn run_scenario(scenario: &Scenario) -> Result<RunResult, ScenarioError> {
    scenario.validate()?;
    let params = Params::new(128, scenario.dt, scenario.delta, 0).expect("scenario params");
    let mut master = ChaCha20Rng::seed_from_u64(scenario.seed);

    let mut registry_config = RegistryConfig::new(params);
    registry_config.delay = scenario.registry_delay();
    registry_config.shuffle = scenario.registry.shuffle;
    registry_config.shuffle_seed = Some(master.next_u64());
    registry_config.require_strong_integrity =
        scenario.protocol == ProtocolKind::CoreStrongIntegrity;
    let mut registry = Registry::new(registry_config, SignaturePolicy::new());

    // Seed-sharing colluders run one identity: same agent seed.
    let mut agent_seeds: Vec<u64> = (0..scenario.agents.len())
        .map(|_| master.next_u64())
        .collect();
    for attack in &scenario.attacks {
        if let AttackSpec::SeedSharing { colluders } = attack {
            let shared = agent_seeds[scenario.agent_index(&colluders[0]).unwrap()];
            for name in colluders {
                agent_seeds[scenario.agent_index(name).unwrap()] = shared;
            }
        }
    }

    let local = |tick: u64, skew: i64| -> u64 { (tick as i64 + skew).max(0) as u64 };

    let mut agents: Vec<Option<Agent>> = Vec::with_capacity(scenario.agents.len());
    let mut stats: BTreeMap<String, AgentStats> = BTreeMap::new();
    for (idx, spec) in scenario.agents.iter().enumerate() {
        stats.insert(
            spec.name.clone(),
            AgentStats {
                adopter: spec.adopter,
                ..AgentStats::default()
            },
        );
        if spec.adopter {
            let mut config = AgentConfig::new(params, scenario.protocol, spec.name.clone());
            config.time_tolerance = scenario.tolerance();
            // Keep observations a day past the window so publication delay
            // and sync cadence never race retention.
            config.retention = params.window_seconds() + 86_400;
            agents.push(Some(
                Agent::new(config, agent_seeds[idx], local(0, spec.skew)).expect("agent init"),
            ));
        } else {
            agents.push(None);
        }
    }

    let mut drop_rng = ChaCha20Rng::seed_from_u64(master.next_u64());
    let mut flood_rng = ChaCha20Rng::seed_from_u64(master.next_u64());

    // Adversary state.
    let mut replay_cursor = 0u64;
    let mut linkage_records: BTreeMap<String, Vec<(Vec<u8>, u64)>> = BTreeMap::new();
    let mut floods_done: BTreeSet<usize> = BTreeSet::new();
    let mut attack_outcomes: Vec<AttackOutcome> = scenario
        .attacks
        .iter()
        .map(|a| AttackOutcome {
            kind: match a {
                AttackSpec::Replay { .. } => "replay",
                AttackSpec::Relay { .. } => "relay",
                AttackSpec::SeedSharing { .. } => "seed-sharing",
                AttackSpec::Flood { .. } => "flood",
                AttackSpec::Linkage { .. } => "linkage",
                AttackSpec::DualFraming { .. } => "dual-framing",
                AttackSpec::DualSurveillance { .. } => "dual-surveillance",
            }
            .to_string(),
            ..AttackOutcome::default()
        })
        .collect();

    // Dual-scheme attacks run in their own little world, seeded from the
    // scenario so the whole run stays reproducible.
    for (attack_idx, attack) in scenario.attacks.iter().enumerate() {
        match attack {
            AttackSpec::DualFraming { core_guesses } => {
                let report =
                    crate::attacks::run_dual_framing(scenario.seed, *core_guesses as usize);
                let outcome = &mut attack_outcomes[attack_idx];
                outcome.dual_succeeded = Some(report.dual_succeeded);
                outcome.core_succeeded = Some(report.core_succeeded);
            }
            AttackSpec::DualSurveillance { locations, visited } => {
                let visited: Vec<usize> = visited.iter().map(|v| *v as usize).collect();
                let report = crate::attacks::run_dual_surveillance(
                    scenario.seed,
                    *locations as usize,
                    &visited,
                );
                let outcome = &mut attack_outcomes[attack_idx];
                outcome.dual_succeeded = Some(report.dual_succeeded);
                outcome.core_succeeded = Some(report.core_succeeded);
                outcome.linked_posts = report.count;
            }
            _ => {}
        }
    }

    let mut reports_done: BTreeSet<usize> = BTreeSet::new();
    let end = scenario.end_time();
    let mut payloads: Vec<Option<BroadcastPayload>> = vec![None; scenario.agents.len()];

    let mut tick = 0u64;
    while tick < end {
        // Reports due at this tick, with fast clocks deferred one tick.
        // Submission precedes the release pass so a zero-delay registry
        // publishes within the same epoch, as it would in the wild.
        submit_due_reports(
            scenario,
            &mut agents,
            &mut registry,
            &mut stats,
            &mut reports_done,
            tick,
            false,
        );

        // Flood adversaries.
        for (attack_idx, attack) in scenario.attacks.iter().enumerate() {
            if let AttackSpec::Flood { submissions, at } = attack {
                if tick >= *at && floods_done.insert(attack_idx) {
                    let outcome = &mut attack_outcomes[attack_idx];
                    for _ in 0..*submissions {
                        let mut seed = vec![0u8; params.id_len()];
                        flood_rng.fill_bytes(&mut seed);
                        let entry = pact_core::Entry::new(
                            pact_core::Seed::from_bytes(seed),
                            tick.saturating_sub(900),
                            tick.saturating_sub(1),
                        );
                        match registry.submit(entry, "flooder", tick) {
                            SubmitOutcome::Accepted { .. } => outcome.accepted_submissions += 1,
                            SubmitOutcome::Rejected { .. } => outcome.rejected_submissions += 1,
                        }
                    }
                }
            }
        }

        registry.release_tick(tick);

        // Broadcasts.
        for (idx, spec) in scenario.agents.iter().enumerate() {
            payloads[idx] = None;
            if let Some(agent) = agents[idx].as_mut() {
                let outcome = agent.tick(local(tick, spec.skew)).expect("tick");
                let stat = stats.get_mut(&spec.name).unwrap();
                stat.broadcasts += 1;
                stat.broadcast_bytes += outcome.payload.encode().len() as u64;
                payloads[idx] = Some(outcome.payload);
            }
        }

        // Radio delivery over active co-locations, both directions.
        for colocation in &scenario.colocations {
            if tick < colocation.start || tick >= colocation.end {
                continue;
            }
            let a = scenario.agent_index(&colocation.a).unwrap();
            let b = scenario.agent_index(&colocation.b).unwrap();
            for (from, to) in [(a, b), (b, a)] {
                let Some(payload) = payloads[from].clone() else {
                    continue;
                };
                if scenario.drop_probability > 0.0
                    && drop_rng.random_bool(scenario.drop_probability)
                {
                    continue;
                }
                deliver(
                    scenario,
                    &mut agents,
                    &mut stats,
                    &mut linkage_records,
                    to,
                    &payload,
                    local(tick, scenario.agents[to].skew),
                );
            }
        }

        // Relay adversaries: capture this tick's broadcast and inject it at
        // the victim with the configured latency.
        for attack in &scenario.attacks {
            if let AttackSpec::Relay { from, to, latency } = attack {
                let from_idx = scenario.agent_index(from).unwrap();
                let to_idx = scenario.agent_index(to).unwrap();
                if let Some(payload) = payloads[from_idx].clone() {
                    let arrive = tick + latency;
                    deliver(
                        scenario,
                        &mut agents,
                        &mut stats,
                        &mut linkage_records,
                        to_idx,
                        &payload,
                        local(arrive, scenario.agents[to_idx].skew),
                    );
                }
            }
        }

        // Replay adversaries: watch the public list, rebroadcast the
        // freshest regenerated id to the victims right away.
        for (attack_idx, attack) in scenario.attacks.iter().enumerate() {
            if let AttackSpec::Replay { victims } = attack {
                let (batch, next) = registry.fetch(replay_cursor, 64);
                replay_cursor = next;
                let _ = attack_idx;
                for record in &batch {
                    let Ok(regen) = pact_core::regenerate(&record.entry, &params) else {
                        continue;
                    };
                    let Some(freshest) = regen.last() else {
                        continue;
                    };
                    for victim in victims {
                        let v = scenario.agent_index(victim).unwrap();
                        deliver(
                            scenario,
                            &mut agents,
                            &mut stats,
                            &mut linkage_records,
                            v,
                            &BroadcastPayload::CoreId(freshest.id.clone()),
                            local(tick, scenario.agents[v].skew),
                        );
                    }
                }
            }
        }

        // Syncs.
        let epoch_number = tick / scenario.dt;
        if epoch_number.is_multiple_of(scenario.sync_every_epochs) {
            sync_all(
                scenario,
                &mut agents,
                &mut registry,
                &mut stats,
                tick,
                &local,
            );
        }

        // Daily purge.
        if tick > 0 && tick.is_multiple_of(86_400) {
            for (idx, spec) in scenario.agents.iter().enumerate() {
                if let Some(agent) = agents[idx].as_mut() {
                    agent.purge(local(tick, spec.skew));
                }
            }
        }

        tick += scenario.dt;
    }

    // Settlement: any report still due, one release past the delay, one
    // final sync round.
    submit_due_reports(
        scenario,
        &mut agents,
        &mut registry,
        &mut stats,
        &mut reports_done,
        end,
        true,
    );
    let settle = end + scenario.registry_delay() + scenario.dt;
    registry.release_tick(settle);
    // Replay adversaries get one last look too.
    for attack in &scenario.attacks {
        if let AttackSpec::Replay { victims } = attack {
            let (batch, next) = registry.fetch(replay_cursor, 1024);
            replay_cursor = next;
            for record in &batch {
                let Ok(regen) = pact_core::regenerate(&record.entry, &params) else {
                    continue;
                };
                let Some(freshest) = regen.last() else {
                    continue;
                };
                for victim in victims {
                    let v = scenario.agent_index(victim).unwrap();
                    deliver(
                        scenario,
                        &mut agents,
                        &mut stats,
                        &mut linkage_records,
                        v,
                        &BroadcastPayload::CoreId(freshest.id.clone()),
                        local(settle, scenario.agents[v].skew),
                    );
                }
            }
        }
    }
    sync_all(
        scenario,
        &mut agents,
        &mut registry,
        &mut stats,
        settle,
        &local,
    );

    // Linkage adversaries analyze their recordings offline.
    for (attack_idx, attack) in scenario.attacks.iter().enumerate() {
        if let AttackSpec::Linkage { posts, .. } = attack {
            let (published, _) = registry.fetch(0, u32::MAX as usize);
            let mut window_ids: BTreeSet<Vec<u8>> = BTreeSet::new();
            for record in &published {
                if let Ok(regen) = pact_core::regenerate(&record.entry, &params) {
                    window_ids.extend(regen.into_iter().map(|t| t.id.as_bytes().to_vec()));
                }
            }
            let linked = posts
                .iter()
                .filter(|post| {
                    linkage_records.get(*post).is_some_and(|records| {
                        records.iter().any(|(id, _)| window_ids.contains(id))
                    })
                })
                .count() as u64;
            attack_outcomes[attack_idx].linked_posts = linked;
        }
    }

    // Collect results.
    let oracle_pairs = oracle_exposures(scenario);
    let oracle_risk = oracle_at_risk(scenario);
    let mut alerted = BTreeSet::new();
    for (idx, spec) in scenario.agents.iter().enumerate() {
        if let Some(agent) = agents[idx].as_ref() {
            let stat = stats.get_mut(&spec.name).unwrap();
            stat.alerted = agent.alerted;
            stat.stored_observations = agent.store().len() as u64;
            if agent.alerted {
                alerted.insert(spec.name.clone());
            }
        }
    }
    for (attack_idx, _) in scenario.attacks.iter().enumerate() {
        let false_alerts = alerted.difference(&oracle_risk).count() as u64;
        attack_outcomes[attack_idx].false_alerts = false_alerts;
    }

    Ok(RunResult {
        alerted,
        oracle_at_risk: oracle_risk,
        oracle_pairs,
        per_agent: stats,
        attack_outcomes,
        published_entries: registry.published_len(),
    })
}

/// Convenience wrapper matching the attack-run vocabulary: same engine,
/// attack metrics front and center.
pub fn run_attack(scenario: &Scenario) -> Result<Vec<AttackOutcome>, ScenarioError> {
    Ok(run_scenario(scenario)?.attack_outcomes)
}

#[allow(clippy::too_many_arguments)]
fn deliver(
    scenario: &Scenario,
    agents: &mut [Option<Agent>],
    stats: &mut BTreeMap<String, AgentStats>,
    linkage_records: &mut BTreeMap<String, Vec<(Vec<u8>, u64)>>,
    to: usize,
    payload: &BroadcastPayload,
    hearer_now: u64,
) {
    let name = &scenario.agents[to].name;
    // Listening posts record everything they hear, adopter or not.
    let is_post = scenario
        .attacks
        .iter()
        .any(|a| matches!(a, AttackSpec::Linkage { posts, .. } if posts.iter().any(|p| p == name)));
    if is_post {
        if let BroadcastPayload::CoreId(id) = payload {
            linkage_records
                .entry(name.clone())
                .or_default()
                .push((id.as_bytes().to_vec(), hearer_now));
        }
    }
    if let Some(agent) = agents[to].as_mut() {
        if agent.on_hear(payload, hearer_now) {
            stats.get_mut(name).unwrap().stored_observations += 1;
        }
    }
}

fn submit_due_reports(
    scenario: &Scenario,
    agents: &mut [Option<Agent>],
    registry: &mut Registry,
    stats: &mut BTreeMap<String, AgentStats>,
    reports_done: &mut BTreeSet<usize>,
    now: u64,
    force: bool,
) {
    for (pos_idx, positive) in scenario.positives.iter().enumerate() {
        if reports_done.contains(&pos_idx) {
            continue;
        }
        let agent_idx = scenario.agent_index(&positive.agent).unwrap();
        let skew = scenario.agents[agent_idx].skew;
        let due_at = positive.report_at.saturating_add(skew.max(0) as u64);
        if !force && now < due_at {
            continue;
        }
        reports_done.insert(pos_idx);
        let Some(agent) = agents[agent_idx].as_mut() else {
            continue; // non-adopters never report
        };
        let local_now = (now as i64 + skew).max(0) as u64;
        let outcome = agent
            .make_report(local_now, true, &mut InProcessRegistry::at(registry, now))
            .expect("report transport");
        debug_assert!(outcome.is_accepted(), "report rejected: {outcome:?}");
        stats.get_mut(&positive.agent).unwrap().submit_calls += 1;
    }
}

fn sync_all(
    scenario: &Scenario,
    agents: &mut [Option<Agent>],
    registry: &mut Registry,
    stats: &mut BTreeMap<String, AgentStats>,
    now: u64,
    local: &impl Fn(u64, i64) -> u64,
) {
    for (idx, spec) in scenario.agents.iter().enumerate() {
        if let Some(agent) = agents[idx].as_mut() {
            let alert = agent
                .sync_and_check(
                    local(now, spec.skew),
                    &mut InProcessRegistry::at(registry, now),
                )
                .expect("sync transport");
            let stat = stats.get_mut(&spec.name).unwrap();
            stat.fetch_calls += 1;
            if alert != Alert::None {
                stat.alerts.push(alert);
            }
        }
    }
}

/// Regenerated ids of every published entry — used by tests to build
/// adversarial inputs from exactly what the public can see.
pub fn published_window_ids(registry: &Registry, params: &Params) -> Vec<PseudonymId> {
    let (published, _) = registry.fetch(0, u32::MAX as usize);
    published
        .iter()
        .filter_map(|r| pact_core::regenerate(&r.entry, params).ok())
        .flatten()
        .map(|t| t.id)
        .collect()
}
