//! Scenario files: a human-writable description of agents, contacts,
//! reports and adversaries on one simulated clock. TOML with a version
//! field; everything time-like is in seconds from simulation start.

use std::collections::HashSet;
use std::path::Path;

use pact_agent::ProtocolKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unsupported scenario version {0}")]
    Version(u32),
    #[error("duplicate agent name {0:?}")]
    DuplicateAgent(String),
    #[error("reference to unknown agent {0:?}")]
    UnknownAgent(String),
    #[error("colocation interval [{start}, {end}) is not well-ordered")]
    BadInterval { start: u64, end: u64 },
    #[error("report time {0} is past the simulation end")]
    LateReport(u64),
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    /// Seed for every random choice the run makes.
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub days: u64,
    #[serde(default = "default_dt")]
    pub dt: u64,
    #[serde(default = "default_delta")]
    pub delta: u64,
    /// Matching skew allowance; defaults to 2·dt.
    pub time_tolerance: Option<u64>,
    /// Sync cadence in epochs.
    #[serde(default = "default_sync_every")]
    pub sync_every_epochs: u64,
    /// Per-delivery radio loss.
    #[serde(default)]
    pub drop_probability: f64,
    #[serde(default)]
    pub registry: RegistrySettings,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub colocations: Vec<Colocation>,
    #[serde(default)]
    pub positives: Vec<Positive>,
    #[serde(default)]
    pub attacks: Vec<AttackSpec>,
}

fn default_dt() -> u64 {
    900
}

fn default_delta() -> u64 {
    1344
}

fn default_sync_every() -> u64 {
    1
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistrySettings {
    /// Publication delay; defaults to 2·dt.
    pub delay: Option<u64>,
    #[serde(default)]
    pub shuffle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub name: String,
    /// Non-adopters exist physically but run no protocol.
    #[serde(default = "default_true")]
    pub adopter: bool,
    /// Clock skew in seconds (may be negative).
    #[serde(default)]
    pub skew: i64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Colocation {
    pub a: String,
    pub b: String,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Positive {
    pub agent: String,
    pub report_at: u64,
}

/// Executable adversaries, one flavor per documented attack narrative.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AttackSpec {
    /// Watches the public list; on every new publication regenerates the
    /// freshest id and rebroadcasts it to the victims immediately.
    Replay { victims: Vec<String> },
    /// Forwards every broadcast of `from` to `to` with a fixed latency,
    /// regardless of physical distance.
    Relay {
        from: String,
        to: String,
        latency: u64,
    },
    /// The named agents run one shared identity (same seed); each stands
    /// near their own contacts.
    SeedSharing { colluders: Vec<String> },
    /// One source hammers the registry with junk reports.
    Flood { submissions: u64, at: u64 },
    /// Passive listening posts; after the target's report the adversary
    /// links the target's window ids across posts.
    Linkage { target: String, posts: Vec<String> },
    /// Collected-id scheme: report an honest user's overheard ids and
    /// observe their own check turn positive. Runs a self-contained dual
    /// world plus the equivalent (failing) attempt against the seed chain.
    DualFraming {
        #[serde(default = "default_core_guesses")]
        core_guesses: u64,
    },
    /// Collected-id scheme: location-keyed planted ids trace a reporter's
    /// movements. Same side-by-side structure as dual-framing.
    DualSurveillance { locations: u64, visited: Vec<u64> },
}

fn default_core_guesses() -> u64 {
    10_000
}

impl Scenario {
    pub fn end_time(&self) -> u64 {
        self.days * 86_400
    }

    pub fn tolerance(&self) -> u64 {
        self.time_tolerance.unwrap_or(2 * self.dt)
    }

    pub fn registry_delay(&self) -> u64 {
        self.registry.delay.unwrap_or(2 * self.dt)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario = toml::from_str(&text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != 1 {
            return Err(ScenarioError::Version(self.version));
        }
        let mut names = HashSet::new();
        for agent in &self.agents {
            if !names.insert(agent.name.as_str()) {
                return Err(ScenarioError::DuplicateAgent(agent.name.clone()));
            }
        }
        let known = |name: &String| -> Result<(), ScenarioError> {
            if names.contains(name.as_str()) {
                Ok(())
            } else {
                Err(ScenarioError::UnknownAgent(name.clone()))
            }
        };
        for c in &self.colocations {
            known(&c.a)?;
            known(&c.b)?;
            if c.start >= c.end {
                return Err(ScenarioError::BadInterval {
                    start: c.start,
                    end: c.end,
                });
            }
        }
        for p in &self.positives {
            known(&p.agent)?;
            if p.report_at > self.end_time() {
                return Err(ScenarioError::LateReport(p.report_at));
            }
        }
        for attack in &self.attacks {
            match attack {
                AttackSpec::Replay { victims } => {
                    for v in victims {
                        known(v)?;
                    }
                }
                AttackSpec::Relay { from, to, .. } => {
                    known(from)?;
                    known(to)?;
                }
                AttackSpec::SeedSharing { colluders } => {
                    for c in colluders {
                        known(c)?;
                    }
                }
                AttackSpec::Flood { .. } => {}
                AttackSpec::Linkage { target, posts } => {
                    known(target)?;
                    for p in posts {
                        known(p)?;
                    }
                }
                AttackSpec::DualFraming { .. } => {}
                AttackSpec::DualSurveillance { locations, visited } => {
                    if let Some(&bad) = visited.iter().find(|v| **v >= *locations) {
                        return Err(ScenarioError::UnknownAgent(format!(
                            "dual-surveillance location {bad}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }
}

/// A randomized well-formed scenario: agents on a contact graph with a few
/// positives. The workhorse behind the oracle-equivalence and adoption
/// runs.
pub struct GeneratorConfig {
    pub agents: usize,
    pub days: u64,
    pub dt: u64,
    pub delta: u64,
    pub contacts: usize,
    pub positives: usize,
    pub adoption: f64,
    pub protocol: ProtocolKind,
    pub max_skew: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            agents: 10,
            days: 14,
            dt: 900,
            delta: 1344,
            contacts: 15,
            positives: 2,
            adoption: 1.0,
            protocol: ProtocolKind::Core,
            max_skew: 0,
        }
    }
}

pub fn random_scenario(seed: u64, config: &GeneratorConfig) -> Scenario {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let end = config.days * 86_400;

    let agents: Vec<AgentSpec> = (0..config.agents)
        .map(|i| AgentSpec {
            name: format!("a{i}"),
            adopter: rng.random_bool(config.adoption),
            skew: if config.max_skew == 0 {
                0
            } else {
                rng.random_range(-(config.max_skew as i64)..=config.max_skew as i64)
            },
        })
        .collect();

    let mut colocations = Vec::with_capacity(config.contacts);
    for _ in 0..config.contacts {
        let a = rng.random_range(0..config.agents);
        let mut b = rng.random_range(0..config.agents);
        while b == a {
            b = rng.random_range(0..config.agents);
        }
        let start = rng.random_range(0..end.saturating_sub(2 * config.dt));
        let duration = rng.random_range(config.dt..6 * config.dt);
        colocations.push(Colocation {
            a: format!("a{a}"),
            b: format!("a{b}"),
            start,
            end: (start + duration).min(end),
        });
    }

    let mut positives = Vec::new();
    let mut chosen = HashSet::new();
    while positives.len() < config.positives.min(config.agents) {
        let idx = rng.random_range(0..config.agents);
        if chosen.insert(idx) {
            positives.push(Positive {
                agent: format!("a{idx}"),
                report_at: rng.random_range(end / 2..=end),
            });
        }
    }

    Scenario {
        version: 1,
        seed: rng.random(),
        protocol: config.protocol,
        days: config.days,
        dt: config.dt,
        delta: config.delta,
        time_tolerance: None,
        sync_every_epochs: 1,
        drop_probability: 0.0,
        registry: RegistrySettings::default(),
        agents,
        colocations,
        positives,
        attacks: Vec::new(),
    }
}
