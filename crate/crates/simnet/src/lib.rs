//! Desk-scale adversarial simulation: scenarios as data, a deterministic
//! event loop over one virtual clock, a schedule-arithmetic oracle the
//! protocol results must reproduce, executable attack narratives, and
//! wall-time benchmarks of the exposure check.

pub mod attacks;
pub mod bench;
pub mod engine;
pub mod oracle;
pub mod scenario;

pub use attacks::{run_dual_framing, run_dual_surveillance, DualAttackReport};
pub use bench::{bench_check_cost, bench_grid, linear_fit, BenchProtocol, BenchReport};
pub use engine::{run_attack, run_scenario, AgentStats, AttackOutcome, RunResult};
pub use oracle::{oracle_at_risk, oracle_exposures, report_tick};
pub use scenario::{
    random_scenario, AgentSpec, AttackSpec, Colocation, GeneratorConfig, Positive,
    RegistrySettings, Scenario, ScenarioError,
};
