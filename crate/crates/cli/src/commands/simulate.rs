use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use pact_simnet::{run_scenario, RunResult, Scenario};
use serde_json::json;

use crate::output::emit;
use crate::Context;

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
}

#[derive(Args)]
pub struct AttackArgs {
    /// Scenario file (TOML) with an [[attacks]] section.
    pub spec: PathBuf,
}

fn load_and_run(path: &Path) -> anyhow::Result<(Scenario, RunResult)> {
    let scenario = Scenario::load(path)?;
    let result = run_scenario(&scenario)?;
    Ok((scenario, result))
}

pub fn run_simulate(ctx: &Context, args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let (scenario, result) = load_and_run(&args.scenario)?;
    let matches_oracle = result.alerted == result.oracle_at_risk;
    let document = json!({
        "scenario": args.scenario,
        "protocol": scenario.protocol,
        "agents": scenario.agents.len(),
        "alerts": result.alerted.len(),
        "alerted": result.alerted,
        "oracle_at_risk": result.oracle_at_risk,
        "matches_oracle": matches_oracle,
        "published_entries": result.published_entries,
        "per_agent": result.per_agent,
    });
    emit(ctx.format, &document, || {
        let mut lines = vec![
            format!(
                "scenario {} ({:?}, {} agents, {} days)",
                args.scenario.display(),
                scenario.protocol,
                scenario.agents.len(),
                scenario.days
            ),
            format!("alerts: {}", result.alerted.len()),
        ];
        for name in &result.alerted {
            lines.push(format!("  at risk: {name}"));
        }
        lines.push(format!(
            "oracle agreement: {}",
            if matches_oracle { "exact" } else { "MISMATCH" }
        ));
        lines.join("\n")
    });
    Ok(ExitCode::SUCCESS)
}

pub fn run_attack_cmd(ctx: &Context, args: AttackArgs) -> anyhow::Result<ExitCode> {
    let (scenario, result) = load_and_run(&args.spec)?;
    if scenario.attacks.is_empty() {
        anyhow::bail!("scenario has no [[attacks]] section; use `pact simulate`");
    }
    let document = json!({
        "spec": args.spec,
        "protocol": scenario.protocol,
        "outcomes": result.attack_outcomes,
        "alerted": result.alerted,
        "oracle_at_risk": result.oracle_at_risk,
    });
    emit(ctx.format, &document, || {
        let mut lines = vec![format!("attack run: {}", args.spec.display())];
        for outcome in &result.attack_outcomes {
            lines.push(format!(
                "  {}: false alerts {}, linked posts {}, submissions {}/{} accepted{}",
                outcome.kind,
                outcome.false_alerts,
                outcome.linked_posts,
                outcome.accepted_submissions,
                outcome.accepted_submissions + outcome.rejected_submissions,
                match (outcome.dual_succeeded, outcome.core_succeeded) {
                    (Some(d), Some(c)) => format!(
                        ", dual {}, core-equivalent {}",
                        if d { "succeeded" } else { "failed" },
                        if c { "succeeded" } else { "failed" }
                    ),
                    _ => String::new(),
                }
            ));
        }
        lines.join("\n")
    });
    Ok(ExitCode::SUCCESS)
}
