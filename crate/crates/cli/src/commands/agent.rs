use std::process::ExitCode;

use clap::{Args, Subcommand, ValueEnum};
use pact_agent::{Agent, AgentConfig, Alert, InProcessRegistry, ProtocolKind};
use pact_core::Params;
use pact_registry::{Registry, RegistryConfig, SignaturePolicy};
use serde_json::json;

use crate::output::emit;
use crate::Context;

#[derive(Subcommand)]
pub enum AgentCommand {
    /// Walk two in-process agents through contact, report and alert.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProtocolArg {
    Core,
    CoreStrongIntegrity,
    AltSig,
}

#[derive(Args)]
pub struct DemoArgs {
    #[arg(long, value_enum, default_value = "core")]
    protocol: ProtocolArg,
    /// Epochs of contact before the report.
    #[arg(long, default_value_t = 8)]
    epochs: u64,
}

pub fn run(ctx: &Context, command: AgentCommand) -> anyhow::Result<ExitCode> {
    match command {
        AgentCommand::Demo(args) => {
            let protocol = match args.protocol {
                ProtocolArg::Core => ProtocolKind::Core,
                ProtocolArg::CoreStrongIntegrity => ProtocolKind::CoreStrongIntegrity,
                ProtocolArg::AltSig => ProtocolKind::AltSig,
            };
            let params = Params::new(128, 900, 96, 0).expect("demo params");
            let mut config = RegistryConfig::new(params);
            config.delay = 1800;
            let mut registry = Registry::new(config, SignaturePolicy::new());

            let mut reporter = Agent::new(AgentConfig::new(params, protocol, "reporter"), 1, 0)?;
            let mut listener = Agent::new(AgentConfig::new(params, protocol, "listener"), 2, 0)?;

            let mut steps: Vec<String> = Vec::new();
            for epoch in 0..args.epochs {
                let now = epoch * 900;
                let tick = reporter.tick(now)?;
                listener.tick(now)?;
                listener.on_hear(&tick.payload, now);
            }
            steps.push(format!(
                "{} epochs of contact; listener stored {} observation(s)",
                args.epochs,
                listener.store().len()
            ));

            let report_at = args.epochs * 900;
            let outcome = reporter.make_report(
                report_at,
                true,
                &mut InProcessRegistry::at(&mut registry, report_at),
            )?;
            steps.push(format!("reporter submitted: {outcome:?}"));

            let premature = listener.sync_and_check(
                report_at,
                &mut InProcessRegistry::at(&mut registry, report_at),
            )?;
            steps.push(format!("sync before the publication delay: {premature:?}"));

            let after_delay = report_at + 1800;
            registry.release_tick(after_delay);
            let alert = listener.sync_and_check(
                after_delay,
                &mut InProcessRegistry::at(&mut registry, after_delay),
            )?;
            steps.push(format!("sync after the delay: {alert:?}"));

            let alerted = matches!(alert, Alert::AtRisk { .. });
            let document = json!({
                "protocol": protocol,
                "epochs": args.epochs,
                "alerted": alerted,
                "alert": alert,
                "steps": steps,
            });
            emit(ctx.format, &document, || steps.join("\n"));
            anyhow::ensure!(alerted, "demo did not produce an alert");
            Ok(ExitCode::SUCCESS)
        }
    }
}
