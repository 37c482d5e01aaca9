//! `pact` — run the registry and narrowcast services, drive simulations and
//! attack scenarios, manage keys and whitelists, and talk to running
//! services from the command line.
//!
//! Endpoint resolution order: flag, then environment (`PACT_REGISTRY_URL`,
//! `PACT_NARROWCAST_URL`), then the optional `--config` file. Exit codes:
//! 0 success, 2 usage error, 3 service unreachable.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

pub const EXIT_UNREACHABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "pact", version, about = "co-location tracing toolkit")]
struct Cli {
    /// Output format for results.
    #[arg(long, global = true, default_value = "human")]
    format: output::Format,
    /// Optional TOML config file with endpoint defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report registry service.
    Registry {
        #[command(subcommand)]
        command: commands::registry::RegistryCommand,
    },
    /// Narrowcast message service.
    Narrowcast {
        #[command(subcommand)]
        command: commands::narrowcast::NarrowcastCommand,
    },
    /// Local device-agent walkthroughs.
    Agent {
        #[command(subcommand)]
        command: commands::agent::AgentCommand,
    },
    /// Run a scenario file and summarize alerts against the oracle.
    Simulate(commands::simulate::SimulateArgs),
    /// Run a scenario file with adversaries and report attack metrics.
    Attack(commands::simulate::AttackArgs),
    /// Measure exposure-check cost and fit the scaling model.
    Bench(commands::bench::BenchArgs),
    /// Generate an Ed25519 key pair.
    Keygen(commands::keys::KeygenArgs),
    /// Manage service whitelists.
    Whitelist {
        #[command(subcommand)]
        command: commands::keys::WhitelistCommand,
    },
    /// Submit reports to a running registry.
    Report {
        #[command(subcommand)]
        command: commands::client::ReportCommand,
    },
    /// Read published entries from a running registry.
    Entries {
        #[command(subcommand)]
        command: commands::client::EntriesCommand,
    },
}

/// Endpoint defaults from the optional config file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub registry_url: Option<String>,
    pub narrowcast_url: Option<String>,
}

pub struct Context {
    pub format: output::Format,
    pub file_config: FileConfig,
}

impl Context {
    /// flag > environment > config file.
    pub fn resolve_endpoint(
        &self,
        flag: &Option<String>,
        env_key: &str,
        from_file: &Option<String>,
    ) -> anyhow::Result<String> {
        if let Some(value) = flag {
            return Ok(value.clone());
        }
        if let Ok(value) = std::env::var(env_key) {
            return Ok(value);
        }
        if let Some(value) = from_file {
            return Ok(value.clone());
        }
        anyhow::bail!("no endpoint: pass a flag, set {env_key}, or use --config")
    }

    pub fn registry_url(&self, flag: &Option<String>) -> anyhow::Result<String> {
        let from_file = self.file_config.registry_url.clone();
        self.resolve_endpoint(flag, "PACT_REGISTRY_URL", &from_file)
    }

    pub fn narrowcast_url(&self, flag: &Option<String>) -> anyhow::Result<String> {
        let from_file = self.file_config.narrowcast_url.clone();
        self.resolve_endpoint(flag, "PACT_NARROWCAST_URL", &from_file)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_config = match &cli.config {
        Some(path) => match std::fs::read_to_string(path)
            .map_err(anyhow::Error::from)
            .and_then(|text| toml::from_str(&text).map_err(anyhow::Error::from))
        {
            Ok(config) => config,
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };
    let ctx = Context {
        format: cli.format,
        file_config,
    };

    let result = match cli.command {
        Command::Registry { command } => commands::registry::run(&ctx, command),
        Command::Narrowcast { command } => commands::narrowcast::run(&ctx, command),
        Command::Agent { command } => commands::agent::run(&ctx, command),
        Command::Simulate(args) => commands::simulate::run_simulate(&ctx, args),
        Command::Attack(args) => commands::simulate::run_attack_cmd(&ctx, args),
        Command::Bench(args) => commands::bench::run(&ctx, args),
        Command::Keygen(args) => commands::keys::run_keygen(&ctx, args),
        Command::Whitelist { command } => commands::keys::run_whitelist(&ctx, command),
        Command::Report { command } => commands::client::run_report(&ctx, command),
        Command::Entries { command } => commands::client::run_entries(&ctx, command),
    };

    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Transport problems get their own exit code so scripts can
            // tell "service down" from "bad request".
            if e.downcast_ref::<ureq::Error>().is_some() {
                ExitCode::from(EXIT_UNREACHABLE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
