use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use pact_core::Params;
use pact_registry::{serve, Registry, RegistryConfig, SignaturePolicy};

use crate::commands::wall_clock;
use crate::Context;

#[derive(Subcommand)]
pub enum RegistryCommand {
    /// Run the report registry over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7700")]
    addr: String,
    /// Signature whitelist file (JSON); omit to accept unsigned entries only.
    #[arg(long)]
    whitelist: Option<PathBuf>,
    /// Append-only record file for persistence; omit for in-memory.
    #[arg(long)]
    persist: Option<PathBuf>,
    /// Publication delay in seconds; default 2·dt.
    #[arg(long)]
    delay: Option<u64>,
    /// Shuffle each release batch.
    #[arg(long)]
    shuffle: bool,
    /// Require the strong-integrity self-signature on every entry.
    #[arg(long)]
    strong_integrity: bool,
    #[arg(long, default_value_t = 900)]
    dt: u64,
    #[arg(long, default_value_t = 1344)]
    delta: u64,
}

pub fn run(_ctx: &Context, command: RegistryCommand) -> anyhow::Result<ExitCode> {
    match command {
        RegistryCommand::Serve(args) => {
            let params = Params::new(128, args.dt, args.delta, 0)
                .map_err(|e| anyhow::anyhow!("bad parameters: {e}"))?;
            let mut config = RegistryConfig::new(params);
            if let Some(delay) = args.delay {
                config.delay = delay;
            }
            config.shuffle = args.shuffle;
            config.require_strong_integrity = args.strong_integrity;

            let policy = match &args.whitelist {
                Some(path) => {
                    SignaturePolicy::load(path).map_err(|e| anyhow::anyhow!("whitelist: {e}"))?
                }
                None => SignaturePolicy::new(),
            };
            let registry = match &args.persist {
                Some(path) => Registry::with_log(config, policy, path)?,
                None => Registry::new(config, policy),
            };
            let handle = serve(registry, &args.addr, wall_clock)?;
            eprintln!("registry listening on {}", handle.addr());
            // Serve until killed.
            loop {
                std::thread::park();
            }
        }
    }
}
