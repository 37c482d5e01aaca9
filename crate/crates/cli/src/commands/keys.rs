use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Subcommand, ValueEnum};
use ed25519_dalek::SigningKey;
use pact_registry::{SignaturePolicy, Tier};
use rand::RngCore;
use serde::Deserialize;
use serde_json::json;

use crate::output::emit;
use crate::Context;

#[derive(Args)]
pub struct KeygenArgs {
    /// Write the key file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct KeyFile {
    sk_hex: String,
}

/// Reads a `pact keygen` key file back into a signing key.
pub fn load_secret_key(path: &Path) -> anyhow::Result<SigningKey> {
    let text = std::fs::read_to_string(path)?;
    let parsed: KeyFile = serde_json::from_str(&text)?;
    let bytes: [u8; 32] = hex::decode(&parsed.sk_hex)?
        .try_into()
        .map_err(|_| anyhow::anyhow!("secret key must be 32 bytes"))?;
    Ok(SigningKey::from_bytes(&bytes))
}

pub fn run_keygen(ctx: &Context, args: KeygenArgs) -> anyhow::Result<ExitCode> {
    let mut secret = [0u8; 32];
    rand::rng().fill_bytes(&mut secret);
    let key = SigningKey::from_bytes(&secret);
    let document = json!({
        "scheme": "ed25519",
        "sk_hex": hex::encode(secret),
        "vk_hex": hex::encode(key.verifying_key().to_bytes()),
    });
    match &args.out {
        Some(path) => {
            std::fs::write(path, serde_json::to_string_pretty(&document)?)?;
            emit(ctx.format, &json!({"written": path}), || {
                format!(
                    "wrote {} (vk {})",
                    path.display(),
                    document["vk_hex"].as_str().unwrap_or_default()
                )
            });
        }
        None => emit(ctx.format, &document, || {
            format!(
                "sk {}\nvk {}",
                document["sk_hex"].as_str().unwrap_or_default(),
                document["vk_hex"].as_str().unwrap_or_default()
            )
        }),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Subcommand)]
pub enum WhitelistCommand {
    /// Add (or replace) a certificate in a whitelist file.
    Add(WhitelistAddArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Service {
    Registry,
    Narrowcast,
}

#[derive(Args)]
pub struct WhitelistAddArgs {
    /// Whitelist file to create or update.
    #[arg(long)]
    file: PathBuf,
    #[arg(long, value_enum, default_value = "registry")]
    service: Service,
    #[arg(long)]
    cert_id: String,
    /// Verification key, hex.
    #[arg(long)]
    vk: String,
    /// Trust tier (registry whitelists only).
    #[arg(long, value_enum, default_value = "self-report")]
    tier: TierArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TierArg {
    SelfReport,
    HealthcareValidated,
}

pub fn run_whitelist(ctx: &Context, command: WhitelistCommand) -> anyhow::Result<ExitCode> {
    match command {
        WhitelistCommand::Add(args) => {
            let vk: [u8; 32] = hex::decode(&args.vk)?
                .try_into()
                .map_err(|_| anyhow::anyhow!("verification key must be 32 bytes"))?;
            match args.service {
                Service::Registry => {
                    let mut policy = if args.file.exists() {
                        SignaturePolicy::load(&args.file)
                            .map_err(|e| anyhow::anyhow!("whitelist: {e}"))?
                    } else {
                        SignaturePolicy::new()
                    };
                    let tier = match args.tier {
                        TierArg::SelfReport => Tier::SelfReport,
                        TierArg::HealthcareValidated => Tier::HealthcareValidated,
                    };
                    policy.add(&args.cert_id, vk, tier);
                    policy.save(&args.file)?;
                }
                Service::Narrowcast => {
                    let mut whitelist = if args.file.exists() {
                        pact_narrowcast::AuthorityWhitelist::load(&args.file)?
                    } else {
                        pact_narrowcast::AuthorityWhitelist::new()
                    };
                    whitelist.add(&args.cert_id, vk);
                    whitelist.save(&args.file)?;
                }
            }
            emit(
                ctx.format,
                &json!({"file": args.file, "cert_id": args.cert_id}),
                || format!("added {:?} to {}", args.cert_id, args.file.display()),
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
