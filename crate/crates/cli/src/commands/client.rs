use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use pact_core::Entry;
use serde_json::json;

use crate::output::emit;
use crate::Context;

#[derive(Subcommand)]
pub enum ReportCommand {
    /// Submit an entry (JSON presentation) to the registry.
    Submit(ReportSubmitArgs),
}

#[derive(Args)]
pub struct ReportSubmitArgs {
    #[arg(long)]
    registry: Option<String>,
    /// Entry file in the JSON presentation encoding.
    #[arg(long)]
    entry: PathBuf,
    /// Source identity for rate limiting; defaults to the client address.
    #[arg(long)]
    source: Option<String>,
}

pub fn run_report(ctx: &Context, command: ReportCommand) -> anyhow::Result<ExitCode> {
    match command {
        ReportCommand::Submit(args) => {
            let base = ctx.registry_url(&args.registry)?;
            let text = std::fs::read_to_string(&args.entry)?;
            let entry: Entry = serde_json::from_str(&text)?;
            let request = ureq::post(format!("{base}/report"))
                .send_json(json!({"entry": entry, "source": args.source}));
            let body: serde_json::Value = match request {
                Ok(mut response) => response.body_mut().read_json()?,
                // Rejections come back as structured 422s; surface them.
                Err(ureq::Error::StatusCode(422)) => {
                    json!({"status": "rejected", "reason": "see registry"})
                }
                Err(e) => return Err(e.into()),
            };
            let ok = body["status"] == "accepted";
            emit(ctx.format, &body, || format!("report: {}", body["status"]));
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

#[derive(Subcommand)]
pub enum EntriesCommand {
    /// Page through published entries.
    Fetch(EntriesFetchArgs),
}

#[derive(Args)]
pub struct EntriesFetchArgs {
    #[arg(long)]
    registry: Option<String>,
    #[arg(long, default_value_t = 0)]
    cursor: u64,
    #[arg(long, default_value_t = 100)]
    limit: u64,
}

pub fn run_entries(ctx: &Context, command: EntriesCommand) -> anyhow::Result<ExitCode> {
    match command {
        EntriesCommand::Fetch(args) => {
            use anyhow::Context as _;
            let base = ctx.registry_url(&args.registry)?;
            let url = format!("{base}/entries?cursor={}&limit={}", args.cursor, args.limit);
            let mut response = ureq::get(&url)
                .call()
                .with_context(|| format!("GET {url}"))?;
            let body: serde_json::Value = response.body_mut().read_json()?;
            emit(ctx.format, &body, || {
                let entries = body["entries"].as_array().map(Vec::len).unwrap_or(0);
                let mut lines = vec![format!(
                    "{entries} entr{} (next cursor {})",
                    if entries == 1 { "y" } else { "ies" },
                    body["next_cursor"]
                )];
                if let Some(list) = body["entries"].as_array() {
                    for record in list {
                        lines.push(format!(
                            "  #{} window [{}, {}] tier {} published {}",
                            record["seq"],
                            record["entry"]["t_start"],
                            record["entry"]["t_end"],
                            record["tier"],
                            record["published_at"],
                        ));
                    }
                }
                lines.join("\n")
            });
            Ok(ExitCode::SUCCESS)
        }
    }
}
