use std::path::PathBuf;
use std::process::ExitCode;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use clap::{Args, Subcommand};
use pact_narrowcast::{region_of, serve, sign_announcement, Area, AuthorityWhitelist, Narrowcast};
use serde_json::json;

use crate::commands::{keys::load_secret_key, wall_clock};
use crate::output::emit;
use crate::Context;

#[derive(Subcommand)]
pub enum NarrowcastCommand {
    /// Run the narrowcast service over HTTP.
    Serve(ServeArgs),
    /// Sign and upload an (area, message) announcement.
    Announce(AnnounceArgs),
    /// Query messages for a coarsened region (coarsening happens locally;
    /// the full-precision location never leaves this process).
    Query(QueryArgs),
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7701")]
    addr: String,
    /// Authority whitelist file (JSON).
    #[arg(long)]
    whitelist: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnnounceArgs {
    #[arg(long)]
    narrowcast: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lat: f64,
    #[arg(long, allow_hyphen_values = true)]
    lon: f64,
    #[arg(long)]
    radius_m: f64,
    #[arg(long)]
    begin: u64,
    #[arg(long)]
    end: u64,
    #[arg(long)]
    message: String,
    /// Whitelisted certificate id of the announcing authority.
    #[arg(long)]
    signer: String,
    /// Key file from `pact keygen`.
    #[arg(long)]
    key: PathBuf,
}

#[derive(Args)]
pub struct QueryArgs {
    #[arg(long)]
    narrowcast: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lat: f64,
    #[arg(long, allow_hyphen_values = true)]
    lon: f64,
    #[arg(long, default_value_t = 8)]
    lat_bits: u8,
    #[arg(long, default_value_t = 9)]
    lon_bits: u8,
    #[arg(long, default_value_t = 0)]
    since: u64,
    /// Ask for the download size instead of the messages.
    #[arg(long)]
    size_only: bool,
}

pub fn run(ctx: &Context, command: NarrowcastCommand) -> anyhow::Result<ExitCode> {
    match command {
        NarrowcastCommand::Serve(args) => {
            let whitelist = match &args.whitelist {
                Some(path) => AuthorityWhitelist::load(path)?,
                None => AuthorityWhitelist::new(),
            };
            let handle = serve(Narrowcast::new(whitelist), &args.addr, wall_clock)?;
            eprintln!("narrowcast listening on {}", handle.addr());
            loop {
                std::thread::park();
            }
        }
        NarrowcastCommand::Announce(args) => {
            let base = ctx.narrowcast_url(&args.narrowcast)?;
            let area = Area {
                lat: args.lat,
                lon: args.lon,
                radius_m: args.radius_m,
                t_begin: args.begin,
                t_end: args.end,
            };
            let key = load_secret_key(&args.key)?;
            let signature = sign_announcement(&area, args.message.as_bytes(), &key);
            let mut response =
                ureq::post(format!("{base}/narrowcast/announce")).send_json(json!({
                    "area": area,
                    "message_b64": B64.encode(args.message.as_bytes()),
                    "signer": args.signer,
                    "signature_b64": B64.encode(&signature),
                }))?;
            let body: serde_json::Value = response.body_mut().read_json()?;
            emit(ctx.format, &body, || {
                format!("announce: {}", body["status"])
            });
            Ok(ExitCode::SUCCESS)
        }
        NarrowcastCommand::Query(args) => {
            let base = ctx.narrowcast_url(&args.narrowcast)?;
            let region = region_of(args.lat, args.lon, args.lat_bits, args.lon_bits)
                .map_err(|e| anyhow::anyhow!("bad region: {e}"))?;
            let query = format!(
                "lat_prefix={}&lon_prefix={}&lat_bits={}&lon_bits={}&since={}",
                region.lat_prefix, region.lon_prefix, region.lat_bits, region.lon_bits, args.since
            );
            let path = if args.size_only { "size" } else { "messages" };
            let mut response = ureq::get(format!("{base}/narrowcast/{path}?{query}")).call()?;
            let body: serde_json::Value = response.body_mut().read_json()?;
            emit(ctx.format, &body, || {
                if args.size_only {
                    format!("download size: {} bytes", body["bytes"])
                } else {
                    let messages = body["messages"].as_array().map(Vec::len).unwrap_or(0);
                    let mut lines = vec![format!("{messages} message(s) for region {region:?}")];
                    if let Some(list) = body["messages"].as_array() {
                        for hit in list {
                            let text = hit["message"]
                                .as_str()
                                .and_then(|b| B64.decode(b).ok())
                                .map(|bytes| String::from_utf8_lossy(&bytes).into_owned())
                                .unwrap_or_default();
                            lines.push(format!("  [{}] {}", hit["received_at"], text));
                        }
                    }
                    lines.join("\n")
                }
            });
            Ok(ExitCode::SUCCESS)
        }
    }
}
