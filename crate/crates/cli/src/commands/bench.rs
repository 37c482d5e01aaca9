use std::process::ExitCode;

use clap::{Args, ValueEnum};
use pact_simnet::{bench_grid, BenchProtocol};
use serde_json::json;

use crate::output::emit;
use crate::Context;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProtocolArg {
    Core,
    Alt,
    Both,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "both")]
    protocol: ProtocolArg,
    /// Comma-separated list of L values (downloaded reports).
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    l: Vec<u64>,
    /// Comma-separated list of local store sizes S.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    store: Vec<u64>,
    /// Window length Δ in epochs.
    #[arg(long, default_value_t = 256)]
    delta: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

pub fn run(ctx: &Context, args: BenchArgs) -> anyhow::Result<ExitCode> {
    let protocols: Vec<BenchProtocol> = match args.protocol {
        ProtocolArg::Core => vec![BenchProtocol::Core],
        ProtocolArg::Alt => vec![BenchProtocol::AltSig],
        ProtocolArg::Both => vec![BenchProtocol::Core, BenchProtocol::AltSig],
    };
    let reports: Vec<_> = protocols
        .iter()
        .flat_map(|p| bench_grid(*p, &args.l, &args.store, args.delta, args.seed))
        .collect();

    let document = json!({ "reports": reports });
    emit(ctx.format, &document, || {
        let mut lines = Vec::new();
        for report in &reports {
            lines.push(format!(
                "{:?}: S={} Δ={}  fit t = {:.3e}·L + {:.3e}  (R² = {:.4})",
                report.protocol,
                report.store_size,
                report.delta,
                report.slope,
                report.intercept,
                report.r_squared
            ));
            lines.push(format!(
                "  {:>8} {:>14} {:>14}",
                "L", "measured (s)", "model (s)"
            ));
            for (point, model) in report.points.iter().zip(&report.model_seconds) {
                lines.push(format!(
                    "  {:>8} {:>14.6} {:>14.6}",
                    point.l, point.seconds, model
                ));
            }
        }
        lines.join("\n")
    });
    Ok(ExitCode::SUCCESS)
}
