use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Readable lines for people.
    Human,
    /// One stable JSON document on stdout.
    Json,
}

/// Emits a result: JSON mode prints the document verbatim; human mode
/// prints the provided rendering.
pub fn emit(format: Format, json: &serde_json::Value, human: impl FnOnce() -> String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(json).expect("serializable")
        ),
        Format::Human => println!("{}", human()),
    }
}
