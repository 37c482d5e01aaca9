/// Analytic exposure-check cost estimates for the two protocols.
///
/// The seed-chain protocol regenerates Δ ids per downloaded entry and looks
/// each up in a sorted local store: `L × Δ × log2(S) × t_G`. This protocol
/// verifies every stored triple under every downloaded key:
/// `L × S × t_Vrfy`. The signature route wins when the local store is small
/// relative to `Δ · log2(S)`, even though one verification costs more than
/// one PRG step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub chain_seconds: f64,
    pub signature_seconds: f64,
}

pub fn cost_model(l: u64, s: u64, delta: u64, t_g: f64, t_vrfy: f64) -> CostEstimate {
    let log_s = (s as f64).log2();
    CostEstimate {
        chain_seconds: l as f64 * delta as f64 * log_s * t_g,
        signature_seconds: l as f64 * s as f64 * t_vrfy,
    }
}
