//! Exposure-check cost measurements for both protocols, with least-squares
//! fits against the analytic models: the seed-chain check regenerates Δ ids
//! per downloaded entry, the signature check verifies every stored triple
//! under every downloaded key. Wall time is used here and nowhere else in
//! the simulator.

use std::time::Instant;

use pact_alt_sig::{check_exposure, cost_model, make_broadcast, DailyKeyring, StoredId};
use pact_core::{derive_next, match_exposure, regenerate, Entry, Observation, Params, Seed};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchProtocol {
    Core,
    AltSig,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchPoint {
    pub l: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub protocol: BenchProtocol,
    pub store_size: u64,
    pub delta: u64,
    pub points: Vec<BenchPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Analytic estimate at each measured L, using calibrated unit costs.
    pub model_seconds: Vec<f64>,
}

/// Ordinary least squares over (x, y); returns (slope, intercept, r²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r2)
}

/// One report per (protocol, S) pair over the L range: the full
/// measurement grid.
pub fn bench_grid(
    protocol: BenchProtocol,
    l_values: &[u64],
    s_values: &[u64],
    delta: u64,
    seed: u64,
) -> Vec<BenchReport> {
    s_values
        .iter()
        .map(|&s| bench_check_cost(protocol, l_values, s, delta, seed))
        .collect()
}

/// Measures the exposure check at each L (downloaded reports) against a
/// fixed local store of size S, with a window of `delta` epochs.
pub fn bench_check_cost(
    protocol: BenchProtocol,
    l_values: &[u64],
    store_size: u64,
    delta: u64,
    seed: u64,
) -> BenchReport {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let points: Vec<BenchPoint> = match protocol {
        BenchProtocol::Core => bench_core(l_values, store_size, delta, &mut rng),
        BenchProtocol::AltSig => bench_alt(l_values, store_size, &mut rng),
    };

    let xs: Vec<f64> = points.iter().map(|p| p.l as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.seconds).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);

    // Calibrate the model's unit costs from the measurements themselves.
    let (t_g, t_vrfy) = unit_costs(&mut rng);
    let model_seconds = points
        .iter()
        .map(|p| {
            let est = cost_model(p.l, store_size.max(2), delta, t_g, t_vrfy);
            match protocol {
                BenchProtocol::Core => est.chain_seconds,
                BenchProtocol::AltSig => est.signature_seconds,
            }
        })
        .collect();

    BenchReport {
        protocol,
        store_size,
        delta,
        points,
        slope,
        intercept,
        r_squared,
        model_seconds,
    }
}

fn bench_core(
    l_values: &[u64],
    store_size: u64,
    delta: u64,
    rng: &mut ChaCha20Rng,
) -> Vec<BenchPoint> {
    let params = Params::new(128, 900, delta, 0).unwrap();
    let store: Vec<Observation> = (0..store_size)
        .map(|i| {
            let mut id = vec![0u8; 16];
            rng.fill_bytes(&mut id);
            Observation {
                id: pact_core::PseudonymId::from_bytes(id),
                heard_at: i * 900,
            }
        })
        .collect();
    let max_l = l_values.iter().copied().max().unwrap_or(0) as usize;
    let entries: Vec<Entry> = (0..max_l)
        .map(|_| {
            let mut seed_bytes = vec![0u8; 16];
            rng.fill_bytes(&mut seed_bytes);
            Entry::new(Seed::from_bytes(seed_bytes), 0, delta * 900)
        })
        .collect();

    l_values
        .iter()
        .map(|&l| {
            let seconds = best_of(3, || {
                let mut matches = 0usize;
                for entry in &entries[..l as usize] {
                    let candidates = regenerate(entry, &params).expect("bench entry");
                    matches += match_exposure(&store, &candidates, &params, 1800).len();
                }
                matches
            });
            BenchPoint { l, seconds }
        })
        .collect()
}

fn bench_alt(l_values: &[u64], store_size: u64, rng: &mut ChaCha20Rng) -> Vec<BenchPoint> {
    let mut keyring = DailyKeyring::new(20_000);
    let stored: Vec<StoredId> = (0..store_size)
        .map(|i| {
            let key = keyring.keygen(i, rng);
            make_broadcast(key, i * 86_400 + 10, rng).unwrap().stored()
        })
        .collect();
    let max_l = l_values.iter().copied().max().unwrap_or(0) as usize;
    let mut other = DailyKeyring::new(20_000);
    let keys: Vec<[u8; 32]> = (0..max_l as u64)
        .map(|day| other.keygen(day, rng).verifying_key())
        .collect();

    l_values
        .iter()
        .map(|&l| {
            let seconds = best_of(3, || {
                check_exposure(&stored, &keys[..l as usize]).matched.len()
            });
            BenchPoint { l, seconds }
        })
        .collect()
}

/// Unit costs for the analytic model: one PRG step, one verification.
fn unit_costs(rng: &mut ChaCha20Rng) -> (f64, f64) {
    let params = Params::default();
    let mut seed_bytes = vec![0u8; 16];
    rng.fill_bytes(&mut seed_bytes);
    let seed = Seed::from_bytes(seed_bytes);
    let reps = 2000;
    let start = Instant::now();
    let mut s = seed;
    for _ in 0..reps {
        s = derive_next(&s, &params).unwrap().0;
    }
    let t_g = start.elapsed().as_secs_f64() / reps as f64;

    let mut keyring = DailyKeyring::new(14);
    let key = keyring.keygen(0, rng);
    let vk = key.verifying_key();
    let stored = vec![make_broadcast(key, 5, rng).unwrap().stored()];
    let reps = 200;
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(check_exposure(&stored, &[vk]));
    }
    let t_vrfy = start.elapsed().as_secs_f64() / reps as f64;
    (t_g, t_vrfy)
}

/// Median-free quick timing: best of `n` runs (least interference).
fn best_of<T>(n: usize, mut work: impl FnMut() -> T) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let start = Instant::now();
        std::hint::black_box(work());
        best = best.min(start.elapsed().as_secs_f64());
    }
    best
}
