//! Chain lifecycle: initialization, grid-driven advancement with window
//! pruning, and report construction.

use thiserror::Error;

use crate::entry::Entry;
use crate::params::Params;
use crate::prg;
use crate::types::{PseudonymId, Seed};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("seed must be {expected} bytes, got {got}")]
    SeedLength { expected: usize, got: usize },
    #[error("clock moved backwards: state at {current}, requested {requested}")]
    ClockRegression { current: u64, requested: u64 },
}

/// The rolling state a device keeps: the current seed `S_i`, the retained
/// window seed `S*` from which at most Δ trailing epochs are regenerable,
/// and the wall times at which each was generated.
///
/// `step` counts PRG applications since the fresh `S_0`; `window_step` trails
/// it by at most Δ. Nothing older than `S*` is recoverable from this value,
/// which is the whole point of the pruning rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    seed: Seed,
    current_id: PseudonymId,
    step: u64,
    current_time: u64,
    window_seed: Seed,
    window_step: u64,
    window_time: u64,
}

impl ChainState {
    /// The pseudonym to broadcast during the current epoch.
    pub fn current_id(&self) -> &PseudonymId {
        &self.current_id
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn current_time(&self) -> u64 {
        self.current_time
    }

    pub fn window_seed(&self) -> &Seed {
        &self.window_seed
    }

    pub fn window_step(&self) -> u64 {
        self.window_step
    }

    pub fn window_time(&self) -> u64 {
        self.window_time
    }

    /// Number of ids regenerable from the retained window seed,
    /// `min(step, Δ)`.
    pub fn window_len(&self) -> u64 {
        self.step - self.window_step
    }

    /// Versioned binary snapshot of the state (seed material included — the
    /// caller owns at-rest protection).
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(1u8);
        out.push(self.seed.len() as u8);
        out.extend_from_slice(self.seed.as_bytes());
        out.extend_from_slice(self.current_id.as_bytes());
        out.extend_from_slice(&self.step.to_be_bytes());
        out.extend_from_slice(&self.current_time.to_be_bytes());
        out.extend_from_slice(self.window_seed.as_bytes());
        out.extend_from_slice(&self.window_step.to_be_bytes());
        out.extend_from_slice(&self.window_time.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<ChainState> {
        let (&version, rest) = bytes.split_first()?;
        if version != 1 {
            return None;
        }
        let (&len, rest) = rest.split_first()?;
        let len = len as usize;
        if rest.len() != len * 3 + 8 * 4 {
            return None;
        }
        let (seed, rest) = rest.split_at(len);
        let (id, rest) = rest.split_at(len);
        let (step, rest) = rest.split_at(8);
        let (time, rest) = rest.split_at(8);
        let (wseed, rest) = rest.split_at(len);
        let (wstep, wtime) = rest.split_at(8);
        Some(ChainState {
            seed: Seed::from_bytes(seed),
            current_id: PseudonymId::from_bytes(id),
            step: u64::from_be_bytes(step.try_into().ok()?),
            current_time: u64::from_be_bytes(time.try_into().ok()?),
            window_seed: Seed::from_bytes(wseed),
            window_step: u64::from_be_bytes(wstep.try_into().ok()?),
            window_time: u64::from_be_bytes(wtime.try_into().ok()?),
        })
    }
}

/// Starts a fresh chain at wall time `now` from caller-supplied entropy
/// (which must come from a cryptographically secure source).
///
/// With `skip_to_delta` the chain is pre-advanced so the first broadcast is
/// `id_Δ`, hiding how recently the chain started; the window time is
/// backdated accordingly so a report of the young chain still regenerates
/// every id at a plausible epoch.
pub fn init_chain(
    params: &Params,
    entropy: &[u8],
    skip_to_delta: bool,
    now: u64,
) -> Result<ChainState, ChainError> {
    init_inner(params, entropy, &[], skip_to_delta, now)
}

pub(crate) fn init_inner(
    params: &Params,
    entropy: &[u8],
    binding: &[u8],
    skip_to_delta: bool,
    now: u64,
) -> Result<ChainState, ChainError> {
    let s0 = Seed::from_bytes(entropy);
    let steps = if skip_to_delta {
        params.window_epochs()
    } else {
        1
    };
    let mut seed = s0.clone();
    let mut id = PseudonymId::from_bytes(Vec::new());
    for _ in 0..steps {
        let (next, next_id) = prg::step(&seed, binding, params)?;
        seed = next;
        id = next_id;
    }
    let window_time = if skip_to_delta {
        now.saturating_sub((params.window_epochs() - 1) * params.epoch_seconds())
    } else {
        now
    };
    Ok(ChainState {
        seed,
        current_id: id,
        step: steps,
        current_time: now,
        window_seed: s0,
        window_step: 0,
        window_time,
    })
}

/// Advances the chain to the epoch containing `now`, stepping once per
/// elapsed grid epoch (zero steps within the current epoch) and pruning the
/// window so at most Δ epochs of history remain reconstructible. Returns the
/// pseudonym for the epoch containing `now`.
pub fn advance(
    state: &ChainState,
    now: u64,
    params: &Params,
) -> Result<(ChainState, PseudonymId), ChainError> {
    advance_inner(state, now, &[], params)
}

pub(crate) fn advance_inner(
    state: &ChainState,
    now: u64,
    binding: &[u8],
    params: &Params,
) -> Result<(ChainState, PseudonymId), ChainError> {
    if now < state.current_time {
        return Err(ChainError::ClockRegression {
            current: state.current_time,
            requested: now,
        });
    }
    let mut next = state.clone();
    let target = params.epoch_at(now).index;
    let current = params.epoch_at(state.current_time).index;
    for _ in current..target {
        let (seed, id) = prg::step(&next.seed, binding, params)?;
        next.seed = seed;
        next.current_id = id;
        next.step += 1;
    }
    next.current_time = now;

    // Prune: S* ← S_{max(i−Δ, 0)}. Steps map affinely onto grid epochs
    // (one step per epoch since init), so a pruned seed's generation time is
    // the start of its epoch. S_0 and S_1 were both produced at init time,
    // hence the window clock only moves from the second window step on.
    let target_window = next.step.saturating_sub(params.window_epochs());
    while next.window_step < target_window {
        let (seed, _) = prg::step(&next.window_seed, binding, params)?;
        next.window_seed = seed;
        next.window_step += 1;
        if next.window_step >= 2 {
            let epoch_of_step = target - (next.step - next.window_step);
            next.window_time = params.epoch_start(epoch_of_step);
        }
    }
    let id = next.current_id.clone();
    Ok((next, id))
}

/// Builds the publishable report `(S*, t_start = t*, t_end = t_i)` and
/// restarts the chain from fresh entropy; no pre-report id is recoverable
/// from the returned state.
pub fn build_report(
    state: &ChainState,
    params: &Params,
    fresh_entropy: &[u8],
    skip_to_delta: bool,
    now: u64,
) -> Result<(Entry, ChainState), ChainError> {
    let entry = Entry::new(
        state.window_seed.clone(),
        state.window_time,
        state.current_time,
    );
    let fresh = init_chain(params, fresh_entropy, skip_to_delta, now)?;
    Ok((entry, fresh))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> Params {
        // Δ = 8 keeps window arithmetic visible in tests.
        Params::new(128, 900, 8, 0).unwrap()
    }

    #[test]
    fn init_starts_at_first_id() {
        let params = small_params();
        let state = init_chain(&params, &[9u8; 16], false, 1000).unwrap();
        let (_, id1) = prg::derive_next(&Seed::from_bytes(vec![9u8; 16]), &params).unwrap();
        assert_eq!(state.current_id(), &id1);
        assert_eq!(state.step(), 1);
        assert_eq!(state.window_time(), 1000);
    }

    #[test]
    fn init_is_deterministic() {
        let params = small_params();
        let a = init_chain(&params, &[1u8; 16], false, 0).unwrap();
        let b = init_chain(&params, &[1u8; 16], false, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn skip_to_delta_backdates_window() {
        let params = small_params();
        let now = 100 * 900;
        let state = init_chain(&params, &[2u8; 16], true, now).unwrap();
        assert_eq!(state.step(), 8);
        assert_eq!(state.window_time(), now - 7 * 900);
        assert_eq!(state.window_seed(), &Seed::from_bytes(vec![2u8; 16]));
    }

    #[test]
    fn advance_within_epoch_is_identity() {
        let params = small_params();
        let state = init_chain(&params, &[3u8; 16], false, 1000).unwrap();
        let (next, id) = advance(&state, 1400, &params).unwrap();
        assert_eq!(id, *state.current_id());
        assert_eq!(next.step(), state.step());
        assert_eq!(next.current_time(), 1400);
    }

    #[test]
    fn advance_steps_once_per_epoch() {
        let params = small_params();
        let state = init_chain(&params, &[4u8; 16], false, 0).unwrap();
        let (next, id) = advance(&state, 900, &params).unwrap();
        assert_eq!(next.step(), 2);
        assert_ne!(id, *state.current_id());
    }

    #[test]
    fn clock_regression_is_refused() {
        let params = small_params();
        let state = init_chain(&params, &[5u8; 16], false, 5000).unwrap();
        let err = advance(&state, 4000, &params).unwrap_err();
        assert_eq!(
            err,
            ChainError::ClockRegression {
                current: 5000,
                requested: 4000
            }
        );
    }

    #[test]
    fn window_prunes_to_delta() {
        let params = small_params();
        let state = init_chain(&params, &[6u8; 16], false, 0).unwrap();
        // Jump to epoch Δ+3+1 = step Δ+3: window should sit at S_3.
        let (next, _) = advance(&state, (8 + 3) * 900, &params).unwrap();
        assert_eq!(next.step(), 8 + 3 + 1);
        assert_eq!(next.window_step(), 3 + 1);
        assert_eq!(next.window_len(), 8);

        // Window seed must regenerate the current seed in exactly Δ steps.
        let mut seed = next.window_seed().clone();
        for _ in 0..next.window_len() {
            seed = prg::derive_next(&seed, &params).unwrap().0;
        }
        assert_eq!(&seed, &next.seed);
    }

    #[test]
    fn window_time_tracks_grid_after_pruning() {
        let params = small_params();
        let state = init_chain(&params, &[7u8; 16], false, 100).unwrap();
        let (next, _) = advance(&state, 12 * 900, &params).unwrap();
        // step = 13, window_step = 5; S_5 was generated entering epoch 5.
        assert_eq!(next.window_step(), 5);
        assert_eq!(next.window_time(), params.epoch_start(5));
    }

    #[test]
    fn snapshot_roundtrip() {
        let params = small_params();
        let state = init_chain(&params, &[8u8; 16], true, 12345).unwrap();
        let decoded = ChainState::decode(&state.encode()).unwrap();
        assert_eq!(decoded, state);
        assert_eq!(ChainState::decode(&[]), None);
        assert_eq!(ChainState::decode(&[2, 0]), None);
    }
}
