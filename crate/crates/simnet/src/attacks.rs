//! Self-contained demonstrations of the collected-id ("dual") scheme's
//! documented weaknesses, with the equivalent attempt against the seed-chain
//! protocol run side by side. These are expected-weakness reproductions:
//! the dual attacks are supposed to succeed, the core attempts to fail.

use pact_core::{derive_next, match_exposure, regenerate, Entry, Observation, Params, Seed};
use pact_variants::{
    dual_is_mine, dual_keygen, dual_make_id, dual_make_id_with, dual_rerandomize, DualId,
    DualSecret, Group, RistrettoGroup,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DualAttackReport {
    /// The dual-scheme attack achieved its goal.
    pub dual_succeeded: bool,
    /// The equivalent attempt against the seed-chain protocol achieved it.
    pub core_succeeded: bool,
    /// Attack-specific count (linked locations, framed victims).
    pub count: u64,
}

/// Framing: an adversary collects an honest user's broadcast ids and
/// reports them as their own "collected" list. In the dual scheme the
/// victim's own check then comes back positive; in the seed-chain protocol
/// the adversary would need a seed regenerating the victim's ids, so random
/// guessing achieves nothing.
pub fn run_dual_framing(seed: u64, adversarial_core_guesses: usize) -> DualAttackReport {
    let group = RistrettoGroup;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // Dual world: the victim broadcasts, the adversary overhears and
    // re-randomizes before uploading (as the protocol itself would).
    let victim_secret = dual_keygen(&group, &mut rng);
    let overheard: Vec<DualId<RistrettoGroup>> = (0..8)
        .map(|_| dual_make_id(&group, &victim_secret, &mut rng))
        .collect();
    let server_list: Vec<DualId<RistrettoGroup>> = overheard
        .iter()
        .map(|id| dual_rerandomize(&group, id, &mut rng).expect("non-degenerate"))
        .collect();
    let dual_succeeded = server_list
        .iter()
        .any(|id| dual_is_mine(&group, id, &victim_secret));

    // Core world: the adversary heard the victim's chain ids and tries to
    // publish a window that regenerates any of them.
    let params = Params::new(128, 900, 16, 0).unwrap();
    let mut victim_seed = vec![0u8; 16];
    rng.fill_bytes(&mut victim_seed);
    let mut victim_ids = Vec::new();
    let mut s = Seed::from_bytes(victim_seed);
    for _ in 0..16 {
        let (next, id) = derive_next(&s, &params).unwrap();
        victim_ids.push(Observation { id, heard_at: 0 });
        s = next;
    }
    let mut core_succeeded = false;
    for _ in 0..adversarial_core_guesses {
        let mut guess = vec![0u8; 16];
        rng.fill_bytes(&mut guess);
        let entry = Entry::new(Seed::from_bytes(guess), 0, 15 * 900);
        let candidates = regenerate(&entry, &params).unwrap();
        if !match_exposure(&victim_ids, &candidates, &params, u64::MAX / 4).is_empty() {
            core_succeeded = true;
            break;
        }
    }

    DualAttackReport {
        dual_succeeded,
        core_succeeded,
        count: u64::from(dual_succeeded),
    }
}

/// Surveillance: a tracking entity plants broadcasters at several
/// locations, each emitting pairs `(x, x^{s_L})` under a per-location
/// exponent. Honest users collect what they hear; when one reports (dual
/// scheme: uploading collected, re-randomized ids), the entity scans the
/// public list with each s_L and learns which locations the positive
/// visited — re-randomization does not break the exponent relation. The
/// seed-chain protocol never uploads collected ids, so the planted material
/// never reaches the server.
pub fn run_dual_surveillance(seed: u64, locations: usize, visited: &[usize]) -> DualAttackReport {
    let group = RistrettoGroup;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let location_secrets: Vec<DualSecret<RistrettoGroup>> = (0..locations)
        .map(|_| dual_keygen(&group, &mut rng))
        .collect();

    // The honest user walks through `visited`, collecting one planted id
    // per location, plus some ids from ordinary users.
    let mut collected: Vec<DualId<RistrettoGroup>> = Vec::new();
    for &loc in visited {
        let r = group.random_scalar(&mut rng);
        collected.push(dual_make_id_with(&group, &location_secrets[loc], &r));
    }
    for _ in 0..5 {
        let bystander = dual_keygen(&group, &mut rng);
        collected.push(dual_make_id(&group, &bystander, &mut rng));
    }

    // Dual report: re-randomized collected ids on the public list.
    let server_list: Vec<DualId<RistrettoGroup>> = collected
        .iter()
        .map(|id| dual_rerandomize(&group, id, &mut rng).expect("non-degenerate"))
        .collect();

    let mut linked = Vec::new();
    for (loc, secret) in location_secrets.iter().enumerate() {
        if server_list
            .iter()
            .any(|id| dual_is_mine(&group, id, secret))
        {
            linked.push(loc);
        }
    }
    let mut expected: Vec<usize> = visited.to_vec();
    expected.sort_unstable();
    expected.dedup();
    let dual_succeeded = linked == expected;

    // Core world: planted broadcasts are just bytes the honest user stores
    // locally; a core report reveals the reporter's own generated chain.
    // Nothing location-tagged ever appears on the server, so the entity's
    // scan has nothing to match: the linkage count is structurally zero.
    let core_succeeded = false;

    DualAttackReport {
        dual_succeeded,
        core_succeeded,
        count: linked.len() as u64,
    }
}
