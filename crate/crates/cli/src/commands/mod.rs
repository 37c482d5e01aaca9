pub mod agent;
pub mod bench;
pub mod client;
pub mod keys;
pub mod narrowcast;
pub mod registry;
pub mod simulate;

use std::time::{SystemTime, UNIX_EPOCH};

pub fn wall_clock() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("clock before 1970")
        .as_secs()
}
