//! Size caps for the constructions that can blow up exponentially.
//!
//! Both caps can be overridden through environment variables so batch runs
//! on larger models do not need a rebuild.

use std::env;

pub const DEFAULT_MAX_OBSERVER_STATES: usize = 1 << 20;
pub const DEFAULT_MAX_DELTA_STRINGS: usize = 10_000;

pub const OBSERVER_ENV: &str = "DES_ATTACK_MAX_OBSERVER_STATES";
pub const DELTA_ENV: &str = "DES_ATTACK_MAX_DELTA_STRINGS";

fn read(var: &str, default: usize) -> usize {
    env::var(var)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(default)
}

/// Maximum number of states any subset construction may create.
pub fn max_observer_states() -> usize {
    read(OBSERVER_ENV, DEFAULT_MAX_OBSERVER_STATES)
}

/// Maximum size of the bounded output vocabulary.
pub fn max_delta_strings() -> usize {
    read(DELTA_ENV, DEFAULT_MAX_DELTA_STRINGS)
}
