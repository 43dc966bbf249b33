//! Enumeration guards shared by the brute-force routines.
//!
//! Each guard caps the number of configurations a routine may enumerate.
//! Setting `MIXV_MAX_ENUM` to a positive integer replaces every default cap
//! with that value. Large overrides can make commands run for hours or
//! exhaust memory.

use std::sync::OnceLock;

pub const ENV_MAX_ENUM: &str = "MIXV_MAX_ENUM";

/// Points of Σⁿ enumerated by point-mass expansion and brute-force equivalence.
pub const DEFAULT_MIXTURE_POINTS: u64 = 1 << 20;
/// Spin configurations enumerated for partition functions and marginals.
pub const DEFAULT_ISING_CONFIGS: u64 = 1 << 24;
/// Spin configurations enumerated when comparing two models.
pub const DEFAULT_TV_CONFIGS: u64 = 1 << 20;

fn env_override() -> Option<u64> {
    static OVERRIDE: OnceLock<Option<u64>> = OnceLock::new();
    *OVERRIDE.get_or_init(|| {
        std::env::var(ENV_MAX_ENUM)
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .filter(|&v| v > 0)
    })
}

/// The effective cap for a routine whose built-in default is `default`.
pub fn max_enum(default: u64) -> u64 {
    env_override().unwrap_or(default)
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}
