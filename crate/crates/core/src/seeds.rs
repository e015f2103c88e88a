//! Deterministic seed derivation for batch runs.
//!
//! Run `r` of a batch uses the RNG seed `splitmix64(master ^ r)`. The rule is
//! part of the reproducibility contract: reports record the master seed, and
//! any single run can be replayed in isolation from its index alone.

/// One step of the SplitMix64 output function.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run `run` of a batch keyed by `master`.
pub fn run_seed(master: u64, run: u64) -> u64 {
    splitmix64(master ^ run)
}
