//! Execution mode and deterministic seeding for the randomized and
//! enumerative checks.
//!
//! Every randomized probe `i` of a run with seed `s` draws from its own
//! `ChaCha8Rng` seeded with `derive_seed(s, stream, i)`, where
//! `derive_seed` chains the SplitMix64 finalizer over `s`, the stream tag
//! and `i`. Results therefore do not depend on how probes are scheduled
//! across threads, and `Exec::Sequential` and `Exec::Parallel` produce
//! identical outputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs sequentially.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Maps `f` over `0..len`, preserving index order in the output.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Like [`Exec::map`] for fallible closures; returns the first error by index.
    pub fn try_map<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(len, f).into_iter().collect()
    }
}

/// Stream tags keep seeds of unrelated consumers apart.
pub mod stream {
    pub const BOUNDED: u64 = 1;
    pub const CONTINUITY: u64 = 2;
    pub const GREEDY: u64 = 3;
    pub const ORACLE: u64 = 4;
    pub const RIMS: u64 = 5;
    pub const BODIES: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for probe `index` of stream `stream` under the run seed `seed`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

pub fn probe_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}
