//! Per-trial random streams.
//!
//! Every trial owns a generator derived from `(base_seed, trial_index)` only,
//! so results do not depend on how trials are scheduled across threads.
//!
//! Stream seed: `splitmix64(base_seed ^ (trial_index + 1) * 0x9E37_79B9_7F4A_7C15)`,
//! which seeds a ChaCha8 generator through `SeedableRng::seed_from_u64`.
//! Both steps are platform independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator type used for every sampled quantity.
pub type TrialRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, trial_index: u64) -> Self {
        SeedSpec {
            base_seed,
            trial_index,
        }
    }

    pub fn stream_seed(&self) -> u64 {
        splitmix64(
            self.base_seed ^ self.trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA),
        )
    }

    pub fn rng(&self) -> TrialRng {
        TrialRng::seed_from_u64(self.stream_seed())
    }

    /// Seed for trial `trial_index` of the same base.
    pub fn trial(&self, trial_index: u64) -> Self {
        SeedSpec::new(self.base_seed, trial_index)
    }

    /// Independent family of streams, keyed by `tag`, for a second use of the same trial.
    pub fn fork(&self, tag: u64) -> Self {
        SeedSpec::new(splitmix64(self.base_seed ^ splitmix64(tag)), self.trial_index)
    }
}

/// Runs `f` once per trial with that trial's seed, in parallel on the current
/// rayon pool. Results come back in trial order whatever the scheduling.
pub fn map_trials<R, F>(base_seed: u64, trials: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(SeedSpec) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| f(SeedSpec::new(base_seed, t)))
        .collect()
}
