//! Keyed random streams.
//!
//! Every stochastic task (one Gibbs chain for a column/block pair in one EM
//! iteration, one simulated column, ...) draws from its own ChaCha stream
//! derived from the run seed and a task key, so results do not depend on the
//! order in which tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags separating the stream families of one run.
pub mod tag {
    pub const DAG: u64 = 1;
    pub const WEIGHTS: u64 = 2;
    pub const SIGMA: u64 = 3;
    pub const SIMULATE: u64 = 4;
    pub const INIT_EM: u64 = 5;
    pub const EM: u64 = 6;
    pub const LINKS: u64 = 7;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for the task identified by `key`.
    pub fn stream(&self, key: &[u64]) -> StreamRng {
        let mut h = splitmix64(self.seed ^ 0x6a09_e667_f3bc_c908);
        for &k in key {
            h = splitmix64(h ^ splitmix64(k.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        ChaCha8Rng::seed_from_u64(h)
    }

    /// Child stream family, e.g. one per replication.
    pub fn derive(&self, key: &[u64]) -> RngStreams {
        let mut h = self.seed;
        for &k in key {
            h = splitmix64(h ^ splitmix64(k ^ 0xbb67_ae85_84ca_a73b));
        }
        RngStreams { seed: h }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
