//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream index)`, so a
//! replica's draws depend only on its own index and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream indices reserved for purposes other than trajectory replicas.
/// Replicas use `0..n_replicas`; auxiliary estimators sit far above that.
pub(crate) mod purpose {
    pub const MOMENTS: u64 = 1 << 40;
    pub const ASSUMPTION3: u64 = (1 << 40) + 1;
    pub const RECURSION_LHS: u64 = (1 << 40) + 2;
    pub const RECURSION_RHS: u64 = (1 << 40) + 3;
    pub const PROBES: u64 = (1 << 40) + 4;
    pub const HOLDER: u64 = (1 << 40) + 5;
}
