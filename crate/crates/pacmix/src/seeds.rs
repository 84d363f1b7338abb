//! Deterministic random-number streams.
//!
//! Everything stochastic in this crate draws from counter-based ChaCha
//! streams addressed by `(seed, stream)`. A stream id is built from a
//! purpose tag plus an index (task number, repetition number, step
//! number), so changing how many draws one consumer makes never shifts
//! the values another consumer sees, and generating task `i` of a family
//! gives the same bytes no matter how many siblings exist.
//!
//! Stream layout (`purpose` below):
//!
//! | purpose | used by |
//! |---------|---------|
//! | `FEATURES` | feature draws of a synthetic dataset |
//! | `NOISE` | noise draws of a synthetic dataset |
//! | `LABELS` | class-label draws of a classification dataset |
//! | `DESIGN` | space-filling designs |
//! | `BATCH` | batch screening in sequential sampling |
//! | `SPLIT` | train/validation splits in the historical-data learner |
//! | `FOLDS` | cross-validation folds of the single-model baseline |
//! | `TEST` | held-out test sets in the benchmark harness |

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub const FEATURES: u64 = 0;
pub const NOISE: u64 = 1;
pub const LABELS: u64 = 2;
pub const DESIGN: u64 = 3;
pub const BATCH: u64 = 4;
pub const SPLIT: u64 = 5;
pub const FOLDS: u64 = 6;
pub const TEST: u64 = 7;

const PURPOSE_SPAN: u64 = 8;

/// RNG for `(seed, purpose, index)`. Streams with distinct `(purpose, index)`
/// never overlap.
pub fn stream_rng(seed: u64, purpose: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(PURPOSE_SPAN).wrapping_add(purpose));
    rng
}

/// Mixes a tag into a seed (splitmix64 finalizer). Used to derive
/// per-task and per-repetition sub-seeds.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable FNV-1a hash of a little-endian byte stream. Used to key
/// per-task randomness by dataset *content* rather than position, which
/// is what makes the historical-data learner permutation-equivariant.
pub struct ContentHasher {
    state: u64,
}

impl ContentHasher {
    pub fn new() -> Self {
        Self {
            state: 0xCBF2_9CE4_8422_2325,
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    pub fn finish(&self) -> u64 {
        self.state
    }
}

impl Default for ContentHasher {
    fn default() -> Self {
        Self::new()
    }
}
