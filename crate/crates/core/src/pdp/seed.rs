// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies the random stream of one trajectory.
///
/// Streams come from ChaCha8, a counter-based generator: the master seed is
/// expanded into the 256-bit key by `SeedableRng::seed_from_u64` and the
/// stream number selects one of 2^64 independent nonce streams. Trajectory
/// `i` of an ensemble uses stream `i`, so its draws do not depend on which
/// worker runs it or in which order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrajectorySeed {
    pub master: u64,
    pub stream: u64,
}

impl TrajectorySeed {
    pub fn new(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    pub fn with_stream(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}
