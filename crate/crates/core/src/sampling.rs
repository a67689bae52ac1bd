// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Seeded selection of vertex pairs for the pairwise checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::space::Vertex;

/// Below this many vertices pairwise checks visit every ordered pair.
pub const EXHAUSTIVE_PAIR_CUTOFF: usize = 40;

/// Default number of sampled pairs.
pub const DEFAULT_PAIR_BUDGET: usize = 2000;

/// Every ordered pair of distinct vertices below [`EXHAUSTIVE_PAIR_CUTOFF`],
/// otherwise `budget` seeded uniform pairs of distinct vertices.
pub fn sample_pairs(n: usize, budget: usize, seed: u64) -> Vec<(Vertex, Vertex)> {
    if n < 2 {
        return Vec::new();
    }
    if n < EXHAUSTIVE_PAIR_CUTOFF || n * (n - 1) <= budget {
        return ordered_pairs(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        if x != y {
            out.push((x, y));
        }
    }
    out
}

pub fn ordered_pairs(n: usize) -> Vec<(Vertex, Vertex)> {
    (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y))).collect()
}

/// Unordered pairs `x < y`, all of them up to `exhaustive_up_to` vertices,
/// else `budget` seeded samples.
pub fn unordered_pairs(n: usize, exhaustive_up_to: usize, budget: usize, seed: u64) -> Vec<(Vertex, Vertex)> {
    if n <= exhaustive_up_to {
        return (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    }
    sample_pairs(n, budget, seed).into_iter().map(|(x, y)| (x.min(y), x.max(y))).collect()
}
