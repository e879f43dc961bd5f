use rayon::prelude::*;

use super::{DeterministicEvaluator, SearchSpace};
use crate::gait::{GaitAssignment, LegId, PrimitivePair};
use crate::reward::{reward, RewardCoefficients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub best: GaitAssignment,
    pub best_reward: f64,
    pub candidates: u64,
}

/// `n_prims^(2 * n_legs)`.
pub fn enumeration_count(n_legs: usize, n_prims: usize) -> u64 {
    (n_prims as u64).pow(2 * n_legs as u32)
}

const CHUNKS: u64 = 4096;

/// Decodes candidate `index` in lexicographic order over the searched legs
/// sorted A-D, each leg's pair ordered by `(first, second)`.
fn decode(mut index: u64, legs: &[LegId], n_prims: usize, base: &GaitAssignment) -> GaitAssignment {
    let radix = (n_prims * n_prims) as u64;
    let mut g = *base;
    for &leg in legs.iter().rev() {
        let p = (index % radix) as usize;
        index /= radix;
        let pair = PrimitivePair::from_ids(p / n_prims, p % n_prims).expect("pair within table");
        g.set(leg, pair);
    }
    g
}

/// Exhaustive argmax over every assignment of the searched legs; legs outside
/// `space` keep their pair from `base`. Ties go to the lexicographically
/// first assignment. Fans out across threads.
pub fn brute_force_oracle<D: DeterministicEvaluator + ?Sized>(
    ev: &D,
    k: &RewardCoefficients,
    base: &GaitAssignment,
    space: &SearchSpace,
) -> OracleResult {
    let mut legs = space.leg_order().to_vec();
    legs.sort();
    let n_prims = space.n_prims();
    let total = enumeration_count(legs.len(), n_prims);
    let chunk = total.div_ceil(CHUNKS).max(1);
    let n_chunks = total.div_ceil(chunk);

    let (best_index, best_reward) = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(total);
            let mut best: Option<(u64, f64)> = None;
            for i in start..end {
                let g = decode(i, &legs, n_prims, base);
                let r = reward(&ev.displacement(&g), k);
                if r.is_nan() {
                    continue;
                }
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((i, r));
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        Some(b)
                    } else {
                        Some(a)
                    }
                }
            },
        )
        .unwrap_or((0, f64::NEG_INFINITY));

    OracleResult { best: decode(best_index, &legs, n_prims, base), best_reward, candidates: total }
}
