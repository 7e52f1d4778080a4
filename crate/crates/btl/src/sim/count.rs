//! Counts-only simulation: evolves per-type population counts without
//! genealogy, using sequential-binomial multinomial splitting so one
//! generation costs O(support size) regardless of the population size.
//! Serves survival frequencies, conditioned final counts, and emigrant
//! totals; genealogy-bearing engines live in `full` and `stream`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::sim::compiled::SimModel;

/// Split `total` events across the support entries of `ty`'s law
/// (multinomial via sequential conditional binomials), apply each entry's
/// offspring counts to `next`, and return the number of children of
/// `watch_type` produced (for emigrant accounting).
fn step_type(
    model: &SimModel,
    ty: usize,
    total: u64,
    next: &mut [u64],
    watch_type: Option<usize>,
    rng: &mut impl Rng,
) -> u64 {
    let support = model.count_support(ty);
    let mut remaining = total;
    let mut remaining_p = 1.0f64;
    let mut watched = 0u64;
    for (idx, (vec, p)) in support.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let hits = if idx + 1 == support.len() {
            remaining
        } else {
            let cond = (p / remaining_p).clamp(0.0, 1.0);
            let draw = Binomial::new(remaining, cond).expect("valid binomial").sample(rng);
            remaining_p = (remaining_p - p).max(f64::MIN_POSITIVE);
            draw
        };
        if hits > 0 {
            for (child_ty, &cnt) in vec.iter().enumerate() {
                if cnt > 0 {
                    next[child_ty] += hits * u64::from(cnt);
                    if watch_type == Some(child_ty) {
                        watched += hits * u64::from(cnt);
                    }
                }
            }
            remaining -= hits;
        }
    }
    watched
}

/// Population counts advanced one generation.
pub fn step_counts(model: &SimModel, counts: &[u64], next: &mut Vec<u64>, rng: &mut impl Rng) {
    next.clear();
    next.resize(model.n_types(), 0);
    for (ty, &count) in counts.iter().enumerate() {
        if count > 0 {
            step_type(model, ty, count, next, None, rng);
        }
    }
}

/// Run the count chain from `initial` to `horizon` or extinction.
/// Returns the final counts (all zero if extinct early).
pub fn run_counts(
    model: &SimModel,
    initial: &[u32],
    horizon: u64,
    rng: &mut impl Rng,
) -> Vec<u64> {
    let mut counts: Vec<u64> = initial.iter().map(|&c| u64::from(c)).collect();
    let mut next = Vec::new();
    for _ in 0..horizon {
        if counts.iter().all(|&c| c == 0) {
            break;
        }
        step_counts(model, &counts, &mut next, rng);
        std::mem::swap(&mut counts, &mut next);
    }
    counts
}

/// Emigrant-total sample: evolve only the types `1..=barrier` (1-based) until
/// their joint extinction, counting every type-(barrier+1) daughter born
/// along the way. Returns `(total, capped)` where `capped` reports that the
/// generation cap ended the run before extinction.
pub fn emigrant_total(
    model: &SimModel,
    barrier: usize,
    generation_cap: u64,
    rng: &mut impl Rng,
) -> (u64, bool) {
    let watch = barrier; // 0-based index of type barrier+1
    let mut counts = vec![0u64; model.n_types()];
    counts[0] = 1;
    let mut next = vec![0u64; model.n_types()];
    let mut total = 0u64;
    for _ in 0..generation_cap {
        if counts[..barrier].iter().all(|&c| c == 0) {
            return (total, false);
        }
        next.iter_mut().for_each(|c| *c = 0);
        for (ty, &count) in counts.iter().enumerate().take(barrier) {
            if count > 0 {
                total += step_type(model, ty, count, &mut next, Some(watch), rng);
            }
        }
        counts[..barrier].copy_from_slice(&next[..barrier]);
    }
    (total, true)
}
