//! Reproducible parallel execution of independent attempts.
//!
//! Every attempt owns an RNG stream derived from (master seed, attempt
//! index), so an attempt's outcome is a pure function of the seed and its
//! index. Workers grab fixed-size chunks of consecutive indices from an
//! atomic counter; the collector merges chunk results in index order and
//! applies the stopping rule there. The aggregate output is therefore
//! bit-identical for a fixed (seed, chunk size) no matter how many worker
//! threads ran or how they were scheduled.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Master seed plus the work partition (chunk size).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngPolicy {
    pub master_seed: u64,
    pub chunk_size: u64,
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            chunk_size: 64,
        }
    }

    pub fn with_chunk_size(master_seed: u64, chunk_size: u64) -> Self {
        assert!(chunk_size > 0);
        Self {
            master_seed,
            chunk_size,
        }
    }

    /// Independent stream for one attempt index (Weyl-sequence seed into the
    /// generator's SplitMix64 expander).
    pub fn stream(&self, index: u64) -> Xoshiro256PlusPlus {
        let seed = self
            .master_seed
            .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        Xoshiro256PlusPlus::seed_from_u64(seed)
    }
}

/// Outcome of one attempt.
pub enum AttemptOutcome<T> {
    Accepted(T),
    Rejected,
    /// A configured cap was hit; the attempt is discarded and counted.
    Overflow,
}

/// When to stop consuming attempts.
#[derive(Debug, Clone, Copy)]
pub enum Goal {
    /// Run attempt indices 0..total, keep every acceptance.
    FixedAttempts(u64),
    /// Run until `target` acceptances, giving up after `max_attempts`.
    TargetAccepted { target: u64, max_attempts: u64 },
}

pub struct DriverOutput<T> {
    pub accepted: Vec<T>,
    /// Attempts consumed by the stopping rule: for a target goal, the index
    /// of the final acceptance plus one (the negative-binomial count making
    /// `attempts / accepted` an unbiased inverse-probability estimate).
    pub attempts: u64,
    pub overflowed: u64,
    /// True when a target goal exhausted `max_attempts` first.
    pub exhausted: bool,
}

struct ChunkResult<T> {
    accepted: Vec<(u64, T)>,
    overflowed: u64,
    attempts: u64,
}

/// Run attempts in parallel under the policy's deterministic partition.
///
/// `make_scratch` builds per-worker reusable state; `attempt` must be a pure
/// function of (scratch contents it resets, attempt index, its RNG stream).
pub fn run_attempts<S, T, MS, A>(
    goal: Goal,
    policy: RngPolicy,
    threads: usize,
    make_scratch: MS,
    attempt: A,
) -> DriverOutput<T>
where
    T: Send,
    MS: Fn() -> S + Sync,
    A: Fn(&mut S, u64, &mut Xoshiro256PlusPlus) -> AttemptOutcome<T> + Sync,
{
    let threads = threads.max(1);
    let attempt_limit = match goal {
        Goal::FixedAttempts(total) => total,
        Goal::TargetAccepted { max_attempts, .. } => max_attempts,
    };
    let chunk_size = policy.chunk_size;
    let n_chunks = attempt_limit.div_ceil(chunk_size);
    let next_chunk = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(u64, ChunkResult<T>)>();

    std::thread::scope(|scope| {
        for _ in 0..threads {
            let tx = tx.clone();
            let next_chunk = &next_chunk;
            let stop = &stop;
            let make_scratch = &make_scratch;
            let attempt = &attempt;
            scope.spawn(move || {
                let mut scratch = make_scratch();
                loop {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let chunk = next_chunk.fetch_add(1, Ordering::Relaxed);
                    if chunk >= n_chunks {
                        break;
                    }
                    let lo = chunk * chunk_size;
                    let hi = (lo + chunk_size).min(attempt_limit);
                    let mut result = ChunkResult {
                        accepted: Vec::new(),
                        overflowed: 0,
                        attempts: hi - lo,
                    };
                    for index in lo..hi {
                        let mut rng = policy.stream(index);
                        match attempt(&mut scratch, index, &mut rng) {
                            AttemptOutcome::Accepted(t) => result.accepted.push((index, t)),
                            AttemptOutcome::Rejected => {}
                            AttemptOutcome::Overflow => result.overflowed += 1,
                        }
                    }
                    if tx.send((chunk, result)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);

        // Consume chunk results strictly in index order.
        let mut pending: BTreeMap<u64, ChunkResult<T>> = BTreeMap::new();
        let mut next_wanted = 0u64;
        let mut out = DriverOutput {
            accepted: Vec::new(),
            attempts: 0,
            overflowed: 0,
            exhausted: false,
        };
        let target = match goal {
            Goal::FixedAttempts(_) => u64::MAX,
            Goal::TargetAccepted { target, .. } => target,
        };
        if target == 0 {
            stop.store(true, Ordering::Relaxed);
        }
        let mut done = target == 0;
        for (chunk, result) in rx.iter() {
            if done {
                continue; // drain remaining sends
            }
            pending.insert(chunk, result);
            while let Some(result) = pending.remove(&next_wanted) {
                next_wanted += 1;
                let base_attempts = out.attempts;
                out.attempts += result.attempts;
                out.overflowed += result.overflowed;
                for (index, t) in result.accepted {
                    out.accepted.push(t);
                    if out.accepted.len() as u64 == target {
                        out.attempts = index + 1;
                        stop.store(true, Ordering::Relaxed);
                        done = true;
                        break;
                    }
                }
                if done {
                    break;
                }
                debug_assert!(out.attempts >= base_attempts);
            }
            if done {
                pending.clear();
            }
        }
        if let Goal::TargetAccepted { target, .. } = goal {
            if (out.accepted.len() as u64) < target {
                out.exhausted = true;
            }
        }
        out
    })
}
