//! Monte Carlo genealogy simulation.
//!
//! Three engines share one compiled model and one reproducibility scheme:
//!
//! - [`full::simulate_forward`] keeps the whole genealogy (parent pointers,
//!   survivor marks, reduced counts): the reference engine, O(total
//!   particles) memory.
//! - [`stream`] keeps only the current generation plus the pruned ancestor
//!   tree: the engine behind conditioned sampling at long horizons.
//! - [`count`] evolves bare population counts with one multinomial split per
//!   type per generation: survival frequencies and emigrant totals at any
//!   population size.
//!
//! Conditioning on survival is plain rejection: attempts are indexed, each
//! index owns a derived RNG stream, and the accepted prefix is a
//! deterministic function of (seed, chunk size) regardless of thread count.
//! The attempt count at the final acceptance is reported; it is an unbiased
//! estimate of the inverse survival probability.
//!
//! Cost model: for a 2-type model the expected particle-events per rejection
//! attempt at horizon n are n + m_12 n^2 / 2 (the next-type mean drives the
//! quadratic term), so conditioned sampling is desk-scale feasible for
//! horizons up to a few thousand.

pub mod alias;
pub mod compiled;
pub mod count;
pub mod driver;
pub mod full;
pub mod stream;

pub use compiled::SimModel;
pub use driver::RngPolicy;
pub use full::{simulate_forward, GenealogyRun, Particle, DEFAULT_POPULATION_CAP};
pub use stream::{StreamOutcome, StreamScratch};

use crate::error::{Error, Result};
use crate::model::DerivedConstants;
use driver::{run_attempts, AttemptOutcome, Goal};

/// Default rejection budget for conditioned sampling.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000_000;
/// Default generation cap for emigrant-total runs.
pub const DEFAULT_EMIGRANT_GENERATION_CAP: u64 = 10_000_000;

/// Summary of one conditioned (surviving) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Attempt index that produced this run (for provenance).
    pub attempt: u64,
    pub beta: u64,
    /// 1-based ancestor type.
    pub zeta: usize,
    pub final_counts: Vec<u64>,
}

/// Result of conditioned sampling.
#[derive(Debug, Clone)]
pub struct ConditionedBatch {
    pub runs: Vec<RunSummary>,
    /// Attempts consumed up to and including the last accepted run.
    pub attempts: u64,
    /// Attempts discarded because a cap aborted them.
    pub overflowed: u64,
    /// The attempt budget ran out before `target` acceptances.
    pub exhausted: bool,
    pub horizon: u64,
}

/// Rejection-sample `target` surviving runs at `horizon`, keeping ancestor
/// summaries (streaming engine: memory stays O(population + ancestry)).
pub fn sample_conditioned(
    model: &SimModel,
    horizon: u64,
    target: u64,
    policy: RngPolicy,
    threads: usize,
    max_attempts: u64,
    population_cap: u64,
) -> ConditionedBatch {
    let initial = root_vector(model.n_types());
    let out = run_attempts(
        Goal::TargetAccepted {
            target,
            max_attempts,
        },
        policy,
        threads,
        StreamScratch::new,
        |scratch, index, rng| {
            let outcome = stream::run_stream(model, horizon, &initial, rng, scratch, population_cap);
            if outcome.overflow {
                AttemptOutcome::Overflow
            } else if outcome.survived {
                AttemptOutcome::Accepted(RunSummary {
                    attempt: index,
                    // A surviving run from a single root always has some
                    // singleton level (level 0 at the latest).
                    beta: outcome.beta.expect("single-root run has an ancestor"),
                    zeta: outcome.zeta.expect("single-root run has an ancestor"),
                    final_counts: outcome.final_counts,
                })
            } else {
                AttemptOutcome::Rejected
            }
        },
    );
    ConditionedBatch {
        runs: out.accepted,
        attempts: out.attempts,
        overflowed: out.overflowed,
        exhausted: out.exhausted,
        horizon,
    }
}

/// Rejection-sample `target` surviving runs keeping the full genealogy.
/// Memory is O(total particles) per run: for short horizons only.
pub fn sample_conditioned_genealogies(
    model: &SimModel,
    horizon: u64,
    target: u64,
    policy: RngPolicy,
    threads: usize,
    max_attempts: u64,
    population_cap: u64,
) -> (Vec<GenealogyRun>, u64, bool) {
    let initial = root_vector(model.n_types());
    let out = run_attempts(
        Goal::TargetAccepted {
            target,
            max_attempts,
        },
        policy,
        threads,
        || (),
        |_, index, rng| {
            let run = full::simulate_forward(model, horizon, &initial, rng, population_cap);
            if run.overflow {
                AttemptOutcome::Overflow
            } else if run.survived {
                if index % 1024 == 0 {
                    run.check_invariants().expect("genealogy invariants");
                }
                AttemptOutcome::Accepted(run)
            } else {
                AttemptOutcome::Rejected
            }
        },
    );
    (out.accepted, out.attempts, out.exhausted)
}

/// Unconditioned survival frequency over a fixed number of runs
/// (counts-only engine).
pub struct SurvivalFrequency {
    pub survived: u64,
    pub runs: u64,
}

pub fn survival_frequency(
    model: &SimModel,
    horizon: u64,
    runs: u64,
    policy: RngPolicy,
    threads: usize,
) -> SurvivalFrequency {
    let initial = root_vector(model.n_types());
    let out = run_attempts(
        Goal::FixedAttempts(runs),
        policy,
        threads,
        || (),
        |_, _, rng| {
            let fin = count::run_counts(model, &initial, horizon, rng);
            if fin.iter().any(|&c| c > 0) {
                AttemptOutcome::Accepted(())
            } else {
                AttemptOutcome::Rejected
            }
        },
    );
    SurvivalFrequency {
        survived: out.accepted.len() as u64,
        runs,
    }
}

/// One emigrant-total sample: the number of type-(barrier+1) daughters ever
/// born to the subsystem of types 1..=barrier before its extinction.
pub fn sample_emigrant_total(
    model: &SimModel,
    barrier: usize,
    rng: &mut impl rand::RngCore,
    generation_cap: u64,
) -> Result<u64> {
    check_barrier(model, barrier)?;
    let (w, capped) = count::emigrant_total(model, barrier, generation_cap, rng);
    if capped {
        return Err(Error::BudgetExceeded(format!(
            "emigrant run still alive after {generation_cap} generations (partial total {w})"
        )));
    }
    Ok(w)
}

/// Batch of emigrant totals.
pub struct EmigrantBatch {
    pub totals: Vec<u64>,
    /// Runs ended by the generation cap; their partial totals are included
    /// (every capped run is already enormous, so transform-scale statistics
    /// are unaffected).
    pub capped: u64,
}

pub fn emigrant_totals(
    model: &SimModel,
    barrier: usize,
    runs: u64,
    generation_cap: u64,
    policy: RngPolicy,
    threads: usize,
) -> Result<EmigrantBatch> {
    check_barrier(model, barrier)?;
    let out = run_attempts(
        Goal::FixedAttempts(runs),
        policy,
        threads,
        || (),
        |_, _, rng| {
            let (w, capped) = count::emigrant_total(model, barrier, generation_cap, rng);
            AttemptOutcome::Accepted((w, capped))
        },
    );
    let capped = out.accepted.iter().filter(|(_, c)| *c).count() as u64;
    Ok(EmigrantBatch {
        totals: out.accepted.into_iter().map(|(w, _)| w).collect(),
        capped,
    })
}

/// Clock for ancestor birth-time statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScale {
    /// Divide beta by `n^{gamma_i}` for island `i`.
    Island(usize),
    /// Divide beta by `n`.
    Terminal,
}

/// Empirical law of (scaled ancestor birth time, ancestor type).
#[derive(Debug, Clone)]
pub struct MrcaStatistics {
    /// Sorted scaled birth times.
    pub scaled_beta: Vec<f64>,
    /// Probability of each ancestor type, index 0 = type 1; sums to 1.
    pub zeta_pmf: Vec<f64>,
    pub samples: usize,
    pub scale_divisor: f64,
}

impl MrcaStatistics {
    /// Empirical CDF of the scaled birth time.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.scaled_beta.partition_point(|&b| b <= x);
        k as f64 / self.scaled_beta.len() as f64
    }
}

pub fn mrca_statistics(
    runs: &[RunSummary],
    constants: &DerivedConstants,
    horizon: u64,
    scale: TimeScale,
) -> Result<MrcaStatistics> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("no conditioned runs".into()));
    }
    let divisor = match scale {
        TimeScale::Island(i) => {
            if i == 0 || i >= constants.n_types() {
                return Err(Error::Domain(format!("island index {i} out of range")));
            }
            (horizon as f64).powf(constants.gamma(i))
        }
        TimeScale::Terminal => horizon as f64,
    };
    let mut scaled: Vec<f64> = runs.iter().map(|r| r.beta as f64 / divisor).collect();
    scaled.sort_by(f64::total_cmp);
    let mut zeta_counts = vec![0u64; constants.n_types()];
    for r in runs {
        zeta_counts[r.zeta - 1] += 1;
    }
    let total = runs.len() as f64;
    Ok(MrcaStatistics {
        scaled_beta: scaled,
        zeta_pmf: zeta_counts.iter().map(|&c| c as f64 / total).collect(),
        samples: runs.len(),
        scale_divisor: divisor,
    })
}

fn root_vector(n_types: usize) -> Vec<u32> {
    let mut v = vec![0u32; n_types];
    v[0] = 1;
    v
}

fn check_barrier(model: &SimModel, barrier: usize) -> Result<()> {
    if barrier == 0 || barrier >= model.n_types() {
        return Err(Error::Domain(format!(
            "barrier type {barrier} outside 1..={}",
            model.n_types() - 1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::pgf;

    #[test]
    fn conditioned_sampling_matches_exact_survival() {
        let model_v = models::linear_fractional_n2();
        let model = SimModel::new(model_v.spec());
        let n = 64;
        let batch = sample_conditioned(
            &model,
            n,
            400,
            RngPolicy::new(31),
            2,
            10_000_000,
            DEFAULT_POPULATION_CAP,
        );
        assert_eq!(batch.runs.len(), 400);
        assert!(!batch.exhausted);
        let q_exact = pgf::survival_probability(&model_v, 1, n).unwrap();
        let q_hat = batch.runs.len() as f64 / batch.attempts as f64;
        let stderr = (q_exact * (1.0 - q_exact) / batch.attempts as f64).sqrt();
        assert!(
            (q_hat - q_exact).abs() < 5.0 * stderr,
            "{q_hat} vs {q_exact} +- {stderr}"
        );
        for r in &batch.runs {
            assert!(r.beta < n);
            assert!(r.zeta >= 1 && r.zeta <= 2);
            assert!(r.final_counts.iter().any(|&c| c > 0));
        }
    }

    #[test]
    fn zero_target_empty_batch() {
        let model_v = models::linear_fractional_n2();
        let model = SimModel::new(model_v.spec());
        let batch = sample_conditioned(
            &model,
            16,
            0,
            RngPolicy::new(1),
            2,
            1000,
            DEFAULT_POPULATION_CAP,
        );
        assert!(batch.runs.is_empty());
        assert_eq!(batch.attempts, 0);
    }

    #[test]
    fn determinism_across_thread_counts() {
        let model_v = models::mrca_binary_n2();
        let model = SimModel::new(model_v.spec());
        let policy = RngPolicy::new(777);
        let a = sample_conditioned(&model, 128, 100, policy, 1, 1_000_000, DEFAULT_POPULATION_CAP);
        let b = sample_conditioned(&model, 128, 100, policy, 4, 1_000_000, DEFAULT_POPULATION_CAP);
        assert_eq!(a.runs, b.runs);
        assert_eq!(a.attempts, b.attempts);
    }

    #[test]
    fn full_and_stream_conditioning_agree() {
        let model_v = models::linear_fractional_n2();
        let model = SimModel::new(model_v.spec());
        let policy = RngPolicy::new(808);
        let summaries = sample_conditioned(&model, 24, 50, policy, 2, 1_000_000, DEFAULT_POPULATION_CAP);
        let (genealogies, attempts, exhausted) =
            sample_conditioned_genealogies(&model, 24, 50, policy, 2, 1_000_000, DEFAULT_POPULATION_CAP);
        assert!(!exhausted);
        assert_eq!(summaries.attempts, attempts);
        assert_eq!(summaries.runs.len(), genealogies.len());
        for (s, g) in summaries.runs.iter().zip(&genealogies) {
            assert_eq!(Some(s.beta), g.beta);
            assert_eq!(Some(s.zeta), g.zeta);
        }
    }

    #[test]
    fn mrca_statistics_shapes() {
        let model_v = models::linear_fractional_n2();
        let model = SimModel::new(model_v.spec());
        let batch = sample_conditioned(
            &model,
            64,
            200,
            RngPolicy::new(55),
            2,
            10_000_000,
            DEFAULT_POPULATION_CAP,
        );
        let stats = mrca_statistics(
            &batch.runs,
            model_v.constants(),
            64,
            TimeScale::Terminal,
        )
        .unwrap();
        assert_eq!(stats.samples, 200);
        let total: f64 = stats.zeta_pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(stats.cdf(-0.1), 0.0);
        assert_eq!(stats.cdf(1.0), 1.0);
        assert!(stats.scaled_beta.windows(2).all(|w| w[0] <= w[1]));
        let empty: Vec<RunSummary> = Vec::new();
        assert!(mrca_statistics(&empty, model_v.constants(), 64, TimeScale::Terminal).is_err());
    }

    #[test]
    fn emigrant_batch_and_single_sample() {
        let model_v = models::all_ones_n2();
        let model = SimModel::new(model_v.spec());
        let batch = emigrant_totals(&model, 1, 500, 100_000, RngPolicy::new(9), 2).unwrap();
        assert_eq!(batch.totals.len(), 500);
        // Type-1 particles always bear one type-2 child: W >= 1.
        assert!(batch.totals.iter().all(|&w| w >= 1));
        let mut rng = RngPolicy::new(9).stream(0);
        let w = sample_emigrant_total(&model, 1, &mut rng, 100_000).unwrap();
        assert!(w >= 1);
        assert!(emigrant_totals(&model, 2, 10, 1000, RngPolicy::new(1), 1).is_err());
    }
}
