//! Exact small-model oracle by state-space enumeration.
//!
//! Walks the full distribution of the population vector generation by
//! generation, convolving offspring laws over integer states. Exponentially
//! expensive, so only usable for tiny supports and short horizons, but it
//! shares no code path with the PGF iteration it is used to check: plain
//! probability bookkeeping over the raw support tables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Probabilities below this are dropped during enumeration; with the state
/// counts involved (<= ~1e5) the total discarded mass stays below 1e-12.
const PROB_FLOOR: f64 = 1e-18;

type Dist = BTreeMap<Vec<u32>, f64>;

fn convolve(a: &Dist, b: &[(Vec<u32>, f64)]) -> Dist {
    let mut out = Dist::new();
    for (za, pa) in a {
        for (zb, pb) in b {
            let p = pa * pb;
            if p < PROB_FLOOR {
                continue;
            }
            let z: Vec<u32> = za.iter().zip(zb).map(|(x, y)| x + y).collect();
            *out.entry(z).or_insert(0.0) += p;
        }
    }
    out
}

/// Distributions of the summed offspring of j particles of one type,
/// built up by repeated convolution.
struct SumTable {
    sums: Vec<Dist>,
    support: Vec<(Vec<u32>, f64)>,
}

impl SumTable {
    fn new(support: Vec<(Vec<u32>, f64)>, n_types: usize) -> Self {
        let mut zero = Dist::new();
        zero.insert(vec![0; n_types], 1.0);
        Self {
            sums: vec![zero],
            support,
        }
    }

    fn of(&mut self, count: u32) -> &Dist {
        while self.sums.len() <= count as usize {
            let next = convolve(self.sums.last().unwrap(), &self.support);
            self.sums.push(next);
        }
        &self.sums[count as usize]
    }
}

/// Exact joint distribution of the population vector after `gens`
/// generations from `initial`.
pub fn population_distribution(spec: &ModelSpec, initial: &[u32], gens: u64) -> Result<Dist> {
    let n_types = spec.n_types();
    if initial.len() != n_types {
        return Err(Error::Domain("initial vector length mismatch".into()));
    }
    let mut tables: Vec<SumTable> = spec
        .laws()
        .iter()
        .map(|law| SumTable::new(law.support().to_vec(), n_types))
        .collect();
    let mut dist = Dist::new();
    dist.insert(initial.to_vec(), 1.0);
    for _ in 0..gens {
        let mut next = Dist::new();
        for (state, p) in &dist {
            let mut acc = Dist::new();
            acc.insert(vec![0; n_types], *p);
            for (ty, &count) in state.iter().enumerate() {
                if count > 0 {
                    let summed: Vec<(Vec<u32>, f64)> = tables[ty]
                        .of(count)
                        .iter()
                        .map(|(z, q)| (z.clone(), *q))
                        .collect();
                    acc = convolve(&acc, &summed);
                }
            }
            for (z, q) in acc {
                *next.entry(z).or_insert(0.0) += q;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// Exact survival probability over `gens` generations started from one
/// type-`start_type` particle.
pub fn survival_enumerated(spec: &ModelSpec, start_type: usize, gens: u64) -> Result<f64> {
    let mut initial = vec![0u32; spec.n_types()];
    initial[start_type - 1] = 1;
    let dist = population_distribution(spec, &initial, gens)?;
    let zero = vec![0u32; spec.n_types()];
    Ok(1.0 - dist.get(&zero).copied().unwrap_or(0.0))
}

/// Per-type survival probabilities over `gens` generations (the chance a
/// single particle of each type has descendants `gens` generations later).
fn survival_by_type(spec: &ModelSpec, gens: u64) -> Result<Vec<f64>> {
    (1..=spec.n_types())
        .map(|k| survival_enumerated(spec, k, gens))
        .collect()
}

/// Exact conditioned reduced-process PGF `E[s^Z(m,n) | Z(n) != 0]` started
/// from one type-1 particle: enumerate the time-`m` distribution, then thin
/// each particle by its survival probability over the remaining `n - m`
/// generations.
pub fn reduced_law_enumerated(spec: &ModelSpec, m: u64, n: u64, s: &[f64]) -> Result<f64> {
    if m > n {
        return Err(Error::Domain(format!("m = {m} exceeds n = {n}")));
    }
    let n_types = spec.n_types();
    if s.len() != n_types {
        return Err(Error::Domain("probe vector length mismatch".into()));
    }
    let mut initial = vec![0u32; n_types];
    initial[0] = 1;
    let at_m = population_distribution(spec, &initial, m)?;
    let q = survival_by_type(spec, n - m)?;

    let mut numerator = 0.0; // E[s^Z(m,n); survival]
    let mut extinct = 0.0; // P(Z(n) = 0)
    for (state, p) in &at_m {
        let mut thinned = 1.0;
        let mut dead = 1.0;
        for (k, &z) in state.iter().enumerate() {
            if z > 0 {
                thinned *= (1.0 - q[k] + q[k] * s[k]).powi(z as i32);
                dead *= (1.0 - q[k]).powi(z as i32);
            }
        }
        numerator += p * (thinned - dead);
        extinct += p * dead;
    }
    Ok(numerator / (1.0 - extinct))
}

/// Exact single-ancestor probabilities `P(Z(m,n) = e_j | Z(n) != 0)`.
pub fn singleton_probabilities_enumerated(
    spec: &ModelSpec,
    m: u64,
    n: u64,
) -> Result<Vec<f64>> {
    if m >= n {
        return Err(Error::Domain(format!("m = {m} must be below n = {n}")));
    }
    let n_types = spec.n_types();
    let mut initial = vec![0u32; n_types];
    initial[0] = 1;
    let at_m = population_distribution(spec, &initial, m)?;
    let q = survival_by_type(spec, n - m)?;

    let mut extinct = 0.0;
    let mut single = vec![0.0; n_types];
    for (state, p) in &at_m {
        let mut dead = 1.0;
        for (k, &z) in state.iter().enumerate() {
            if z > 0 {
                dead *= (1.0 - q[k]).powi(z as i32);
            }
        }
        extinct += p * dead;
        for j in 0..n_types {
            let z_j = state[j];
            if z_j == 0 {
                continue;
            }
            // Exactly one type-j particle survives, everyone else dies.
            let mut term = p * z_j as f64 * q[j] * (1.0 - q[j]).powi(z_j as i32 - 1);
            for (k, &z) in state.iter().enumerate() {
                if k != j && z > 0 {
                    term *= (1.0 - q[k]).powi(z as i32);
                }
            }
            single[j] += term;
        }
    }
    let surv = 1.0 - extinct;
    Ok(single.into_iter().map(|v| v / surv).collect())
}
