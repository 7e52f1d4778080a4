//! Built-in model library.
//!
//! Ships the reference models the verification suite runs against, so no
//! hand-written JSON is needed: the "all-ones" models (every derived constant
//! equals 1), the linear-fractional oracle model (geometric offspring, whose
//! iterated PGF has the closed form Q_n = 1/(n+1)), and a cheap
//! binary-splitting model sized for conditioned genealogy sampling.
//!
//! Geometric laws are tabulated up to 63 children; the discarded tail mass is
//! 2^-64 < 1e-12, far below every tolerance used anywhere in the crate.

use crate::model::{ModelSpec, OffspringLaw, ValidatedModel};

/// Geometric(1/2) on {0,1,2,...} truncated at 63: P(k) = 2^-(k+1).
/// Mean 1 and b = Var/2 = 1 up to the truncation mass.
fn geometric_half() -> Vec<(u32, f64)> {
    (0..64).map(|k| (k, 0.5_f64.powi(k as i32 + 1))).collect()
}

/// Build a law from an own-type marginal and independent per-higher-type
/// marginals; the joint support is the product of the components.
pub fn product_law(
    owner: usize,
    n_types: usize,
    own: &[(u32, f64)],
    migrants: &[(usize, Vec<(u32, f64)>)],
) -> OffspringLaw {
    let mut entries: Vec<(Vec<u32>, f64)> = own
        .iter()
        .map(|&(k, p)| {
            let mut v = vec![0u32; n_types];
            v[owner - 1] = k;
            (v, p)
        })
        .collect();
    for &(target, ref marginal) in migrants {
        assert!(target > owner && target <= n_types);
        let mut next = Vec::with_capacity(entries.len() * marginal.len());
        for (v, p) in &entries {
            for &(k, q) in marginal {
                let mut w = v.clone();
                w[target - 1] = k;
                next.push((w, p * q));
            }
        }
        entries = next;
    }
    OffspringLaw::new(owner, n_types, entries).expect("builtin law must be well-formed")
}

/// N=2 model with b_1 = b_2 = 1 and m_12 = 1: geometric own-type offspring
/// for both types, each type-1 particle also bears exactly one type-2 child.
/// Every c, C, d, D constant equals 1.
pub fn all_ones_n2() -> ValidatedModel {
    let l1 = product_law(1, 2, &geometric_half(), &[(2, vec![(1, 1.0)])]);
    let l2 = product_law(2, 2, &geometric_half(), &[]);
    ValidatedModel::new(ModelSpec::new(2, vec![l1, l2], "all-ones-n2").unwrap()).unwrap()
}

/// N=3 all-ones ladder: geometric own-type plus one next-type child.
pub fn all_ones_n3() -> ValidatedModel {
    let l1 = product_law(1, 3, &geometric_half(), &[(2, vec![(1, 1.0)])]);
    let l2 = product_law(2, 3, &geometric_half(), &[(3, vec![(1, 1.0)])]);
    let l3 = product_law(3, 3, &geometric_half(), &[]);
    ValidatedModel::new(ModelSpec::new(3, vec![l1, l2, l3], "all-ones-n3").unwrap()).unwrap()
}

/// N=2 oracle model: the type-2 law is geometric(1/2), for which the n-step
/// extinction iteration is known in closed form, Q_n = 1/(n+1). Type 1 is a
/// binary splitter with a fair-coin type-2 migrant.
pub fn linear_fractional_n2() -> ValidatedModel {
    let l1 = product_law(
        1,
        2,
        &[(0, 0.5), (2, 0.5)],
        &[(2, vec![(0, 0.5), (1, 0.5)])],
    );
    let l2 = product_law(2, 2, &geometric_half(), &[]);
    ValidatedModel::new(ModelSpec::new(2, vec![l1, l2], "linear-fractional-n2").unwrap()).unwrap()
}

/// N=2 model tuned for conditioned genealogy sampling at horizons in the
/// thousands: small offspring supports keep per-particle work low, migration
/// mean 1/128 keeps the type-2 population (which dominates simulation cost)
/// small, and the derived constants still put the ancestor time scales well
/// inside the horizon (b_1 = 1/4, b_2 = 1/128, c_12 = 2, so 2*b_1*c_12 = 1:
/// the type-1 ancestor phase is over by a few multiples of sqrt(n)).
pub fn mrca_binary_n2() -> ValidatedModel {
    let l1 = product_law(
        1,
        2,
        &[(0, 0.25), (1, 0.5), (2, 0.25)],
        &[(2, vec![(0, 127.0 / 128.0), (1, 1.0 / 128.0)])],
    );
    let l2 = product_law(
        2,
        2,
        &[(0, 1.0 / 128.0), (1, 63.0 / 64.0), (2, 1.0 / 128.0)],
        &[],
    );
    ValidatedModel::new(ModelSpec::new(2, vec![l1, l2], "mrca-binary-n2").unwrap()).unwrap()
}

/// N=2 model with at most two offspring per event and a small joint support,
/// sized for exact whole-state-space enumeration at short horizons.
/// b_1 = 1/4, b_2 = 1/2, m_12 = 3/8.
pub fn small_support_n2() -> ValidatedModel {
    let l1 = OffspringLaw::new(
        1,
        2,
        vec![
            (vec![0, 0], 0.125),
            (vec![1, 0], 0.25),
            (vec![2, 0], 0.25),
            (vec![0, 1], 0.125),
            (vec![1, 1], 0.25),
        ],
    )
    .unwrap();
    let l2 = product_law(2, 2, &[(0, 0.5), (2, 0.5)], &[]);
    ValidatedModel::new(ModelSpec::new(2, vec![l1, l2], "small-support-n2").unwrap()).unwrap()
}

pub const BUILTIN_NAMES: &[&str] = &[
    "all-ones-n2",
    "all-ones-n3",
    "linear-fractional-n2",
    "mrca-binary-n2",
    "small-support-n2",
];

/// Look a built-in model up by name.
pub fn builtin(name: &str) -> Option<ValidatedModel> {
    match name {
        "all-ones-n2" => Some(all_ones_n2()),
        "all-ones-n3" => Some(all_ones_n3()),
        "linear-fractional-n2" => Some(linear_fractional_n2()),
        "mrca-binary-n2" => Some(mrca_binary_n2()),
        "small-support-n2" => Some(small_support_n2()),
        _ => None,
    }
}
