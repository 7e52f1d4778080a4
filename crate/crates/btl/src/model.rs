//! Process specification: offspring laws, criticality validation, and the
//! constants derived from the moment structure.
//!
//! A model has `N` particle types. A type `i` parent may bear children of
//! types `j >= i` only, each type reproduces its own type with mean one, and
//! each own-type offspring variance is positive. Everything downstream (exact
//! iteration, simulation, limit laws) is parameterized by the moments computed
//! here, so offspring laws are restricted to finite support and all moments
//! are exact finite sums.

use crate::error::{Error, Result};

/// Tolerance on probability normalization and on the own-type mean.
/// User-entered probabilities may be floats, so exact equality is not asked.
pub const MOMENT_TOL: f64 = 1e-12;

/// One type's offspring distribution: a finite list of offspring vectors with
/// probabilities. Vectors are indexed over all `N` types; entries below the
/// owner type must be zero (decomposability).
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    owner_type: usize, // 1-based
    n_types: usize,
    support: Vec<(Vec<u32>, f64)>,
    max_total: u32,
}

impl OffspringLaw {
    /// Build a law for `owner_type` (1-based) in an `n_types` model.
    ///
    /// Duplicate support vectors are merged by summing their probabilities.
    pub fn new(
        owner_type: usize,
        n_types: usize,
        support: Vec<(Vec<u32>, f64)>,
    ) -> Result<Self> {
        if n_types < 2 {
            return Err(Error::Structural(format!(
                "model needs at least 2 types, got {n_types}"
            )));
        }
        if owner_type == 0 || owner_type > n_types {
            return Err(Error::Structural(format!(
                "owner type {owner_type} outside 1..={n_types}"
            )));
        }
        if support.is_empty() {
            return Err(Error::Structural(format!(
                "type {owner_type}: empty support"
            )));
        }
        let mut merged: Vec<(Vec<u32>, f64)> = Vec::with_capacity(support.len());
        for (vec, p) in support {
            if vec.len() != n_types {
                return Err(Error::Structural(format!(
                    "type {owner_type}: offspring vector has length {}, expected {n_types}",
                    vec.len()
                )));
            }
            if !(0.0..=1.0 + MOMENT_TOL).contains(&p) || !p.is_finite() {
                return Err(Error::Structural(format!(
                    "type {owner_type}: probability {p} outside [0,1]"
                )));
            }
            for (j, &cnt) in vec.iter().enumerate() {
                if j + 1 < owner_type && cnt != 0 {
                    return Err(Error::Structural(format!(
                        "type {owner_type}: support vector bears type {} offspring \
                         (only types >= {owner_type} allowed)",
                        j + 1
                    )));
                }
            }
            match merged.iter_mut().find(|(v, _)| *v == vec) {
                Some((_, q)) => *q += p,
                None => merged.push((vec, p)),
            }
        }
        let total_p: f64 = kahan_sum(merged.iter().map(|(_, p)| *p));
        if (total_p - 1.0).abs() > MOMENT_TOL {
            return Err(Error::Structural(format!(
                "type {owner_type}: probabilities sum to {total_p}, not 1"
            )));
        }
        let max_total = merged
            .iter()
            .map(|(v, _)| v.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        Ok(Self {
            owner_type,
            n_types,
            support: merged,
            max_total,
        })
    }

    pub fn owner_type(&self) -> usize {
        self.owner_type
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    /// Support entries as (offspring vector, probability).
    pub fn support(&self) -> &[(Vec<u32>, f64)] {
        &self.support
    }

    /// Largest total number of offspring any single event produces.
    pub fn max_total(&self) -> u32 {
        self.max_total
    }

    /// Mean offspring counts (m_{i1}, ..., m_{iN}); entries below the owner
    /// type are zero by construction.
    pub fn mean_row(&self) -> Vec<f64> {
        let mut row = vec![0.0; self.n_types];
        for (j, m) in row.iter_mut().enumerate() {
            *m = kahan_sum(
                self.support
                    .iter()
                    .map(|(v, p)| p * f64::from(v[j])),
            );
        }
        row
    }

    /// Exact cross second moment E[eta_ij * eta_ik] (1-based j, k).
    pub fn second_moment(&self, j: usize, k: usize) -> f64 {
        kahan_sum(
            self.support
                .iter()
                .map(|(v, p)| p * f64::from(v[j - 1]) * f64::from(v[k - 1])),
        )
    }

    /// Half the own-type offspring variance.
    pub fn b_value(&self) -> f64 {
        let i = self.owner_type;
        let m = self.mean_row()[i - 1];
        0.5 * (self.second_moment(i, i) - m * m)
    }

    /// PGF value h_i(s) = sum_t p_t * prod_j s_j^{eta_j(t)}, with 0^0 = 1.
    pub fn pgf_eval(&self, s: &[f64]) -> Result<f64> {
        check_unit_cube(s, self.n_types)?;
        Ok(kahan_sum(self.support.iter().map(|(v, p)| {
            let mut term = *p;
            for (j, &e) in v.iter().enumerate() {
                if e > 0 {
                    term *= s[j].powi(e as i32);
                }
            }
            term
        })))
    }

    /// Exact gradient of the PGF at `s`.
    pub fn pgf_grad(&self, s: &[f64]) -> Result<Vec<f64>> {
        check_unit_cube(s, self.n_types)?;
        let n = self.n_types;
        let mut grad = vec![0.0; n];
        for (g, out) in grad.iter_mut().enumerate() {
            *out = kahan_sum(self.support.iter().map(|(v, p)| {
                let e_g = v[g];
                if e_g == 0 {
                    return 0.0;
                }
                let mut term = *p * f64::from(e_g);
                for (j, &e) in v.iter().enumerate() {
                    let pow = if j == g { e - 1 } else { e };
                    if pow > 0 {
                        term *= s[j].powi(pow as i32);
                    }
                }
                term
            }));
        }
        Ok(grad)
    }

    /// Exponentially tilt the law so the own-type mean becomes exactly 1
    /// (within Newton convergence). Optional repair helper; off by default in
    /// every pipeline because silently fixing a model hides input mistakes.
    pub fn repaired_critical(&self) -> Result<OffspringLaw> {
        let own = self.owner_type - 1;
        let mean = self.mean_row()[own];
        if (mean - 1.0).abs() <= MOMENT_TOL {
            return Ok(self.clone());
        }
        let counts: Vec<f64> = self.support.iter().map(|(v, _)| f64::from(v[own])).collect();
        if counts.iter().all(|&c| c <= 1.0) || counts.iter().all(|&c| c >= 1.0) {
            return Err(Error::Structural(format!(
                "type {}: own-type support cannot be tilted to mean 1",
                self.owner_type
            )));
        }
        // Solve d/dtheta: sum p_t theta^{c_t} (c_t - 1) = 0 by Newton on log theta.
        let mut log_theta = 0.0_f64;
        for _ in 0..200 {
            let th = log_theta.exp();
            let mut f = 0.0;
            let mut df = 0.0;
            for ((_, p), &c) in self.support.iter().zip(&counts) {
                let w = p * th.powf(c);
                f += w * (c - 1.0);
                df += w * c * (c - 1.0);
            }
            if f.abs() < 1e-15 {
                break;
            }
            log_theta -= f / df;
        }
        let th = log_theta.exp();
        let weights: Vec<f64> = self
            .support
            .iter()
            .zip(&counts)
            .map(|((_, p), &c)| p * th.powf(c))
            .collect();
        let z: f64 = kahan_sum(weights.iter().copied());
        let support = self
            .support
            .iter()
            .zip(&weights)
            .map(|((v, _), w)| (v.clone(), w / z))
            .collect();
        OffspringLaw::new(self.owner_type, self.n_types, support)
    }
}

fn check_unit_cube(s: &[f64], n: usize) -> Result<()> {
    if s.len() != n {
        return Err(Error::Domain(format!(
            "argument vector has length {}, expected {n}",
            s.len()
        )));
    }
    for (j, &x) in s.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "s[{}] = {x} outside [0,1]",
                j + 1
            )));
        }
    }
    Ok(())
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// The full N-type process specification.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    n_types: usize,
    laws: Vec<OffspringLaw>,
    label: String,
}

impl ModelSpec {
    pub fn new(n_types: usize, laws: Vec<OffspringLaw>, label: impl Into<String>) -> Result<Self> {
        if n_types < 2 {
            return Err(Error::Structural(format!(
                "model needs at least 2 types, got {n_types}"
            )));
        }
        if laws.len() != n_types {
            return Err(Error::Structural(format!(
                "expected {n_types} laws, got {}",
                laws.len()
            )));
        }
        for (k, law) in laws.iter().enumerate() {
            if law.owner_type() != k + 1 {
                return Err(Error::Structural(format!(
                    "law at position {} has owner type {}, expected {}",
                    k,
                    law.owner_type(),
                    k + 1
                )));
            }
            if law.n_types() != n_types {
                return Err(Error::Structural(format!(
                    "law for type {} sized for {} types, expected {n_types}",
                    k + 1,
                    law.n_types()
                )));
            }
        }
        Ok(Self {
            n_types,
            laws,
            label: label.into(),
        })
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn law(&self, type_idx: usize) -> &OffspringLaw {
        &self.laws[type_idx - 1]
    }

    pub fn laws(&self) -> &[OffspringLaw] {
        &self.laws
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Check the criticality hypothesis: every own-type mean equals 1, every
    /// next-type mean is positive, every own-type variance is positive.
    /// Cross second moments are finite automatically (finite support).
    pub fn validate_hypothesis_a(&self) -> ValidationResult {
        let mut violations = Vec::new();
        for law in &self.laws {
            let i = law.owner_type();
            let row = law.mean_row();
            let own_mean = row[i - 1];
            if (own_mean - 1.0).abs() > MOMENT_TOL {
                violations.push(Violation::OwnMeanNotOne {
                    type_idx: i,
                    got: own_mean,
                });
            }
            if i < self.n_types && row[i] <= 0.0 {
                violations.push(Violation::NextMeanNotPositive { type_idx: i });
            }
            if law.b_value() <= 0.0 {
                violations.push(Violation::OwnVarianceNotPositive {
                    type_idx: i,
                    b: law.b_value(),
                });
            }
        }
        ValidationResult { violations }
    }
}

/// A single violated criticality condition, named.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Own-type mean must equal 1 (strong criticality).
    OwnMeanNotOne { type_idx: usize, got: f64 },
    /// Mean number of next-type offspring must be positive.
    NextMeanNotPositive { type_idx: usize },
    /// Own-type offspring variance must be positive.
    OwnVarianceNotPositive { type_idx: usize, b: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OwnMeanNotOne { type_idx, got } => write!(
                f,
                "criticality: m_{{{i},{i}}} = {got} but must equal 1",
                i = type_idx
            ),
            Violation::NextMeanNotPositive { type_idx } => write!(
                f,
                "next-type mean: m_{{{i},{j}}} must be positive",
                i = type_idx,
                j = type_idx + 1
            ),
            Violation::OwnVarianceNotPositive { type_idx, b } => write!(
                f,
                "own-type variance: b_{i} = {b} but must be positive",
                i = type_idx
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All constants derived from a validated spec.
///
/// Triangular accessors use 1-based type indices, matching the ladder
/// structure of the process (type j feeds type j+1 feeds ...).
#[derive(Debug, Clone)]
pub struct DerivedConstants {
    n_types: usize,
    mean: Vec<Vec<f64>>,
    second: Vec<Vec<Vec<f64>>>,
    b: Vec<f64>,
    gamma: Vec<f64>,
    c: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
}

impl DerivedConstants {
    fn tol(x: f64) -> f64 {
        1e-12 * x.abs().max(1.0)
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    /// Mean matrix entry m_{ij} (1-based). Upper triangular.
    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.mean[i - 1][j - 1]
    }

    pub fn mean_matrix(&self) -> &Vec<Vec<f64>> {
        &self.mean
    }

    /// E[eta_ij * eta_ik] for parent type i (all 1-based).
    pub fn second_moment(&self, i: usize, j: usize, k: usize) -> f64 {
        self.second[i - 1][j - 1][k - 1]
    }

    /// b_i = Var[eta_ii] / 2.
    pub fn b(&self, i: usize) -> f64 {
        self.b[i - 1]
    }

    /// Time-scale exponent ladder: gamma(0) = 0, gamma(i) = 2^{-(N-i)}.
    pub fn gamma(&self, i: usize) -> f64 {
        self.gamma[i]
    }

    /// c_{ji} for 1 <= j <= i <= N.
    pub fn c(&self, j: usize, i: usize) -> f64 {
        assert!(1 <= j && j <= i && i <= self.n_types, "c index ({j},{i})");
        self.c[j - 1][i - j]
    }

    /// C_i = c_{1i}.
    pub fn big_c(&self, i: usize) -> f64 {
        self.c(1, i)
    }

    /// d_{ji} for 1 <= j <= i <= N-1.
    pub fn d(&self, j: usize, i: usize) -> f64 {
        assert!(
            1 <= j && j <= i && i < self.n_types,
            "d index ({j},{i})"
        );
        self.d[j - 1][i - j]
    }

    /// D_i = d_{1i}.
    pub fn big_d(&self, i: usize) -> f64 {
        self.d(1, i)
    }

    /// Closed form for c_{iN}: (1/b_N)^{1/2^{N-i}} * prod_{j=i}^{N-1}
    /// (m_{j,j+1}/b_j)^{1/2^{j-i+1}}. Used to cross-check the recursion.
    pub fn c_tail_closed_form(&self, i: usize) -> f64 {
        let n = self.n_types;
        let mut value = (1.0 / self.b(n)).powf(0.5_f64.powi((n - i) as i32));
        for j in i..n {
            let expo = 0.5_f64.powi((j - i + 1) as i32);
            value *= (self.mean(j, j + 1) / self.b(j)).powf(expo);
        }
        value
    }
}

/// Compute every derived constant from a spec that passed validation.
///
/// The recursion/closed-form agreement and the ladder identities
/// C_N = D_i (c_{i+1,N})^{1/2^i} and D_i = (b_i m_{i,i+1})^{1/2^i} C_i
/// hold mathematically; they are asserted here so a numerical or indexing
/// regression cannot ship silent wrong constants.
pub fn derive_constants(spec: &ModelSpec) -> Result<DerivedConstants> {
    let validation = spec.validate_hypothesis_a();
    if !validation.is_ok() {
        let msgs: Vec<String> = validation.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::NotCritical(msgs.join("; ")));
    }
    let n = spec.n_types();
    let mean: Vec<Vec<f64>> = spec.laws().iter().map(|l| l.mean_row()).collect();
    let b: Vec<f64> = spec.laws().iter().map(|l| l.b_value()).collect();
    let second: Vec<Vec<Vec<f64>>> = spec
        .laws()
        .iter()
        .map(|l| {
            (1..=n)
                .map(|j| (1..=n).map(|k| l.second_moment(j, k)).collect())
                .collect()
        })
        .collect();

    let mut gamma = vec![0.0; n + 1];
    for (i, g) in gamma.iter_mut().enumerate().skip(1) {
        *g = 0.5_f64.powi((n - i) as i32);
    }

    // c[j-1][i-j] = c_{ji}; c_{ii} = 1/b_i, c_{ji} = sqrt(m_{j,j+1} c_{j+1,i} / b_j).
    let mut c: Vec<Vec<f64>> = vec![Vec::new(); n];
    for j in (1..=n).rev() {
        let mut row = vec![0.0; n - j + 1];
        row[0] = 1.0 / b[j - 1];
        for i in (j + 1)..=n {
            let next = c[j][i - j - 1]; // c_{j+1,i}
            row[i - j] = (mean[j - 1][j] * next / b[j - 1]).sqrt();
        }
        c[j - 1] = row;
    }

    // d[j-1][i-j] = d_{ji}; d_{ii} = sqrt(m_{i,i+1}/b_i), d_{ji} = sqrt(m_{j,j+1} d_{j+1,i} / b_j).
    let mut d: Vec<Vec<f64>> = vec![Vec::new(); n.saturating_sub(1)];
    for j in (1..n).rev() {
        let mut row = vec![0.0; n - j];
        row[0] = (mean[j - 1][j] / b[j - 1]).sqrt();
        for i in (j + 1)..n {
            let next = d[j][i - j - 1];
            row[i - j] = (mean[j - 1][j] * next / b[j - 1]).sqrt();
        }
        d[j - 1] = row;
    }

    let constants = DerivedConstants {
        n_types: n,
        mean,
        second,
        b,
        gamma,
        c,
        d,
    };

    for i in 1..=n {
        let rec = constants.c(i, n);
        let closed = constants.c_tail_closed_form(i);
        assert!(
            (rec - closed).abs() <= DerivedConstants::tol(rec),
            "c_{{{i},{n}}} recursion {rec} disagrees with closed form {closed}"
        );
    }
    let c_big_n = constants.big_c(n);
    for i in 1..n {
        let half_pow = 0.5_f64.powi(i as i32);
        let ladder = constants.big_d(i) * constants.c(i + 1, n).powf(half_pow);
        assert!(
            (c_big_n - ladder).abs() <= DerivedConstants::tol(c_big_n),
            "ladder identity fails at i={i}: C_N={c_big_n} vs {ladder}"
        );
        let via_c = (constants.b(i) * constants.mean(i, i + 1)).powf(half_pow)
            * constants.big_c(i);
        assert!(
            (constants.big_d(i) - via_c).abs() <= DerivedConstants::tol(via_c),
            "D_{i} route mismatch: {} vs {via_c}",
            constants.big_d(i)
        );
    }

    Ok(constants)
}

/// A spec that passed criticality validation, bundled with its constants.
/// Immutable, cheap to share across worker threads.
#[derive(Debug, Clone)]
pub struct ValidatedModel {
    spec: ModelSpec,
    constants: DerivedConstants,
}

impl ValidatedModel {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let constants = derive_constants(&spec)?;
        Ok(Self { spec, constants })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    pub fn n_types(&self) -> usize {
        self.spec.n_types()
    }

    pub fn label(&self) -> &str {
        self.spec.label()
    }
}
