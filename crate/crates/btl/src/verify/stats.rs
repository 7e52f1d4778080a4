//! Distance statistics and interval estimates used by the checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF:
/// `sup_x |F_hat(x) - F(x)| = max_i max(i/n - F(x_i), F(x_i) - (i-1)/n)`.
pub fn ks_statistic_continuous(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sorted.is_empty());
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// One-sample Kolmogorov-Smirnov statistic against a purely atomic CDF given
/// as `(location, F(location))` pairs sorted by location. Both CDFs are
/// right-continuous step functions, so the supremum is attained at one of
/// their jump points.
pub fn ks_statistic_discrete(sorted: &[f64], atoms: &[(f64, f64)]) -> f64 {
    assert!(!sorted.is_empty() && !atoms.is_empty());
    debug_assert!(atoms.windows(2).all(|w| w[0].0 < w[1].0));
    let n = sorted.len() as f64;
    let empirical = |x: f64| sorted.partition_point(|&v| v <= x) as f64 / n;
    let step_cdf = |x: f64| {
        match atoms.binary_search_by(|&(loc, _)| loc.total_cmp(&x)) {
            Ok(k) => atoms[k].1,
            Err(0) => 0.0,
            Err(k) => atoms[k - 1].1,
        }
    };
    let mut d = 0.0f64;
    for &(loc, _) in atoms {
        d = d.max((empirical(loc) - step_cdf(loc)).abs());
    }
    for &x in sorted {
        d = d.max((empirical(x) - step_cdf(x)).abs());
    }
    d
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities, with its degrees of freedom (cells - 1).
pub fn chi_square(observed: &[u64], expected_probs: &[f64]) -> (f64, usize) {
    assert_eq!(observed.len(), expected_probs.len());
    assert!(observed.len() >= 2);
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        assert!(e > 0.0, "expected count must be positive");
        let diff = o as f64 - e;
        stat += diff * diff / e;
    }
    (stat, observed.len() - 1)
}

/// Upper tail probability of the chi-square distribution.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    dist.sf(stat)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Symmetric binomial confidence interval around a known probability `p`:
/// normal approximation, switching to Wilson when the normal half-width is
/// unreliable (expected successes or failures below 10).
pub fn binomial_interval(p: f64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    if p * n >= 10.0 && (1.0 - p) * n >= 10.0 {
        let half = z * (p * (1.0 - p) / n).sqrt();
        ((p - half).max(0.0), (p + half).min(1.0))
    } else {
        // Wilson around the hypothesized p: invert to the coverage region.
        let successes = (p * n).round() as u64;
        wilson_interval(successes, trials, z)
    }
}

/// Standard error of a sample mean.
pub fn mean_stderr(values: impl Iterator<Item = f64>) -> (f64, f64, u64) {
    let mut n = 0u64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    assert!(n > 1, "need at least two samples");
    let var = m2 / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt(), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_two_point_closed_form() {
        // Two-point distribution: P(X=0) = 0.4, P(X=1) = 0.6, so F steps to
        // 0.4 at 0 and to 1 at 1. Sample [0,0,0,1]: the empirical CDF steps
        // to 0.75 at 0 and 1 at 1; both CDFs vanish below 0 and agree at 1,
        // so the exact supremum distance is |0.75 - 0.4| = 0.35 on [0,1).
        let atoms = [(0.0, 0.4), (1.0, 1.0)];
        let d = ks_statistic_discrete(&[0.0, 0.0, 0.0, 1.0], &atoms);
        assert!((d - 0.35).abs() < 1e-15, "{d}");
        // A sample hitting the distribution exactly: D = 0.
        let d = ks_statistic_discrete(&[0.0, 0.0, 1.0, 1.0, 1.0], &atoms);
        assert!(d.abs() < 1e-15, "{d}");
        // A sample with no mass at 0: the gap at the atom 0 is |0 - 0.4|.
        let d = ks_statistic_discrete(&[0.5, 1.0], &atoms);
        assert!((d - 0.4).abs() < 1e-15, "{d}");
    }

    #[test]
    fn ks_against_uniform() {
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        let d = ks_statistic_continuous(&[0.5], cdf);
        assert!((d - 0.5).abs() < 1e-15);
        let d = ks_statistic_continuous(&[0.25, 0.75], cdf);
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn chi_square_textbook_value() {
        let (stat, dof) = chi_square(&[30, 70], &[0.5, 0.5]);
        assert!((stat - 16.0).abs() < 1e-12);
        assert_eq!(dof, 1);
        let sf = chi_square_sf(stat, dof);
        assert!((sf - 6.334e-5).abs() < 1e-7, "{sf}");
        assert_eq!(chi_square_sf(0.0, 1), 1.0);
    }

    #[test]
    fn wilson_textbook_value() {
        let (lo, hi) = wilson_interval(5, 10, 1.959963984540054);
        assert!((lo - 0.2366).abs() < 5e-4, "{lo}");
        assert!((hi - 0.7634).abs() < 5e-4, "{hi}");
    }

    #[test]
    fn binomial_interval_contains_truth() {
        let (lo, hi) = binomial_interval(0.3, 10_000, 3.29);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((hi - lo) < 0.031);
        // Extreme proportion triggers the Wilson fallback and stays in [0,1].
        let (lo, hi) = binomial_interval(1e-4, 1000, 3.29);
        assert!(lo >= 0.0 && hi <= 1.0 && hi > 1e-4);
    }

    #[test]
    fn running_mean_and_stderr() {
        let (mean, se, n) = mean_stderr([1.0, 2.0, 3.0, 4.0].into_iter());
        assert_eq!(n, 4);
        assert!((mean - 2.5).abs() < 1e-15);
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }
}
