//! Verification checks: exact and Monte Carlo quantities against limit laws,
//! and the two engines against each other.
//!
//! Every check pins its tolerance explicitly and reports pass iff the named
//! distance is within it. "Well below a time scale" has no canonical
//! finite-n reading, so probes use the window sequences g_n = log n and
//! l_n = 1/log n, recorded in every report's provenance.

use crate::error::{Error, Result};
use crate::limits::{type_probabilities, LimitContext};
use crate::model::ValidatedModel;
use crate::pgf::{self, PgfState};
use crate::sim::{self, RngPolicy, SimModel};
use crate::verify::report::{ComparisonReport, ProbePoint, Provenance};
use crate::verify::stats;

/// Slowly growing window sequence g_n.
pub fn window_growth(n: u64) -> f64 {
    (n as f64).ln()
}

/// Slowly vanishing offset sequence l_n.
pub fn window_offset(n: u64) -> f64 {
    1.0 / (n as f64).ln()
}

/// Parameters of Monte Carlo execution.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub seed: u64,
    pub threads: usize,
    pub chunk_size: u64,
}

impl McConfig {
    pub fn new(seed: u64, threads: usize) -> Self {
        Self {
            seed,
            threads,
            chunk_size: 64,
        }
    }

    fn policy(&self) -> RngPolicy {
        RngPolicy::with_chunk_size(self.seed, self.chunk_size)
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            seed: Some(self.seed),
            chunk_size: Some(self.chunk_size),
            ..Default::default()
        }
    }
}

/// Survival-probability decay: `r_n = n^{1/2^{N-i}} Q_n / c_iN` must
/// approach 1. The distance is |r - 1| at the final horizon, plus a penalty
/// making the check fail when |r - 1| is not monotonely shrinking over the
/// last four checkpoints.
pub fn check_survival_asymptotics(
    model: &ValidatedModel,
    start_type: usize,
    checkpoints: &[u64],
    final_n: u64,
    tolerance: f64,
) -> Result<ComparisonReport> {
    if checkpoints.is_empty() {
        return Err(Error::EmptyInput("no checkpoints".into()));
    }
    let mut all: Vec<u64> = checkpoints.to_vec();
    all.push(final_n);
    all.sort_unstable();
    all.dedup();

    let n_types = model.n_types();
    let exponent = 0.5_f64.powi((n_types - start_type) as i32);
    let c_tail = model.constants().c(start_type, n_types);

    let mut state = PgfState::new(model, &vec![0.0; n_types])?;
    state.set_max_generations(*all.last().unwrap() + 1);
    let mut ratios = Vec::with_capacity(all.len());
    for &n in &all {
        state.advance(n - state.generation())?;
        let r = (n as f64).powf(exponent) * state.q(start_type) / c_tail;
        ratios.push((n, r));
    }

    let final_ratio = ratios
        .iter()
        .find(|(n, _)| *n == final_n)
        .map(|(_, r)| *r)
        .unwrap();
    let mut distance = (final_ratio - 1.0).abs();

    // Stabilization over the last four listed checkpoints.
    let ladder: Vec<f64> = checkpoints
        .iter()
        .map(|n| ratios.iter().find(|(m, _)| m == n).unwrap().1)
        .collect();
    let window = ladder.iter().rev().take(4).rev().collect::<Vec<_>>();
    let mut worst_increase = 0.0f64;
    for w in window.windows(2) {
        let inc = (w[1] - 1.0).abs() - (w[0] - 1.0).abs();
        worst_increase = worst_increase.max(inc);
    }
    let mut report_points: Vec<ProbePoint> = ratios
        .iter()
        .map(|(n, r)| ProbePoint {
            label: format!("n={n}"),
            predicted: 1.0,
            observed: *r,
            stderr: None,
        })
        .collect();
    let mut notes = Vec::new();
    if worst_increase > 1e-9 {
        distance += tolerance + worst_increase;
        notes.push(format!(
            "ratio error grew by {worst_increase:.3e} inside the stabilization window"
        ));
    }
    report_points.shrink_to_fit();

    let mut report = ComparisonReport::new(
        format!("survival-asymptotics-type{start_type}"),
        model.label(),
        all,
        "n^(1/2^(N-i)) * Q_n / c_iN",
        "stabilized-abs-error",
        distance,
        tolerance,
        report_points,
        Provenance::default(),
    );
    for n in notes {
        report = report.with_note(n);
    }
    Ok(report)
}

/// Conditional Laplace transform of the scaled last-type population against
/// its limit `1 - (lambda/(1+lambda))^{1/2^{N-i}}`.
pub fn check_yaglom(
    model: &ValidatedModel,
    start_type: usize,
    n: u64,
    lambdas: &[f64],
    tolerance: f64,
) -> Result<ComparisonReport> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("no lambda values".into()));
    }
    let expo = 0.5_f64.powi((model.n_types() - start_type) as i32);
    let mut points = Vec::with_capacity(lambdas.len());
    let mut distance = 0.0f64;
    for &lambda in lambdas {
        let observed = pgf::yaglom_transform(model, start_type, n, lambda)?;
        let predicted = 1.0 - (lambda / (1.0 + lambda)).powf(expo);
        distance = distance.max((observed - predicted).abs());
        points.push(ProbePoint {
            label: format!("lambda={lambda}"),
            predicted,
            observed,
            stderr: None,
        });
    }
    Ok(ComparisonReport::new(
        format!("yaglom-type{start_type}"),
        model.label(),
        vec![n],
        "E[exp(-lambda Z_N(n)/(b_N n)) | survival]",
        "abs-error",
        distance,
        tolerance,
        points,
        Provenance::default(),
    ))
}

/// Which reduced-law limit regime to probe.
#[derive(Debug, Clone)]
pub enum ReducedRegime {
    /// m well below the first ancestor scale: the law collapses to s_1.
    EarlySingleton,
    /// m between the island-i and island-(i+1) scales: plateau
    /// `1 - (1-s_{i+1})^{1/2^i}`.
    Plateau { island: usize },
    /// m on the island-i clock: the two-type limit PGF at each y.
    IslandClock { island: usize, ys: Vec<f64> },
    /// m proportional to n: the terminal limit PGF at each x.
    TerminalClock { xs: Vec<f64> },
}

impl ReducedRegime {
    fn name(&self) -> String {
        match self {
            ReducedRegime::EarlySingleton => "early-singleton".into(),
            ReducedRegime::Plateau { island } => format!("plateau-island{island}"),
            ReducedRegime::IslandClock { island, .. } => format!("island{island}-clock"),
            ReducedRegime::TerminalClock { .. } => "terminal-clock".into(),
        }
    }
}

/// Exact reduced family-tree law against the limit evaluator for one regime,
/// over a grid of probe arguments.
pub fn check_reduced_onedim(
    model: &ValidatedModel,
    regime: &ReducedRegime,
    n: u64,
    s_grid: &[Vec<f64>],
    tolerance: f64,
) -> Result<ComparisonReport> {
    if s_grid.is_empty() {
        return Err(Error::EmptyInput("no probe arguments".into()));
    }
    let ctx = LimitContext::new(model.constants().clone());
    let n_types = model.n_types();
    let g_n = window_growth(n);
    let l_n = window_offset(n);
    let nf = n as f64;
    let gamma = |i: usize| model.constants().gamma(i);

    // (m, coordinate label, limit at s)
    type LimitFn<'c> = Box<dyn Fn(&[f64]) -> Result<f64> + 'c>;
    let mut probes: Vec<(u64, String, LimitFn)> = Vec::new();
    match regime {
        ReducedRegime::EarlySingleton => {
            let m = (nf.powf(gamma(1)) / g_n).round().max(1.0) as u64;
            probes.push((m, "early".into(), Box::new(|s: &[f64]| Ok(s[0]))));
        }
        ReducedRegime::Plateau { island } => {
            let i = *island;
            let m = nf.powf(0.5 * (gamma(i) + gamma(i + 1))).round() as u64;
            let expo = 0.5_f64.powi(i as i32);
            probes.push((
                m,
                format!("between-island{i}-and-{}", i + 1),
                Box::new(move |s: &[f64]| Ok(1.0 - (1.0 - s[i]).powf(expo))),
            ));
        }
        ReducedRegime::IslandClock { island, ys } => {
            // The probe sits at (y + l_n) n^gamma; the limit is evaluated at
            // the probe's own clock reading m / n^gamma, so the vanishing
            // offset enters both sides and only the functional form is
            // tested.
            let i = *island;
            for &y in ys {
                let m = ((y + l_n) * nf.powf(gamma(i))).round() as u64;
                let y_eff = m as f64 / nf.powf(gamma(i));
                let ctx = &ctx;
                probes.push((
                    m,
                    format!("y={y}(eff {y_eff:.4})"),
                    Box::new(move |s: &[f64]| {
                        ctx.island_pgf_random_start(i, y_eff, s[i - 1], s[i])
                    }),
                ));
            }
        }
        ReducedRegime::TerminalClock { xs } => {
            for &x in xs {
                let m = ((x + l_n) * nf).round() as u64;
                let x_eff = m as f64 / nf;
                let ctx = &ctx;
                probes.push((
                    m,
                    format!("x={x}(eff {x_eff:.4})"),
                    Box::new(move |s: &[f64]| {
                        ctx.terminal_pgf_random_start(x_eff, s[n_types - 1])
                    }),
                ));
            }
        }
    }

    let mut points = Vec::new();
    let mut distance = 0.0f64;
    for (m, coord, limit_at) in &probes {
        let observed_all = pgf::reduced_law_many(model, *m, n, s_grid)?;
        for (s, observed) in s_grid.iter().zip(observed_all) {
            let predicted = limit_at(s)?;
            distance = distance.max((observed - predicted).abs());
            points.push(ProbePoint {
                label: format!("{coord},m={m},s={s:?}"),
                predicted,
                observed,
                stderr: None,
            });
        }
    }

    Ok(ComparisonReport::new(
        format!("reduced-law-{}", regime.name()),
        model.label(),
        vec![n],
        "E[s^Z(m,n) | survival] vs limit",
        "abs-error",
        distance,
        tolerance,
        points,
        Provenance {
            g_n: Some(g_n),
            l_n: Some(l_n),
            ..Default::default()
        },
    ))
}

/// Exact ancestor-birth survivor function (sums of single-ancestor
/// probabilities) against the limit CDFs, on the island clock and on the
/// terminal clock.
pub fn check_mrca_exact(
    model: &ValidatedModel,
    n: u64,
    island: usize,
    ys: &[f64],
    xs: &[f64],
    tolerance: f64,
) -> Result<ComparisonReport> {
    if ys.is_empty() && xs.is_empty() {
        return Err(Error::EmptyInput("no probe points".into()));
    }
    let ctx = LimitContext::new(model.constants().clone());
    let nf = n as f64;
    let mut points = Vec::new();
    let mut distance = 0.0f64;
    for &y in ys {
        let m = (y * nf.powf(model.constants().gamma(island))).round() as u64;
        let singles = pgf::singleton_probabilities(model, m, n)?;
        let observed: f64 = singles.iter().sum();
        let predicted = 1.0 - ctx.mrca_cdf_island(island, y)?;
        distance = distance.max((observed - predicted).abs());
        points.push(ProbePoint {
            label: format!("island{island},y={y},m={m}"),
            predicted,
            observed,
            stderr: None,
        });
    }
    for &x in xs {
        let m = (x * nf).round() as u64;
        let singles = pgf::singleton_probabilities(model, m, n)?;
        let observed: f64 = singles.iter().sum();
        let predicted = 1.0 - ctx.mrca_cdf_terminal(x)?;
        distance = distance.max((observed - predicted).abs());
        points.push(ProbePoint {
            label: format!("terminal,x={x},m={m}"),
            predicted,
            observed,
            stderr: None,
        });
    }
    Ok(ComparisonReport::new(
        "mrca-exact",
        model.label(),
        vec![n],
        "P(beta_n >= m | survival) vs limit survivor function",
        "abs-error",
        distance,
        tolerance,
        points,
        Provenance::default(),
    ))
}

/// Empirical ancestor-type distribution from conditioned runs against the
/// limit probabilities, gated on the worst per-type absolute deviation; the
/// chi-square statistic is reported alongside.
pub fn check_mrca_type_mc(
    model: &ValidatedModel,
    n: u64,
    samples: u64,
    mc: &McConfig,
    tolerance: f64,
) -> Result<ComparisonReport> {
    if samples == 0 {
        return Err(Error::EmptyInput("zero samples requested".into()));
    }
    let sim_model = SimModel::new(model.spec());
    let batch = sim::sample_conditioned(
        &sim_model,
        n,
        samples,
        mc.policy(),
        mc.threads,
        sim::DEFAULT_MAX_ATTEMPTS,
        sim::DEFAULT_POPULATION_CAP,
    );
    if batch.exhausted {
        return Err(Error::BudgetExceeded(format!(
            "only {} of {samples} conditioned runs found",
            batch.runs.len()
        )));
    }
    let n_types = model.n_types();
    let predicted = type_probabilities(n_types)?;
    let mut counts = vec![0u64; n_types];
    for r in &batch.runs {
        counts[r.zeta - 1] += 1;
    }
    let total = batch.runs.len() as f64;
    let mut distance = 0.0f64;
    let mut points = Vec::with_capacity(n_types);
    let mut worst_stderr = 0.0f64;
    for (ty, (&c, &p)) in counts.iter().zip(&predicted).enumerate() {
        let observed = c as f64 / total;
        let stderr = (p * (1.0 - p) / total).sqrt();
        worst_stderr = worst_stderr.max(stderr);
        distance = distance.max((observed - p).abs());
        points.push(ProbePoint {
            label: format!("type={}", ty + 1),
            predicted: p,
            observed,
            stderr: Some(stderr),
        });
    }
    let (chi2, dof) = stats::chi_square(&counts, &predicted);
    let chi2_sf = stats::chi_square_sf(chi2, dof);

    let mut prov = mc.provenance();
    prov.attempts = Some(batch.attempts);
    prov.samples = Some(batch.runs.len() as u64);
    prov.overflowed = Some(batch.overflowed);
    Ok(ComparisonReport::new(
        "mrca-type-mc",
        model.label(),
        vec![n],
        "P(ancestor type = i | survival)",
        "abs-error",
        distance,
        tolerance,
        points,
        prov,
    )
    .with_stderr(worst_stderr)
    .with_note(format!(
        "chi-square = {chi2:.4} (dof {dof}, sf {chi2_sf:.3e})"
    )))
}

/// Empirical emigrant-total transform tail against `D_i lambda^{1/2^i}`:
/// the observed/predicted ratio at the smallest lambda whose Monte Carlo
/// stderr is below a tenth of the prediction must be within the tolerance.
pub fn check_emigrant_tail(
    model: &ValidatedModel,
    barrier: usize,
    lambdas: &[f64],
    runs: u64,
    generation_cap: u64,
    mc: &McConfig,
    tolerance: f64,
) -> Result<ComparisonReport> {
    if lambdas.is_empty() || runs == 0 {
        return Err(Error::EmptyInput("need lambdas and runs".into()));
    }
    let ctx = LimitContext::new(model.constants().clone());
    let sim_model = SimModel::new(model.spec());
    let batch = sim::emigrant_totals(
        &sim_model,
        barrier,
        runs,
        generation_cap,
        mc.policy(),
        mc.threads,
    )?;

    let mut sorted_lambdas = lambdas.to_vec();
    sorted_lambdas.sort_by(f64::total_cmp);
    let mut points = Vec::new();
    let mut gate: Option<(f64, f64)> = None; // (ratio deviation, stderr)
    let mut prev_tail = f64::INFINITY;
    let mut monotone = true;
    for &lambda in sorted_lambdas.iter().rev() {
        let (mean_lst, stderr, _) = stats::mean_stderr(
            batch
                .totals
                .iter()
                .map(|&w| (-lambda * w as f64).exp()),
        );
        let observed_tail = 1.0 - mean_lst;
        if observed_tail > prev_tail + 3.0 * stderr {
            monotone = false;
        }
        prev_tail = observed_tail;
        let predicted = ctx.emigrant_tail_prediction(barrier, lambda)?;
        points.push(ProbePoint {
            label: format!("lambda={lambda}"),
            predicted,
            observed: observed_tail,
            stderr: Some(stderr),
        });
        // Smallest usable lambda wins (iterating descending, so the last
        // assignment sticks): usable means the Monte Carlo error is well
        // inside the tolerance budget.
        if predicted > 0.0 && stderr <= predicted * tolerance / 3.0 {
            gate = Some(((observed_tail / predicted - 1.0).abs(), stderr));
        }
    }
    points.reverse();
    let (distance, gate_stderr) = gate.ok_or_else(|| {
        Error::Domain("no lambda had small enough Monte Carlo error".into())
    })?;

    let mut prov = mc.provenance();
    prov.samples = Some(runs);
    prov.overflowed = Some(batch.capped);
    let mut report = ComparisonReport::new(
        format!("emigrant-tail-barrier{barrier}"),
        model.label(),
        vec![],
        "1 - E[exp(-lambda W)] vs D_i lambda^(1/2^i)",
        "rel-error",
        distance,
        tolerance,
        points,
        prov,
    )
    .with_stderr(gate_stderr);
    if !monotone {
        report = report.with_note("transform tail not monotone in lambda beyond noise");
    }
    Ok(report)
}

/// Cross-validate the Monte Carlo engines against the exact engine:
/// unconditioned survival frequencies inside 99.9% binomial intervals,
/// conditioned reduced-law probes and the scaled-population transform within
/// four standard errors. Distance is the worst deviation as a fraction of
/// its interval half-width.
pub fn check_mc_vs_pgf(
    model: &ValidatedModel,
    survival_horizons: &[u64],
    survival_runs: u64,
    reduced_horizon: u64,
    reduced_samples: u64,
    mc: &McConfig,
) -> Result<ComparisonReport> {
    if survival_runs == 0 || reduced_samples == 0 {
        return Err(Error::EmptyInput("zero runs requested".into()));
    }
    let sim_model = SimModel::new(model.spec());
    let mut points = Vec::new();
    let mut distance = 0.0f64;
    const Z_SURVIVAL: f64 = 3.29; // 99.9% two-sided

    for &n in survival_horizons {
        let freq = sim::survival_frequency(&sim_model, n, survival_runs, mc.policy(), mc.threads);
        let observed = freq.survived as f64 / freq.runs as f64;
        let predicted = pgf::survival_probability(model, 1, n)?;
        let (lo, hi) = stats::binomial_interval(predicted, survival_runs, Z_SURVIVAL);
        let half = 0.5 * (hi - lo);
        distance = distance.max((observed - predicted).abs() / half);
        points.push(ProbePoint {
            label: format!("survival,n={n}"),
            predicted,
            observed,
            stderr: Some((predicted * (1.0 - predicted) / survival_runs as f64).sqrt()),
        });
    }

    // Conditioned reduced-law probes on full genealogies.
    let (genealogies, _, exhausted) = sim::sample_conditioned_genealogies(
        &sim_model,
        reduced_horizon,
        reduced_samples,
        mc.policy(),
        mc.threads,
        sim::DEFAULT_MAX_ATTEMPTS,
        sim::DEFAULT_POPULATION_CAP,
    );
    if exhausted {
        return Err(Error::BudgetExceeded("conditioned sampling exhausted".into()));
    }
    let m = reduced_horizon / 2;
    let n_types = model.n_types();
    let probe_grid = default_probe_grid(n_types);
    let exact = pgf::reduced_law_many(model, m, reduced_horizon, &probe_grid)?;
    for (s, predicted) in probe_grid.iter().zip(exact) {
        let (mean, stderr, _) = stats::mean_stderr(genealogies.iter().map(|g| {
            let counts = &g.reduced_counts[m as usize];
            s.iter()
                .zip(counts)
                .map(|(&sk, &z)| sk.powi(z as i32))
                .product::<f64>()
        }));
        let half = 4.0 * stderr;
        distance = distance.max((mean - predicted).abs() / half);
        points.push(ProbePoint {
            label: format!("reduced,m={m},s={s:?}"),
            predicted,
            observed: mean,
            stderr: Some(stderr),
        });
    }

    // Scaled-population transform at lambda = 1 from the streaming engine.
    let batch = sim::sample_conditioned(
        &sim_model,
        reduced_horizon,
        reduced_samples,
        mc.policy(),
        mc.threads,
        sim::DEFAULT_MAX_ATTEMPTS,
        sim::DEFAULT_POPULATION_CAP,
    );
    let b_last = model.constants().b(n_types);
    let scale = b_last * reduced_horizon as f64;
    let (mean, stderr, _) = stats::mean_stderr(
        batch
            .runs
            .iter()
            .map(|r| (-(r.final_counts[n_types - 1] as f64) / scale).exp()),
    );
    let predicted = pgf::yaglom_transform(model, 1, reduced_horizon, 1.0)?;
    distance = distance.max((mean - predicted).abs() / (4.0 * stderr));
    points.push(ProbePoint {
        label: format!("scaled-transform,lambda=1,n={reduced_horizon}"),
        predicted,
        observed: mean,
        stderr: Some(stderr),
    });

    let mut prov = mc.provenance();
    prov.samples = Some(survival_runs);
    prov.attempts = Some(batch.attempts);
    Ok(ComparisonReport::new(
        "mc-vs-pgf",
        model.label(),
        survival_horizons.to_vec(),
        "Monte Carlo engines vs exact engine",
        "ci-ratio",
        distance,
        1.0,
        points,
        prov,
    ))
}

/// Probe arguments spread over the unit cube, shared by reduced-law checks:
/// three diagonal points and two mildly asymmetric ones.
pub fn default_probe_grid(n_types: usize) -> Vec<Vec<f64>> {
    let base = [0.1, 0.3, 0.5, 0.7, 0.9];
    let shifted = [0.1, 0.6, 0.5, 0.5, 0.9];
    base.iter()
        .zip(&shifted)
        .map(|(&a, &b)| {
            (0..n_types)
                .map(|k| if k % 2 == 0 { a } else { b })
                .collect()
        })
        .collect()
}
