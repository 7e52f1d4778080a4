//! The top-level verification suite: eight criteria combining exact
//! small-scale oracles with stabilized-ratio and Monte Carlo checks at desk
//! scale. Each criterion yields one or more [`ComparisonReport`]s; the
//! criterion passes iff every report does. Used both by the `acceptance`
//! integration test target and by the CLI's `verify-all`.

use rand::Rng;

use crate::error::Result;
use crate::limits::LimitContext;
use crate::model::{ModelSpec, ValidatedModel};
use crate::models;
use crate::pgf::{self, PgfState};
use crate::sim::{self, RngPolicy, SimModel};
use crate::verify::checks::{self, McConfig, ReducedRegime};
use crate::verify::enumeration;
use crate::verify::report::{ComparisonReport, ProbePoint, Provenance};

pub const CRITERIA_COUNT: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub threads: usize,
}

impl AcceptanceConfig {
    pub fn new(seed: u64, threads: usize) -> Self {
        Self { seed, threads }
    }

    fn mc(&self) -> McConfig {
        McConfig::new(self.seed, self.threads)
    }
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub number: usize,
    pub id: &'static str,
    pub title: &'static str,
    pub reports: Vec<ComparisonReport>,
}

impl CriterionOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    /// One line per criterion for terminal output.
    pub fn summary_line(&self) -> String {
        let status = if self.pass() { "PASS" } else { "FAIL" };
        let worst = self
            .reports
            .iter()
            .map(|r| format!("{}={:.3e}(tol {:.0e})", r.experiment, r.distance, r.tolerance))
            .collect::<Vec<_>>()
            .join(", ");
        format!("[{status}] criterion {}: {} - {worst}", self.number, self.title)
    }
}

/// Run one criterion (1-based).
pub fn run_criterion(number: usize, cfg: &AcceptanceConfig) -> Result<CriterionOutcome> {
    let reports = match number {
        1 => criterion_oracle_exactness()?,
        2 => criterion_survival_asymptotics()?,
        3 => criterion_yaglom()?,
        4 => criterion_reduced_laws()?,
        5 => criterion_mrca_exact()?,
        6 => criterion_mrca_type_mc(cfg)?,
        7 => criterion_emigrant_tail(cfg)?,
        8 => criterion_property_suites(cfg)?,
        _ => {
            return Err(crate::error::Error::Domain(format!(
                "criterion {number} outside 1..={CRITERIA_COUNT}"
            )))
        }
    };
    let (id, title) = CRITERIA[number - 1];
    Ok(CriterionOutcome {
        number,
        id,
        title,
        reports,
    })
}

pub const CRITERIA: [(&str, &str); CRITERIA_COUNT] = [
    ("oracle-exactness", "closed-form and enumeration oracles reproduced exactly"),
    ("survival-asymptotics", "survival probability decay approaches c_iN n^(-1/2^(N-i))"),
    ("yaglom", "conditioned scaled population transform approaches its limit"),
    ("reduced-laws", "reduced family-tree law approaches its four limit regimes"),
    ("mrca-exact", "exact ancestor birth-time law approaches the limit CDFs"),
    ("mrca-type-mc", "sampled ancestor types approach the limit distribution"),
    ("emigrant-tail", "emigrant-total transform tail approaches D_i lambda^(1/2^i)"),
    ("property-suites", "constants identities, ODE/PDE checks, ladder consistency, engine cross-validation, determinism"),
];

/// Run all criteria in order.
pub fn run_all(cfg: &AcceptanceConfig) -> Result<Vec<CriterionOutcome>> {
    (1..=CRITERIA_COUNT)
        .map(|k| run_criterion(k, cfg))
        .collect()
}

fn criterion_oracle_exactness() -> Result<Vec<ComparisonReport>> {
    // Geometric offspring: Q_n = 1/(n+1) exactly for every n <= 1000.
    let model = models::linear_fractional_n2();
    let mut state = PgfState::new(&model, &[0.0, 0.0])?;
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for n in 1..=1000u64 {
        state.advance(1)?;
        let expected = 1.0 / (n as f64 + 1.0);
        let dev = (state.q(2) - expected).abs();
        worst = worst.max(dev);
        if n.is_power_of_two() || n == 1000 {
            points.push(ProbePoint {
                label: format!("n={n}"),
                predicted: expected,
                observed: state.q(2),
                stderr: None,
            });
        }
    }
    let closed_form = ComparisonReport::new(
        "oracle-closed-form-survival",
        model.label(),
        vec![1000],
        "Q_n vs 1/(n+1)",
        "abs-error",
        worst,
        1e-12,
        points,
        Provenance::default(),
    );

    // Whole-state-space enumeration vs the reduced-law engine.
    let small = models::small_support_n2();
    let n = 6u64;
    let probes: [(u64, [f64; 2]); 5] = [
        (0, [0.3, 0.6]),
        (2, [0.1, 0.1]),
        (3, [0.5, 0.5]),
        (5, [0.7, 0.5]),
        (6, [0.9, 0.9]),
    ];
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for (m, s) in probes {
        let predicted = enumeration::reduced_law_enumerated(small.spec(), m, n, &s)?;
        let observed = pgf::reduced_law(&small, m, n, &s)?;
        worst = worst.max((observed - predicted).abs());
        points.push(ProbePoint {
            label: format!("m={m},s={s:?}"),
            predicted,
            observed,
            stderr: None,
        });
    }
    let enumerated = ComparisonReport::new(
        "oracle-enumeration-reduced-law",
        small.label(),
        vec![n],
        "reduced law vs state-space enumeration",
        "abs-error",
        worst,
        1e-10,
        points,
        Provenance::default(),
    );
    Ok(vec![closed_form, enumerated])
}

fn criterion_survival_asymptotics() -> Result<Vec<ComparisonReport>> {
    let model = models::all_ones_n2();
    let checkpoints: Vec<u64> = (14..=20).map(|k| 1u64 << k).collect();
    Ok(vec![checks::check_survival_asymptotics(
        &model,
        1,
        &checkpoints,
        1_000_000,
        0.10,
    )?])
}

fn criterion_yaglom() -> Result<Vec<ComparisonReport>> {
    let model = models::all_ones_n2();
    Ok(vec![checks::check_yaglom(
        &model,
        1,
        10_000,
        &[0.5, 1.0, 2.0],
        0.02,
    )?])
}

fn criterion_reduced_laws() -> Result<Vec<ComparisonReport>> {
    let model = models::all_ones_n2();
    let n = 1_000_000;
    let grid = checks::default_probe_grid(2);
    let regimes = [
        ReducedRegime::EarlySingleton,
        ReducedRegime::Plateau { island: 1 },
        ReducedRegime::IslandClock {
            island: 1,
            ys: vec![0.5, 1.0, 2.0],
        },
        ReducedRegime::TerminalClock {
            xs: vec![0.25, 0.5, 0.75],
        },
    ];
    regimes
        .iter()
        .map(|regime| checks::check_reduced_onedim(&model, regime, n, &grid, 0.05))
        .collect()
}

fn criterion_mrca_exact() -> Result<Vec<ComparisonReport>> {
    let model = models::all_ones_n2();
    Ok(vec![checks::check_mrca_exact(
        &model,
        10_000,
        1,
        &[0.5, 1.0, 2.0],
        &[0.25, 0.5, 0.75],
        0.05,
    )?])
}

fn criterion_mrca_type_mc(cfg: &AcceptanceConfig) -> Result<Vec<ComparisonReport>> {
    let model = models::mrca_binary_n2();
    Ok(vec![checks::check_mrca_type_mc(
        &model,
        4096,
        10_000,
        &cfg.mc(),
        0.03,
    )?])
}

fn criterion_emigrant_tail(cfg: &AcceptanceConfig) -> Result<Vec<ComparisonReport>> {
    let model = models::all_ones_n2();
    Ok(vec![checks::check_emigrant_tail(
        &model,
        1,
        &[1e-2, 1e-3],
        1_000_000,
        sim::DEFAULT_EMIGRANT_GENERATION_CAP,
        &cfg.mc(),
        0.10,
    )?])
}

fn criterion_property_suites(cfg: &AcceptanceConfig) -> Result<Vec<ComparisonReport>> {
    Ok(vec![
        constants_identities_report(cfg)?,
        ode_pde_report(cfg)?,
        ladder_consistency_report()?,
        checks::check_mc_vs_pgf(
            &models::all_ones_n2(),
            &[16, 64, 256],
            1_000_000,
            64,
            2_000,
            &cfg.mc(),
        )?,
        determinism_report(cfg)?,
    ])
}

/// A random strongly-critical spec: own-type laws on {0,1,2,4} built to have
/// mean exactly one, plus Bernoulli migration to every higher type with a
/// guaranteed-positive next-type mean.
pub fn random_valid_spec(rng: &mut impl Rng, n_types: usize) -> ValidatedModel {
    let laws = (1..=n_types)
        .map(|i| {
            let a = rng.gen_range(0.05..0.30); // P(2 own)
            let c = rng.gen_range(0.01..0.08); // P(4 own)
            let own = [
                (0u32, a + 3.0 * c),
                (1, 1.0 - 2.0 * a - 4.0 * c),
                (2, a),
                (4, c),
            ];
            let migrants: Vec<(usize, Vec<(u32, f64)>)> = ((i + 1)..=n_types)
                .map(|j| {
                    let p = if j == i + 1 {
                        rng.gen_range(0.2..0.9)
                    } else {
                        rng.gen_range(0.0..0.4)
                    };
                    (j, vec![(0u32, 1.0 - p), (1, p)])
                })
                .collect();
            models::product_law(i, n_types, &own, &migrants)
        })
        .collect();
    let spec = ModelSpec::new(n_types, laws, format!("random-n{n_types}")).unwrap();
    ValidatedModel::new(spec).expect("constructed spec is critical")
}

fn constants_identities_report(cfg: &AcceptanceConfig) -> Result<ComparisonReport> {
    let mut rng = RngPolicy::new(cfg.seed).stream(0xC0);
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for trial in 0..50 {
        let n_types = 2 + (trial % 3);
        let model = random_valid_spec(&mut rng, n_types);
        let k = model.constants();
        let n = k.n_types();
        let mut dev = 0.0f64;
        for i in 1..=n {
            dev = dev.max((k.c(i, n) - k.c_tail_closed_form(i)).abs());
        }
        for i in 1..n {
            let half_pow = 0.5_f64.powi(i as i32);
            dev = dev.max((k.big_c(n) - k.big_d(i) * k.c(i + 1, n).powf(half_pow)).abs());
            let via_c = (k.b(i) * k.mean(i, i + 1)).powf(half_pow) * k.big_c(i);
            dev = dev.max((k.big_d(i) - via_c).abs());
        }
        worst = worst.max(dev);
        if trial < 3 {
            points.push(ProbePoint {
                label: format!("spec{trial}(N={n_types})"),
                predicted: 0.0,
                observed: dev,
                stderr: None,
            });
        }
    }
    Ok(ComparisonReport::new(
        "constants-identities",
        "50 random critical specs",
        vec![],
        "recursion vs closed form, ladder and product identities",
        "abs-error",
        worst,
        1e-12,
        points,
        Provenance {
            seed: Some(cfg.seed),
            samples: Some(50),
            ..Default::default()
        },
    ))
}

fn ode_pde_report(cfg: &AcceptanceConfig) -> Result<ComparisonReport> {
    let mut rng = RngPolicy::new(cfg.seed).stream(0x0DE);
    let contexts = [
        LimitContext::new(models::all_ones_n2().constants().clone()),
        LimitContext::new(random_valid_spec(&mut rng, 2).constants().clone()),
    ];
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for (which, ctx) in contexts.iter().enumerate() {
        let b = ctx.constants().b(1);
        let m12 = ctx.constants().mean(1, 2);
        let rate = ctx.island_rate(1);
        for trial in 0..50 {
            // Pair-PGF flow equation by central differences.
            let y = rng.gen_range(0.05..2.0);
            let s1 = rng.gen_range(0.0..0.9);
            let s2 = rng.gen_range(0.0..0.9);
            let x = ctx.island_pair_pgf(1, y, s1, s2)?;
            let up = ctx.island_pair_pgf(1, y + h, s1, s2)?;
            let dn = ctx.island_pair_pgf(1, y - h, s1, s2)?;
            let lhs = (up - dn) / (2.0 * h);
            let rhs = rate * (0.5 * x * x - x + 0.5 * s2);
            let dev = (lhs - rhs).abs() / rhs.abs().max(1.0);
            worst = worst.max(dev);

            // Scaled Laplace transport equation by central differences.
            let l1 = rng.gen_range(0.05..2.0);
            let l2 = rng.gen_range(0.05..2.0);
            let phi = |a: f64, b2: f64| ctx.two_type_laplace(1, a, b2, 1.0);
            let p = phi(l1, l2)?;
            let d1 = (phi(l1 + h, l2)? - phi(l1 - h, l2)?) / (2.0 * h);
            let d2 = (phi(l1, l2 + h)? - phi(l1, l2 - h)?) / (2.0 * h);
            let lhs = l1 * d1 + 2.0 * l2 * d2;
            let rhs = -b * p * p + p + m12 * l2;
            let dev2 = (lhs - rhs).abs() / rhs.abs().max(1.0);
            worst = worst.max(dev2);
            if trial == 0 {
                points.push(ProbePoint {
                    label: format!("ctx{which},flow(y={y:.3})"),
                    predicted: 0.0,
                    observed: dev,
                    stderr: None,
                });
                points.push(ProbePoint {
                    label: format!("ctx{which},transport(l1={l1:.3},l2={l2:.3})"),
                    predicted: 0.0,
                    observed: dev2,
                    stderr: None,
                });
            }
        }
    }
    Ok(ComparisonReport::new(
        "limit-ode-pde",
        "all-ones-n2 + random spec",
        vec![],
        "flow and transport equations of the limit transforms (finite differences)",
        "rel-error",
        worst,
        1e-6,
        points,
        Provenance {
            seed: Some(cfg.seed),
            samples: Some(200),
            ..Default::default()
        },
    ))
}

fn ladder_consistency_report() -> Result<ComparisonReport> {
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for model in [models::all_ones_n3(), models::all_ones_n2()] {
        let ctx = LimitContext::new(model.constants().clone());
        let n = ctx.n_types();
        for i in 1..n.saturating_sub(1) {
            let upper = ctx.mrca_cdf_island(i, f64::INFINITY)?;
            let lower = ctx.mrca_cdf_island(i + 1, 0.0)?;
            let expected = 1.0 - 0.5_f64.powi(i as i32);
            let dev = (upper - expected).abs().max((lower - expected).abs());
            worst = worst.max(dev);
            points.push(ProbePoint {
                label: format!("{}:island{}-to-{}", model.label(), i, i + 1),
                predicted: expected,
                observed: upper,
                stderr: None,
            });
        }
        let last = ctx.mrca_cdf_island(n - 1, f64::INFINITY)?;
        let terminal = ctx.mrca_cdf_terminal(0.0)?;
        worst = worst.max((last - terminal).abs());
        points.push(ProbePoint {
            label: format!("{}:island{}-to-terminal", model.label(), n - 1),
            predicted: terminal,
            observed: last,
            stderr: None,
        });
    }
    Ok(ComparisonReport::new(
        "mrca-ladder-boundaries",
        "all-ones models",
        vec![],
        "island CDF endpoints meet the next phase exactly",
        "abs-error",
        worst,
        0.0,
        points,
        Provenance::default(),
    ))
}

fn determinism_report(cfg: &AcceptanceConfig) -> Result<ComparisonReport> {
    // Same seed, different thread counts: byte-identical reports.
    let model = models::mrca_binary_n2();
    let a = checks::check_mrca_type_mc(&model, 256, 500, &McConfig::new(cfg.seed, 1), 1.0)?;
    let b = checks::check_mrca_type_mc(&model, 256, 500, &McConfig::new(cfg.seed, 4), 1.0)?;
    let identical_reports = serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap();

    let sim_model = SimModel::new(model.spec());
    let e1 = sim::emigrant_totals(&sim_model, 1, 2_000, 100_000, RngPolicy::new(cfg.seed), 1)?;
    let e2 = sim::emigrant_totals(&sim_model, 1, 2_000, 100_000, RngPolicy::new(cfg.seed), 3)?;
    let identical_totals = e1.totals == e2.totals;

    let distance = if identical_reports && identical_totals {
        0.0
    } else {
        1.0
    };
    Ok(ComparisonReport::new(
        "determinism",
        model.label(),
        vec![256],
        "seeded reruns across thread counts are bit-identical",
        "mismatch-count",
        distance,
        0.0,
        vec![
            ProbePoint {
                label: "conditioned-report".into(),
                predicted: 1.0,
                observed: if identical_reports { 1.0 } else { 0.0 },
                stderr: None,
            },
            ProbePoint {
                label: "emigrant-totals".into(),
                predicted: 1.0,
                observed: if identical_totals { 1.0 } else { 0.0 },
                stderr: None,
            },
        ],
        Provenance {
            seed: Some(cfg.seed),
            ..Default::default()
        },
    ))
}
