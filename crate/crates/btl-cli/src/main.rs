//! Command-line surface for the branching-process analysis library: model
//! ingestion and validation, exact computations, Monte Carlo experiments,
//! and the full verification suite with persisted reports.
//!
//! Exit codes: 0 success / all checks passed, 1 a check failed, 2 usage or
//! model-validation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use btl::model::{ModelSpec, OffspringLaw, ValidatedModel};
use btl::sim::{self, RngPolicy, SimModel};
use btl::verify::{self, acceptance, ComparisonReport, McConfig};
use btl::{models, pgf};

#[derive(Parser)]
#[command(
    name = "btl",
    version,
    about = "Exact and Monte Carlo analysis of decomposable strongly critical branching processes"
)]
struct Cli {
    /// Model source: a JSON file path or builtin:<name>
    #[arg(long, global = true, default_value = "builtin:all-ones-n2")]
    model: String,
    /// Worker threads (default: BTL_THREADS env var, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct McArgs {
    /// Master seed for reproducible sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model against the criticality hypothesis
    Validate {
        /// Write a criticality-repaired copy of the model here
        #[arg(long)]
        repair_out: Option<PathBuf>,
    },
    /// Print the moment structure and derived constants
    Constants {
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Exact survival probability, optionally with decay-ratio checkpoints
    Survival {
        #[arg(long, default_value_t = 1)]
        start_type: usize,
        #[arg(short = 'n', long)]
        horizon: u64,
        /// Also check the decay ratio against c_iN n^(-1/2^(N-i))
        #[arg(long)]
        asymptotics: bool,
        #[arg(long, default_value_t = 0.10)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conditional transform of the scaled population vs its limit
    Yaglom {
        #[arg(long, default_value_t = 1)]
        start_type: usize,
        #[arg(short = 'n', long)]
        horizon: u64,
        /// Comma-separated transform arguments
        #[arg(long, default_value = "0.5,1,2", value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact reduced family-tree law E[s^Z(m,n) | survival]
    ReducedLaw {
        #[arg(short = 'm', long)]
        m: u64,
        #[arg(short = 'n', long)]
        horizon: u64,
        /// Probe argument, comma-separated per type (repeatable)
        #[arg(long = "probe", required = true)]
        probes: Vec<String>,
    },
    /// Exact ancestor birth-time survivor function vs the limit CDFs
    MrcaExact {
        #[arg(short = 'n', long)]
        horizon: u64,
        #[arg(long, default_value_t = 1)]
        island: usize,
        #[arg(long, default_value = "0.5,1,2", value_delimiter = ',')]
        ys: Vec<f64>,
        #[arg(long, default_value = "0.25,0.5,0.75", value_delimiter = ',')]
        xs: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unconditioned forward genealogy runs
    Simulate {
        #[arg(short = 'n', long)]
        horizon: u64,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[command(flatten)]
        mc: McArgs,
        /// Accept a model that fails criticality validation (degenerate-case
        /// experiments); scaled statistics are then meaningless
        #[arg(long)]
        unchecked: bool,
        /// Write one CSV record per run
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Conditioned ancestor statistics by rejection sampling
    MrcaMc {
        #[arg(short = 'n', long)]
        horizon: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = 0.03)]
        tolerance: f64,
        /// Scale for the birth-time statistics: island:<i> or terminal
        #[arg(long, default_value = "terminal")]
        scale: String,
        /// Write one CSV record per conditioned run
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emigrant-total transform tail vs its small-argument power law
    Emigrants {
        #[arg(long, default_value_t = 1)]
        barrier: usize,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        #[arg(long, default_value = "0.01,0.001", value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 0.10)]
        tolerance: f64,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite and persist reports
    VerifyAll {
        #[command(flatten)]
        mc: McArgs,
        /// Criteria to run (1..=8), default all
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Model file schema

#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "N")]
    n: usize,
    #[serde(default)]
    label: Option<String>,
    types: Vec<TypeEntry>,
}

#[derive(Serialize, Deserialize)]
struct TypeEntry {
    #[serde(rename = "type")]
    type_index: usize,
    pmf: Vec<PmfEntry>,
}

#[derive(Serialize, Deserialize)]
struct PmfEntry {
    vec: Vec<u32>,
    p: f64,
}

fn parse_model_file(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read model file {}", path.display()))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| {
        anyhow!(
            "{}: malformed model JSON at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    let mut entries = file.types;
    entries.sort_by_key(|t| t.type_index);
    let laws = entries
        .into_iter()
        .map(|t| {
            OffspringLaw::new(
                t.type_index,
                file.n,
                t.pmf.into_iter().map(|e| (e.vec, e.p)).collect(),
            )
            .map_err(|e| anyhow!("{}: type {}: {e}", path.display(), t.type_index))
        })
        .collect::<Result<Vec<_>>>()?;
    let label = file
        .label
        .unwrap_or_else(|| path.file_stem().unwrap_or_default().to_string_lossy().into_owned());
    ModelSpec::new(file.n, laws, label).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn model_to_file(spec: &ModelSpec) -> ModelFile {
    ModelFile {
        n: spec.n_types(),
        label: Some(spec.label().to_string()),
        types: spec
            .laws()
            .iter()
            .map(|law| TypeEntry {
                type_index: law.owner_type(),
                pmf: law
                    .support()
                    .iter()
                    .map(|(vec, p)| PmfEntry {
                        vec: vec.clone(),
                        p: *p,
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn load_spec(source: &str) -> Result<ModelSpec> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let model = models::builtin(name).ok_or_else(|| {
            anyhow!(
                "unknown builtin model '{name}'; available: {}",
                models::BUILTIN_NAMES.join(", ")
            )
        })?;
        Ok(model.spec().clone())
    } else {
        parse_model_file(Path::new(source))
    }
}

fn load_validated(source: &str) -> Result<ValidatedModel> {
    let spec = load_spec(source)?;
    let validation = spec.validate_hypothesis_a();
    if !validation.is_ok() {
        let mut msg = String::from("model violates the criticality hypothesis:\n");
        for v in &validation.violations {
            msg.push_str(&format!("  - {v}\n"));
        }
        bail!(msg);
    }
    ValidatedModel::new(spec).map_err(|e| anyhow!("{e}"))
}

// ---------------------------------------------------------------------------
// Output helpers

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// The experiment configuration embedded verbatim in every persisted report.
#[derive(Serialize)]
struct ExperimentConfig<'a> {
    command: &'a str,
    model: &'a str,
    seed: Option<u64>,
    threads: usize,
    parameters: serde_json::Value,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: ExperimentConfig<'a>,
    reports: &'a [ComparisonReport],
}

fn persist_reports(
    out: &Path,
    config: ExperimentConfig<'_>,
    reports: &[ComparisonReport],
) -> Result<()> {
    let file = ReportFile { config, reports };
    let json = serde_json::to_string_pretty(&file)?;
    write_atomic(out, json.as_bytes())?;
    let csv_path = out.with_extension("csv");
    let mut csv = String::from(ComparisonReport::csv_header());
    csv.push('\n');
    for r in reports {
        for row in r.csv_rows() {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    write_atomic(&csv_path, csv.as_bytes())?;
    println!("wrote {} and {}", out.display(), csv_path.display());
    Ok(())
}

fn print_report(report: &ComparisonReport) {
    let status = if report.pass { "PASS" } else { "FAIL" };
    println!(
        "[{status}] {}: {} = {:.6e} (tolerance {:.3e})",
        report.experiment, report.distance_kind, report.distance, report.tolerance
    );
    for p in &report.points {
        match p.stderr {
            Some(se) => println!(
                "  {}: predicted {:.6} observed {:.6} (stderr {:.2e})",
                p.label, p.predicted, p.observed, se
            ),
            None => println!(
                "  {}: predicted {:.6} observed {:.6}",
                p.label, p.predicted, p.observed
            ),
        }
    }
    for n in &report.notes {
        println!("  note: {n}");
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("BTL_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
    .max(1)
}

fn parse_probe(raw: &str, n_types: usize) -> Result<Vec<f64>> {
    let values = raw
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad probe '{raw}': {e}")))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != n_types {
        bail!(
            "probe '{raw}' has {} entries, model has {n_types} types",
            values.len()
        );
    }
    Ok(values)
}

// ---------------------------------------------------------------------------

/// Exit status reflecting a pass/fail check.
struct CheckStatus(bool);

fn run(cli: Cli) -> Result<Option<CheckStatus>> {
    let threads = resolve_threads(cli.threads);
    match cli.command {
        Command::Validate { repair_out } => {
            let spec = load_spec(&cli.model)?;
            let validation = spec.validate_hypothesis_a();
            if validation.is_ok() {
                let model = ValidatedModel::new(spec)?;
                println!(
                    "model '{}' satisfies the criticality hypothesis (N = {})",
                    model.label(),
                    model.n_types()
                );
                return Ok(None);
            }
            for v in &validation.violations {
                eprintln!("violation: {v}");
            }
            if let Some(out) = repair_out {
                let repaired_laws = spec
                    .laws()
                    .iter()
                    .map(|law| law.repaired_critical().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<Vec<_>>>()?;
                let repaired = ModelSpec::new(
                    spec.n_types(),
                    repaired_laws,
                    format!("{}-repaired", spec.label()),
                )?;
                let json = serde_json::to_string_pretty(&model_to_file(&repaired))?;
                write_atomic(&out, json.as_bytes())?;
                eprintln!("repaired model written to {}", out.display());
            }
            bail!("validation failed");
        }
        Command::Constants { json } => {
            let model = load_validated(&cli.model)?;
            let k = model.constants();
            let n = k.n_types();
            if json {
                let doc = serde_json::json!({
                    "label": model.label(),
                    "N": n,
                    "mean_matrix": k.mean_matrix(),
                    "b": (1..=n).map(|i| k.b(i)).collect::<Vec<_>>(),
                    "gamma": (0..=n).map(|i| k.gamma(i)).collect::<Vec<_>>(),
                    "c": (1..=n).map(|j| (j..=n).map(|i| k.c(j, i)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "C": (1..=n).map(|i| k.big_c(i)).collect::<Vec<_>>(),
                    "d": (1..n).map(|j| (j..n).map(|i| k.d(j, i)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "D": (1..n).map(|i| k.big_d(i)).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("model '{}' with {} types", model.label(), n);
                for i in 1..=n {
                    println!("  b_{i} = {:.12}", k.b(i));
                }
                for i in 1..=n {
                    println!("  gamma_{i} = {}", k.gamma(i));
                }
                for j in 1..=n {
                    for i in j..=n {
                        println!("  c_{j}{i} = {:.12}", k.c(j, i));
                    }
                }
                for i in 1..=n {
                    println!("  C_{i} = {:.12}", k.big_c(i));
                }
                for i in 1..n {
                    println!("  D_{i} = {:.12}", k.big_d(i));
                }
            }
            Ok(None)
        }
        Command::Survival {
            start_type,
            horizon,
            asymptotics,
            tolerance,
            out,
        } => {
            let model = load_validated(&cli.model)?;
            let q = pgf::survival_probability(&model, start_type, horizon)?;
            println!("Q_{horizon}(start type {start_type}) = {q:.12e}");
            if asymptotics {
                let mut checkpoints = Vec::new();
                let mut c = 16u64;
                while c < horizon {
                    checkpoints.push(c);
                    c *= 2;
                }
                checkpoints.push(horizon);
                let report = verify::check_survival_asymptotics(
                    &model,
                    start_type,
                    &checkpoints,
                    horizon,
                    tolerance,
                )?;
                print_report(&report);
                if let Some(out) = out {
                    persist_reports(
                        &out,
                        ExperimentConfig {
                            command: "survival",
                            model: &cli.model,
                            seed: None,
                            threads,
                            parameters: serde_json::json!({
                                "start_type": start_type, "horizon": horizon,
                                "tolerance": tolerance,
                            }),
                        },
                        std::slice::from_ref(&report),
                    )?;
                }
                return Ok(Some(CheckStatus(report.pass)));
            }
            Ok(None)
        }
        Command::Yaglom {
            start_type,
            horizon,
            lambdas,
            tolerance,
            out,
        } => {
            let model = load_validated(&cli.model)?;
            let report = verify::check_yaglom(&model, start_type, horizon, &lambdas, tolerance)?;
            print_report(&report);
            if let Some(out) = out {
                persist_reports(
                    &out,
                    ExperimentConfig {
                        command: "yaglom",
                        model: &cli.model,
                        seed: None,
                        threads,
                        parameters: serde_json::json!({
                            "start_type": start_type, "horizon": horizon,
                            "lambdas": lambdas, "tolerance": tolerance,
                        }),
                    },
                    std::slice::from_ref(&report),
                )?;
            }
            Ok(Some(CheckStatus(report.pass)))
        }
        Command::ReducedLaw { m, horizon, probes } => {
            let model = load_validated(&cli.model)?;
            let parsed = probes
                .iter()
                .map(|p| parse_probe(p, model.n_types()))
                .collect::<Result<Vec<_>>>()?;
            let values = pgf::reduced_law_many(&model, m, horizon, &parsed)?;
            for (s, j) in parsed.iter().zip(values) {
                println!("J(m={m}, n={horizon}, s={s:?}) = {j:.12}");
            }
            Ok(None)
        }
        Command::MrcaExact {
            horizon,
            island,
            ys,
            xs,
            tolerance,
            out,
        } => {
            let model = load_validated(&cli.model)?;
            let report = verify::check_mrca_exact(&model, horizon, island, &ys, &xs, tolerance)?;
            print_report(&report);
            if let Some(out) = out {
                persist_reports(
                    &out,
                    ExperimentConfig {
                        command: "mrca-exact",
                        model: &cli.model,
                        seed: None,
                        threads,
                        parameters: serde_json::json!({
                            "horizon": horizon, "island": island,
                            "ys": ys, "xs": xs, "tolerance": tolerance,
                        }),
                    },
                    std::slice::from_ref(&report),
                )?;
            }
            Ok(Some(CheckStatus(report.pass)))
        }
        Command::Simulate {
            horizon,
            runs,
            mc,
            unchecked,
            dump,
        } => {
            // The simulator itself only needs a structurally sound spec;
            // criticality is required unless --unchecked is given.
            let (spec, b_last) = if unchecked {
                (load_spec(&cli.model)?, f64::NAN)
            } else {
                let model = load_validated(&cli.model)?;
                let b = model.constants().b(model.n_types());
                (model.spec().clone(), b)
            };
            let sim_model = SimModel::new(&spec);
            let policy = RngPolicy::new(mc.seed);
            let mut initial = vec![0u32; spec.n_types()];
            initial[0] = 1;
            let mut survived = 0u64;
            let mut rows = String::from("run_id,n,survived,beta,zeta,zN_over_bn\n");
            for k in 0..runs {
                let run = sim::simulate_forward(
                    &sim_model,
                    horizon,
                    &initial,
                    &mut policy.stream(k),
                    sim::DEFAULT_POPULATION_CAP,
                );
                if run.survived {
                    survived += 1;
                }
                if dump.is_some() {
                    let z_last = run.counts_at(horizon).last().copied().unwrap_or(0) as f64
                        / (b_last * horizon as f64);
                    rows.push_str(&format!(
                        "{k},{horizon},{},{},{},{z_last}\n",
                        run.survived,
                        run.beta.map_or(String::new(), |b| b.to_string()),
                        run.zeta.map_or(String::new(), |z| z.to_string()),
                    ));
                }
            }
            println!(
                "{survived}/{runs} runs survived to n = {horizon} (frequency {:.6})",
                survived as f64 / runs as f64
            );
            if let Some(path) = dump {
                write_atomic(&path, rows.as_bytes())?;
                println!("wrote {}", path.display());
            }
            Ok(None)
        }
        Command::MrcaMc {
            horizon,
            samples,
            mc,
            tolerance,
            scale,
            dump,
            out,
        } => {
            let model = load_validated(&cli.model)?;
            let mc_cfg = McConfig::new(mc.seed, threads);
            let report = verify::check_mrca_type_mc(&model, horizon, samples, &mc_cfg, tolerance)?;
            print_report(&report);

            // Birth-time statistics on the requested clock.
            let sim_model = SimModel::new(model.spec());
            let batch = sim::sample_conditioned(
                &sim_model,
                horizon,
                samples,
                RngPolicy::with_chunk_size(mc.seed, mc_cfg.chunk_size),
                threads,
                sim::DEFAULT_MAX_ATTEMPTS,
                sim::DEFAULT_POPULATION_CAP,
            );
            let time_scale = parse_scale(&scale)?;
            let stats = sim::mrca_statistics(&batch.runs, model.constants(), horizon, time_scale)?;
            println!(
                "birth-time statistics on {scale} clock (divisor {:.3}): median {:.4}, 90% {:.4}",
                stats.scale_divisor,
                quantile(&stats.scaled_beta, 0.5),
                quantile(&stats.scaled_beta, 0.9),
            );
            if let Some(path) = dump {
                let b_last = model.constants().b(model.n_types());
                let mut rows = String::from("run_id,n,survived,beta,zeta,zN_over_bn\n");
                for (idx, r) in batch.runs.iter().enumerate() {
                    rows.push_str(&format!(
                        "{idx},{horizon},true,{},{},{}\n",
                        r.beta,
                        r.zeta,
                        *r.final_counts.last().unwrap() as f64 / (b_last * horizon as f64)
                    ));
                }
                write_atomic(&path, rows.as_bytes())?;
                println!("wrote {}", path.display());
            }
            if let Some(out) = out {
                persist_reports(
                    &out,
                    ExperimentConfig {
                        command: "mrca-mc",
                        model: &cli.model,
                        seed: Some(mc.seed),
                        threads,
                        parameters: serde_json::json!({
                            "horizon": horizon, "samples": samples,
                            "tolerance": tolerance, "scale": scale,
                        }),
                    },
                    std::slice::from_ref(&report),
                )?;
            }
            Ok(Some(CheckStatus(report.pass)))
        }
        Command::Emigrants {
            barrier,
            runs,
            lambdas,
            tolerance,
            mc,
            out,
        } => {
            let model = load_validated(&cli.model)?;
            let mc_cfg = McConfig::new(mc.seed, threads);
            let report = verify::check_emigrant_tail(
                &model,
                barrier,
                &lambdas,
                runs,
                sim::DEFAULT_EMIGRANT_GENERATION_CAP,
                &mc_cfg,
                tolerance,
            )?;
            print_report(&report);
            if let Some(out) = out {
                persist_reports(
                    &out,
                    ExperimentConfig {
                        command: "emigrants",
                        model: &cli.model,
                        seed: Some(mc.seed),
                        threads,
                        parameters: serde_json::json!({
                            "barrier": barrier, "runs": runs,
                            "lambdas": lambdas, "tolerance": tolerance,
                        }),
                    },
                    std::slice::from_ref(&report),
                )?;
            }
            Ok(Some(CheckStatus(report.pass)))
        }
        Command::VerifyAll {
            mc,
            criteria,
            out_dir,
        } => {
            let cfg = acceptance::AcceptanceConfig::new(mc.seed, threads);
            let numbers: Vec<usize> = if criteria.is_empty() {
                (1..=acceptance::CRITERIA_COUNT).collect()
            } else {
                criteria
            };
            let mut outcomes = Vec::new();
            for k in &numbers {
                let outcome = acceptance::run_criterion(*k, &cfg).map_err(|e| anyhow!("{e}"))?;
                println!("{}", outcome.summary_line());
                outcomes.push(outcome);
            }
            let all_pass = outcomes.iter().all(|o| o.pass());

            #[derive(Serialize)]
            struct OutcomeFile<'a> {
                number: usize,
                id: &'a str,
                title: &'a str,
                pass: bool,
                reports: &'a [ComparisonReport],
            }
            let doc = serde_json::json!({
                "config": {
                    "command": "verify-all",
                    "seed": mc.seed,
                    "threads": threads,
                    "criteria": numbers,
                },
                "pass": all_pass,
                "criteria": outcomes.iter().map(|o| OutcomeFile {
                    number: o.number,
                    id: o.id,
                    title: o.title,
                    pass: o.pass(),
                    reports: &o.reports,
                }).collect::<Vec<_>>(),
            });
            let json_path = out_dir.join("acceptance_report.json");
            write_atomic(&json_path, serde_json::to_string_pretty(&doc)?.as_bytes())?;
            let csv_path = out_dir.join("acceptance_report.csv");
            let mut csv = String::from(ComparisonReport::csv_header());
            csv.push('\n');
            for o in &outcomes {
                for r in &o.reports {
                    for row in r.csv_rows() {
                        csv.push_str(&row);
                        csv.push('\n');
                    }
                }
            }
            write_atomic(&csv_path, csv.as_bytes())?;
            println!("wrote {} and {}", json_path.display(), csv_path.display());
            Ok(Some(CheckStatus(all_pass)))
        }
    }
}

fn parse_scale(raw: &str) -> Result<sim::TimeScale> {
    if raw == "terminal" {
        return Ok(sim::TimeScale::Terminal);
    }
    if let Some(i) = raw.strip_prefix("island:") {
        return Ok(sim::TimeScale::Island(i.parse()?));
    }
    bail!("scale must be 'terminal' or 'island:<i>', got '{raw}'")
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) | Ok(Some(CheckStatus(true))) => ExitCode::SUCCESS,
        Ok(Some(CheckStatus(false))) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
