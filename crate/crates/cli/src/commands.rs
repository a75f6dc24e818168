use std::path::Path;
use std::sync::Arc;

use qualia_core::evolution::SelectionResult;
use qualia_core::exact::QuantumTable;
use qualia_core::exec::Execution;
use qualia_core::pipeline::{Outcome, Pipeline};
use qualia_core::qualia::{ProgramRules, QualiaDistribution, QualiaRules};
use qualia_core::sampler::BaseSamples;
use qualia_core::substrate::Substrate;
use qualia_core::validation::{run_battery, BatterySettings, Check, Status};
use serde::Serialize;

use crate::config::{RunConfig, SelectionMode};
use crate::error::CliError;
use crate::output::OutputDir;

fn type_counts(d: &QualiaDistribution) -> String {
    d.names().iter().zip(d.counts()).map(|(n, c)| format!("{n}={c}")).collect::<Vec<_>>().join(";")
}

fn describe(d: &QualiaDistribution) -> String {
    d.qualia()
        .iter()
        .map(|q| {
            let c = q.point.cell;
            format!("{}:{},{},{}={};", q.point.t, c[0], c[1], c[2], d.names()[q.kind])
        })
        .collect()
}

/// Scalar statistics reported by `enumerate` and `sample`.
fn quantities(names: &[String]) -> Vec<(String, Box<dyn Fn(&Outcome) -> f64 + Sync + '_>)> {
    let mut out: Vec<(String, Box<dyn Fn(&Outcome) -> f64 + Sync>)> = vec![
        ("qualia".into(), Box::new(|o: &Outcome| o.distribution.len() as f64)),
        ("consciousnesses".into(), Box::new(|o: &Outcome| o.components.len() as f64)),
    ];
    for (k, name) in names.iter().enumerate() {
        out.push((format!("count.{name}"), Box::new(move |o: &Outcome| o.distribution.counts()[k] as f64)));
    }
    out
}

fn build(config: &RunConfig) -> Result<(Substrate, ProgramRules), CliError> {
    let (lattice, substrate, program) = config.register()?;
    Ok((Substrate::new(lattice, substrate)?, ProgramRules::new(program)))
}

#[derive(Debug, Serialize)]
struct DistributionRow {
    rank: usize,
    digest: String,
    qualia: usize,
    consciousnesses: usize,
    /// `name=count` per quale type, `;`-separated.
    counts: String,
    histories: usize,
    p_q: f64,
    log_weight: f64,
    weight: f64,
    p_true: f64,
    content: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Expectation {
    pub quantity: String,
    pub true_value: f64,
    pub quantum_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateSummary {
    pub branch_bound: f64,
    pub histories: usize,
    pub distributions: usize,
    pub total_quantum_mass: f64,
    pub total_true_mass: f64,
    pub normalizer: f64,
    pub log_normalizer: f64,
    pub tv_to_quantum: f64,
    pub max_product_residual: f64,
    pub faulted_distributions: usize,
    pub expectations: Vec<Expectation>,
}

pub fn cmd_enumerate(config: &RunConfig, out: &Path, exec: Execution) -> Result<EnumerateSummary, CliError> {
    let (substrate, rules) = build(config)?;
    let pipeline = Pipeline::new(&substrate, &rules, exec);
    let table = Arc::new(QuantumTable::build(&pipeline, config.sampler.branch_cap)?);
    let law = table.reweight(&config.weights)?;
    let dir = OutputDir::create(out)?;
    dir.echo(config)?;
    dir.csv(
        "distribution.csv",
        table.entries.iter().zip(&law.rows).enumerate().map(|(rank, (e, r))| DistributionRow {
            rank,
            digest: e.outcome.distribution.digest(),
            qualia: e.outcome.distribution.len(),
            consciousnesses: e.outcome.components.len(),
            counts: type_counts(&e.outcome.distribution),
            histories: e.histories,
            p_q: r.p_q,
            log_weight: r.log_weight,
            weight: r.weight,
            p_true: r.p_true,
            content: describe(&e.outcome.distribution),
        }),
    )?;
    let summary = EnumerateSummary {
        branch_bound: substrate.branch_bound(),
        histories: table.history_count,
        distributions: table.entries.len(),
        total_quantum_mass: table.total_mass,
        total_true_mass: law.total(),
        normalizer: law.normalizer,
        log_normalizer: law.log_normalizer,
        tv_to_quantum: law.tv_to_quantum(),
        max_product_residual: law.max_product_residual(),
        faulted_distributions: table.entries.iter().filter(|e| !e.outcome.diagnostics.is_empty()).count(),
        expectations: quantities(rules.quale_names())
            .into_iter()
            .map(|(quantity, f)| Expectation { true_value: law.expectation(&f), quantum_value: table.expectation(&f), quantity })
            .collect(),
    };
    dir.json("summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub mean: f64,
    pub std_error: f64,
    pub quantum_mean: f64,
    pub quantum_std_error: f64,
}

#[derive(Debug, Serialize)]
struct SampleRow {
    index: usize,
    digest: String,
    qualia: usize,
    consciousnesses: usize,
    log_p_q: f64,
    log_weight: f64,
    weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSummary {
    pub n_samples: usize,
    pub seed: u64,
    pub unique_histories: usize,
    pub ess: f64,
    pub ess_fraction: f64,
    pub warning: Option<String>,
    pub faulted_samples: usize,
    pub estimates: Vec<EstimateRow>,
}

pub fn cmd_sample(config: &RunConfig, out: &Path, exec: Execution) -> Result<SampleSummary, CliError> {
    let (substrate, rules) = build(config)?;
    let s = &config.sampler;
    let pipeline = Pipeline::new(&substrate, &rules, exec);
    let base = Arc::new(BaseSamples::draw(&pipeline, s.n_samples, s.seed)?);
    let tilted = base.reweight(&config.weights, s.min_ess_fraction)?;
    let plain = base.reweight(&config.weights.with_beta(0.0), 0.0)?;
    let estimates: Vec<EstimateRow> = quantities(rules.quale_names())
        .into_iter()
        .map(|(quantity, f)| {
            let (t, q) = (tilted.estimate(&f), plain.estimate(&f));
            EstimateRow { quantity, mean: t.mean, std_error: t.std_error, quantum_mean: q.mean, quantum_std_error: q.std_error }
        })
        .collect();
    let dir = OutputDir::create(out)?;
    dir.echo(config)?;
    dir.csv("estimates.csv", estimates.iter())?;
    dir.csv(
        "samples.csv",
        base.records.iter().zip(&tilted.log_weights).zip(&tilted.weights).enumerate().map(|(index, ((r, &lw), &w))| SampleRow {
            index,
            digest: r.outcome.distribution.digest(),
            qualia: r.outcome.distribution.len(),
            consciousnesses: r.outcome.components.len(),
            log_p_q: r.log_p_q,
            log_weight: lw,
            weight: w,
        }),
    )?;
    let summary = SampleSummary {
        n_samples: s.n_samples,
        seed: s.seed,
        unique_histories: base.unique_histories,
        ess: tilted.ess,
        ess_fraction: tilted.ess / s.n_samples as f64,
        warning: tilted.warning.clone(),
        faulted_samples: base.records.iter().filter(|r| !r.outcome.diagnostics.is_empty()).count(),
        estimates,
    };
    dir.json("summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct SelectionRow {
    beta: f64,
    dominance: f64,
    std_error: f64,
    baseline: f64,
    baseline_std_error: f64,
    ess: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PlotRow {
    beta: f64,
    dominance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveSummary {
    pub mode: SelectionMode,
    pub motifs: [String; 2],
    pub results: Vec<SelectionResult>,
}

pub fn cmd_evolve(config: &RunConfig, out: &Path, exec: Execution) -> Result<EvolveSummary, CliError> {
    let (arena, evo) = config.arena()?;
    let scenario = arena.build()?;
    config.weights.validate(scenario.rules.quale_names())?;
    let s = &config.sampler;
    let results = match evo.mode {
        SelectionMode::Exact => scenario.exact_sweep(&config.weights, &evo.betas, s.branch_cap, exec)?,
        SelectionMode::Sampled => scenario.beta_sweep(&config.weights, &evo.betas, s.n_samples, s.seed, exec)?,
    };
    let dir = OutputDir::create(out)?;
    dir.echo(config)?;
    dir.csv(
        "selection.csv",
        results.iter().map(|r| SelectionRow {
            beta: r.beta,
            dominance: r.dominance.mean,
            std_error: r.dominance.std_error,
            baseline: r.baseline.mean,
            baseline_std_error: r.baseline.std_error,
            ess: r.ess,
        }),
    )?;
    dir.csv("dominance_plot.csv", results.iter().map(|r| PlotRow { beta: r.beta, dominance: r.dominance.mean }))?;
    let summary = EvolveSummary { mode: evo.mode.clone(), motifs: arena.motifs.clone().map(|m| m.name), results };
    dir.json("summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<Check>,
}

/// Runs the invariant battery. The report is written before a failure is
/// returned.
pub fn cmd_validate(config: &RunConfig, out: &Path, exec: Execution) -> Result<ValidateReport, CliError> {
    let settings = BatterySettings {
        samples: config.sampler.n_samples.min(2000),
        branch_cap: config.sampler.branch_cap,
        seed: config.sampler.seed,
        ..BatterySettings::default()
    };
    let checks = if config.lattice.is_none() && config.evolution.is_some() {
        let (arena, _) = config.arena()?;
        let scenario = arena.build()?;
        config.weights.validate(scenario.rules.quale_names())?;
        run_battery(&scenario.substrate, &scenario.rules, &config.weights, &settings, exec)?
    } else {
        let (substrate, rules) = build(config)?;
        run_battery(&substrate, &rules, &config.weights, &settings, exec)?
    };
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let report = ValidateReport { passed: count(Status::Pass), failed: count(Status::Fail), skipped: count(Status::Skipped), checks };
    let dir = OutputDir::create(out)?;
    dir.echo(config)?;
    dir.json("validation.json", &report)?;
    let lines: String = report.checks.iter().map(|c| format!("{:<18} {:?} {}\n", c.name, c.status, c.detail)).collect();
    dir.text("validation.txt", &lines)?;
    if report.failed > 0 {
        return Err(CliError::Validation { failed: report.failed, report: lines });
    }
    Ok(report)
}
