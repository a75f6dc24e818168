//! Run configuration: one JSON file per run, echoed into every output
//! directory with predicate files inlined.

use std::fs;
use std::path::{Path, PathBuf};

use qualia_core::evolution::{Arena, MotifSpec};
use qualia_core::lattice::{Lattice, LatticeConfig};
use qualia_core::predicate::{parse_predicates, ParseContext, PredicateProgram};
use qualia_core::sampler::DEFAULT_MIN_ESS_FRACTION;
use qualia_core::substrate::{SubstrateConfig, DEFAULT_BRANCH_CAP};
use qualia_core::weights::WeightSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSettings {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub branch_cap: usize,
    #[serde(default = "default_ess")]
    pub min_ess_fraction: f64,
}

fn default_samples() -> usize {
    10_000
}

fn default_cap() -> usize {
    DEFAULT_BRANCH_CAP
}

fn default_ess() -> f64 {
    DEFAULT_MIN_ESS_FRACTION
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self { n_samples: default_samples(), seed: 0, branch_cap: default_cap(), min_ess_fraction: default_ess() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotifConfig {
    pub name: String,
    pub start: usize,
    pub len: usize,
    pub initial: String,
    pub hopping_angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub cells: usize,
    pub steps: usize,
    pub neighborhood_radius: usize,
    pub grouping_radius: usize,
    pub collapse_rate: f64,
    pub motifs: [MotifConfig; 2],
    pub betas: Vec<f64>,
    pub mode: SelectionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate: Option<SubstrateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate_source: Option<String>,
    pub weights: WeightSpec,
    #[serde(default)]
    pub sampler: SamplerSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Where inlined predicates were read from, for error messages.
    #[serde(skip)]
    pub predicate_origin: Option<PathBuf>,
}

fn read_source(file: &Option<PathBuf>, source: &Option<String>, base: &Path, what: &str) -> Result<String, CliError> {
    match (file, source) {
        (Some(_), Some(_)) => Err(CliError::Config(format!("{what}: give either predicate_file or predicate_source, not both"))),
        (None, Some(s)) => Ok(s.clone()),
        (Some(f), None) => {
            let path = base.join(f);
            fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{what}: cannot read predicate file {}: {e}", path.display())))
        }
        (None, None) => Err(CliError::Config(format!("{what}: no predicates given"))),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.inline_predicates(path.parent().unwrap_or(Path::new(".")))?;
        Ok(config)
    }

    /// Replaces predicate file references by their contents, resolved
    /// against `base`, so the config becomes self-contained.
    pub fn inline_predicates(&mut self, base: &Path) -> Result<(), CliError> {
        if self.predicate_file.is_some() || self.predicate_source.is_some() {
            self.predicate_source = Some(read_source(&self.predicate_file, &self.predicate_source, base, "config")?);
            if let Some(f) = self.predicate_file.take() {
                self.predicate_origin = Some(base.join(f));
            }
        }
        if let Some(evo) = &mut self.evolution {
            for m in &mut evo.motifs {
                m.predicate_source = Some(read_source(&m.predicate_file, &m.predicate_source, base, &format!("motif {}", m.name))?);
                m.predicate_file = None;
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, seed: Option<u64>, samples: Option<usize>) {
        if let Some(seed) = seed {
            self.sampler.seed = seed;
        }
        if let Some(n) = samples {
            self.sampler.n_samples = n;
        }
    }

    pub fn check_sampler(&self) -> Result<(), CliError> {
        let s = &self.sampler;
        if s.n_samples == 0 {
            return Err(CliError::Config("sampler.n_samples must be positive".into()));
        }
        if s.branch_cap == 0 {
            return Err(CliError::Config("sampler.branch_cap must be positive".into()));
        }
        if !(0.0..=1.0).contains(&s.min_ess_fraction) {
            return Err(CliError::Config(format!("sampler.min_ess_fraction must lie in [0, 1], got {}", s.min_ess_fraction)));
        }
        Ok(())
    }

    /// Lattice, substrate settings and parsed predicates for the
    /// single-register commands.
    pub fn register(&self) -> Result<(Lattice, SubstrateConfig, PredicateProgram), CliError> {
        self.check_sampler()?;
        let lattice_cfg = self.lattice.clone().ok_or_else(|| CliError::Config("missing `lattice` section".into()))?;
        let substrate = self.substrate.clone().ok_or_else(|| CliError::Config("missing `substrate` section".into()))?;
        let lattice = Lattice::new(lattice_cfg).map_err(|e| CliError::Core(e.into()))?;
        substrate.validate(&lattice)?;
        let source = self.predicate_source.as_deref().ok_or_else(|| CliError::Config("no predicates given".into()))?;
        let program = parse_predicates(source, &ParseContext::for_lattice(&lattice))
            .map_err(|source| CliError::Predicate { path: self.predicate_origin(), source })?;
        self.weights.validate(&program.quale_names())?;
        Ok((lattice, substrate, program))
    }

    fn predicate_origin(&self) -> String {
        self.predicate_file
            .as_ref()
            .or(self.predicate_origin.as_ref())
            .map_or_else(|| "predicates".to_string(), |p| p.display().to_string())
    }

    pub fn arena(&self) -> Result<(Arena, &EvolutionConfig), CliError> {
        self.check_sampler()?;
        let evo = self.evolution.as_ref().ok_or_else(|| CliError::Config("missing `evolution` section".into()))?;
        if evo.betas.is_empty() || evo.betas.iter().any(|b| !b.is_finite()) {
            return Err(CliError::Config("evolution.betas must be a non-empty list of finite numbers".into()));
        }
        let motif = |m: &MotifConfig| -> Result<MotifSpec, CliError> {
            Ok(MotifSpec {
                name: m.name.clone(),
                start: m.start,
                len: m.len,
                initial: m.initial.clone(),
                hopping_angle: m.hopping_angle,
                predicates: m.predicate_source.clone().ok_or_else(|| CliError::Config(format!("motif {}: no predicates given", m.name)))?,
            })
        };
        let arena = Arena {
            cells: evo.cells,
            steps: evo.steps,
            neighborhood_radius: evo.neighborhood_radius,
            grouping_radius: evo.grouping_radius,
            collapse_rate: evo.collapse_rate,
            motifs: [motif(&evo.motifs[0])?, motif(&evo.motifs[1])?],
        };
        Ok((arena, evo))
    }
}
