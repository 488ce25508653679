//! Analysis models registered by name, and the top-level `run` entry point.

use std::path::Path;

use crate::binormal::infer_binormal;
use crate::config::{AnalysisConfig, ElicitationEcho};
use crate::discrete::infer_discrete;
use crate::dp::infer_dp;
use crate::elicitation::PrevalencePrior;
use crate::error::{Result, RocError};
use crate::ingest::{ingest, DataFormat, Dataset};
use crate::prevalence::{infer_prevalence, Regime};
use crate::rb::Grid;
use crate::report::{AnalysisOutput, PrevalenceReport, Provenance, Report, SCHEMA_VERSION};

/// One analysis pipeline.
pub trait AnalysisModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Expected data layout.
    fn data_format(&self) -> DataFormat;

    fn requires_data(&self) -> bool {
        true
    }

    fn run(&self, config: &AnalysisConfig, data: Option<&Dataset>, echo: &mut ElicitationEcho) -> Result<AnalysisOutput>;
}

fn need<'a>(model: &str, data: Option<&'a Dataset>, format: DataFormat) -> Result<&'a Dataset> {
    match data {
        Some(d) if d.format() == format => Ok(d),
        Some(_) => Err(RocError::Config(format!("the {model} model needs {format:?} data").to_lowercase())),
        None => Err(RocError::Config(format!("the {model} model needs a data file"))),
    }
}

pub struct PrevalenceModel;

impl AnalysisModel for PrevalenceModel {
    fn name(&self) -> &'static str {
        "prevalence"
    }

    fn data_format(&self) -> DataFormat {
        DataFormat::Raw
    }

    fn requires_data(&self) -> bool {
        false
    }

    fn run(&self, config: &AnalysisConfig, data: Option<&Dataset>, echo: &mut ElicitationEcho) -> Result<AnalysisOutput> {
        let spec = config.prevalence(echo)?;
        let PrevalencePrior::Beta(prior) = spec.prior else {
            return Err(RocError::Config("prevalence inference needs a beta prior".into()));
        };
        if spec.regime != Regime::II {
            return Err(RocError::Config("prevalence inference needs regime ii data".into()));
        }
        let (n_d, n_nd) = match (data, config.n_d, config.n_nd) {
            (Some(d), None, None) => d.group_sizes(),
            (None, Some(a), Some(b)) => (a, b),
            _ => return Err(RocError::Config("give either a data file or both n_d and n_nd".into())),
        };
        let grid = Grid::unit(config.prevalence_bins).map_err(|e| RocError::Config(e.to_string()))?;
        let prevalence = infer_prevalence(prior, n_d, n_nd, grid).map_err(|e| e.in_module("prevalence"))?;
        Ok(AnalysisOutput::Prevalence(PrevalenceReport {
            model: "prevalence",
            prevalence_spec: spec,
            prevalence,
        }))
    }
}

pub struct DiscreteModel;

impl AnalysisModel for DiscreteModel {
    fn name(&self) -> &'static str {
        "discrete"
    }

    fn data_format(&self) -> DataFormat {
        DataFormat::Counts
    }

    fn run(&self, config: &AnalysisConfig, data: Option<&Dataset>, echo: &mut ElicitationEcho) -> Result<AnalysisOutput> {
        let Dataset::Counts(counts) = need(self.name(), data, self.data_format())? else { unreachable!() };
        let prior = config.discrete_prior(counts.levels.len())?;
        let prevalence = config.prevalence(echo)?;
        infer_discrete(&prior, counts, &prevalence, &config.run_options()).map(AnalysisOutput::Discrete)
    }
}

pub struct BinormalModel;

impl AnalysisModel for BinormalModel {
    fn name(&self) -> &'static str {
        "binormal"
    }

    fn data_format(&self) -> DataFormat {
        DataFormat::Raw
    }

    fn run(&self, config: &AnalysisConfig, data: Option<&Dataset>, echo: &mut ElicitationEcho) -> Result<AnalysisOutput> {
        let Dataset::Raw(raw) = need(self.name(), data, self.data_format())? else { unreachable!() };
        let prior = config.normal_gamma(echo)?;
        let prevalence = config.prevalence(echo)?;
        infer_binormal(
            &prior,
            &raw.sufficient(),
            &prevalence,
            &config.binormal_options(),
            &config.run_options(),
        )
        .map(AnalysisOutput::Binormal)
    }
}

pub struct DpModel;

impl AnalysisModel for DpModel {
    fn name(&self) -> &'static str {
        "dp"
    }

    fn data_format(&self) -> DataFormat {
        DataFormat::Raw
    }

    fn run(&self, config: &AnalysisConfig, data: Option<&Dataset>, echo: &mut ElicitationEcho) -> Result<AnalysisOutput> {
        let Dataset::Raw(raw) = need(self.name(), data, self.data_format())? else { unreachable!() };
        let spec = config.dp_spec(echo)?;
        let prevalence = config.prevalence(echo)?;
        infer_dp(
            &spec,
            &raw.nd,
            &raw.d,
            &prevalence,
            &config.dp_options()?,
            &config.run_options(),
        )
        .map(AnalysisOutput::Dp)
    }
}

/// Models keyed by name.
pub struct ModelRegistry {
    models: Vec<Box<dyn AnalysisModel>>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = ModelRegistry::empty();
        r.register(Box::new(PrevalenceModel));
        r.register(Box::new(DiscreteModel));
        r.register(Box::new(BinormalModel));
        r.register(Box::new(DpModel));
        r
    }
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry { models: Vec::new() }
    }

    /// Adds a model, replacing any with the same name.
    pub fn register(&mut self, model: Box<dyn AnalysisModel>) {
        self.models.retain(|m| m.name() != model.name());
        self.models.push(model);
    }

    pub fn get(&self, name: &str) -> Result<&dyn AnalysisModel> {
        self.models.iter().find(|m| m.name() == name).map(|m| m.as_ref()).ok_or_else(|| {
            RocError::Config(format!("unknown model {name:?}, expected one of {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.models.iter().map(|m| m.name()).collect()
    }

    /// Reads a data file in the layout the configured model expects.
    pub fn load_data(&self, config: &AnalysisConfig, path: &Path) -> Result<Dataset> {
        let model = self.get(&config.model)?;
        ingest(path, model.data_format(), config.stratum.as_deref())
    }

    pub fn run(&self, config: &AnalysisConfig, data: Option<&Dataset>) -> Result<Report> {
        let model = self.get(&config.model)?;
        if model.requires_data() && data.is_none() {
            return Err(RocError::Config(format!("the {} model needs a data file", model.name())));
        }
        let mut echo = ElicitationEcho::default();
        let result = model.run(config, data, &mut echo)?;
        Ok(Report {
            schema_version: SCHEMA_VERSION,
            provenance: Provenance::new(config),
            elicitation: echo,
            result,
        })
    }
}

/// Runs `config` on `data` with the built-in models.
pub fn run(config: &AnalysisConfig, data: Option<&Dataset>) -> Result<Report> {
    ModelRegistry::default().run(config, data)
}
