//! Versioned JSON reports and CSV curve sidecars.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::binormal::BinormalReport;
use crate::config::{AnalysisConfig, ElicitationEcho};
use crate::discrete::DiscreteReport;
use crate::dp::DpReport;
use crate::error::Result;
use crate::prevalence::{PrevalenceInference, PrevalenceSpec};
use crate::rb::{rb_csv_string, RelativeBeliefResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrevalenceReport {
    pub model: &'static str,
    pub prevalence_spec: PrevalenceSpec,
    pub prevalence: PrevalenceInference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnalysisOutput {
    Prevalence(PrevalenceReport),
    Discrete(DiscreteReport),
    Binormal(BinormalReport),
    Dp(DpReport),
}

impl AnalysisOutput {
    /// Named relative belief curves for the CSV sidecars.
    pub fn curves(&self) -> Vec<(String, &RelativeBeliefResult)> {
        match self {
            AnalysisOutput::Prevalence(p) => vec![("prevalence".into(), &p.prevalence.curve)],
            AnalysisOutput::Discrete(r) => r.engine.curves(),
            AnalysisOutput::Binormal(r) => r.engine.curves(),
            AnalysisOutput::Dp(r) => r.engine.curves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub batch_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    pub config: AnalysisConfig,
}

impl Provenance {
    pub fn new(config: &AnalysisConfig) -> Self {
        Provenance {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed,
            batch_size: config.batch_size,
            threads: None,
            data: None,
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub elicitation: ElicitationEcho,
    pub result: AnalysisOutput,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn curves(&self) -> Vec<(String, &RelativeBeliefResult)> {
        self.result.curves()
    }

    /// Writes `report.json` and `curves/<name>.csv` under `dir`, returning the paths.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let curve_dir = dir.join("curves");
        std::fs::create_dir_all(&curve_dir)?;
        let json = dir.join("report.json");
        std::fs::write(&json, self.to_json()? + "\n")?;
        let mut written = vec![json];
        for (name, curve) in self.curves() {
            let path = curve_dir.join(format!("{name}.csv"));
            std::fs::write(&path, rb_csv_string(curve)?)?;
            written.push(path);
        }
        Ok(written)
    }
}
