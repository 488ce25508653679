//! Flat key/value analysis configuration, read from TOML.
//!
//! Every key can also be set from the command line as `key=value`; values
//! are parsed as TOML scalars or arrays and fall back to plain strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binormal::{BinormalOptions, VarianceMode};
use crate::discrete::{DirichletParams, DiscretePrior, Shape};
use crate::dp::{DpModelSpec, DpOptions, DEFAULT_TRUNCATION};
use crate::elicitation::{
    elicit_beta, elicit_dp_concentration, elicit_normal_gamma, BetaElicitation, BetaParams, DpConcentration,
    NormalGammaElicitation, NormalGammaParams, PrevalencePrior,
};
use crate::engine::{CoptScale, RunOptions};
use crate::error::{Result, RocError};
use crate::prevalence::{PrevalenceSpec, Regime, PREVALENCE_BINS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Registered model name: prevalence, discrete, binormal or dp.
    pub model: String,

    pub seed: u64,
    pub draws: usize,
    pub batch_size: usize,
    pub auc_bins: usize,
    pub error_bins: usize,
    pub prevalence_bins: usize,
    pub criterion: String,
    pub conditional: bool,
    pub acceptance_floor: f64,
    pub ess_floor: f64,

    /// Known prevalence.
    pub w: Option<f64>,
    /// Explicit beta prior on the prevalence.
    pub w_alpha: Option<f64>,
    pub w_beta: Option<f64>,
    /// Beta prior elicited from `w_lo <= w <= w_hi` with probability `w_gamma`.
    pub w_lo: Option<f64>,
    pub w_hi: Option<f64>,
    pub w_gamma: Option<f64>,
    pub w_mode: Option<f64>,
    pub regime: Regime,
    /// Diseased and nondiseased counts for prevalence-only runs without data.
    pub n_d: Option<u64>,
    pub n_nd: Option<u64>,

    pub alpha_nd: Option<Vec<f64>>,
    pub alpha_d: Option<Vec<f64>>,
    pub shape_nd: Shape,
    pub shape_d: Shape,

    /// Explicit normal-gamma prior.
    pub mu0: Option<f64>,
    pub tau0: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    /// Normal-gamma prior elicited from bounds on the means and deviations.
    pub mean_lo: Option<f64>,
    pub mean_hi: Option<f64>,
    pub sd_lo: Option<f64>,
    pub sd_hi: Option<f64>,
    pub elicit_gamma: f64,

    pub variance: VarianceMode,
    pub copt_bins: usize,

    /// DP concentration, or the `(epsilon, bound)` pair it is elicited from.
    pub concentration: Option<f64>,
    pub dp_epsilon: Option<f64>,
    pub dp_bound: Option<f64>,
    pub n_trunc_prior: usize,
    pub n_trunc_post: usize,
    pub smoothing_window: usize,
    pub jitter: bool,
    /// `cmod` or `raw`; the raw scale uses `copt_lo`, `copt_hi` and `copt_bins`.
    pub copt_scale: String,
    pub copt_lo: Option<f64>,
    pub copt_hi: Option<f64>,

    /// Restricts raw data to rows with this stratum label.
    pub stratum: Option<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let run = RunOptions::default();
        let dp = DpOptions::default();
        AnalysisConfig {
            model: String::new(),
            seed: run.seed,
            draws: run.draws,
            batch_size: run.batch_size,
            auc_bins: run.auc_bins,
            error_bins: run.error_bins,
            prevalence_bins: PREVALENCE_BINS,
            criterion: run.criterion,
            conditional: run.conditional,
            acceptance_floor: run.acceptance_floor,
            ess_floor: run.ess_floor,
            w: None,
            w_alpha: None,
            w_beta: None,
            w_lo: None,
            w_hi: None,
            w_gamma: None,
            w_mode: None,
            regime: Regime::I,
            n_d: None,
            n_nd: None,
            alpha_nd: None,
            alpha_d: None,
            shape_nd: Shape::Free,
            shape_d: Shape::Free,
            mu0: None,
            tau0: None,
            lambda1: None,
            lambda2: None,
            mean_lo: None,
            mean_hi: None,
            sd_lo: None,
            sd_hi: None,
            elicit_gamma: 0.99,
            variance: VarianceMode::Equal,
            copt_bins: BinormalOptions::default().copt_bins,
            concentration: None,
            dp_epsilon: None,
            dp_bound: None,
            n_trunc_prior: DEFAULT_TRUNCATION,
            n_trunc_post: DEFAULT_TRUNCATION,
            smoothing_window: dp.smoothing_window,
            jitter: dp.jitter,
            copt_scale: "cmod".into(),
            copt_lo: None,
            copt_hi: None,
            stratum: None,
        }
    }
}

/// Hyperparameters produced by elicitation, echoed in reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ElicitationEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prevalence: Option<BetaElicitation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_gamma: Option<NormalGammaElicitation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concentration: Option<DpConcentration>,
}

fn both<T: Copy>(a: Option<T>, b: Option<T>, what: &str) -> Result<Option<(T, T)>> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(RocError::Config(format!("{what} must be given together"))),
    }
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| RocError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RocError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| RocError::Config(e.to_string()))
    }

    /// Overrides one key; `value` is parsed as a TOML value when possible.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table = toml::Table::try_from(&*self).map_err(|e| RocError::Config(e.to_string()))?;
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        table.insert(key.to_string(), parsed);
        *self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| RocError::Config(format!("{key}: {e}")))?;
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| RocError::Config(format!("expected key=value, got {assignment:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            draws: self.draws,
            batch_size: self.batch_size,
            auc_bins: self.auc_bins,
            error_bins: self.error_bins,
            criterion: self.criterion.clone(),
            conditional: self.conditional,
            acceptance_floor: self.acceptance_floor,
            ess_floor: self.ess_floor,
        }
    }

    /// Prevalence prior and sampling regime.
    pub fn prevalence(&self, echo: &mut ElicitationEcho) -> Result<PrevalenceSpec> {
        let explicit = both(self.w_alpha, self.w_beta, "w_alpha and w_beta")?;
        let interval = both(self.w_lo, self.w_hi, "w_lo and w_hi")?;
        let given = self.w.is_some() as u8 + explicit.is_some() as u8 + interval.is_some() as u8;
        if given != 1 {
            return Err(RocError::Config(
                "give exactly one prevalence prior: w, (w_alpha, w_beta) or (w_lo, w_hi)".into(),
            ));
        }
        if let Some(w) = self.w {
            if self.regime == Regime::II {
                return Err(RocError::Config("a known prevalence cannot be combined with regime ii".into()));
            }
            return PrevalenceSpec::known(w).map_err(|e| RocError::Config(e.to_string()));
        }
        let params = if let Some((a, b)) = explicit {
            BetaParams::new(a, b).map_err(|e| RocError::Config(e.to_string()))?
        } else {
            let (l, u) = interval.unwrap();
            let gamma = self.w_gamma.unwrap_or(0.99);
            let e = elicit_beta(l, u, gamma, self.w_mode)?;
            echo.prevalence = Some(e);
            match e.prior {
                PrevalencePrior::Beta(b) => b,
                PrevalencePrior::Known { w } => {
                    if self.regime == Regime::II {
                        return Err(RocError::Config("a known prevalence cannot be combined with regime ii".into()));
                    }
                    return PrevalenceSpec::known(w);
                }
            }
        };
        Ok(PrevalenceSpec::beta(params, self.regime))
    }

    pub fn normal_gamma(&self, echo: &mut ElicitationEcho) -> Result<NormalGammaParams> {
        let explicit = [self.mu0, self.tau0, self.lambda1, self.lambda2];
        let bounds = [self.mean_lo, self.mean_hi, self.sd_lo, self.sd_hi];
        let full = |v: &[Option<f64>]| v.iter().all(Option::is_some);
        let none = |v: &[Option<f64>]| v.iter().all(Option::is_none);
        match (full(&explicit), none(&explicit), full(&bounds), none(&bounds)) {
            (true, _, _, true) => NormalGammaParams::new(
                explicit[0].unwrap(),
                explicit[1].unwrap(),
                explicit[2].unwrap(),
                explicit[3].unwrap(),
            )
            .map_err(|e| RocError::Config(e.to_string())),
            (_, true, true, _) => {
                let e = elicit_normal_gamma(
                    bounds[0].unwrap(),
                    bounds[1].unwrap(),
                    bounds[2].unwrap(),
                    bounds[3].unwrap(),
                    self.elicit_gamma,
                )?;
                echo.normal_gamma = Some(e);
                Ok(e.params)
            }
            _ => Err(RocError::Config(
                "give either all of mu0, tau0, lambda1, lambda2 or all of mean_lo, mean_hi, sd_lo, sd_hi".into(),
            )),
        }
    }

    pub fn discrete_prior(&self, m: usize) -> Result<DiscretePrior> {
        let law = |alpha: &Option<Vec<f64>>, name: &str| match alpha {
            Some(a) if a.len() != m => Err(RocError::Config(format!("{name} has {} entries, data have {m} levels", a.len()))),
            Some(a) => DirichletParams::new(a.clone()).map_err(|e| RocError::Config(e.to_string())),
            None => DirichletParams::uniform(m),
        };
        Ok(DiscretePrior {
            nd: law(&self.alpha_nd, "alpha_nd")?,
            d: law(&self.alpha_d, "alpha_d")?,
            shape_nd: self.shape_nd,
            shape_d: self.shape_d,
        })
    }

    pub fn binormal_options(&self) -> BinormalOptions {
        BinormalOptions {
            variance: self.variance,
            copt_bins: self.copt_bins,
        }
    }

    pub fn dp_spec(&self, echo: &mut ElicitationEcho) -> Result<DpModelSpec> {
        let a = match (self.concentration, both(self.dp_epsilon, self.dp_bound, "dp_epsilon and dp_bound")?) {
            (Some(a), None) => a,
            (None, Some((eps, bound))) => {
                let c = elicit_dp_concentration(eps, bound)?;
                echo.concentration = Some(c);
                c.a
            }
            _ => return Err(RocError::Config("give either concentration or (dp_epsilon, dp_bound)".into())),
        };
        let spec = DpModelSpec {
            a,
            base_prior: self.normal_gamma(echo)?,
            n_trunc_prior: self.n_trunc_prior,
            n_trunc_post: self.n_trunc_post,
        };
        spec.validate().map_err(|e| RocError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn dp_options(&self) -> Result<DpOptions> {
        let copt_scale = match self.copt_scale.as_str() {
            "cmod" => CoptScale::Cmod { bins: self.copt_bins },
            "raw" => match (self.copt_lo, self.copt_hi) {
                (Some(lo), Some(hi)) if lo < hi => CoptScale::Raw {
                    lo,
                    hi,
                    bins: self.copt_bins,
                },
                _ => return Err(RocError::Config("the raw cutoff scale needs copt_lo < copt_hi".into())),
            },
            other => return Err(RocError::Config(format!("unknown copt_scale {other:?}, expected cmod or raw"))),
        };
        Ok(DpOptions {
            smoothing_window: self.smoothing_window.max(1),
            jitter: self.jitter,
            copt_scale,
        })
    }
}
