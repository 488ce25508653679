//! Prevalence priors, the two sampling regimes and inference for `w`.
//!
//! Under regime (i) the diseased and nondiseased samples are drawn separately,
//! so the data say nothing about `w` and its posterior is the prior. Under
//! regime (ii) one sample is drawn from the whole population and the beta
//! prior is updated with the observed counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::elicitation::{BetaParams, PrevalencePrior};
use crate::error::{Result, RocError};
use crate::mc;
use crate::rb::{relative_belief, DensityHistogram, EstimateSummary, Grid, RelativeBeliefResult};

/// Default number of bins for exact prevalence curves.
pub const PREVALENCE_BINS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Separate samples from each population.
    I,
    /// One sample from the whole population.
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceSpec {
    pub prior: PrevalencePrior,
    pub regime: Regime,
}

impl PrevalenceSpec {
    pub fn known(w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(RocError::invalid(format!("prevalence {w} outside [0, 1]")));
        }
        Ok(PrevalenceSpec {
            prior: PrevalencePrior::Known { w },
            regime: Regime::I,
        })
    }

    pub fn beta(params: BetaParams, regime: Regime) -> Self {
        PrevalenceSpec {
            prior: PrevalencePrior::Beta(params),
            regime,
        }
    }

    /// Law of `w` after seeing `n_d` diseased and `n_nd` nondiseased subjects.
    pub fn posterior(&self, n_d: u64, n_nd: u64) -> PrevalencePrior {
        match (self.prior, self.regime) {
            (PrevalencePrior::Beta(b), Regime::II) => PrevalencePrior::Beta(b.update(n_d, n_nd)),
            (p, _) => p,
        }
    }
}

/// One draw of `w`; a known prevalence consumes no randomness.
pub fn draw<R: Rng + ?Sized>(law: &PrevalencePrior, rng: &mut R) -> f64 {
    match law {
        PrevalencePrior::Known { w } => *w,
        PrevalencePrior::Beta(b) => mc::beta(rng, b.alpha1, b.alpha2),
    }
}

/// Relative belief inference for `w` under regime (ii).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrevalenceInference {
    pub prior: BetaParams,
    pub posterior: BetaParams,
    pub n_d: u64,
    pub n_nd: u64,
    pub summary: EstimateSummary,
    #[serde(skip)]
    pub curve: RelativeBeliefResult,
}

/// Exact-cdf relative belief inference for the prevalence on `grid`.
pub fn infer_prevalence(prior: BetaParams, n_d: u64, n_nd: u64, grid: Grid) -> Result<PrevalenceInference> {
    if n_d + n_nd == 0 {
        return Err(RocError::invalid("prevalence inference needs at least one subject"));
    }
    let posterior = prior.update(n_d, n_nd);
    let prior_hist = DensityHistogram::from_cdf(grid, |x| prior.cdf(x))?;
    let post_hist = DensityHistogram::from_cdf(grid, |x| posterior.cdf(x))?;
    let curve = relative_belief(&prior_hist, &post_hist)?;
    Ok(PrevalenceInference {
        prior,
        posterior,
        n_d,
        n_nd,
        summary: curve.summary(),
        curve,
    })
}

/// Regime (ii) inference when the spec calls for it, otherwise `None`.
pub fn infer_for_spec(spec: &PrevalenceSpec, n_d: u64, n_nd: u64, grid: Grid) -> Result<Option<PrevalenceInference>> {
    match (spec.prior, spec.regime) {
        (PrevalencePrior::Beta(b), Regime::II) => infer_prevalence(b, n_d, n_nd, grid).map(Some),
        _ => Ok(None),
    }
}
