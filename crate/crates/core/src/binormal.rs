//! Normal score distributions for both populations.
//!
//! Given `sigma^2`, each mean is normal about a location with variance
//! proportional to `sigma^2`, and `1/sigma^2` is gamma. The variance is either
//! shared by the populations or separate for each. Prior and posterior have the
//! same form, so one law type serves both.

use serde::{Deserialize, Serialize};

use crate::criterion::{select_cutoff, CutoffCriterion};
use crate::elicitation::NormalGammaParams;
use crate::engine::{self, CoptScale, EngineReport, JointSampler, RunOptions};
use crate::error::{Result, RocError};
use crate::mc::{gamma, normal_truncated_above, std_normal, McRng};
use crate::metrics::Cutoff;
use crate::prevalence::PrevalenceSpec;
use crate::special::norm_cdf;

/// Default number of `c_mod` bins.
pub const CMOD_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinormalParams {
    pub mu_nd: f64,
    pub mu_d: f64,
    pub sigma_nd: f64,
    pub sigma_d: f64,
}

impl BinormalParams {
    pub fn new(mu_nd: f64, mu_d: f64, sigma_nd: f64, sigma_d: f64) -> Result<Self> {
        if !(sigma_nd > 0.0 && sigma_d > 0.0) || !mu_nd.is_finite() || !mu_d.is_finite() {
            return Err(RocError::invalid("binormal means must be finite and sds positive"));
        }
        Ok(BinormalParams {
            mu_nd,
            mu_d,
            sigma_nd,
            sigma_d,
        })
    }

    /// `(fnr, fpr)` at a cutoff.
    pub fn rates(&self, c: Cutoff) -> (f64, f64) {
        match c {
            Cutoff::NegInf => (0.0, 1.0),
            Cutoff::PosInf => (1.0, 0.0),
            Cutoff::Finite(c) => (
                norm_cdf((c - self.mu_d) / self.sigma_d),
                norm_cdf((self.mu_nd - c) / self.sigma_nd),
            ),
        }
    }

    pub fn error(&self, c: Cutoff, w: f64) -> f64 {
        let (fnr, fpr) = self.rates(c);
        w * fnr + (1.0 - w) * fpr
    }
}

/// `Phi((mu_D - mu_ND) / sqrt(sigma_D^2 + sigma_ND^2))`.
pub fn auc_binormal(p: &BinormalParams) -> f64 {
    norm_cdf((p.mu_d - p.mu_nd) / p.sigma_d.hypot(p.sigma_nd))
}

/// The AUC by quadrature of `Phi((mu_D - mu_ND)/sigma_D + (sigma_ND/sigma_D) z) phi(z)`.
pub fn auc_binormal_quadrature(p: &BinormalParams) -> f64 {
    let a = (p.mu_d - p.mu_nd) / p.sigma_d;
    let b = p.sigma_nd / p.sigma_d;
    crate::special::simpson(
        |z| norm_cdf(a + b * z) * crate::special::norm_pdf(z),
        -12.0,
        12.0,
        4000,
    )
}

/// The sentinel with the smaller error, `+inf` on ties.
fn best_sentinel(w: f64) -> (Cutoff, f64) {
    if w <= 1.0 - w {
        (Cutoff::PosInf, w)
    } else {
        (Cutoff::NegInf, 1.0 - w)
    }
}

/// Cutoff minimising `w FNR + (1 - w) FPR`, with its error.
///
/// The stationary points solve `A c^2 - 2 B c + C = 0`; the local minimum is
/// `C / (B + sqrt(B^2 - A C))`. Both roots and the two sentinels are
/// compared, so the result is the global minimum.
pub fn copt_closed_form(p: &BinormalParams, w: f64) -> (Cutoff, f64) {
    if w <= 0.0 {
        return (Cutoff::PosInf, 0.0);
    }
    if w >= 1.0 {
        return (Cutoff::NegInf, 0.0);
    }
    let (vd, vnd) = (p.sigma_d * p.sigma_d, p.sigma_nd * p.sigma_nd);
    let a = 1.0 / vd - 1.0 / vnd;
    let b = p.mu_d / vd - p.mu_nd / vnd;
    let c = p.mu_d * p.mu_d / vd - p.mu_nd * p.mu_nd / vnd
        + 2.0 * ((1.0 - w) * p.sigma_d / (w * p.sigma_nd)).ln();
    let disc = b * b - a * c;
    let mut best = best_sentinel(w);
    if disc < 0.0 {
        return best;
    }
    // both stationary points, in the cancellation-free form
    let q = b + if b < 0.0 { -disc.sqrt() } else { disc.sqrt() };
    let roots = [(a != 0.0).then(|| q / a), (q != 0.0).then(|| c / q)];
    for x in roots.into_iter().flatten().filter(|x| x.is_finite()) {
        let err = p.error(Cutoff::Finite(x), w);
        if err <= best.1 {
            best = (Cutoff::Finite(x), err);
        }
    }
    best
}

/// `mu_D - mu_ND - sqrt(max(0, -2 (sigma_D^2 - sigma_ND^2) log((1-w) sigma_D / (w sigma_ND)))) >= 0`.
pub fn finite_cutoff_condition(p: &BinormalParams, w: f64) -> bool {
    let l = 2.0
        * (p.sigma_d * p.sigma_d - p.sigma_nd * p.sigma_nd)
        * ((1.0 - w) * p.sigma_d / (w * p.sigma_nd)).ln();
    p.mu_d - p.mu_nd - (-l).max(0.0).sqrt() >= 0.0
}

/// Cutoff for any criterion by search over a dense grid plus the sentinels.
pub fn copt_grid(p: &BinormalParams, w: f64, criterion: &dyn CutoffCriterion, points: usize) -> Option<Cutoff> {
    let s = p.sigma_d.max(p.sigma_nd);
    let lo = p.mu_d.min(p.mu_nd) - 8.0 * s;
    let hi = p.mu_d.max(p.mu_nd) + 8.0 * s;
    let step = (hi - lo) / (points - 1) as f64;
    let cands = (0..points).map(|i| {
        let c = lo + i as f64 * step;
        let (fnr, fpr) = p.rates(Cutoff::Finite(c));
        (c, fnr, fpr)
    });
    select_cutoff(criterion, w, cands).map(|(c, _)| c)
}

/// Sample size, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: u64,
    pub xbar: f64,
    pub s2: f64,
}

impl SufficientStats {
    pub fn new(n: u64, xbar: f64, s2: f64) -> Result<Self> {
        if !(s2 >= 0.0) || !xbar.is_finite() {
            return Err(RocError::invalid("sufficient statistics need a finite mean and s2 >= 0"));
        }
        Ok(SufficientStats { n, xbar, s2 })
    }

    pub fn from_values(x: &[f64]) -> Self {
        let n = x.len();
        if n == 0 {
            return SufficientStats { n: 0, xbar: 0.0, s2: 0.0 };
        }
        let xbar = x.iter().sum::<f64>() / n as f64;
        let s2 = x.iter().map(|v| (v - xbar).powi(2)).sum();
        SufficientStats { n: n as u64, xbar, s2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinormalData {
    pub nd: SufficientStats,
    pub d: SufficientStats,
}

impl BinormalData {
    pub fn from_samples(nd: &[f64], d: &[f64]) -> Self {
        BinormalData {
            nd: SufficientStats::from_values(nd),
            d: SufficientStats::from_values(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    #[default]
    Equal,
    Unequal,
}

/// `mu | sigma^2 ~ N(mean, scale2 sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanLaw {
    pub mean: f64,
    pub scale2: f64,
}

/// `1/sigma^2 ~ gamma(shape, rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionLaw {
    pub shape: f64,
    pub rate: f64,
}

/// Law of `(mu_ND, mu_D, sigma_ND, sigma_D)`, prior or posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variance", rename_all = "lowercase")]
pub enum BinormalLaw {
    Equal {
        precision: PrecisionLaw,
        nd: MeanLaw,
        d: MeanLaw,
    },
    Unequal {
        precision_nd: PrecisionLaw,
        nd: MeanLaw,
        precision_d: PrecisionLaw,
        d: MeanLaw,
    },
}

pub(crate) fn mean_update(prior: &NormalGammaParams, s: &SufficientStats) -> (MeanLaw, f64) {
    let k0 = 1.0 / (prior.tau0 * prior.tau0);
    let n = s.n as f64;
    let law = MeanLaw {
        mean: (n * s.xbar + prior.mu0 * k0) / (n + k0),
        scale2: 1.0 / (n + k0),
    };
    // s^2/2 plus the shrinkage term
    let rate_inc = if s.n == 0 {
        0.0
    } else {
        s.s2 / 2.0 + (n * k0 / (n + k0)) * (s.xbar - prior.mu0).powi(2) / 2.0
    };
    (law, rate_inc)
}

impl BinormalLaw {
    pub fn prior(p: &NormalGammaParams, mode: VarianceMode) -> Self {
        Self::posterior(p, &BinormalData::from_samples(&[], &[]), mode)
    }

    /// Conjugate update with both samples.
    pub fn posterior(p: &NormalGammaParams, data: &BinormalData, mode: VarianceMode) -> Self {
        let (nd, inc_nd) = mean_update(p, &data.nd);
        let (d, inc_d) = mean_update(p, &data.d);
        match mode {
            VarianceMode::Equal => BinormalLaw::Equal {
                precision: PrecisionLaw {
                    shape: p.lambda1 + (data.nd.n + data.d.n) as f64 / 2.0,
                    rate: p.lambda2 + inc_nd + inc_d,
                },
                nd,
                d,
            },
            VarianceMode::Unequal => BinormalLaw::Unequal {
                precision_nd: PrecisionLaw {
                    shape: p.lambda1 + data.nd.n as f64 / 2.0,
                    rate: p.lambda2 + inc_nd,
                },
                nd,
                precision_d: PrecisionLaw {
                    shape: p.lambda1 + data.d.n as f64 / 2.0,
                    rate: p.lambda2 + inc_d,
                },
                d,
            },
        }
    }

    pub fn mode(&self) -> VarianceMode {
        match self {
            BinormalLaw::Equal { .. } => VarianceMode::Equal,
            BinormalLaw::Unequal { .. } => VarianceMode::Unequal,
        }
    }
}

pub(crate) fn draw_sigma(rng: &mut McRng, p: &PrecisionLaw) -> f64 {
    1.0 / gamma(rng, p.shape, p.rate).sqrt()
}

pub(crate) fn draw_mean(rng: &mut McRng, m: &MeanLaw, sigma: f64) -> f64 {
    m.mean + m.scale2.sqrt() * sigma * std_normal(rng)
}

/// A parameter draw with `P(mu_ND < mu_D | mu_D, sigma)` for the shared
/// variance case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinormalDraw {
    pub params: BinormalParams,
    pub order_prob: Option<f64>,
}

/// Joint sampler; `H0` is `mu_D > mu_ND` for a shared variance and the
/// finite-cutoff condition otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinormalSampler {
    pub law: BinormalLaw,
}

impl BinormalSampler {
    pub fn new(law: BinormalLaw) -> Self {
        BinormalSampler { law }
    }

    /// Weighted draws conditioned on `H0`.
    pub fn sample_conditional(&self, n: usize, w: f64, rng: &mut McRng) -> Vec<(BinormalParams, f64)> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            if let Some((d, wt)) = self.draw_conditional(&mut (), rng, w) {
                out.push((d.params, wt));
            }
        }
        out
    }
}

fn order_prob(nd: &MeanLaw, sigma: f64, mu_d: f64) -> f64 {
    norm_cdf((mu_d - nd.mean) / (nd.scale2.sqrt() * sigma))
}

impl JointSampler for BinormalSampler {
    type Draw = BinormalDraw;
    type State = ();

    fn start(&self, _rng: &mut McRng) {}

    fn draw(&self, _state: &mut (), rng: &mut McRng) -> BinormalDraw {
        match &self.law {
            BinormalLaw::Equal { precision, nd, d } => {
                let s = draw_sigma(rng, precision);
                let mu_d = draw_mean(rng, d, s);
                let mu_nd = draw_mean(rng, nd, s);
                BinormalDraw {
                    params: BinormalParams {
                        mu_nd,
                        mu_d,
                        sigma_nd: s,
                        sigma_d: s,
                    },
                    order_prob: Some(order_prob(nd, s, mu_d)),
                }
            }
            BinormalLaw::Unequal {
                precision_nd,
                nd,
                precision_d,
                d,
            } => {
                let s_nd = draw_sigma(rng, precision_nd);
                let mu_nd = draw_mean(rng, nd, s_nd);
                let s_d = draw_sigma(rng, precision_d);
                let mu_d = draw_mean(rng, d, s_d);
                BinormalDraw {
                    params: BinormalParams {
                        mu_nd,
                        mu_d,
                        sigma_nd: s_nd,
                        sigma_d: s_d,
                    },
                    order_prob: None,
                }
            }
        }
    }

    fn auc(&self, d: &BinormalDraw) -> f64 {
        auc_binormal(&d.params)
    }

    fn h0_prob(&self, d: &BinormalDraw, w: f64) -> f64 {
        match d.order_prob {
            Some(p) => p,
            None => finite_cutoff_condition(&d.params, w) as u8 as f64,
        }
    }

    /// Shared variance: `mu_ND` from its law truncated to `(-inf, mu_D]`,
    /// weighted by the probability of that event. Otherwise rejection.
    fn draw_conditional(&self, state: &mut (), rng: &mut McRng, w: f64) -> Option<(BinormalDraw, f64)> {
        match &self.law {
            BinormalLaw::Equal { precision, nd, d } => {
                let s = draw_sigma(rng, precision);
                let mu_d = draw_mean(rng, d, s);
                let weight = order_prob(nd, s, mu_d);
                let mu_nd = normal_truncated_above(rng, nd.mean, nd.scale2.sqrt() * s, mu_d);
                let params = BinormalParams {
                    mu_nd,
                    mu_d,
                    sigma_nd: s,
                    sigma_d: s,
                };
                (weight > 0.0).then_some((
                    BinormalDraw {
                        params,
                        order_prob: Some(1.0),
                    },
                    weight,
                ))
            }
            BinormalLaw::Unequal { .. } => {
                let d = self.draw(state, rng);
                finite_cutoff_condition(&d.params, w).then_some((d, 1.0))
            }
        }
    }

    fn copt(&self, d: &BinormalDraw, w: f64, criterion: &dyn CutoffCriterion) -> Option<Cutoff> {
        let name = criterion.name();
        if name == "error" {
            Some(copt_closed_form(&d.params, w).0)
        } else if let Some(w0) = name.strip_prefix("weighted:").and_then(|s| s.parse::<f64>().ok()) {
            Some(copt_closed_form(&d.params, w0).0)
        } else {
            copt_grid(&d.params, w, criterion, 4001)
        }
    }

    fn rates(&self, d: &BinormalDraw, c: Cutoff) -> (f64, f64) {
        d.params.rates(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinormalOptions {
    pub variance: VarianceMode,
    pub copt_bins: usize,
}

impl Default for BinormalOptions {
    fn default() -> Self {
        BinormalOptions {
            variance: VarianceMode::Equal,
            copt_bins: CMOD_BINS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinormalReport {
    pub model: &'static str,
    pub prior: NormalGammaParams,
    pub data: BinormalData,
    pub prior_law: BinormalLaw,
    pub posterior_law: BinormalLaw,
    pub prevalence_spec: PrevalenceSpec,
    #[serde(flatten)]
    pub engine: EngineReport,
}

pub fn infer_binormal(
    prior: &NormalGammaParams,
    data: &BinormalData,
    prevalence: &PrevalenceSpec,
    model: &BinormalOptions,
    options: &RunOptions,
) -> Result<BinormalReport> {
    if data.nd.n == 0 || data.d.n == 0 {
        return Err(RocError::invalid("both groups need at least one observation").in_module("binormal_model"));
    }
    let prior_law = BinormalLaw::prior(prior, model.variance);
    let posterior_law = BinormalLaw::posterior(prior, data, model.variance);
    let mut settings = options.settings(CoptScale::Cmod { bins: model.copt_bins })?;
    match model.variance {
        VarianceMode::Equal => {
            settings.prior_h0_exact = Some(0.5);
            settings.h0_label = "mu_D > mu_ND".into();
        }
        VarianceMode::Unequal => settings.h0_label = "finite optimal cutoff exists".into(),
    }
    let engine = engine::analyze(
        &BinormalSampler::new(prior_law),
        &BinormalSampler::new(posterior_law),
        prevalence,
        data.d.n,
        data.nd.n,
        &settings,
    )
    .map_err(|e| e.in_module("binormal_model"))?;
    Ok(BinormalReport {
        model: "binormal",
        prior: *prior,
        data: *data,
        prior_law,
        posterior_law,
        prevalence_spec: *prevalence,
        engine,
    })
}
