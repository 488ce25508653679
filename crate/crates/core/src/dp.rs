//! Mixture Dirichlet process priors for nonparametric ROC analysis.
//!
//! Each population's distribution is `DP(a, N(mu, sigma^2))` with a
//! normal-gamma prior on `(mu, sigma^2)`. Processes are approximated by
//! finite Dirichlet-weighted atom sets. Given data, the process is
//! `DP(a + n, H)` with `H` mixing the normal and the empirical cdf, and the
//! base parameters are updated from the distinct data values.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binormal::{draw_mean, draw_sigma, mean_update, MeanLaw, PrecisionLaw, SufficientStats};
use crate::criterion::{select_cutoff, CutoffCriterion};
use crate::elicitation::NormalGammaParams;
use crate::engine::{self, CoptScale, EngineReport, JointSampler, RunOptions};
use crate::error::{Result, RocError};
use crate::mc::{symmetric_dirichlet_into, BatchRng, McRng, Stream};
use crate::metrics::Cutoff;
use crate::prevalence::PrevalenceSpec;

/// Default truncation for prior and posterior processes.
pub const DEFAULT_TRUNCATION: usize = 500;
pub const MIN_TRUNCATION: usize = 50;

/// A discrete distribution on sorted atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedProcess {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    cum: Vec<f64>,
}

impl TruncatedProcess {
    /// Builds a process from unsorted atoms and weights.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(RocError::invalid("a process needs matching, nonempty atoms and weights"));
        }
        if atoms.iter().any(|a| !a.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(RocError::invalid("atoms must be finite and weights nonnegative"));
        }
        Ok(Self::from_pairs(atoms.into_iter().zip(weights).collect()))
    }

    fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        let mut atoms = Vec::with_capacity(pairs.len());
        let mut weights = Vec::with_capacity(pairs.len());
        let mut cum = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            let w = w / total;
            acc += w;
            atoms.push(a);
            weights.push(w);
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        TruncatedProcess { atoms, weights, cum }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cdf(&self, c: f64) -> f64 {
        match self.atoms.partition_point(|&a| a <= c) {
            0 => 0.0,
            k => self.cum[k - 1],
        }
    }
}

/// `sum_i (1 - F_D(c_ND,i)) p_ND,i`, by a merge over the sorted atoms.
pub fn process_auc(nd: &TruncatedProcess, d: &TruncatedProcess) -> f64 {
    let mut j = 0;
    let mut auc = 0.0;
    for (&c, &p) in nd.atoms.iter().zip(&nd.weights) {
        while j < d.atoms.len() && d.atoms[j] <= c {
            j += 1;
        }
        let f_d = if j == 0 { 0.0 } else { d.cum[j - 1] };
        auc += (1.0 - f_d) * p;
    }
    auc
}

/// Count, mean and sum of squared deviations of the distinct values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniqueValueStats {
    pub n_unique: u64,
    pub mean: f64,
    pub s2: f64,
}

impl UniqueValueStats {
    /// Distinct values are found by exact equality.
    pub fn from_data(x: &[f64]) -> Self {
        let mut v = x.to_vec();
        v.sort_unstable_by(f64::total_cmp);
        v.dedup();
        let s = SufficientStats::from_values(&v);
        UniqueValueStats {
            n_unique: s.n,
            mean: s.xbar,
            s2: s.s2,
        }
    }

    fn as_sufficient(&self) -> SufficientStats {
        SufficientStats {
            n: self.n_unique,
            xbar: self.mean,
            s2: self.s2,
        }
    }
}

/// Concentration, base prior and truncation sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpModelSpec {
    pub a: f64,
    pub base_prior: NormalGammaParams,
    pub n_trunc_prior: usize,
    pub n_trunc_post: usize,
}

impl DpModelSpec {
    pub fn new(a: f64, base_prior: NormalGammaParams) -> Result<Self> {
        let s = DpModelSpec {
            a,
            base_prior,
            n_trunc_prior: DEFAULT_TRUNCATION,
            n_trunc_post: DEFAULT_TRUNCATION,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(RocError::invalid(format!("concentration {} must be positive", self.a)));
        }
        if self.n_trunc_prior < MIN_TRUNCATION || self.n_trunc_post < MIN_TRUNCATION {
            return Err(RocError::invalid(format!("truncation sizes must be at least {MIN_TRUNCATION}")));
        }
        Ok(())
    }
}

/// Law of one population's truncated process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessLaw {
    concentration: f64,
    n_trunc: usize,
    mean: MeanLaw,
    precision: PrecisionLaw,
    /// Data for the empirical part of the base, with its mixing probability.
    data: Option<Arc<Vec<f64>>>,
    p_base: f64,
}

impl ProcessLaw {
    pub fn prior(spec: &DpModelSpec) -> Self {
        let p = &spec.base_prior;
        ProcessLaw {
            concentration: spec.a,
            n_trunc: spec.n_trunc_prior,
            mean: MeanLaw {
                mean: p.mu0,
                scale2: p.tau0 * p.tau0,
            },
            precision: PrecisionLaw {
                shape: p.lambda1,
                rate: p.lambda2,
            },
            data: None,
            p_base: 1.0,
        }
    }

    /// The prior when `data` is empty.
    pub fn posterior(spec: &DpModelSpec, data: &[f64]) -> Self {
        if data.is_empty() {
            return Self::prior(spec);
        }
        let p = &spec.base_prior;
        let u = UniqueValueStats::from_data(data);
        let (mean, rate_inc) = mean_update(p, &u.as_sufficient());
        let n = data.len() as f64;
        ProcessLaw {
            concentration: spec.a + n,
            n_trunc: spec.n_trunc_post,
            mean,
            precision: PrecisionLaw {
                shape: p.lambda1 + u.n_unique as f64 / 2.0,
                rate: p.lambda2 + rate_inc,
            },
            data: Some(Arc::new(data.to_vec())),
            p_base: spec.a / (spec.a + n),
        }
    }

    /// Probability that an atom comes from the empirical cdf.
    pub fn ecdf_fraction(&self) -> f64 {
        1.0 - self.p_base
    }

    /// One process with its base parameters `(mu, sigma)`.
    pub fn sample_with_base(&self, rng: &mut McRng) -> (TruncatedProcess, f64, f64) {
        let sigma = draw_sigma(rng, &self.precision);
        let mu = draw_mean(rng, &self.mean, sigma);
        let mut weights = vec![0.0; self.n_trunc];
        symmetric_dirichlet_into(rng, self.concentration / self.n_trunc as f64, &mut weights);
        let pairs = weights
            .into_iter()
            .map(|w| {
                let atom = match &self.data {
                    Some(x) if rng.gen::<f64>() >= self.p_base => x[rng.gen_range(0..x.len())],
                    _ => mu + sigma * crate::mc::std_normal(rng),
                };
                (atom, w)
            })
            .collect();
        (TruncatedProcess::from_pairs(pairs), mu, sigma)
    }

    pub fn sample(&self, rng: &mut McRng) -> TruncatedProcess {
        self.sample_with_base(rng).0
    }
}

/// One prior process.
pub fn sample_prior_process(spec: &DpModelSpec, rng: &mut McRng) -> TruncatedProcess {
    ProcessLaw::prior(spec).sample(rng)
}

/// One posterior process given a sample.
pub fn sample_posterior_process(spec: &DpModelSpec, data: &[f64], rng: &mut McRng) -> TruncatedProcess {
    ProcessLaw::posterior(spec, data).sample(rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessPair {
    pub nd: TruncatedProcess,
    pub d: TruncatedProcess,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSampler {
    pub nd: ProcessLaw,
    pub d: ProcessLaw,
}

impl JointSampler for DpSampler {
    type Draw = ProcessPair;
    type State = ();

    fn start(&self, _rng: &mut McRng) {}

    fn draw(&self, _state: &mut (), rng: &mut McRng) -> ProcessPair {
        ProcessPair {
            nd: self.nd.sample(rng),
            d: self.d.sample(rng),
        }
    }

    fn auc(&self, p: &ProcessPair) -> f64 {
        process_auc(&p.nd, &p.d)
    }

    fn h0_prob(&self, p: &ProcessPair, _w: f64) -> f64 {
        (self.auc(p) > 0.5) as u8 as f64
    }

    /// Exact minimisation over the union of atoms, where the rates change.
    fn copt(&self, p: &ProcessPair, w: f64, criterion: &dyn CutoffCriterion) -> Option<Cutoff> {
        let (a, b) = (&p.nd, &p.d);
        let (mut i, mut j) = (0, 0);
        let mut cands = Vec::with_capacity(a.atoms.len() + b.atoms.len());
        while i < a.atoms.len() || j < b.atoms.len() {
            let c = match (a.atoms.get(i), b.atoms.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => unreachable!(),
            };
            while i < a.atoms.len() && a.atoms[i] <= c {
                i += 1;
            }
            while j < b.atoms.len() && b.atoms[j] <= c {
                j += 1;
            }
            let f_nd = if i == 0 { 0.0 } else { a.cum[i - 1] };
            let f_d = if j == 0 { 0.0 } else { b.cum[j - 1] };
            cands.push((c, f_d, 1.0 - f_nd));
        }
        select_cutoff(criterion, w, cands).map(|(c, _)| c)
    }

    fn rates(&self, p: &ProcessPair, c: Cutoff) -> (f64, f64) {
        match c {
            Cutoff::NegInf => (0.0, 1.0),
            Cutoff::PosInf => (1.0, 0.0),
            Cutoff::Finite(x) => (p.d.cdf(x), 1.0 - p.nd.cdf(x)),
        }
    }
}

/// Model-specific options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpOptions {
    /// Moving-average window for cutoff histograms; 1 disables smoothing.
    pub smoothing_window: usize,
    /// Add uniform(0, 1) noise to every observation before the analysis.
    pub jitter: bool,
    pub copt_scale: CoptScale,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            smoothing_window: 3,
            jitter: false,
            copt_scale: CoptScale::Cmod { bins: 100 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationSummary {
    pub n: usize,
    pub unique: UniqueValueStats,
    pub ecdf_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JitterRecord {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpReport {
    pub model: &'static str,
    pub spec: DpModelSpec,
    pub options: DpOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterRecord>,
    pub nd: PopulationSummary,
    pub d: PopulationSummary,
    pub prevalence_spec: PrevalenceSpec,
    #[serde(flatten)]
    pub engine: EngineReport,
}

/// Adds uniform(0, 1) noise drawn from the jitter stream of `seed`.
pub fn jitter(data_nd: &[f64], data_d: &[f64], seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = BatchRng::new(seed, Stream::Jitter as u64, 0).model;
    let nd = data_nd.iter().map(|x| x + rng.gen::<f64>()).collect();
    let d = data_d.iter().map(|x| x + rng.gen::<f64>()).collect();
    (nd, d)
}

pub fn infer_dp(
    spec: &DpModelSpec,
    data_nd: &[f64],
    data_d: &[f64],
    prevalence: &PrevalenceSpec,
    model: &DpOptions,
    options: &RunOptions,
) -> Result<DpReport> {
    spec.validate()?;
    if data_nd.is_empty() || data_d.is_empty() {
        return Err(RocError::invalid("both groups need at least one observation").in_module("dp_model"));
    }
    if matches!(model.copt_scale, CoptScale::Categories { .. }) {
        return Err(RocError::Config("the DP model needs a continuous cutoff scale".into()));
    }
    let (nd, d, jitter_record) = if model.jitter {
        let (a, b) = jitter(data_nd, data_d, options.seed);
        (
            a,
            b,
            Some(JitterRecord {
                seed: options.seed,
                stream: Stream::Jitter as u64,
            }),
        )
    } else {
        (data_nd.to_vec(), data_d.to_vec(), None)
    };
    let prior = DpSampler {
        nd: ProcessLaw::prior(spec),
        d: ProcessLaw::prior(spec),
    };
    let post = DpSampler {
        nd: ProcessLaw::posterior(spec, &nd),
        d: ProcessLaw::posterior(spec, &d),
    };
    let mut settings = options.settings(model.copt_scale.clone())?;
    settings.smoothing_window = (model.smoothing_window > 1).then_some(model.smoothing_window);
    // both populations share one prior, so AUC > 1/2 has prior probability 1/2
    settings.prior_h0_exact = Some(0.5);
    let engine = engine::analyze(&prior, &post, prevalence, d.len() as u64, nd.len() as u64, &settings)
        .map_err(|e| e.in_module("dp_model"))?;
    let summary = |x: &[f64], law: &ProcessLaw| PopulationSummary {
        n: x.len(),
        unique: UniqueValueStats::from_data(x),
        ecdf_fraction: law.ecdf_fraction(),
    };
    Ok(DpReport {
        model: "dp",
        spec: *spec,
        options: model.clone(),
        jitter: jitter_record,
        nd: summary(&nd, &post.nd),
        d: summary(&d, &post.d),
        prevalence_spec: *prevalence,
        engine,
    })
}
