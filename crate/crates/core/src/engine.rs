//! The inference skeleton shared by the discrete, binormal and DP models.
//!
//! A model supplies a [`JointSampler`] for its prior and one for its posterior.
//! The engine runs the Monte Carlo passes, optionally conditioned on the
//! model's hypothesis `H0`, and turns the histograms into relative belief
//! inferences for the AUC, the optimal cutoff and the five error
//! characteristics at the estimated cutoff.

use serde::{Deserialize, Serialize};

use crate::criterion::CutoffCriterion;
use crate::elicitation::PrevalencePrior;
use crate::error::{Result, RocError};
use crate::mc::{map_batches, McPlan, McRng, Stream, DEFAULT_BATCH_SIZE};
use crate::metrics::{fdr, fndr, Cutoff};
use crate::prevalence::{self, PrevalenceInference, PrevalenceSpec};
use crate::rb::{
    moving_average_smooth, relative_belief, DensityHistogram, EstimateSummary, Grid, HistogramAccumulator,
    HypothesisAssessment, RelativeBeliefResult,
};

/// One population pair's parameter law, prior or posterior.
pub trait JointSampler: Sync {
    type Draw: Send;
    /// Per-batch sampler state, such as a Markov chain position.
    type State;

    fn start(&self, rng: &mut McRng) -> Self::State;

    /// An unconditional draw of the model parameters.
    fn draw(&self, state: &mut Self::State, rng: &mut McRng) -> Self::Draw;

    fn auc(&self, d: &Self::Draw) -> f64;

    /// Probability of `H0` given the draw and prevalence: an indicator, or a
    /// conditional probability when the model can integrate part of it out.
    fn h0_prob(&self, d: &Self::Draw, w: f64) -> f64;

    /// A draw from the law conditioned on `H0`, with its importance weight, or
    /// `None` when rejected. The default is rejection on [`Self::h0_prob`].
    fn draw_conditional(&self, state: &mut Self::State, rng: &mut McRng, w: f64) -> Option<(Self::Draw, f64)> {
        let d = self.draw(state, rng);
        (self.h0_prob(&d, w) >= 1.0).then_some((d, 1.0))
    }

    /// Cutoff chosen by `criterion` for this draw; `None` if undefined.
    fn copt(&self, d: &Self::Draw, w: f64, criterion: &dyn CutoffCriterion) -> Option<Cutoff>;

    /// `(fnr, fpr)` at a cutoff.
    fn rates(&self, d: &Self::Draw, c: Cutoff) -> (f64, f64);
}

/// Coordinates on which cutoff draws are histogrammed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoptScale {
    /// Ordered categories `c_1, ..., c_m, +inf`, one bin each.
    Categories { points: Vec<f64> },
    /// `0.5 + atan(c)/pi` on `(0, 1]`.
    Cmod { bins: usize },
    /// Raw cutoff values on `(lo, hi]`; sentinels clamp to the end bins.
    Raw { lo: f64, hi: f64, bins: usize },
}

pub fn c_mod(c: f64) -> f64 {
    0.5 + c.atan() / std::f64::consts::PI
}

pub fn c_mod_inverse(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x >= 1.0 {
        f64::INFINITY
    } else {
        (std::f64::consts::PI * (x - 0.5)).tan()
    }
}

impl CoptScale {
    pub fn grid(&self) -> Result<Grid> {
        match self {
            CoptScale::Categories { points } => Grid::categories(points.len() + 1),
            CoptScale::Cmod { bins } => Grid::unit(*bins),
            CoptScale::Raw { lo, hi, bins } => Grid::new(*lo, *hi, *bins),
        }
    }

    pub fn coordinate(&self, c: Cutoff) -> f64 {
        match (self, c) {
            (CoptScale::Categories { .. }, Cutoff::NegInf) => 0.0,
            (CoptScale::Categories { points }, Cutoff::PosInf) => points.len() as f64 + 1.0,
            (CoptScale::Categories { points }, Cutoff::Finite(x)) => {
                // exact match is expected; fall back to the nearest point at or below
                points.partition_point(|&p| p <= x).max(1) as f64
            }
            (CoptScale::Cmod { .. }, c) => match c {
                Cutoff::NegInf => 0.0,
                Cutoff::PosInf => 1.0,
                Cutoff::Finite(x) => c_mod(x),
            },
            (CoptScale::Raw { lo, hi, .. }, c) => match c {
                Cutoff::NegInf => *lo,
                Cutoff::PosInf => *hi,
                Cutoff::Finite(x) => x,
            },
        }
    }

    /// The cutoff a grid coordinate stands for.
    pub fn cutoff_at(&self, x: f64) -> Cutoff {
        match self {
            CoptScale::Categories { points } => {
                let k = x.round().max(0.0) as usize;
                if k == 0 {
                    Cutoff::NegInf
                } else if k > points.len() {
                    Cutoff::PosInf
                } else {
                    Cutoff::Finite(points[k - 1])
                }
            }
            CoptScale::Cmod { .. } => {
                let v = c_mod_inverse(x);
                if v.is_finite() {
                    Cutoff::Finite(v)
                } else if v > 0.0 {
                    Cutoff::PosInf
                } else {
                    Cutoff::NegInf
                }
            }
            CoptScale::Raw { .. } => Cutoff::Finite(x),
        }
    }

    fn map_value(&self, x: f64) -> f64 {
        match self {
            CoptScale::Cmod { .. } => c_mod_inverse(x),
            _ => x,
        }
    }
}

/// Monte Carlo and grid settings for one analysis.
#[derive(Debug)]
pub struct EngineSettings {
    pub seed: u64,
    pub draws: usize,
    pub batch_size: usize,
    pub auc_bins: usize,
    pub error_bins: usize,
    pub prevalence_bins: usize,
    pub copt_scale: CoptScale,
    pub criterion: Box<dyn CutoffCriterion>,
    pub conditional: bool,
    /// Minimum acceptance rate for rejection sampling.
    pub acceptance_floor: f64,
    /// Minimum effective sample size as a fraction of the draws.
    pub ess_floor: f64,
    /// Moving-average window applied to cutoff histograms.
    pub smoothing_window: Option<usize>,
    /// Exact prior probability of `H0`, when the model knows it.
    pub prior_h0_exact: Option<f64>,
    pub h0_label: String,
}

impl EngineSettings {
    pub fn new(seed: u64, draws: usize, copt_scale: CoptScale, criterion: Box<dyn CutoffCriterion>) -> Self {
        EngineSettings {
            seed,
            draws,
            batch_size: DEFAULT_BATCH_SIZE,
            auc_bins: crate::rb::DEFAULT_UNIT_BINS,
            error_bins: crate::rb::DEFAULT_UNIT_BINS,
            prevalence_bins: prevalence::PREVALENCE_BINS,
            copt_scale,
            criterion,
            conditional: false,
            acceptance_floor: 1e-4,
            ess_floor: 0.01,
            smoothing_window: None,
            prior_h0_exact: None,
            h0_label: "AUC > 1/2".into(),
        }
    }

    fn plan(&self) -> McPlan {
        McPlan::new(self.seed, self.draws).with_batch_size(self.batch_size)
    }
}

/// User-facing run options common to every model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub seed: u64,
    pub draws: usize,
    pub batch_size: usize,
    pub auc_bins: usize,
    pub error_bins: usize,
    pub criterion: String,
    pub conditional: bool,
    pub acceptance_floor: f64,
    pub ess_floor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 1,
            draws: 100_000,
            batch_size: DEFAULT_BATCH_SIZE,
            auc_bins: crate::rb::DEFAULT_UNIT_BINS,
            error_bins: crate::rb::DEFAULT_UNIT_BINS,
            criterion: "error".into(),
            conditional: false,
            acceptance_floor: 1e-4,
            ess_floor: 0.01,
        }
    }
}

impl RunOptions {
    pub fn settings(&self, copt_scale: CoptScale) -> Result<EngineSettings> {
        if !(self.acceptance_floor > 0.0 && self.acceptance_floor <= 1.0) {
            return Err(RocError::Config(format!(
                "acceptance floor {} outside (0, 1]",
                self.acceptance_floor
            )));
        }
        let mut s = EngineSettings::new(
            self.seed,
            self.draws,
            copt_scale,
            crate::criterion::parse_criterion(&self.criterion)?,
        );
        s.batch_size = self.batch_size.max(1);
        s.auc_bins = self.auc_bins;
        s.error_bins = self.error_bins;
        s.conditional = self.conditional;
        s.acceptance_floor = self.acceptance_floor;
        s.ess_floor = self.ess_floor;
        Ok(s)
    }
}

/// Sampling diagnostics for one pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PassDiagnostics {
    pub attempts: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub effective_sample_size: f64,
    pub clamped: u64,
}

trait Merge {
    fn merge(&mut self, other: Self);
}

#[derive(Default)]
struct Tally {
    attempts: u64,
    accepted: u64,
    weight: f64,
    weight_sq: f64,
}

impl Merge for Tally {
    fn merge(&mut self, o: Self) {
        self.attempts += o.attempts;
        self.accepted += o.accepted;
        self.weight += o.weight;
        self.weight_sq += o.weight_sq;
    }
}

/// Draws `plan.draws` accepted (weighted) samples and folds them into `A`.
fn run_draws<S, A>(
    s: &S,
    w_law: &PrevalencePrior,
    settings: &EngineSettings,
    stream: Stream,
    conditional: bool,
    init: impl Fn() -> A + Sync,
    visit: impl Fn(&mut A, &S::Draw, f64, f64) + Sync,
) -> Result<(A, PassDiagnostics)>
where
    S: JointSampler,
    A: Merge + Send,
{
    let plan = settings.plan();
    let floor = settings.acceptance_floor;
    let parts = map_batches(&plan, stream, plan.draws, |rng, range| {
        let mut acc = init();
        let mut tally = Tally::default();
        let cap = ((range.len() as f64) / floor).ceil() as u64;
        let mut state = s.start(&mut rng.model);
        for _ in range {
            loop {
                if tally.attempts >= cap {
                    break;
                }
                tally.attempts += 1;
                let w = prevalence::draw(w_law, &mut rng.prevalence);
                let got = if conditional {
                    s.draw_conditional(&mut state, &mut rng.model, w)
                } else {
                    Some((s.draw(&mut state, &mut rng.model), 1.0))
                };
                if let Some((d, wt)) = got {
                    tally.accepted += 1;
                    tally.weight += wt;
                    tally.weight_sq += wt * wt;
                    visit(&mut acc, &d, w, wt);
                    break;
                }
            }
        }
        (acc, tally)
    });
    let mut it = parts.into_iter();
    let (mut acc, mut tally) = it.next().ok_or(RocError::NoDraws)?;
    for (a, t) in it {
        acc.merge(a);
        tally.merge(t);
    }
    let rate = tally.accepted as f64 / tally.attempts.max(1) as f64;
    if (tally.accepted as usize) < plan.draws {
        return Err(RocError::Diagnostic(format!(
            "conditional sampling accepted {} of {} attempts (rate {rate:.2e}) below the floor {floor:.1e}",
            tally.accepted, tally.attempts
        )));
    }
    let ess = if tally.weight_sq > 0.0 {
        tally.weight * tally.weight / tally.weight_sq
    } else {
        0.0
    };
    if ess < settings.ess_floor * plan.draws as f64 {
        return Err(RocError::Diagnostic(format!(
            "effective sample size {ess:.1} below floor {:.1}",
            settings.ess_floor * plan.draws as f64
        )));
    }
    Ok((
        acc,
        PassDiagnostics {
            attempts: tally.attempts,
            accepted: tally.accepted,
            acceptance_rate: rate,
            effective_sample_size: ess,
            clamped: 0,
        },
    ))
}

struct MainAcc {
    auc: HistogramAccumulator,
    copt: HistogramAccumulator,
    pos_inf: f64,
    neg_inf: f64,
    copt_undefined: u64,
    h0: f64,
    weight: f64,
}

impl Merge for MainAcc {
    fn merge(&mut self, o: Self) {
        self.auc.merge(&o.auc).expect("same grid");
        self.copt.merge(&o.copt).expect("same grid");
        self.pos_inf += o.pos_inf;
        self.neg_inf += o.neg_inf;
        self.copt_undefined += o.copt_undefined;
        self.h0 += o.h0;
        self.weight += o.weight;
    }
}

struct MainPass {
    auc: DensityHistogram,
    copt: Option<DensityHistogram>,
    no_finite_cutoff: f64,
    copt_undefined: u64,
    h0_prob: f64,
    diagnostics: PassDiagnostics,
}

fn main_pass<S: JointSampler>(
    s: &S,
    w_law: &PrevalencePrior,
    settings: &EngineSettings,
    stream: Stream,
    conditional: bool,
) -> Result<MainPass> {
    let auc_grid = Grid::unit(settings.auc_bins)?;
    let copt_grid = settings.copt_scale.grid()?;
    let scale = &settings.copt_scale;
    let criterion = settings.criterion.as_ref();
    let fixed = criterion.fixed_cutoff();
    let (acc, mut diag) = run_draws(
        s,
        w_law,
        settings,
        stream,
        conditional,
        || MainAcc {
            auc: HistogramAccumulator::new(auc_grid),
            copt: HistogramAccumulator::new(copt_grid),
            pos_inf: 0.0,
            neg_inf: 0.0,
            copt_undefined: 0,
            h0: 0.0,
            weight: 0.0,
        },
        |acc, d, w, wt| {
            acc.auc.add_weighted(s.auc(d), wt);
            acc.weight += wt;
            if !conditional {
                acc.h0 += wt * s.h0_prob(d, w);
            }
            if fixed.is_some() {
                return;
            }
            match s.copt(d, w, criterion) {
                Some(c) => {
                    match c {
                        Cutoff::PosInf => acc.pos_inf += wt,
                        Cutoff::NegInf => acc.neg_inf += wt,
                        Cutoff::Finite(_) => {}
                    }
                    acc.copt.add_weighted(scale.coordinate(c), wt);
                }
                None => acc.copt_undefined += 1,
            }
        },
    )?;
    let auc = acc.auc.finish()?;
    diag.clamped = auc.clamped;
    let copt = if fixed.is_some() { None } else { Some(acc.copt.finish()?) };
    Ok(MainPass {
        auc,
        copt,
        no_finite_cutoff: (acc.pos_inf + acc.neg_inf) / acc.weight,
        copt_undefined: acc.copt_undefined,
        h0_prob: acc.h0 / acc.weight,
        diagnostics: diag,
    })
}

const ERROR_NAMES: [&str; 5] = ["fnr", "fpr", "error", "fdr", "fndr"];

struct FixedAcc {
    hists: Vec<HistogramAccumulator>,
    undefined: [u64; 5],
}

impl Merge for FixedAcc {
    fn merge(&mut self, o: Self) {
        for (a, b) in self.hists.iter_mut().zip(&o.hists) {
            a.merge(b).expect("same grid");
        }
        for (a, b) in self.undefined.iter_mut().zip(o.undefined) {
            *a += b;
        }
    }
}

fn fixed_pass<S: JointSampler>(
    s: &S,
    w_law: &PrevalencePrior,
    settings: &EngineSettings,
    stream: Stream,
    conditional: bool,
    cutoff: Cutoff,
) -> Result<(Vec<Option<DensityHistogram>>, [u64; 5])> {
    let grid = Grid::unit(settings.error_bins)?;
    let (acc, _) = run_draws(
        s,
        w_law,
        settings,
        stream,
        conditional,
        || FixedAcc {
            hists: (0..5).map(|_| HistogramAccumulator::new(grid)).collect(),
            undefined: [0; 5],
        },
        |acc, d, w, wt| {
            let (fnr, fpr) = s.rates(d, cutoff);
            let vals = [
                Some(fnr),
                Some(fpr),
                Some(w * fnr + (1.0 - w) * fpr),
                fdr(w, fnr, fpr),
                fndr(w, fnr, fpr),
            ];
            for (k, v) in vals.into_iter().enumerate() {
                match v {
                    Some(v) => acc.hists[k].add_weighted(v, wt),
                    None => acc.undefined[k] += 1,
                }
            }
        },
    )?;
    // a characteristic undefined for every draw has no histogram
    let hists = acc.hists.iter().map(|h| h.finish().ok()).collect();
    Ok((hists, acc.undefined))
}

/// Relative belief inference for one quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityInference {
    #[serde(flatten)]
    pub summary: EstimateSummary,
    pub prior_clamped: u64,
    pub posterior_clamped: u64,
    #[serde(skip)]
    pub curve: RelativeBeliefResult,
}

impl QuantityInference {
    fn new(prior: &DensityHistogram, post: &DensityHistogram, map: impl Fn(f64) -> f64) -> Result<Self> {
        let curve = relative_belief(prior, post)?;
        Ok(QuantityInference {
            summary: curve.summary_mapped(map),
            prior_clamped: prior.clamped,
            posterior_clamped: post.clamped,
            curve,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffInference {
    pub criterion: String,
    pub estimate: Cutoff,
    /// Categories in the plausible region, for discrete scales.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plausible_cutoffs: Option<Vec<Cutoff>>,
    pub inference: QuantityInference,
    /// Unsmoothed inference, when smoothing was applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<QuantityInference>,
    pub no_finite_cutoff_prior: f64,
    pub no_finite_cutoff_posterior: f64,
    pub undefined_prior_draws: u64,
    pub undefined_posterior_draws: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCharacteristic {
    pub name: String,
    #[serde(flatten)]
    pub inference: Option<QuantityInference>,
    pub undefined_prior_draws: u64,
    pub undefined_posterior_draws: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInference {
    pub cutoff: Cutoff,
    pub characteristics: Vec<ErrorCharacteristic>,
}

impl ErrorInference {
    pub fn get(&self, name: &str) -> Option<&QuantityInference> {
        self.characteristics
            .iter()
            .find(|c| c.name == name)
            .and_then(|c| c.inference.as_ref())
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.get(name).map(|q| q.summary.estimate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassReport {
    pub prior: PassDiagnostics,
    pub posterior: PassDiagnostics,
    pub auc: QuantityInference,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copt: Option<CutoffInference>,
    pub errors: ErrorInference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub label: String,
    #[serde(flatten)]
    pub assessment: HypothesisAssessment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineReport {
    pub hypothesis: Hypothesis,
    pub unconditional: PassReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional: Option<PassReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prevalence: Option<PrevalenceInference>,
}

impl EngineReport {
    /// The conditional pass when it was run, otherwise the unconditional one.
    pub fn primary(&self) -> &PassReport {
        self.conditional.as_ref().unwrap_or(&self.unconditional)
    }

    /// Named relative belief curves for export.
    pub fn curves(&self) -> Vec<(String, &RelativeBeliefResult)> {
        let mut out = Vec::new();
        pass_curves("unconditional", &self.unconditional, &mut out);
        if let Some(c) = &self.conditional {
            pass_curves("conditional", c, &mut out);
        }
        if let Some(p) = &self.prevalence {
            out.push(("prevalence".into(), &p.curve));
        }
        out
    }
}

fn pass_curves<'a>(tag: &str, p: &'a PassReport, out: &mut Vec<(String, &'a RelativeBeliefResult)>) {
    out.push((format!("{tag}_auc"), &p.auc.curve));
    if let Some(c) = &p.copt {
        out.push((format!("{tag}_copt"), &c.inference.curve));
        if let Some(r) = &c.raw {
            out.push((format!("{tag}_copt_raw"), &r.curve));
        }
    }
    for ch in &p.errors.characteristics {
        if let Some(q) = &ch.inference {
            out.push((format!("{tag}_{}", ch.name), &q.curve));
        }
    }
}

fn cutoff_inference(
    settings: &EngineSettings,
    prior: &MainPass,
    post: &MainPass,
) -> Result<Option<CutoffInference>> {
    let (Some(pc), Some(qc)) = (&prior.copt, &post.copt) else {
        return Ok(None);
    };
    let scale = &settings.copt_scale;
    let map = |x: f64| scale.map_value(x);
    let raw = QuantityInference::new(pc, qc, map)?;
    let (inference, raw) = match settings.smoothing_window {
        Some(k) if k > 1 => {
            let sp = moving_average_smooth(pc, k)?;
            let sq = moving_average_smooth(qc, k)?;
            (QuantityInference::new(&sp, &sq, map)?, Some(raw))
        }
        _ => (raw, None),
    };
    let estimate = scale.cutoff_at(inference.curve.estimate);
    let plausible_cutoffs = match scale {
        CoptScale::Categories { .. } => Some(
            inference
                .curve
                .plausible_bins()
                .into_iter()
                .map(|i| scale.cutoff_at(inference.curve.grid.midpoint(i)))
                .collect(),
        ),
        _ => None,
    };
    Ok(Some(CutoffInference {
        criterion: settings.criterion.name(),
        estimate,
        plausible_cutoffs,
        inference,
        raw,
        no_finite_cutoff_prior: prior.no_finite_cutoff,
        no_finite_cutoff_posterior: post.no_finite_cutoff,
        undefined_prior_draws: prior.copt_undefined,
        undefined_posterior_draws: post.copt_undefined,
    }))
}

fn error_inference<S: JointSampler>(
    prior: &S,
    posterior: &S,
    w_prior: &PrevalencePrior,
    w_post: &PrevalencePrior,
    settings: &EngineSettings,
    conditional: bool,
    cutoff: Cutoff,
) -> Result<ErrorInference> {
    let (sp, sq) = if conditional {
        (Stream::ConditionalFixedPrior, Stream::ConditionalFixedPosterior)
    } else {
        (Stream::FixedPrior, Stream::FixedPosterior)
    };
    let (ph, pu) = fixed_pass(prior, w_prior, settings, sp, conditional, cutoff)?;
    let (qh, qu) = fixed_pass(posterior, w_post, settings, sq, conditional, cutoff)?;
    let mut characteristics = Vec::new();
    for k in 0..5 {
        let inference = match (&ph[k], &qh[k]) {
            (Some(p), Some(q)) => Some(QuantityInference::new(p, q, |x| x)?),
            _ => None,
        };
        characteristics.push(ErrorCharacteristic {
            name: ERROR_NAMES[k].into(),
            inference,
            undefined_prior_draws: pu[k],
            undefined_posterior_draws: qu[k],
        });
    }
    Ok(ErrorInference { cutoff, characteristics })
}

fn run_pass<S: JointSampler>(
    prior: &S,
    posterior: &S,
    w_prior: &PrevalencePrior,
    w_post: &PrevalencePrior,
    settings: &EngineSettings,
    conditional: bool,
) -> Result<(PassReport, f64, f64)> {
    let (sp, sq) = if conditional {
        (Stream::ConditionalPrior, Stream::ConditionalPosterior)
    } else {
        (Stream::Prior, Stream::Posterior)
    };
    let p = main_pass(prior, w_prior, settings, sp, conditional)?;
    let q = main_pass(posterior, w_post, settings, sq, conditional)?;
    let auc = QuantityInference::new(&p.auc, &q.auc, |x| x)?;
    let copt = cutoff_inference(settings, &p, &q)?;
    let cutoff = match (&copt, settings.criterion.fixed_cutoff()) {
        (_, Some(c0)) => Cutoff::Finite(c0),
        (Some(c), None) => c.estimate,
        (None, None) => unreachable!("cutoff histogram exists unless the criterion is fixed"),
    };
    let errors = error_inference(prior, posterior, w_prior, w_post, settings, conditional, cutoff)?;
    Ok((
        PassReport {
            prior: p.diagnostics,
            posterior: q.diagnostics,
            auc,
            copt,
            errors,
        },
        p.h0_prob,
        q.h0_prob,
    ))
}

/// Full analysis: hypothesis assessment, unconditional and (optionally)
/// conditional passes, and prevalence inference under regime (ii).
pub fn analyze<S: JointSampler>(
    prior: &S,
    posterior: &S,
    prevalence: &PrevalenceSpec,
    n_d: u64,
    n_nd: u64,
    settings: &EngineSettings,
) -> Result<EngineReport> {
    if settings.draws == 0 {
        return Err(RocError::invalid("number of draws must be positive"));
    }
    let w_prior = prevalence.prior;
    let w_post = prevalence.posterior(n_d, n_nd);
    let (unconditional, p_h0, q_h0) = run_pass(prior, posterior, &w_prior, &w_post, settings, false)?;
    let prior_prob = settings.prior_h0_exact.unwrap_or(p_h0);
    let hypothesis = Hypothesis {
        label: settings.h0_label.clone(),
        assessment: HypothesisAssessment::from_probabilities(prior_prob.clamp(0.0, 1.0), q_h0.clamp(0.0, 1.0))?,
    };
    let conditional = if settings.conditional {
        Some(run_pass(prior, posterior, &w_prior, &w_post, settings, true)?.0)
    } else {
        None
    };
    let prevalence = prevalence::infer_for_spec(prevalence, n_d, n_nd, Grid::unit(settings.prevalence_bins)?)?;
    Ok(EngineReport {
        hypothesis,
        unconditional,
        conditional,
        prevalence,
    })
}
