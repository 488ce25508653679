//! Ordered discrete diagnostics with Dirichlet priors on both populations.
//!
//! `p_ND` and `p_D` are probability vectors over the levels `c_1 < ... < c_m`.
//! Each may be unrestricted, with a Dirichlet prior, or restricted to be
//! monotone, in which case it is written as `A_m p*` (nonincreasing) or its
//! reversal (nondecreasing) with a Dirichlet prior on `p*`. Monotone
//! posteriors are sampled by Gibbs data augmentation, since `A_m p*` is a
//! mixture of uniform laws on `{1..j}` with mixing weights `p*`.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::criterion::{select_cutoff_with, CutoffCriterion};
use crate::engine::{self, CoptScale, EngineReport, JointSampler, RunOptions};
use crate::error::{Result, RocError};
use crate::mc::{dirichlet_into, McRng};
use crate::metrics::Cutoff;
use crate::prevalence::PrevalenceSpec;

/// Gibbs sweeps discarded at the start of each batch.
pub const GIBBS_BURN_IN: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    pub alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(RocError::invalid("a Dirichlet needs at least two cells"));
        }
        if alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(RocError::invalid("Dirichlet parameters must be positive"));
        }
        Ok(DirichletParams { alpha })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn mean(&self) -> Vec<f64> {
        let t: f64 = self.alpha.iter().sum();
        self.alpha.iter().map(|a| a / t).collect()
    }
}

/// Counts per level for both populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountData {
    pub levels: Vec<f64>,
    pub f_nd: Vec<u64>,
    pub f_d: Vec<u64>,
}

impl CountData {
    pub fn new(levels: Vec<f64>, f_nd: Vec<u64>, f_d: Vec<u64>) -> Result<Self> {
        let m = levels.len();
        if m < 2 || f_nd.len() != m || f_d.len() != m {
            return Err(RocError::invalid(format!(
                "need at least two levels and matching counts (levels {m}, nd {}, d {})",
                f_nd.len(),
                f_d.len()
            )));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(RocError::invalid("levels must be strictly increasing"));
        }
        Ok(CountData { levels, f_nd, f_d })
    }

    /// Levels `1..=m`.
    pub fn indexed(f_nd: Vec<u64>, f_d: Vec<u64>) -> Result<Self> {
        let levels = (1..=f_nd.len()).map(|i| i as f64).collect();
        Self::new(levels, f_nd, f_d)
    }

    pub fn n_nd(&self) -> u64 {
        self.f_nd.iter().sum()
    }

    pub fn n_d(&self) -> u64 {
        self.f_d.iter().sum()
    }
}

/// `alpha + f`, the Dirichlet posterior.
pub fn posterior_params(prior: &DirichletParams, counts: &[u64]) -> Result<DirichletParams> {
    if prior.len() != counts.len() {
        return Err(RocError::invalid(format!(
            "prior has {} cells but the data have {}",
            prior.len(),
            counts.len()
        )));
    }
    Ok(DirichletParams {
        alpha: prior.alpha.iter().zip(counts).map(|(a, &f)| a + f as f64).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    #[default]
    Free,
    Nonincreasing,
    Nondecreasing,
}

/// `A_k p*` for nonincreasing, its reversal for nondecreasing.
pub fn monotone_transform(p_star: &[f64], shape: Shape) -> Vec<f64> {
    let k = p_star.len();
    let mut out = vec![0.0; k];
    let mut acc = 0.0;
    // (A p*)_i = sum_{j >= i} p*_j / j, built from the top down
    for j in (0..k).rev() {
        acc += p_star[j] / (j + 1) as f64;
        out[j] = acc;
    }
    match shape {
        Shape::Free => p_star.to_vec(),
        Shape::Nonincreasing => out,
        Shape::Nondecreasing => {
            out.reverse();
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexDraw {
    pub p_nd: Vec<f64>,
    pub p_d: Vec<f64>,
}

/// Law of one population's probability vector.
#[derive(Debug, Clone, PartialEq)]
struct PopulationLaw {
    /// Dirichlet parameters of `p` (free) or `p*` (monotone).
    alpha: Vec<f64>,
    shape: Shape,
    /// Observed counts, for monotone posteriors only.
    counts: Option<Vec<u64>>,
}

impl PopulationLaw {
    fn prior(params: &DirichletParams, shape: Shape) -> Self {
        PopulationLaw {
            alpha: params.alpha.clone(),
            shape,
            counts: None,
        }
    }

    fn posterior(params: &DirichletParams, shape: Shape, counts: &[u64]) -> Result<Self> {
        Ok(match shape {
            Shape::Free => PopulationLaw {
                alpha: posterior_params(params, counts)?.alpha,
                shape,
                counts: None,
            },
            _ => {
                posterior_params(params, counts)?;
                PopulationLaw {
                    alpha: params.alpha.clone(),
                    shape,
                    counts: counts.iter().any(|&c| c > 0).then(|| counts.to_vec()),
                }
            }
        })
    }

    fn start(&self, rng: &mut McRng) -> Option<Vec<f64>> {
        let counts = self.counts.as_ref()?;
        let mut p_star = vec![0.0; self.alpha.len()];
        dirichlet_into(rng, &self.alpha, &mut p_star);
        let mut scratch = vec![0.0; self.alpha.len()];
        for _ in 0..GIBBS_BURN_IN {
            self.gibbs_sweep(counts, &mut p_star, &mut scratch, rng);
        }
        Some(p_star)
    }

    /// One data-augmentation sweep on `p*`.
    fn gibbs_sweep(&self, counts: &[u64], p_star: &mut [f64], latent: &mut [f64], rng: &mut McRng) {
        let k = p_star.len();
        latent.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..k {
            // work in the nonincreasing frame
            let f = match self.shape {
                Shape::Nondecreasing => counts[k - 1 - i],
                _ => counts[i],
            };
            if f == 0 {
                continue;
            }
            let mut left = f;
            let mut mass: f64 = (i..k).map(|j| p_star[j] / (j + 1) as f64).sum();
            for j in i..k {
                if left == 0 {
                    break;
                }
                let q = p_star[j] / (j + 1) as f64;
                let take = if j == k - 1 || mass <= 0.0 {
                    left
                } else {
                    let pr = (q / mass).clamp(0.0, 1.0);
                    Binomial::new(left, pr).expect("valid binomial").sample(rng)
                };
                latent[j] += take as f64;
                left -= take;
                mass -= q;
            }
        }
        for (l, a) in latent.iter_mut().zip(&self.alpha) {
            *l += a;
        }
        dirichlet_into(rng, latent, p_star);
    }

    fn draw(&self, state: &mut Option<Vec<f64>>, rng: &mut McRng) -> Vec<f64> {
        let k = self.alpha.len();
        match (self.shape, state, &self.counts) {
            (Shape::Free, _, _) => {
                let mut p = vec![0.0; k];
                dirichlet_into(rng, &self.alpha, &mut p);
                p
            }
            (shape, Some(p_star), Some(counts)) => {
                let mut scratch = vec![0.0; k];
                self.gibbs_sweep(counts, p_star, &mut scratch, rng);
                monotone_transform(p_star, shape)
            }
            (shape, _, _) => {
                let mut p_star = vec![0.0; k];
                dirichlet_into(rng, &self.alpha, &mut p_star);
                monotone_transform(&p_star, shape)
            }
        }
    }
}

/// Prior on `(p_ND, p_D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePrior {
    pub nd: DirichletParams,
    pub d: DirichletParams,
    #[serde(default)]
    pub shape_nd: Shape,
    #[serde(default)]
    pub shape_d: Shape,
}

impl DiscretePrior {
    pub fn uniform(m: usize) -> Result<Self> {
        Ok(DiscretePrior {
            nd: DirichletParams::uniform(m)?,
            d: DirichletParams::uniform(m)?,
            shape_nd: Shape::Free,
            shape_d: Shape::Free,
        })
    }
}

/// Joint sampler for `(p_ND, p_D)` under a prior or posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSampler {
    levels: Vec<f64>,
    nd: PopulationLaw,
    d: PopulationLaw,
}

impl DiscreteSampler {
    pub fn prior(prior: &DiscretePrior, levels: &[f64]) -> Result<Self> {
        check_dims(prior, levels.len())?;
        Ok(DiscreteSampler {
            levels: levels.to_vec(),
            nd: PopulationLaw::prior(&prior.nd, prior.shape_nd),
            d: PopulationLaw::prior(&prior.d, prior.shape_d),
        })
    }

    pub fn posterior(prior: &DiscretePrior, data: &CountData) -> Result<Self> {
        check_dims(prior, data.levels.len())?;
        Ok(DiscreteSampler {
            levels: data.levels.clone(),
            nd: PopulationLaw::posterior(&prior.nd, prior.shape_nd, &data.f_nd)?,
            d: PopulationLaw::posterior(&prior.d, prior.shape_d, &data.f_d)?,
        })
    }

    /// `n` draws from a fresh state.
    pub fn sample(&self, n: usize, rng: &mut McRng) -> Vec<SimplexDraw> {
        let mut state = self.start(rng);
        (0..n).map(|_| self.draw(&mut state, rng)).collect()
    }
}

fn check_dims(prior: &DiscretePrior, m: usize) -> Result<()> {
    if prior.nd.len() != m || prior.d.len() != m {
        return Err(RocError::invalid(format!(
            "prior dimensions ({}, {}) do not match {m} levels",
            prior.nd.len(),
            prior.d.len()
        )));
    }
    Ok(())
}

/// `sum_i (1 - F_D(c_i)) p_ND,i`.
pub fn simplex_auc(p_nd: &[f64], p_d: &[f64]) -> f64 {
    let mut f_d = 0.0;
    let mut auc = 0.0;
    for (a, b) in p_nd.iter().zip(p_d) {
        f_d += b;
        auc += (1.0 - f_d).max(0.0) * a;
    }
    auc
}

impl JointSampler for DiscreteSampler {
    type Draw = SimplexDraw;
    type State = (Option<Vec<f64>>, Option<Vec<f64>>);

    fn start(&self, rng: &mut McRng) -> Self::State {
        (self.nd.start(rng), self.d.start(rng))
    }

    fn draw(&self, state: &mut Self::State, rng: &mut McRng) -> SimplexDraw {
        SimplexDraw {
            p_nd: self.nd.draw(&mut state.0, rng),
            p_d: self.d.draw(&mut state.1, rng),
        }
    }

    fn auc(&self, d: &SimplexDraw) -> f64 {
        simplex_auc(&d.p_nd, &d.p_d)
    }

    fn h0_prob(&self, d: &SimplexDraw, _w: f64) -> f64 {
        (self.auc(d) > 0.5) as u8 as f64
    }

    fn copt(&self, d: &SimplexDraw, w: f64, criterion: &dyn CutoffCriterion) -> Option<Cutoff> {
        let mut f_nd = 0.0;
        let mut f_d = 0.0;
        let cands = self.levels.iter().zip(d.p_nd.iter().zip(&d.p_d)).map(|(&c, (a, b))| {
            f_nd += a;
            f_d += b;
            (c, f_d.min(1.0), (1.0 - f_nd).max(0.0))
        });
        // classifying everyone as diseased is not a candidate for a discrete test
        select_cutoff_with(criterion, w, cands, &[Cutoff::PosInf]).map(|(c, _)| c)
    }

    fn rates(&self, d: &SimplexDraw, c: Cutoff) -> (f64, f64) {
        match c {
            Cutoff::NegInf => (0.0, 1.0),
            Cutoff::PosInf => (1.0, 0.0),
            Cutoff::Finite(x) => {
                let k = self.levels.partition_point(|&l| l <= x);
                let f_nd: f64 = d.p_nd[..k].iter().sum();
                let f_d: f64 = d.p_d[..k].iter().sum();
                (f_d.min(1.0), (1.0 - f_nd).max(0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteReport {
    pub model: &'static str,
    pub prior: DiscretePrior,
    pub data: CountData,
    pub prevalence_spec: PrevalenceSpec,
    #[serde(flatten)]
    pub engine: EngineReport,
}

/// Prior and posterior inference for AUC, the optimal cutoff and the error
/// characteristics at the estimated cutoff.
pub fn infer_discrete(
    prior: &DiscretePrior,
    data: &CountData,
    prevalence: &PrevalenceSpec,
    options: &RunOptions,
) -> Result<DiscreteReport> {
    let prior_sampler = DiscreteSampler::prior(prior, &data.levels)?;
    let post_sampler = DiscreteSampler::posterior(prior, data)?;
    let settings = options.settings(CoptScale::Categories {
        points: data.levels.clone(),
    })?;
    let engine = engine::analyze(
        &prior_sampler,
        &post_sampler,
        prevalence,
        data.n_d(),
        data.n_nd(),
        &settings,
    )
    .map_err(|e| e.in_module("discrete_model"))?;
    Ok(DiscreteReport {
        model: "discrete",
        prior: prior.clone(),
        data: data.clone(),
        prevalence_spec: *prevalence,
        engine,
    })
}
