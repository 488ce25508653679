//! Seeded, batch-partitioned Monte Carlo plumbing and the random variate
//! generators shared by the model modules.
//!
//! Every batch owns two independent ChaCha streams derived from
//! `(seed, stream, batch)`: one for model parameters and one for the
//! prevalence. Results are collected in batch order, so output depends on the
//! seed and the batch size but never on the number of worker threads.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::special::{norm_cdf, norm_quantile};

pub type McRng = ChaCha8Rng;

pub const DEFAULT_BATCH_SIZE: usize = 4096;

/// Seed, draw count and batch partitioning for one Monte Carlo pass family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McPlan {
    pub seed: u64,
    pub draws: usize,
    pub batch_size: usize,
}

impl McPlan {
    pub fn new(seed: u64, draws: usize) -> Self {
        McPlan {
            seed,
            draws,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn batches(&self, n: usize) -> Vec<Range<usize>> {
        let bs = self.batch_size.max(1);
        (0..n.div_ceil(bs))
            .map(|b| b * bs..((b + 1) * bs).min(n))
            .collect()
    }
}

/// Named sub-streams so that different passes never share random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Prior = 1,
    Posterior = 2,
    ConditionalPrior = 3,
    ConditionalPosterior = 4,
    FixedPrior = 5,
    FixedPosterior = 6,
    ConditionalFixedPrior = 7,
    ConditionalFixedPosterior = 8,
    Jitter = 9,
    Other = 10,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-batch generators.
pub struct BatchRng {
    pub model: McRng,
    pub prevalence: McRng,
}

impl BatchRng {
    pub fn new(seed: u64, stream: u64, batch: u64) -> Self {
        let key = splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ batch);
        let mut model = McRng::seed_from_u64(key);
        model.set_stream(0);
        let mut prevalence = McRng::seed_from_u64(key);
        prevalence.set_stream(1);
        BatchRng { model, prevalence }
    }
}

/// Runs `f` once per batch of `0..n` (in parallel) and returns the batch
/// results in batch order.
pub fn map_batches<T, F>(plan: &McPlan, stream: Stream, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut BatchRng, Range<usize>) -> T + Sync,
{
    plan.batches(n)
        .into_par_iter()
        .enumerate()
        .map(|(b, range)| {
            let mut rng = BatchRng::new(plan.seed, stream as u64, b as u64);
            f(&mut rng, range)
        })
        .collect()
}

/// Gamma(shape, rate) variate.
pub fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("positive gamma parameters")
        .sample(rng)
}

/// log of a Gamma(shape, 1) variate; stable for very small shapes.
pub fn log_gamma_unit<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape >= 1.0 {
        gamma(rng, shape, 1.0).ln()
    } else {
        let boosted = gamma(rng, shape + 1.0, 1.0).ln();
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        boosted + u.ln() / shape
    }
}

/// Dirichlet(alpha) variate written into `out`.
pub fn dirichlet_into<R: Rng + ?Sized>(rng: &mut R, alpha: &[f64], out: &mut [f64]) {
    debug_assert_eq!(alpha.len(), out.len());
    if alpha.iter().all(|&a| a >= 1.0) {
        let mut total = 0.0;
        for (o, &a) in out.iter_mut().zip(alpha) {
            *o = gamma(rng, a, 1.0);
            total += *o;
        }
        out.iter_mut().for_each(|o| *o /= total);
        return;
    }
    for (o, &a) in out.iter_mut().zip(alpha) {
        *o = log_gamma_unit(rng, a);
    }
    normalize_logs(out);
}

/// Symmetric Dirichlet(shape, ..., shape) variate of length `out.len()`.
pub fn symmetric_dirichlet_into<R: Rng + ?Sized>(rng: &mut R, shape: f64, out: &mut [f64]) {
    if shape >= 1.0 {
        let dist = Gamma::new(shape, 1.0).expect("positive shape");
        let mut total = 0.0;
        for o in out.iter_mut() {
            *o = dist.sample(rng);
            total += *o;
        }
        out.iter_mut().for_each(|o| *o /= total);
    } else {
        let dist = Gamma::new(shape + 1.0, 1.0).expect("positive shape");
        for o in out.iter_mut() {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            *o = dist.sample(rng).ln() + u.ln() / shape;
        }
        normalize_logs(out);
    }
}

fn normalize_logs(v: &mut [f64]) {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    v.iter_mut().for_each(|x| *x /= total);
}

/// Beta(a, b) variate.
pub fn beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let x = gamma(rng, a, 1.0);
    let y = gamma(rng, b, 1.0);
    x / (x + y)
}

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// N(mean, sd²) conditioned to (-inf, upper], by cdf inversion.
pub fn normal_truncated_above<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, upper: f64) -> f64 {
    let b = (upper - mean) / sd;
    let pb = norm_cdf(b);
    if pb <= 0.0 {
        return upper;
    }
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let z = norm_quantile(u * pb);
    if z.is_finite() {
        (mean + sd * z).min(upper)
    } else {
        upper
    }
}
