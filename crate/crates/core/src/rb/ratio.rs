use serde::Serialize;

use super::grid::Grid;
use super::histogram::DensityHistogram;
use crate::error::{Result, RocError};

/// A maximal run of contiguous bins, `(lo, hi]`, with its posterior content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub content: f64,
}

/// Relative belief ratio curve with its estimate and plausible region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeBeliefResult {
    pub grid: Grid,
    pub prior_mass: Vec<f64>,
    pub posterior_mass: Vec<f64>,
    /// `None` where the prior mass is zero.
    pub rb: Vec<Option<f64>>,
    pub estimate: f64,
    pub estimate_bin: usize,
    pub plausible: Vec<bool>,
    pub plausible_region: Vec<Interval>,
    pub plausible_content: f64,
    /// The contiguous piece of the plausible region carrying the most
    /// posterior content.
    pub largest_interval: Option<Interval>,
    pub undefined_bins: Vec<usize>,
}

/// Point estimate and plausible region reported on an arbitrary scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub estimate: f64,
    pub rb_at_estimate: f64,
    pub plausible_region: Vec<Interval>,
    pub plausible_content: f64,
    pub largest_interval: Option<Interval>,
    pub undefined_bins: usize,
}

impl RelativeBeliefResult {
    pub fn summary(&self) -> EstimateSummary {
        self.summary_mapped(|x| x)
    }

    /// Summary with bin coordinates pushed through a monotone increasing map.
    pub fn summary_mapped(&self, f: impl Fn(f64) -> f64) -> EstimateSummary {
        let map = |iv: &Interval| Interval {
            lo: f(iv.lo),
            hi: f(iv.hi),
            content: iv.content,
        };
        EstimateSummary {
            estimate: f(self.estimate),
            rb_at_estimate: self.rb[self.estimate_bin].unwrap_or(f64::NAN),
            plausible_region: self.plausible_region.iter().map(map).collect(),
            plausible_content: self.plausible_content,
            largest_interval: self.largest_interval.as_ref().map(map),
            undefined_bins: self.undefined_bins.len(),
        }
    }

    /// Bins that are both defined and in the plausible region.
    pub fn plausible_bins(&self) -> Vec<usize> {
        (0..self.plausible.len()).filter(|&i| self.plausible[i]).collect()
    }
}

/// Ratio of posterior to prior bin mass, its maximiser and plausible region.
///
/// Bins with zero prior mass are undefined and excluded from both the argmax
/// and the plausible region. Argmax ties go to the larger posterior mass, then
/// the lower midpoint.
pub fn relative_belief(prior: &DensityHistogram, posterior: &DensityHistogram) -> Result<RelativeBeliefResult> {
    if prior.grid != posterior.grid {
        return Err(RocError::GridMismatch(format!(
            "prior grid {:?} vs posterior grid {:?}",
            prior.grid, posterior.grid
        )));
    }
    let grid = prior.grid;
    let rb: Vec<Option<f64>> = prior
        .mass
        .iter()
        .zip(&posterior.mass)
        .map(|(&p, &q)| if p > 0.0 { Some(q / p) } else { None })
        .collect();
    let undefined_bins: Vec<usize> = (0..rb.len()).filter(|&i| rb[i].is_none()).collect();
    if undefined_bins.len() == rb.len() {
        return Err(RocError::ZeroPrior);
    }

    let mut best: Option<usize> = None;
    for (i, r) in rb.iter().enumerate() {
        let Some(r) = *r else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let rb_b = rb[b].unwrap();
                if r > rb_b || (r == rb_b && posterior.mass[i] > posterior.mass[b]) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    let estimate_bin = best.expect("at least one defined bin");

    let plausible: Vec<bool> = rb.iter().map(|r| matches!(r, Some(v) if *v > 1.0)).collect();
    let mut region = Vec::new();
    let mut i = 0;
    while i < plausible.len() {
        if plausible[i] {
            let start = i;
            let mut content = 0.0;
            while i < plausible.len() && plausible[i] {
                content += posterior.mass[i];
                i += 1;
            }
            region.push(Interval {
                lo: grid.lower_edge(start),
                hi: grid.upper_edge(i - 1),
                content,
            });
        } else {
            i += 1;
        }
    }
    let plausible_content = (0..plausible.len())
        .filter(|&i| plausible[i])
        .map(|i| posterior.mass[i])
        .sum();
    let largest_interval = region
        .iter()
        .copied()
        .fold(None, |acc: Option<Interval>, iv| match acc {
            Some(a) if a.content >= iv.content => Some(a),
            _ => Some(iv),
        });

    Ok(RelativeBeliefResult {
        grid,
        prior_mass: prior.mass.clone(),
        posterior_mass: posterior.mass.clone(),
        rb,
        estimate: grid.midpoint(estimate_bin),
        estimate_bin,
        plausible,
        plausible_region: region,
        plausible_content,
        largest_interval,
        undefined_bins,
    })
}

/// Evidence for an event: the ratio of its posterior to prior probability and
/// the strength of that evidence (the posterior probability).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisAssessment {
    pub prior_prob: f64,
    pub posterior_prob: f64,
    /// `None` when the prior probability is zero.
    pub rb_event: Option<f64>,
    /// Zero prior probability with positive posterior probability.
    pub infinite_rb: bool,
    pub strength: f64,
}

impl HypothesisAssessment {
    pub fn from_probabilities(prior_prob: f64, posterior_prob: f64) -> Result<Self> {
        for p in [prior_prob, posterior_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(RocError::invalid(format!("probability {p} outside [0, 1]")));
            }
        }
        let (rb_event, infinite_rb) = if prior_prob > 0.0 {
            (Some(posterior_prob / prior_prob), false)
        } else {
            (None, posterior_prob > 0.0)
        };
        Ok(HypothesisAssessment {
            prior_prob,
            posterior_prob,
            rb_event,
            infinite_rb,
            strength: posterior_prob,
        })
    }

    /// Evidence is in favour when the ratio exceeds one.
    pub fn in_favor(&self) -> bool {
        self.infinite_rb || self.rb_event.is_some_and(|r| r > 1.0)
    }
}

/// Event assessment from Monte Carlo counts.
pub fn assess_event(prior_in: u64, prior_total: u64, post_in: u64, post_total: u64) -> Result<HypothesisAssessment> {
    if prior_total == 0 || post_total == 0 {
        return Err(RocError::invalid("event assessment requires positive totals"));
    }
    if prior_in > prior_total || post_in > post_total {
        return Err(RocError::invalid("event counts exceed totals"));
    }
    HypothesisAssessment::from_probabilities(
        prior_in as f64 / prior_total as f64,
        post_in as f64 / post_total as f64,
    )
}

/// Centered moving average of bin masses (window truncated at the edges),
/// renormalised to total mass one.
pub fn moving_average_smooth(hist: &DensityHistogram, window: usize) -> Result<DensityHistogram> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(RocError::invalid(format!("smoothing window must be odd and positive, got {window}")));
    }
    let n = hist.mass.len();
    if window > n {
        return Err(RocError::invalid(format!("smoothing window {window} exceeds {n} bins")));
    }
    let half = window / 2;
    let mut mass: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            hist.mass[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        mass.iter_mut().for_each(|m| *m /= total);
    }
    Ok(DensityHistogram {
        grid: hist.grid,
        mass,
        n_draws: hist.n_draws,
        clamped: hist.clamped,
    })
}
