use serde::Serialize;

use super::grid::{Grid, Placement};
use crate::error::{Result, RocError};

/// Mergeable (possibly weighted) bin counts over a [`Grid`].
///
/// Accumulators built from disjoint batches merge by addition, so the final
/// histogram does not depend on how draws were partitioned across threads
/// beyond floating-point summation order, which is fixed by batch order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramAccumulator {
    grid: Grid,
    weights: Vec<f64>,
    total_weight: f64,
    n_draws: u64,
    clamped_low: u64,
    clamped_high: u64,
}

impl HistogramAccumulator {
    pub fn new(grid: Grid) -> Self {
        HistogramAccumulator {
            grid,
            weights: vec![0.0; grid.n_bins()],
            total_weight: 0.0,
            n_draws: 0,
            clamped_low: 0,
            clamped_high: 0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_draws(&self) -> u64 {
        self.n_draws
    }

    pub fn add(&mut self, x: f64) {
        self.add_weighted(x, 1.0);
    }

    pub fn add_weighted(&mut self, x: f64, weight: f64) {
        let placement = self.grid.place(x);
        match placement {
            Placement::ClampedLow => self.clamped_low += 1,
            Placement::ClampedHigh => self.clamped_high += 1,
            Placement::Inside(_) => {}
        }
        self.weights[placement.bin(&self.grid)] += weight;
        self.total_weight += weight;
        self.n_draws += 1;
    }

    pub fn merge(&mut self, other: &HistogramAccumulator) -> Result<()> {
        if self.grid != other.grid {
            return Err(RocError::GridMismatch("cannot merge accumulators over different grids".into()));
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        self.total_weight += other.total_weight;
        self.n_draws += other.n_draws;
        self.clamped_low += other.clamped_low;
        self.clamped_high += other.clamped_high;
        Ok(())
    }

    pub fn finish(&self) -> Result<DensityHistogram> {
        if self.n_draws == 0 {
            return Err(RocError::NoDraws);
        }
        if self.total_weight <= 0.0 {
            return Err(RocError::Diagnostic("all draw weights are zero".into()));
        }
        Ok(DensityHistogram {
            grid: self.grid,
            mass: self.weights.iter().map(|w| w / self.total_weight).collect(),
            n_draws: self.n_draws,
            clamped: self.clamped_low + self.clamped_high,
        })
    }
}

/// Probability mass per grid bin, estimated from Monte Carlo draws or
/// computed exactly from a cdf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub grid: Grid,
    pub mass: Vec<f64>,
    pub n_draws: u64,
    /// Draws outside `(lo, hi]` that were assigned to a boundary bin.
    pub clamped: u64,
}

impl DensityHistogram {
    /// Exact bin masses from a cdf evaluated at the bin edges.
    pub fn from_cdf(grid: Grid, cdf: impl Fn(f64) -> f64) -> Result<Self> {
        let edges: Vec<f64> = (0..=grid.n_bins())
            .map(|i| if i == grid.n_bins() { cdf(grid.hi()) } else { cdf(grid.lower_edge(i)) })
            .collect();
        let mut mass: Vec<f64> = edges.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            return Err(RocError::ZeroPrior);
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Ok(DensityHistogram {
            grid,
            mass,
            n_draws: 0,
            clamped: 0,
        })
    }

    /// Density value of bin `i` (mass divided by bin width).
    pub fn density(&self, i: usize) -> f64 {
        self.mass[i] / self.grid.width()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Midpoint of the bin with the largest mass (lowest midpoint on ties).
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (i, &m) in self.mass.iter().enumerate() {
            if m > self.mass[best] {
                best = i;
            }
        }
        self.grid.midpoint(best)
    }
}

/// Histogram of unweighted draws; out-of-grid draws are clamped and counted.
pub fn estimate_density(draws: &[f64], grid: &Grid) -> Result<DensityHistogram> {
    if draws.is_empty() {
        return Err(RocError::NoDraws);
    }
    let mut acc = HistogramAccumulator::new(*grid);
    draws.iter().for_each(|&x| acc.add(x));
    acc.finish()
}

/// Histogram of importance-weighted draws `(value, weight)`.
pub fn estimate_density_weighted(draws: &[(f64, f64)], grid: &Grid) -> Result<DensityHistogram> {
    if draws.is_empty() {
        return Err(RocError::NoDraws);
    }
    let mut acc = HistogramAccumulator::new(*grid);
    draws.iter().for_each(|&(x, w)| acc.add_weighted(x, w));
    acc.finish()
}
