use serde::{Deserialize, Serialize};

use crate::error::{Result, RocError};

/// Equispaced partition of `(lo, hi]` into `n_bins` half-open bins
/// `(lo + iΔ, lo + (i+1)Δ]`, `i = 0..n_bins`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: f64,
    hi: f64,
    n_bins: usize,
}

/// Where a value fell relative to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Inside(usize),
    ClampedLow,
    ClampedHigh,
}

impl Placement {
    pub fn bin(self, grid: &Grid) -> usize {
        match self {
            Placement::Inside(i) => i,
            Placement::ClampedLow => 0,
            Placement::ClampedHigh => grid.n_bins - 1,
        }
    }
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(RocError::invalid(format!("grid requires lo < hi, got ({lo}, {hi}]")));
        }
        if n_bins < 2 {
            return Err(RocError::invalid("grid requires at least 2 bins"));
        }
        Ok(Grid { lo, hi, n_bins })
    }

    /// `(0, 1]` with `n_bins` bins.
    pub fn unit(n_bins: usize) -> Result<Self> {
        Grid::new(0.0, 1.0, n_bins)
    }

    /// Integer categories `1..=k`, each at the midpoint of its own unit bin.
    pub fn categories(k: usize) -> Result<Self> {
        Grid::new(0.5, k as f64 + 0.5, k)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_bins as f64
    }

    pub fn lower_edge(&self, i: usize) -> f64 {
        if i == 0 {
            self.lo
        } else {
            self.lo + i as f64 * self.width()
        }
    }

    pub fn upper_edge(&self, i: usize) -> f64 {
        if i + 1 == self.n_bins {
            self.hi
        } else {
            self.lo + (i + 1) as f64 * self.width()
        }
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_bins).map(|i| self.midpoint(i)).collect()
    }

    pub fn place(&self, x: f64) -> Placement {
        if x.is_nan() || x <= self.lo {
            return Placement::ClampedLow;
        }
        if x > self.hi {
            return Placement::ClampedHigh;
        }
        let t = (x - self.lo) / self.width();
        let mut i = (t.ceil() as isize - 1).clamp(0, self.n_bins as isize - 1) as usize;
        // floating point can put x one bin off near an edge
        if i > 0 && x <= self.upper_edge(i - 1) {
            i -= 1;
        } else if i + 1 < self.n_bins && x > self.upper_edge(i) {
            i += 1;
        }
        Placement::Inside(i)
    }

    /// Bin index for `x`, clamping out-of-range values to the boundary bins.
    pub fn bin_of(&self, x: f64) -> usize {
        self.place(x).bin(self)
    }
}
