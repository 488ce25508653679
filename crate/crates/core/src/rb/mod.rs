//! Density histograms on fixed grids, relative belief ratios, plausible
//! regions and event assessment.

mod export;
mod grid;
mod histogram;
mod ratio;

pub use export::{rb_csv_string, write_rb_csv};
pub use grid::{Grid, Placement};
pub use histogram::{estimate_density, estimate_density_weighted, DensityHistogram, HistogramAccumulator};
pub use ratio::{
    assess_event, moving_average_smooth, relative_belief, EstimateSummary, HypothesisAssessment, Interval,
    RelativeBeliefResult,
};

/// Default number of bins for quantities on `(0, 1]`.
pub const DEFAULT_UNIT_BINS: usize = 25;
