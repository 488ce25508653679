//! Confusion-matrix rates, prevalence-weighted composites, the AUC and cutoff
//! selection for a pair of distributions (nondiseased, diseased).
//!
//! A subject is classified positive when its score is strictly greater than
//! the cutoff.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::criterion::{select_cutoff, CutoffCriterion, MinError, WeightedError};
use crate::error::{Result, RocError};
use crate::special::{norm_cdf, norm_pdf, simpson};

/// A cutoff value, possibly one of the two "classify everyone the same way"
/// sentinels.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Cutoff {
    /// Classify everyone positive.
    NegInf,
    Finite(f64),
    /// Classify everyone negative.
    PosInf,
}

impl Cutoff {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Cutoff::Finite(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cutoff::Finite(_))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Cutoff::NegInf => f64::NEG_INFINITY,
            Cutoff::Finite(c) => *c,
            Cutoff::PosInf => f64::INFINITY,
        }
    }
}

impl Serialize for Cutoff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cutoff::NegInf => s.serialize_str("-inf"),
            Cutoff::Finite(c) => s.serialize_f64(*c),
            Cutoff::PosInf => s.serialize_str("+inf"),
        }
    }
}

/// False discovery rate; `None` when nobody is classified positive.
pub fn fdr(w: f64, fnr: f64, fpr: f64) -> Option<f64> {
    let num = (1.0 - w) * fpr;
    let pos = w * (1.0 - fnr) + num;
    (pos > 0.0).then(|| num / pos)
}

/// False nondiscovery rate; `None` when nobody is classified negative.
pub fn fndr(w: f64, fnr: f64, fpr: f64) -> Option<f64> {
    let num = w * fnr;
    let neg = num + (1.0 - w) * (1.0 - fpr);
    (neg > 0.0).then(|| num / neg)
}

/// The five error characteristics at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorProfile {
    pub cutoff: Cutoff,
    pub w: f64,
    pub fnr: f64,
    pub fpr: f64,
    pub error: f64,
    pub fdr: Option<f64>,
    pub fndr: Option<f64>,
}

impl ErrorProfile {
    pub fn from_rates(cutoff: Cutoff, w: f64, fnr: f64, fpr: f64) -> Self {
        ErrorProfile {
            cutoff,
            w,
            fnr,
            fpr,
            error: w * fnr + (1.0 - w) * fpr,
            fdr: fdr(w, fnr, fpr),
            fndr: fndr(w, fnr, fpr),
        }
    }
}

/// Right-continuous step cdf with atoms at strictly increasing points.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    points: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl StepCdf {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(RocError::invalid("step cdf needs matching, nonempty points and probabilities"));
        }
        if points.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(RocError::invalid("step cdf points must be strictly increasing"));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(RocError::invalid("step cdf probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(RocError::invalid(format!("step cdf probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let mut cum: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // the last step reaches 1 exactly, whatever the rounding
        *cum.last_mut().unwrap() = 1.0;
        Ok(StepCdf { points, probs, cum })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.points.partition_point(|&p| p <= x) {
            0 => 0.0,
            k => self.cum[k - 1].min(1.0),
        }
    }
}

/// A univariate law with an evaluable cdf.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Discrete(StepCdf),
    Normal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    /// The law with cdf `F^q` for a continuous base `F`.
    Power { base: Box<Law>, q: f64 },
}

impl Law {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Discrete(s) => s.cdf(x),
            Law::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Law::Power { base, q } => base.cdf(x).powf(*q),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Law::Discrete(_))
    }

    fn pdf(&self, x: f64) -> f64 {
        match self {
            Law::Discrete(_) => 0.0,
            Law::Normal { mu, sigma } => norm_pdf((x - mu) / sigma) / sigma,
            Law::Uniform { lo, hi } => {
                if (*lo..=*hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Law::Power { base, q } => q * base.cdf(x).powf(q - 1.0) * base.pdf(x),
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            Law::Discrete(s) => (s.points[0], *s.points.last().unwrap()),
            Law::Normal { mu, sigma } => (mu - 12.0 * sigma, mu + 12.0 * sigma),
            Law::Uniform { lo, hi } => (*lo, *hi),
            Law::Power { base, .. } => base.range(),
        }
    }
}

/// The nondiseased and diseased score distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPair {
    pub nd: Law,
    pub d: Law,
}

impl DistributionPair {
    pub fn new(nd: Law, d: Law) -> Self {
        DistributionPair { nd, d }
    }

    /// `(fnr, fpr)` at a cutoff.
    pub fn rates(&self, c: Cutoff) -> (f64, f64) {
        match c {
            Cutoff::NegInf => (0.0, 1.0),
            Cutoff::PosInf => (1.0, 0.0),
            Cutoff::Finite(c) => (self.d.cdf(c), 1.0 - self.nd.cdf(c)),
        }
    }
}

pub fn error_profile(pair: &DistributionPair, w: f64, c: Cutoff) -> Result<ErrorProfile> {
    check_w(w)?;
    let (fnr, fpr) = pair.rates(c);
    Ok(ErrorProfile::from_rates(c, w, fnr, fpr))
}

fn check_w(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(RocError::invalid(format!("prevalence {w} outside [0, 1]")))
    }
}

/// Sum over the nondiseased atoms `c` of `(1 - F_D(c)) p_ND(c)`.
pub fn auc_discrete(nd: &StepCdf, d: &Law) -> f64 {
    nd.points
        .iter()
        .zip(&nd.probs)
        .map(|(&c, &p)| (1.0 - d.cdf(c)) * p)
        .sum()
}

/// `P(X_D > X_ND)`. Discrete pairs use the exact atom sum; continuous pairs
/// integrate `(1 - F_D) f_ND` with composite Simpson quadrature.
pub fn auc(pair: &DistributionPair) -> Result<f64> {
    match (&pair.nd, &pair.d) {
        (Law::Discrete(nd), d @ Law::Discrete(_)) => Ok(auc_discrete(nd, d)),
        (nd, d) if !nd.is_discrete() && !d.is_discrete() => {
            let (a, b) = nd.range();
            Ok(simpson(|x| (1.0 - d.cdf(x)) * nd.pdf(x), a, b, 20_000))
        }
        _ => Err(RocError::invalid("auc needs two discrete or two continuous laws")),
    }
}

/// Cutoff minimising Error(c) over `candidates` and the two sentinels.
pub fn optimal_cutoff_grid(pair: &DistributionPair, w: f64, candidates: &[f64]) -> Result<(Cutoff, ErrorProfile)> {
    optimal_cutoff_with(&MinError, pair, w, candidates)
}

/// Cutoff minimising `w0 FNR + (1 - w0) FPR`; returns the cutoff and the
/// minimised value.
pub fn weighted_error_cutoff(pair: &DistributionPair, w0: f64, candidates: &[f64]) -> Result<(Cutoff, f64)> {
    check_w(w0)?;
    let (c, _) = optimal_cutoff_with(&WeightedError { w0 }, pair, w0, candidates)?;
    let (fnr, fpr) = pair.rates(c);
    Ok((c, w0 * fnr + (1.0 - w0) * fpr))
}

/// Cutoff chosen by any criterion, with its profile under prevalence `w`.
pub fn optimal_cutoff_with(
    criterion: &dyn CutoffCriterion,
    pair: &DistributionPair,
    w: f64,
    candidates: &[f64],
) -> Result<(Cutoff, ErrorProfile)> {
    check_w(w)?;
    if let Some(c0) = criterion.fixed_cutoff() {
        let c = Cutoff::Finite(c0);
        return Ok((c, error_profile(pair, w, c)?));
    }
    let rates = candidates.iter().map(|&c| {
        let (fnr, fpr) = pair.rates(Cutoff::Finite(c));
        (c, fnr, fpr)
    });
    let (c, _) = select_cutoff(criterion, w, rates)
        .ok_or_else(|| RocError::invalid(format!("criterion {} undefined at every cutoff", criterion.name())))?;
    Ok((c, error_profile(pair, w, c)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub cutoff: f64,
}

/// `(FPR, TPR)` at each candidate, sorted by FPR then TPR.
pub fn roc_points(pair: &DistributionPair, candidates: &[f64]) -> Vec<RocPoint> {
    let mut pts: Vec<RocPoint> = candidates
        .iter()
        .map(|&c| RocPoint {
            fpr: 1.0 - pair.nd.cdf(c),
            tpr: 1.0 - pair.d.cdf(c),
            cutoff: c,
        })
        .collect();
    pts.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    pts
}

/// Trapezoid area under the points, closed with (0, 0) and (1, 1).
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    let mut xs = vec![(0.0, 0.0)];
    xs.extend(points.iter().map(|p| (p.fpr, p.tpr)));
    xs.push((1.0, 1.0));
    xs.windows(2).map(|s| (s[1].0 - s[0].0) * (s[1].1 + s[0].1) / 2.0).sum()
}

/// Writes `fpr,tpr,cutoff` rows.
pub fn write_roc_csv<W: Write>(points: &[RocPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
