//! Cutoff selection criteria, registered by name.
//!
//! A criterion turns the pair of rates `(fnr, fpr)` at a cutoff, together with
//! the prevalence `w`, into an objective to minimise. Names are parsed by
//! [`parse_criterion`]: `error`, `weighted:<w0>`, `fndr`, `fixed:<c0>`.

use std::fmt;

use crate::error::{Result, RocError};
use crate::metrics::{fndr, Cutoff};

/// A rule for choosing the cutoff from the rates it induces.
pub trait CutoffCriterion: Send + Sync + fmt::Debug {
    /// Registry name, e.g. `weighted:0.5`.
    fn name(&self) -> String;

    /// Objective at a cutoff with rates `(fnr, fpr)` under prevalence `w`;
    /// `None` where it is undefined.
    fn objective(&self, fnr: f64, fpr: f64, w: f64) -> Option<f64>;

    /// Whether exact ties among finite cutoffs go to the largest one.
    fn prefer_largest(&self) -> bool {
        false
    }

    /// A criterion that ignores the data and always returns this cutoff.
    fn fixed_cutoff(&self) -> Option<f64> {
        None
    }
}

/// Minimise Error(c) = w FNR + (1 - w) FPR.
#[derive(Debug, Clone, Copy)]
pub struct MinError;

impl CutoffCriterion for MinError {
    fn name(&self) -> String {
        "error".into()
    }

    fn objective(&self, fnr: f64, fpr: f64, w: f64) -> Option<f64> {
        Some(w * fnr + (1.0 - w) * fpr)
    }
}

/// Minimise w0 FNR + (1 - w0) FPR for a fixed weight; 1/2 is Youden's rule.
#[derive(Debug, Clone, Copy)]
pub struct WeightedError {
    pub w0: f64,
}

impl CutoffCriterion for WeightedError {
    fn name(&self) -> String {
        format!("weighted:{}", self.w0)
    }

    fn objective(&self, fnr: f64, fpr: f64, _w: f64) -> Option<f64> {
        Some(self.w0 * fnr + (1.0 - self.w0) * fpr)
    }

    // with no weight on FNR the most specific cutoff wins
    fn prefer_largest(&self) -> bool {
        self.w0 == 0.0
    }
}

/// Minimise the false nondiscovery rate.
#[derive(Debug, Clone, Copy)]
pub struct MinFndr;

impl CutoffCriterion for MinFndr {
    fn name(&self) -> String {
        "fndr".into()
    }

    fn objective(&self, fnr: f64, fpr: f64, w: f64) -> Option<f64> {
        fndr(w, fnr, fpr)
    }

    fn prefer_largest(&self) -> bool {
        true
    }
}

/// A cutoff fixed in advance.
#[derive(Debug, Clone, Copy)]
pub struct FixedCutoff {
    pub c0: f64,
}

impl CutoffCriterion for FixedCutoff {
    fn name(&self) -> String {
        format!("fixed:{}", self.c0)
    }

    fn objective(&self, fnr: f64, fpr: f64, w: f64) -> Option<f64> {
        Some(w * fnr + (1.0 - w) * fpr)
    }

    fn fixed_cutoff(&self) -> Option<f64> {
        Some(self.c0)
    }
}

type Builder = fn(Option<f64>) -> Result<Box<dyn CutoffCriterion>>;

const REGISTRY: &[(&str, Builder)] = &[
    ("error", |arg| {
        no_arg("error", arg)?;
        Ok(Box::new(MinError))
    }),
    ("weighted", |arg| {
        let w0 = arg.ok_or_else(|| RocError::Config("weighted criterion needs a weight, e.g. weighted:0.5".into()))?;
        if !(0.0..=1.0).contains(&w0) {
            return Err(RocError::Config(format!("weight {w0} outside [0, 1]")));
        }
        Ok(Box::new(WeightedError { w0 }))
    }),
    ("fndr", |arg| {
        no_arg("fndr", arg)?;
        Ok(Box::new(MinFndr))
    }),
    ("fixed", |arg| {
        let c0 = arg.ok_or_else(|| RocError::Config("fixed criterion needs a cutoff, e.g. fixed:60".into()))?;
        if !c0.is_finite() {
            return Err(RocError::Config("fixed cutoff must be finite".into()));
        }
        Ok(Box::new(FixedCutoff { c0 }))
    }),
];

fn no_arg(name: &str, arg: Option<f64>) -> Result<()> {
    match arg {
        None => Ok(()),
        Some(_) => Err(RocError::Config(format!("criterion '{name}' takes no argument"))),
    }
}

/// Names accepted by [`parse_criterion`].
pub fn criterion_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// Builds a criterion from `name` or `name:argument`.
pub fn parse_criterion(spec: &str) -> Result<Box<dyn CutoffCriterion>> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => {
            let v: f64 = a
                .trim()
                .parse()
                .map_err(|_| RocError::Config(format!("bad criterion argument '{a}' in '{spec}'")))?;
            (n.trim(), Some(v))
        }
        None => (spec, None),
    };
    let (_, build) = REGISTRY.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        RocError::Config(format!(
            "unknown criterion '{name}' (expected one of {})",
            criterion_names().join(", ")
        ))
    })?;
    build(arg)
}

/// Chooses among candidate cutoffs given as `(cutoff, fnr, fpr)`.
///
/// Finite candidates are compared first, ties going to the smallest (or the
/// largest, per the criterion). A sentinel is chosen only when it is strictly
/// better than every finite candidate; between the two sentinels `+inf` wins
/// ties. Returns `None` when the objective is undefined everywhere.
pub fn select_cutoff(
    criterion: &dyn CutoffCriterion,
    w: f64,
    finite: impl IntoIterator<Item = (f64, f64, f64)>,
) -> Option<(Cutoff, f64)> {
    select_cutoff_with(criterion, w, finite, &[Cutoff::PosInf, Cutoff::NegInf])
}

/// [`select_cutoff`] with an explicit set of admissible sentinels.
pub fn select_cutoff_with(
    criterion: &dyn CutoffCriterion,
    w: f64,
    finite: impl IntoIterator<Item = (f64, f64, f64)>,
    sentinels: &[Cutoff],
) -> Option<(Cutoff, f64)> {
    let largest = criterion.prefer_largest();
    let mut best: Option<(f64, f64)> = None;
    for (c, fnr, fpr) in finite {
        let Some(v) = criterion.objective(fnr, fpr, w) else { continue };
        best = match best {
            None => Some((c, v)),
            Some((bc, bv)) => {
                let better = v < bv || (v == bv && if largest { c > bc } else { c < bc });
                if better {
                    Some((c, v))
                } else {
                    Some((bc, bv))
                }
            }
        };
    }
    let mut choice = best.map(|(c, v)| (Cutoff::Finite(c), v));
    for (sentinel, fnr, fpr) in [(Cutoff::PosInf, 1.0, 0.0), (Cutoff::NegInf, 0.0, 1.0)] {
        if !sentinels.contains(&sentinel) {
            continue;
        }
        if let Some(v) = criterion.objective(fnr, fpr, w) {
            if choice.is_none_or(|(_, bv)| v < bv) {
                choice = Some((sentinel, v));
            }
        }
    }
    choice
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_parses_names() {
        assert_eq!(parse_criterion("error").unwrap().name(), "error");
        assert_eq!(parse_criterion("weighted:0.7").unwrap().name(), "weighted:0.7");
        assert_eq!(parse_criterion(" fndr ").unwrap().name(), "fndr");
        assert_eq!(parse_criterion("fixed:60").unwrap().fixed_cutoff(), Some(60.0));
        for bad in ["youden", "weighted", "weighted:1.5", "weighted:x", "error:1", "fixed"] {
            assert!(matches!(parse_criterion(bad), Err(RocError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn ties_and_sentinels() {
        let cands = [(1.0, 0.2, 0.3), (2.0, 0.3, 0.2), (3.0, 0.9, 0.0), (4.0, 1.0, 0.0)];
        // equal weights: candidates 1 and 2 tie at 0.25
        let (c, v) = select_cutoff(&WeightedError { w0: 0.5 }, 0.5, cands).unwrap();
        assert_eq!((c, v), (Cutoff::Finite(1.0), 0.25));
        // zero weight: largest cutoff with the smallest FPR, +inf ties and loses
        let (c, _) = select_cutoff(&WeightedError { w0: 0.0 }, 0.5, cands).unwrap();
        assert_eq!(c, Cutoff::Finite(4.0));
        let cands = &cands[..2];
        // tiny prevalence makes classifying everyone negative strictly best
        let (c, v) = select_cutoff(&MinError, 0.01, cands.iter().copied()).unwrap();
        assert_eq!(c, Cutoff::PosInf);
        assert_eq!(v, 0.01);
        let (c, _) = select_cutoff(&MinError, 0.99, cands.iter().copied()).unwrap();
        assert_eq!(c, Cutoff::NegInf);
        assert_eq!(select_cutoff(&MinError, 0.5, []).unwrap().0, Cutoff::PosInf);
        let (c, _) = select_cutoff_with(&MinError, 0.99, cands.iter().copied(), &[Cutoff::PosInf]).unwrap();
        assert_eq!(c, Cutoff::Finite(1.0));
    }
}
