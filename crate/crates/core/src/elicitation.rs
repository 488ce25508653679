//! Hyperparameters from interval statements held with virtual certainty.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RocError};
use crate::special::{beta_cdf, gamma_cdf, gamma_unit_quantile, norm_quantile};

/// Beta(alpha1, alpha2) prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl BetaParams {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha2 > 0.0 && alpha1.is_finite() && alpha2.is_finite()) {
            return Err(RocError::invalid(format!("beta parameters must be positive, got ({alpha1}, {alpha2})")));
        }
        Ok(BetaParams { alpha1, alpha2 })
    }

    /// beta(1 + tau xi, 1 + tau (1 - xi)).
    pub fn from_mode(xi: f64, tau: f64) -> Self {
        BetaParams {
            alpha1: 1.0 + tau * xi,
            alpha2: 1.0 + tau * (1.0 - xi),
        }
    }

    pub fn tau(&self) -> f64 {
        self.alpha1 + self.alpha2 - 2.0
    }

    pub fn mode(&self) -> Option<f64> {
        (self.alpha1 > 1.0 && self.alpha2 > 1.0).then(|| (self.alpha1 - 1.0) / self.tau())
    }

    pub fn mean(&self) -> f64 {
        self.alpha1 / (self.alpha1 + self.alpha2)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        beta_cdf(x, self.alpha1, self.alpha2)
    }

    pub fn content(&self, l: f64, u: f64) -> f64 {
        self.cdf(u) - self.cdf(l)
    }

    /// Conjugate update with `n_d` diseased out of `n_d + n_nd`.
    pub fn update(&self, n_d: u64, n_nd: u64) -> Self {
        BetaParams {
            alpha1: self.alpha1 + n_d as f64,
            alpha2: self.alpha2 + n_nd as f64,
        }
    }
}

/// Prior for the prevalence: a beta law, or the value known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrevalencePrior {
    Known { w: f64 },
    Beta(BetaParams),
}

/// Result of [`elicit_beta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaElicitation {
    pub xi: f64,
    /// Infinite when the prevalence is known exactly.
    pub tau: f64,
    pub content: f64,
    pub prior: PrevalencePrior,
}

const BETA_CONTENT_TOL: f64 = 1e-6;

/// Smallest concentration `tau` such that beta(1 + tau xi, 1 + tau (1 - xi))
/// gives `[l, u]` probability at least `gamma`.
pub fn elicit_beta(l: f64, u: f64, gamma: f64, xi: Option<f64>) -> Result<BetaElicitation> {
    if !(0.0 <= l && l <= u && u <= 1.0) {
        return Err(RocError::Elicitation(format!("need 0 <= l <= u <= 1, got [{l}, {u}]")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(RocError::Elicitation(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let xi = xi.unwrap_or(0.5 * (l + u));
    if !(l..=u).contains(&xi) {
        return Err(RocError::Elicitation(format!("mode {xi} outside [{l}, {u}]")));
    }
    if l == u {
        return Ok(BetaElicitation {
            xi,
            tau: f64::INFINITY,
            content: 1.0,
            prior: PrevalencePrior::Known { w: l },
        });
    }
    let content = |tau: f64| BetaParams::from_mode(xi, tau).content(l, u);
    let done = |tau: f64, c: f64| BetaElicitation {
        xi,
        tau,
        content: c,
        prior: PrevalencePrior::Beta(BetaParams::from_mode(xi, tau)),
    };

    let c0 = content(0.0);
    if c0 >= gamma {
        return Ok(done(0.0, c0));
    }
    if gamma == 1.0 {
        return Err(RocError::Elicitation(
            "content 1 is unreachable for l < u; use l = u for a known prevalence".into(),
        ));
    }
    let mut lo = 0.0;
    let mut hi = 1000.0;
    while content(hi) < gamma {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(RocError::Elicitation(format!("content {gamma} unreachable for [{l}, {u}]")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = content(mid);
        if (gamma..=gamma + BETA_CONTENT_TOL).contains(&c) {
            return Ok(done(mid, c));
        }
        if c < gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(done(hi, content(hi)))
}

/// Normal-gamma prior: mu | sigma² ~ N(mu0, tau0² sigma²), 1/sigma² ~ gamma(lambda1, lambda2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaParams {
    pub mu0: f64,
    pub tau0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl NormalGammaParams {
    pub fn new(mu0: f64, tau0: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(tau0 > 0.0 && lambda1 > 0.0 && lambda2 > 0.0 && mu0.is_finite()) {
            return Err(RocError::invalid(format!(
                "normal-gamma parameters invalid: mu0={mu0}, tau0={tau0}, lambda1={lambda1}, lambda2={lambda2}"
            )));
        }
        Ok(NormalGammaParams {
            mu0,
            tau0,
            lambda1,
            lambda2,
        })
    }

    /// Prior probability that sigma lies in `(lo, hi)`.
    pub fn sigma_content(&self, lo: f64, hi: f64) -> f64 {
        let g = |x: f64| gamma_cdf(x, self.lambda1, self.lambda2);
        g(1.0 / (lo * lo)) - g(1.0 / (hi * hi))
    }

    /// Mode of the implied prior density of sigma.
    pub fn sigma_mode(&self) -> f64 {
        (2.0 * self.lambda2 / (2.0 * self.lambda1 + 1.0)).sqrt()
    }

    /// Equal-tailed `gamma` interval for sigma.
    pub fn sigma_interval(&self, gamma: f64) -> (f64, f64) {
        let q = |p: f64| gamma_unit_quantile(self.lambda1, p) / self.lambda2;
        ((1.0 / q((1.0 + gamma) / 2.0)).sqrt(), (1.0 / q((1.0 - gamma) / 2.0)).sqrt())
    }
}

/// Result of [`elicit_normal_gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalGammaElicitation {
    pub params: NormalGammaParams,
    /// Prior probability that sigma lies in `(l0/z, u0/z)`.
    pub content: f64,
    /// Residuals of the two quantile equations.
    pub residual_upper: f64,
    pub residual_lower: f64,
    pub iterations: usize,
}

pub const NG_MAX_ITER: usize = 500;
const NG_CONTENT_TOL: f64 = 1e-4;

/// Normal-gamma hyperparameters from `m1 <= mu <= m2` and `l0 <= sigma <= u0`
/// statements, both held with probability `gamma`.
pub fn elicit_normal_gamma(m1: f64, m2: f64, l0: f64, u0: f64, gamma: f64) -> Result<NormalGammaElicitation> {
    elicit_normal_gamma_with(m1, m2, l0, u0, gamma, NG_MAX_ITER)
}

pub fn elicit_normal_gamma_with(
    m1: f64,
    m2: f64,
    l0: f64,
    u0: f64,
    gamma: f64,
    max_iter: usize,
) -> Result<NormalGammaElicitation> {
    if !(m1 < m2) {
        return Err(RocError::Elicitation(format!("need m1 < m2, got ({m1}, {m2})")));
    }
    if !(0.0 < l0 && l0 < u0) {
        return Err(RocError::Elicitation(format!("need 0 < l0 < u0, got ({l0}, {u0})")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(RocError::Elicitation(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let z = norm_quantile((1.0 + gamma) / 2.0);
    let x1 = z * z / (l0 * l0);
    let x2 = z * z / (u0 * u0);
    let p_hi = (1.0 + gamma) / 2.0;
    let p_lo = (1.0 - gamma) / 2.0;

    let mut lambda1 = 2.0;
    let mut lambda2 = gamma_unit_quantile(lambda1, p_hi) / x1;
    let mut content = f64::NAN;
    for it in 1..=max_iter {
        lambda2 = gamma_unit_quantile(lambda1, p_hi) / x1;
        // G(lambda2 x2; lambda1, 1) decreases in lambda1
        let f = |l1: f64| gamma_cdf(lambda2 * x2, l1, 1.0) - p_lo;
        let (mut lo, mut hi) = (1e-6, 1.0);
        while f(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e8 {
                return Err(RocError::NonConvergence {
                    iterations: it,
                    last: format!("lambda1 bracket exceeded at lambda2={lambda2}"),
                });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        lambda1 = 0.5 * (lo + hi);
        content = gamma_cdf(lambda2 * x1, lambda1, 1.0) - gamma_cdf(lambda2 * x2, lambda1, 1.0);
        if (content - gamma).abs() < NG_CONTENT_TOL {
            let params = NormalGammaParams {
                mu0: 0.5 * (m1 + m2),
                tau0: (m2 - m1) / (2.0 * u0),
                lambda1,
                lambda2,
            };
            return Ok(NormalGammaElicitation {
                params,
                content,
                residual_upper: gamma_cdf(x1, lambda1, lambda2) - p_hi,
                residual_lower: gamma_cdf(x2, lambda1, lambda2) - p_lo,
                iterations: it,
            });
        }
    }
    Err(RocError::NonConvergence {
        iterations: max_iter,
        last: format!("lambda1={lambda1}, lambda2={lambda2}, content={content}"),
    })
}

/// Dirichlet process concentration and the bound it achieves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpConcentration {
    pub a: f64,
    pub epsilon: f64,
    pub achieved_bound: f64,
}

fn dp_miss(a: f64, epsilon: f64, r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    let (p, q) = (a * r, a * (1.0 - r));
    let hi = (r + epsilon).min(1.0);
    let lo = (r - epsilon).max(0.0);
    (1.0 - (beta_cdf(hi, p, q) - beta_cdf(lo, p, q))).max(0.0)
}

/// Upper bound on the probability that a DP(a, H) draw differs from `H` by
/// more than `epsilon` on a set: the supremum over `r` of the beta(a r, a (1-r))
/// mass outside `[r - epsilon, r + epsilon]`.
pub fn dp_bound(a: f64, epsilon: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(RocError::invalid(format!("concentration must be positive, got {a}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RocError::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    const N: usize = 1000;
    let mut best = 0.0;
    let mut best_i = 0;
    for i in 0..=N {
        let v = dp_miss(a, epsilon, i as f64 / N as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // refine between the neighbours of the coarse argmax
    let lo = best_i.saturating_sub(1) as f64 / N as f64;
    let hi = (best_i + 1).min(N) as f64 / N as f64;
    for j in 0..=200 {
        let r = lo + (hi - lo) * j as f64 / 200.0;
        best = f64::max(best, dp_miss(a, epsilon, r));
    }
    Ok(best)
}

/// Smallest `a` on a 0.1 lattice with `dp_bound(a, epsilon) <= target`.
pub fn elicit_dp_concentration(epsilon: f64, target: f64) -> Result<DpConcentration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(RocError::invalid(format!("target bound must lie in (0, 1), got {target}")));
    }
    let ok = |k: u64| -> Result<bool> { Ok(dp_bound(k as f64 / 10.0, epsilon)? <= target) };
    let mut hi = 1u64;
    while !ok(hi)? {
        hi *= 2;
        if hi > 1 << 30 {
            return Err(RocError::Elicitation(format!("no concentration reaches bound {target}")));
        }
    }
    let mut lo = hi / 2; // lo fails unless it is 0
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let a = hi as f64 / 10.0;
    Ok(DpConcentration {
        a,
        epsilon,
        achieved_bound: dp_bound(a, epsilon)?,
    })
}
