#![allow(dead_code)]

use rbroc::binormal::BinormalParams;
use rbroc::dp::TruncatedProcess;

/// `sum_i sum_j p_ND,i p_D,j [x_D,j > x_ND,i]`.
pub fn brute_auc(nd: &TruncatedProcess, d: &TruncatedProcess) -> f64 {
    let mut total = 0.0;
    for (x, p) in nd.atoms().iter().zip(nd.weights()) {
        for (y, q) in d.atoms().iter().zip(d.weights()) {
            if y > x {
                total += p * q;
            }
        }
    }
    total
}

/// Existence of a real stationary point of the error, from the log-density
/// quadratic, together with mu_D >= mu_ND. `None` near the boundary.
pub fn two_condition(p: &BinormalParams, w: f64) -> Option<bool> {
    let (a_nd, a_d) = (p.sigma_nd * p.sigma_nd, p.sigma_d * p.sigma_d);
    let l = (w * p.sigma_nd / ((1.0 - w) * p.sigma_d)).ln();
    let a = 0.5 / a_nd - 0.5 / a_d;
    let b = p.mu_d / a_d - p.mu_nd / a_nd;
    let c = 0.5 * p.mu_nd * p.mu_nd / a_nd - 0.5 * p.mu_d * p.mu_d / a_d + l;
    let disc = b * b - 4.0 * a * c;
    if disc.abs() < 1e-9 * (b * b).max(1.0) {
        return None;
    }
    Some(p.mu_d >= p.mu_nd && disc >= 0.0)
}
