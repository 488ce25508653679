mod common;

use common::{brute_auc, two_condition};
use proptest::prelude::*;
use rand::SeedableRng;
use rbroc::binormal::{
    auc_binormal, finite_cutoff_condition, BinormalData, BinormalLaw, BinormalParams, BinormalSampler, SufficientStats,
    VarianceMode,
};
use rbroc::dp::{process_auc, DpModelSpec, ProcessLaw, TruncatedProcess, UniqueValueStats};
use rbroc::elicitation::{elicit_beta, elicit_dp_concentration, elicit_normal_gamma, NormalGammaParams};
use rbroc::engine::JointSampler;
use rbroc::mc::McRng;
use rbroc::rb::{estimate_density, relative_belief, Grid};
use statrs::distribution::{ContinuousCDF, Normal};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn histogram_mass_is_conserved(draws in prop::collection::vec(-2.0f64..3.0, 1..300), bins in 2usize..40) {
        let grid = Grid::unit(bins).unwrap();
        let h = estimate_density(&draws, &grid).unwrap();
        prop_assert!((h.total_mass() - 1.0).abs() < 1e-12);
        let outside = draws.iter().filter(|&&x| x <= 0.0 || x > 1.0).count() as u64;
        prop_assert_eq!(h.clamped, outside);
    }

    #[test]
    fn rb_argmax_invariant_under_increasing_affine_maps(
        prior in prop::collection::vec((0usize..20, 0.1f64..0.9), 50..200),
        post in prop::collection::vec((0usize..20, 0.1f64..0.9), 50..200),
        scale in 0.01f64..100.0,
        shift in -50.0f64..50.0,
    ) {
        let g = Grid::new(-1.0, 1.0, 20).unwrap();
        let h = Grid::new(shift - scale, shift + scale, 20).unwrap();
        let at = |v: &[(usize, f64)], f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            v.iter().map(|&(i, u)| f(g.lower_edge(i) + u * g.width())).collect()
        };
        let map = |x: f64| shift + scale * x;
        let r1 = relative_belief(
            &estimate_density(&at(&prior, &|x| x), &g).unwrap(),
            &estimate_density(&at(&post, &|x| x), &g).unwrap(),
        ).unwrap();
        let r2 = relative_belief(
            &estimate_density(&at(&prior, &map), &h).unwrap(),
            &estimate_density(&at(&post, &map), &h).unwrap(),
        ).unwrap();
        prop_assert_eq!(r1.estimate_bin, r2.estimate_bin);
        prop_assert_eq!(r1.plausible, r2.plausible);
    }

    #[test]
    fn auc_sign_follows_mean_order(
        mu_nd in -5.0f64..5.0, mu_d in -5.0f64..5.0, s_nd in 0.1f64..5.0, s_d in 0.1f64..5.0,
    ) {
        prop_assume!((mu_d - mu_nd).abs() > 1e-6);
        let p = BinormalParams::new(mu_nd, mu_d, s_nd, s_d).unwrap();
        prop_assert_eq!(auc_binormal(&p) > 0.5, mu_d > mu_nd);
    }

    #[test]
    fn auc_increases_as_sigma_d_shrinks(
        mu_nd in -5.0f64..5.0, gap in 0.1f64..3.0, s_nd in 0.5f64..5.0, s_d in 0.5f64..5.0, k in 1.1f64..3.0,
    ) {
        let p = BinormalParams::new(mu_nd, mu_nd + gap, s_nd, s_d).unwrap();
        let q = BinormalParams::new(mu_nd, mu_nd + gap, s_nd, s_d / k).unwrap();
        prop_assert!(auc_binormal(&q) > auc_binormal(&p));
    }

    #[test]
    fn auc_decreases_in_sigma_ratio_at_fixed_standardised_gap(
        a in 0.1f64..3.0, b in 0.1f64..3.0, k in 1.1f64..3.0,
    ) {
        let p = BinormalParams::new(0.0, a, b, 1.0).unwrap();
        let q = BinormalParams::new(0.0, a, b * k, 1.0).unwrap();
        prop_assert!(auc_binormal(&q) < auc_binormal(&p));
    }

    #[test]
    fn finite_cutoff_condition_matches_two_condition_check(
        mu_nd in -3.0f64..3.0, mu_d in -3.0f64..3.0, s_nd in 0.2f64..3.0, s_d in 0.2f64..3.0, w in 0.01f64..0.99,
    ) {
        let p = BinormalParams::new(mu_nd, mu_d, s_nd, s_d).unwrap();
        if let Some(expected) = two_condition(&p, w) {
            prop_assert_eq!(finite_cutoff_condition(&p, w), expected);
        }
    }

    #[test]
    fn process_auc_matches_double_sum(
        nd in prop::collection::vec((0u8..12, 0.0f64..1.0), 1..60),
        d in prop::collection::vec((0u8..12, 0.0f64..1.0), 1..60),
    ) {
        prop_assume!(nd.iter().any(|p| p.1 > 0.0) && d.iter().any(|p| p.1 > 0.0));
        let make = |v: &[(u8, f64)]| {
            TruncatedProcess::new(v.iter().map(|p| p.0 as f64).collect(), v.iter().map(|p| p.1).collect()).unwrap()
        };
        let (a, b) = (make(&nd), make(&d));
        prop_assert!((process_auc(&a, &b) - brute_auc(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn unique_stats_match_hash_dedup(x in prop::collection::vec(0u16..40, 1..100)) {
        let values: Vec<f64> = x.iter().map(|&v| v as f64 * 0.5).collect();
        let distinct: std::collections::BTreeSet<u16> = x.iter().copied().collect();
        let d: Vec<f64> = distinct.iter().map(|&v| v as f64 * 0.5).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let ss: f64 = d.iter().map(|v| (v - mean).powi(2)).sum();
        let u = UniqueValueStats::from_data(&values);
        prop_assert_eq!(u.n_unique, d.len() as u64);
        prop_assert!((u.mean - mean).abs() < 1e-12 && (u.s2 - ss).abs() < 1e-9);
    }

    #[test]
    fn elicitation_is_deterministic(l in 0.0f64..0.5, width in 0.05f64..0.5) {
        let u = (l + width).min(1.0);
        let a = elicit_beta(l, u, 0.99, None).unwrap();
        let b = elicit_beta(l, u, 0.99, None).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn normal_gamma_and_dp_elicitation_are_deterministic() {
    let a = elicit_normal_gamma(20.0, 70.0, 20.0, 50.0, 0.99).unwrap();
    let b = elicit_normal_gamma(20.0, 70.0, 20.0, 50.0, 0.99).unwrap();
    assert_eq!(a.params.lambda2.to_bits(), b.params.lambda2.to_bits());
    let a = elicit_dp_concentration(0.25, 0.018).unwrap();
    let b = elicit_dp_concentration(0.25, 0.018).unwrap();
    assert_eq!(a.a.to_bits(), b.a.to_bits());
}

#[test]
fn conditioning_prior_or_posterior_agree() {
    let prior = NormalGammaParams::new(0.0, 0.5, 1.787, 1.056).unwrap();
    let data = BinormalData {
        nd: SufficientStats::new(10, 0.3, 12.0).unwrap(),
        d: SufficientStats::new(8, 0.5, 9.0).unwrap(),
    };
    let s = BinormalSampler::new(BinormalLaw::posterior(&prior, &data, VarianceMode::Equal));
    let mut rng = McRng::seed_from_u64(5);
    let n = 40_000;
    let weighted: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let (d, w) = s.draw_conditional(&mut (), &mut rng, 0.5).unwrap();
            (s.auc(&d), w)
        })
        .collect();
    let sw: f64 = weighted.iter().map(|p| p.1).sum();
    let is_mean = weighted.iter().map(|p| p.0 * p.1).sum::<f64>() / sw;
    let is_se = (weighted.iter().map(|p| (p.1 * (p.0 - is_mean)).powi(2)).sum::<f64>()).sqrt() / sw;
    let mut kept = Vec::new();
    while kept.len() < n {
        let d = s.draw(&mut (), &mut rng);
        if d.params.mu_d > d.params.mu_nd {
            kept.push(s.auc(&d));
        }
    }
    let m = kept.iter().sum::<f64>() / n as f64;
    let var = kept.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64 + is_se * is_se).sqrt();
    assert!((m - is_mean).abs() < 3.0 * se, "{m} vs {is_mean} (se {se})");
}

#[test]
fn posterior_base_measure_identity() {
    let spec = DpModelSpec::new(5.0, NormalGammaParams::new(0.0, 0.5, 2.0, 2.0).unwrap()).unwrap();
    let data = [-1.0, -0.5, 0.0, 0.0, 0.3, 1.2, 2.0];
    let law = ProcessLaw::posterior(&spec, &data);
    let z = Normal::new(0.0, 1.0).unwrap();
    let n = data.len() as f64;
    let mut rng = McRng::seed_from_u64(9);
    for c in [-0.7, 0.0, 0.5, 1.5] {
        let ecdf = data.iter().filter(|&&x| x <= c).count() as f64 / n;
        let draws = 4000;
        let diffs: Vec<f64> = (0..draws)
            .map(|_| {
                let (p, mu, sigma) = law.sample_with_base(&mut rng);
                let h = (spec.a * z.cdf((c - mu) / sigma) + n * ecdf) / (spec.a + n);
                p.cdf(c) - h
            })
            .collect();
        let m = diffs.iter().sum::<f64>() / draws as f64;
        let sd = (diffs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws as f64 - 1.0)).sqrt();
        assert!(m.abs() < 3.0 * sd / (draws as f64).sqrt(), "c={c}: {m} (sd {sd})");
    }
}
