//! Writes the bundled synthetic datasets under `data/`.
//!
//! `binormal_example.csv` holds normal-quantile samples rescaled to the
//! reference summary statistics exactly. `covid_synthetic.csv` holds ages
//! from scaled-beta quantiles matched to per-group moments and range.

use std::fmt::Write as _;
use std::path::Path;

use statrs::distribution::{Beta, ContinuousCDF, Normal};

fn normal_sample(n: usize, mean: f64, ss: f64) -> Vec<f64> {
    let z = Normal::new(0.0, 1.0).unwrap();
    let q: Vec<f64> = (0..n).map(|i| z.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
    let m = q.iter().sum::<f64>() / n as f64;
    let s = q.iter().map(|v| (v - m).powi(2)).sum::<f64>().sqrt();
    q.iter().map(|v| mean + (v - m) / s * ss.sqrt()).collect()
}

fn beta_ages(n: usize, mean: f64, sd: f64, lo: f64, hi: f64) -> Vec<f64> {
    let range = hi - lo;
    let m = (mean - lo) / range;
    let v = (sd / range).powi(2);
    let k = m * (1.0 - m) / v - 1.0;
    let b = Beta::new(m * k, (1.0 - m) * k).unwrap();
    let mut x: Vec<f64> = (0..n)
        .map(|i| (lo + range * b.inverse_cdf((i as f64 + 0.5) / n as f64)).round().max(1.0))
        .collect();
    x[0] = lo;
    x[n - 1] = hi;
    x
}

fn summary(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    std::fs::create_dir_all(&dir)?;

    let mut out = String::from("group,value\n");
    for (group, n, mean, ss) in [("nd", 25, -0.072, 19.638), ("d", 20, 0.976, 16.778)] {
        for v in normal_sample(n, mean, ss) {
            writeln!(out, "{group},{v:.6}").unwrap();
        }
    }
    std::fs::write(dir.join("binormal_example.csv"), out)?;

    let mut out = String::from("group,value,stratum\n");
    let groups = [
        ("nd", "male", 594, 48.81, 17.72, 0.5, 85.0),
        ("d", "male", 52, 68.46, 13.66, 36.0, 89.0),
        ("nd", "female", 465, 48.69, 18.73, 2.0, 96.0),
        ("d", "female", 25, 77.36, 12.12, 48.0, 95.0),
    ];
    for (group, stratum, n, mean, sd, lo, hi) in groups {
        let x = beta_ages(n, mean, sd, lo, hi);
        let (m, s) = summary(&x);
        println!("{stratum} {group}: n {n} mean {m:.2} sd {s:.2}");
        for v in x {
            writeln!(out, "{group},{v},{stratum}").unwrap();
        }
    }
    std::fs::write(dir.join("covid_synthetic.csv"), out)
}
