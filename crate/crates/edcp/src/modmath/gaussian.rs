/// Default truncation parameter: support is |x| ≤ √κ·σ.
pub const GAUSSIAN_KAPPA: f64 = 40.0;

fn g(sigma: f64, x: f64) -> f64 {
    (-std::f64::consts::PI * x * x / (sigma * sigma)).exp()
}

fn half_width(sigma: f64, kappa: f64) -> i64 {
    (kappa.sqrt() * sigma).floor() as i64
}

/// Truncated discrete Gaussian g_σ(x) = exp(−πx²/σ²), normalized over |x| ≤ √κ·σ.
pub fn discrete_gaussian_pmf(sigma: f64, x: i64, kappa: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    let b = half_width(sigma, kappa);
    if x.abs() > b {
        return 0.0;
    }
    let norm: f64 = (-b..=b).map(|y| g(sigma, y as f64)).sum();
    g(sigma, x as f64) / norm
}

/// The truncated pmf folded onto Z_q; entry e is the mass of x ≡ e (mod q).
pub fn wrapped_gaussian_pmf(sigma: f64, q: u64, kappa: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let b = half_width(sigma, kappa);
    let weights: Vec<f64> = (-b..=b).map(|y| g(sigma, y as f64)).collect();
    let norm: f64 = weights.iter().sum();
    let mut out = vec![0.0; q as usize];
    for (y, w) in (-b..=b).zip(weights) {
        out[y.rem_euclid(q as i64) as usize] += w / norm;
    }
    out
}
