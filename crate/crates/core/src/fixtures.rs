//! Statistical fixtures for estimator tests (behind the `test-fixtures`
//! feature): exact fractional Brownian motion sample paths via circulant
//! embedding of the increment covariance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Autocovariance of fractional Gaussian noise at lag k for Hurst exponent h.
fn fgn_autocovariance(k: usize, h: f64) -> f64 {
    let k = k as f64;
    0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
}

/// Exact fractional Brownian motion path of length `n` with Hurst exponent
/// `hurst`, via the circulant-embedding (Davies–Harte) construction. The
/// embedding eigenvalues are nonnegative for fGn, so the sample is exact up
/// to floating-point error.
pub fn fbm_path(n: usize, hurst: f64, seed: u64) -> Vec<f64> {
    assert!(n >= 2, "need at least two samples");
    assert!((0.0..1.0).contains(&hurst) && hurst > 0.0, "hurst in (0,1)");
    let m = 2 * n;

    // Circulant row: γ(0), γ(1), .., γ(n), γ(n-1), .., γ(1).
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocovariance(k, hurst), 0.0));
    }
    for k in (1..n).rev() {
        row.push(Complex::new(fgn_autocovariance(k, hurst), 0.0));
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let eigenvalues: Vec<f64> = row
        .iter()
        .map(|c| {
            // fGn embeddings are nonnegative-definite; clamp the tiny
            // negative rounding noise.
            debug_assert!(c.re > -1e-8, "embedding eigenvalue {c}");
            c.re.max(0.0)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut spectrum: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    spectrum[0] = Complex::new((eigenvalues[0] / m as f64).sqrt() * draw(), 0.0);
    spectrum[n] = Complex::new((eigenvalues[n] / m as f64).sqrt() * draw(), 0.0);
    for k in 1..n {
        let amp = (eigenvalues[k] / (2.0 * m as f64)).sqrt();
        let re = amp * draw();
        let im = amp * draw();
        spectrum[k] = Complex::new(re, im);
        spectrum[m - k] = Complex::new(re, -im);
    }

    fft.process(&mut spectrum);
    let increments = spectrum.iter().take(n).map(|c| c.re);

    let mut path = Vec::with_capacity(n);
    let mut acc = 0.0;
    for dx in increments {
        acc += dx;
        path.push(acc);
    }
    path
}
