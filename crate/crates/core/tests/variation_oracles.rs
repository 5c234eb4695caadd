//! Variation-estimator checks against fractional Brownian motion fixtures
//! with known Hurst exponents.

use dimshape_core::fixtures::fbm_path;
use dimshape_core::variation::variation_estimator;

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

#[test]
fn madogram_recovers_fbm_dimension() {
    // Graph dimension of an fBm path with Hurst exponent H is 2 - H.
    for hurst in [0.3, 0.5, 0.7] {
        let estimates: Vec<f64> = (0..10)
            .map(|seed| {
                let path = fbm_path(1 << 14, hurst, 1000 + seed);
                variation_estimator(&path, 1.0).unwrap()
            })
            .collect();
        let med = median(estimates);
        let expected = 2.0 - hurst;
        assert!(
            (med - expected).abs() <= 0.1,
            "H = {hurst}: madogram median {med}, expected {expected} ± 0.1"
        );
    }
}

#[test]
fn variogram_recovers_fbm_dimension() {
    // The p = 2 estimator shares the 2 - H scaling for Gaussian paths.
    let estimates: Vec<f64> = (0..10)
        .map(|seed| {
            let path = fbm_path(1 << 14, 0.5, 2000 + seed);
            variation_estimator(&path, 2.0).unwrap()
        })
        .collect();
    let med = median(estimates);
    assert!((med - 1.5).abs() <= 0.1, "variogram median {med}");
}
