//! Power-variation dimension estimators for scalar time series: the
//! madogram (order p = 1) and variogram (p = 2), plus the mean-over-
//! coordinates reduction used for whole trajectories.

use crate::trajectory::StateVector;
use crate::{Error, Result};

/// Power variation of order `p` at lag `lag`:
///
/// `P_p(X, l) = (1 / (2n - l)) Σ_{i=l..=n} |X_i - X_{i-l}|^p`
///
/// where the series is `X_0..X_n` (so `n = len - 1`).
pub fn power_variation(series: &[f64], p: f64, lag: usize) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidOrder(p));
    }
    if series.len() < 3 {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: 3,
        });
    }
    let n = series.len() - 1;
    if lag == 0 || lag > n {
        return Err(Error::InvalidConfig(format!(
            "lag {lag} out of range for series of length {}",
            series.len()
        )));
    }
    let sum: f64 = (lag..=n)
        .map(|i| (series[i] - series[i - lag]).abs().powf(p))
        .sum();
    Ok(sum / (2 * n - lag) as f64)
}

/// Variation estimator of order `p`:
///
/// `Dv_p(X) = 2 - (log P_p(X, 2) - log P_p(X, 1)) / (p log 2)`
///
/// A constant series (lag-1 variation zero) returns 1.0 by convention: a
/// motionless path is treated as a line-like object rather than tripping a
/// log-of-zero error.
pub fn variation_estimator(series: &[f64], p: f64) -> Result<f64> {
    let p1 = power_variation(series, p, 1)?;
    if p1 == 0.0 {
        return Ok(1.0);
    }
    let p2 = power_variation(series, p, 2)?;
    Ok(2.0 - (p2.ln() - p1.ln()) / (p * std::f64::consts::LN_2))
}

/// Variation dimension of a multivariate trajectory: the estimator applied
/// to each coordinate's time series independently, averaged across
/// coordinates.
pub fn trajectory_variation_dim(states: &[StateVector], p: f64) -> Result<f64> {
    if states.len() < 3 {
        return Err(Error::SeriesTooShort {
            len: states.len(),
            min: 3,
        });
    }
    let dim = states[0].len();
    if dim == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    let mut total = 0.0;
    let mut series = Vec::with_capacity(states.len());
    for c in 0..dim {
        series.clear();
        series.extend(states.iter().map(|s| s[c]));
        total += variation_estimator(&series, p)?;
    }
    Ok(total / dim as f64)
}

/// Madogram dimension (p = 1).
pub fn madogram_dim(states: &[StateVector]) -> Result<f64> {
    trajectory_variation_dim(states, 1.0)
}

/// Variogram dimension (p = 2).
pub fn variogram_dim(states: &[StateVector]) -> Result<f64> {
    trajectory_variation_dim(states, 2.0)
}
