//! State and trajectory representation plus the streaming normalization
//! statistics shared by meshing, shaping, and training.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One observed state: a finite real vector of fixed length within a
/// trajectory.
pub type StateVector = Vec<f64>;

/// Std floor applied during normalization so constant coordinates do not
/// blow up.
pub const STD_FLOOR: f64 = 1e-8;

/// An episode: states plus the actions/rewards that produced them.
///
/// `states.len() == rewards.len() + 1 == actions.len() + 1` — one state per
/// completed step plus the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<StateVector>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub terminated_early: bool,
    pub nominal_length: usize,
}

impl Trajectory {
    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.rewards.len()
    }

    /// Undiscounted episodic return.
    pub fn raw_return(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Checks the structural invariants; used by constructors and tests.
    pub fn validate(&self) -> Result<()> {
        if self.states.len() != self.rewards.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "trajectory has {} states for {} rewards",
                self.states.len(),
                self.rewards.len()
            )));
        }
        if self.actions.len() != self.rewards.len() {
            return Err(Error::InvalidConfig(format!(
                "trajectory has {} actions for {} rewards",
                self.actions.len(),
                self.rewards.len()
            )));
        }
        let early = self.rewards.len() < self.nominal_length;
        if early != self.terminated_early {
            return Err(Error::InvalidConfig(format!(
                "terminated_early={} but {} of {} steps completed",
                self.terminated_early,
                self.rewards.len(),
                self.nominal_length
            )));
        }
        Ok(())
    }
}

/// States after the transient cutoff: indices `t > tr`. Empty when the
/// trajectory is shorter than the cutoff; callers decide how to handle that.
pub fn post_transient(traj: &Trajectory, tr: usize) -> &[StateVector] {
    if traj.states.len() > tr + 1 {
        &traj.states[tr + 1..]
    } else {
        &[]
    }
}

/// Copies the listed coordinates out of each state.
pub fn project_states(states: &[StateVector], coords: &[usize]) -> Vec<StateVector> {
    states
        .iter()
        .map(|s| coords.iter().map(|&c| s[c]).collect())
        .collect()
}

/// Streaming per-coordinate mean and variance (Welford), mergeable across
/// workers.
///
/// Not safe for simultaneous mutation; the intended pattern is one local
/// accumulator per worker, merged afterward with [`RunningStats::merge`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    /// A fixed mean-zero, unit-std normalization context. Useful when a mesh
    /// should be built on raw coordinates.
    pub fn identity(dim: usize) -> Self {
        Self {
            count: 1,
            mean: vec![0.0; dim],
            m2: vec![1.0; dim],
        }
    }

    /// Rebuild from raw parts (e.g. a saved policy file).
    pub fn from_parts(count: u64, mean: Vec<f64>, m2: Vec<f64>) -> Result<Self> {
        if mean.len() != m2.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: m2.len(),
            });
        }
        Ok(Self { count, mean, m2 })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Summed squared deviations (the Welford M2 accumulator).
    pub fn m2(&self) -> &[f64] {
        &self.m2
    }

    /// Population variance per coordinate (n denominator). Normalization
    /// needs no unbiasedness and this avoids a count=1 special case.
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.dim()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|&m| (m / n).max(0.0)).collect()
    }

    /// Per-coordinate std with the [`STD_FLOOR`] applied.
    pub fn floored_std(&self) -> Vec<f64> {
        self.variance()
            .iter()
            .map(|&v| v.sqrt().max(STD_FLOOR))
            .collect()
    }

    /// Single-pass Welford update with one sample.
    pub fn update(&mut self, sample: &[f64]) -> Result<()> {
        if sample.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: sample.len(),
            });
        }
        self.count += 1;
        let n = self.count as f64;
        for (i, &x) in sample.iter().enumerate() {
            let delta = x - self.mean[i];
            self.mean[i] += delta / n;
            let delta2 = x - self.mean[i];
            self.m2[i] += delta * delta2;
        }
        Ok(())
    }

    /// Merge another accumulator into this one. Equivalent (within
    /// floating-point tolerance) to having fed both sample streams
    /// sequentially.
    pub fn merge(&mut self, other: &RunningStats) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if other.count == 0 {
            return Ok(());
        }
        if self.count == 0 {
            *self = other.clone();
            return Ok(());
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        for i in 0..self.dim() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
        Ok(())
    }

    /// `(s - mean) / max(std, STD_FLOOR)` element-wise.
    pub fn normalize(&self, sample: &[f64]) -> Result<StateVector> {
        if self.count == 0 {
            return Err(Error::NoStatistics);
        }
        if sample.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: sample.len(),
            });
        }
        let std = self.floored_std();
        Ok(sample
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - self.mean[i]) / std[i])
            .collect())
    }

    /// Restrict the statistics to a coordinate subset (same sample count).
    pub fn project(&self, coords: &[usize]) -> RunningStats {
        RunningStats {
            count: self.count,
            mean: coords.iter().map(|&c| self.mean[c]).collect(),
            m2: coords.iter().map(|&c| self.m2[c]).collect(),
        }
    }

    /// Stats built from a batch of states in one pass.
    pub fn from_states(states: &[StateVector]) -> Result<Self> {
        let dim = states.first().map(|s| s.len()).unwrap_or(0);
        let mut stats = Self::new(dim);
        for s in states {
            stats.update(s)?;
        }
        Ok(stats)
    }
}
