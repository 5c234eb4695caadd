//! Reward postprocessing: maps a rollout's raw episodic return and
//! trajectory to the scalar the trainer actually optimizes, by dividing the
//! return by a clipped dimension estimate of the post-transient states.

use serde::{Deserialize, Serialize};

use crate::mesh::{self, MeshCurve};
use crate::trajectory::{post_transient, project_states, RunningStats, StateVector, Trajectory};
use crate::variation;
use crate::Result;

/// The dimension measure dividing the episodic return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostprocessorKind {
    /// Dimension fixed at 1; the return is completely unchanged.
    Identity,
    /// Clipped lower mesh dimension (full-curve least-squares slope).
    LowerMeshDim,
    /// Clipped upper mesh dimension (greatest consecutive slope).
    UpperMeshDim,
    /// Clipped madogram (variation estimator, p = 1).
    Madogram,
    /// Clipped variogram (variation estimator, p = 2).
    Variogram,
}

impl PostprocessorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::LowerMeshDim => "lower-mesh",
            Self::UpperMeshDim => "upper-mesh",
            Self::Madogram => "madogram",
            Self::Variogram => "variogram",
        }
    }
}

impl std::str::FromStr for PostprocessorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "lower-mesh" | "lower-mesh-dim" => Ok(Self::LowerMeshDim),
            "upper-mesh" | "upper-mesh-dim" => Ok(Self::UpperMeshDim),
            "madogram" => Ok(Self::Madogram),
            "variogram" => Ok(Self::Variogram),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown postprocessor: {other}"
            ))),
        }
    }
}

/// A postprocessor selection with its dimension-estimation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Postprocessor {
    pub kind: PostprocessorKind,
    /// Transient cutoff: states with index t > transient_cutoff enter the
    /// dimension estimate.
    pub transient_cutoff: usize,
    /// Geometric scale factor of the mesh-curve sweep.
    pub mesh_scale_factor: f64,
    /// Initial box size of the mesh-curve sweep.
    pub mesh_initial_box: f64,
}

impl Postprocessor {
    pub fn new(kind: PostprocessorKind) -> Self {
        Self {
            kind,
            transient_cutoff: 200,
            mesh_scale_factor: 1.5,
            mesh_initial_box: 1e-2,
        }
    }

    pub fn identity() -> Self {
        Self::new(PostprocessorKind::Identity)
    }
}

impl Default for Postprocessor {
    fn default() -> Self {
        Self::identity()
    }
}

/// A shaped episodic return with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapedReturn {
    /// Undiscounted sum of rewards.
    pub raw_return: f64,
    /// The (clipped) dimension the return was divided by; exactly 1 for the
    /// identity postprocessor.
    pub dimension_used: f64,
    /// `raw_return / dimension_used`.
    pub shaped: f64,
}

/// Estimate a dimension on the post-transient states and clip it into
/// `[1, topological_dim / 2]`.
///
/// Post-transient segments with fewer than 3 states (early falls) take the
/// maximum penalty `topological_dim / 2` so that terminating immediately
/// cannot game the shaping; estimator failures on pathological segments are
/// mapped to the same penalty.
pub fn clipped_dimension<F>(
    traj: &Trajectory,
    transient_cutoff: usize,
    topological_dim: usize,
    estimator: F,
) -> f64
where
    F: FnOnce(&[StateVector]) -> Result<f64>,
{
    let max_penalty = topological_dim as f64 / 2.0;
    let segment = post_transient(traj, transient_cutoff);
    if segment.len() < 3 {
        return max_penalty;
    }
    match estimator(segment) {
        Ok(dim) if !dim.is_nan() => dim.clamp(1.0, max_penalty),
        _ => max_penalty,
    }
}

/// Builds the mesh curve for a post-transient segment under the frozen
/// stats; shared by the two mesh postprocessors.
fn segment_mesh_curve(
    segment: &[StateVector],
    meshed_coords: &[usize],
    stats: &RunningStats,
    scale_factor: f64,
    d0: f64,
) -> Result<MeshCurve> {
    let projected = project_states(segment, meshed_coords);
    let projected_stats = stats.project(meshed_coords);
    mesh::mesh_curve(&projected, scale_factor, d0, &projected_stats)
}

/// Shape one rollout's return.
///
/// * `stats` — a frozen snapshot of the normalization statistics taken at
///   rollout start (full observation dimension, count ≥ 1).
/// * `meshed_coords` — the state coordinates entering dimension analysis.
/// * `topological_dim` — dimensionality of the meshed state vector.
pub fn postprocess_return(
    traj: &Trajectory,
    post: &Postprocessor,
    stats: &RunningStats,
    meshed_coords: &[usize],
    topological_dim: usize,
) -> ShapedReturn {
    let raw_return = traj.raw_return();
    let dimension_used = match post.kind {
        PostprocessorKind::Identity => 1.0,
        PostprocessorKind::LowerMeshDim => {
            clipped_dimension(traj, post.transient_cutoff, topological_dim, |seg| {
                let curve = segment_mesh_curve(
                    seg,
                    meshed_coords,
                    stats,
                    post.mesh_scale_factor,
                    post.mesh_initial_box,
                )?;
                mesh::lower_mesh_dim(&curve)
            })
        }
        PostprocessorKind::UpperMeshDim => {
            clipped_dimension(traj, post.transient_cutoff, topological_dim, |seg| {
                let curve = segment_mesh_curve(
                    seg,
                    meshed_coords,
                    stats,
                    post.mesh_scale_factor,
                    post.mesh_initial_box,
                )?;
                mesh::upper_mesh_dim(&curve)
            })
        }
        PostprocessorKind::Madogram => {
            clipped_dimension(traj, post.transient_cutoff, topological_dim, |seg| {
                variation::trajectory_variation_dim(&project_states(seg, meshed_coords), 1.0)
            })
        }
        PostprocessorKind::Variogram => {
            clipped_dimension(traj, post.transient_cutoff, topological_dim, |seg| {
                variation::trajectory_variation_dim(&project_states(seg, meshed_coords), 2.0)
            })
        }
    };
    ShapedReturn {
        raw_return,
        dimension_used,
        shaped: raw_return / dimension_used,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn make_traj(n_states: usize, reward: f64, dim: usize) -> Trajectory {
        let steps = n_states - 1;
        Trajectory {
            states: (0..n_states)
                .map(|i| (0..dim).map(|c| (i * (c + 1)) as f64 * 0.01).collect())
                .collect(),
            actions: vec![vec![0.0]; steps],
            rewards: vec![reward; steps],
            terminated_early: false,
            nominal_length: steps,
        }
    }

    #[test]
    fn clip_engages_on_both_sides() {
        let traj = make_traj(300, 1.0, 4);
        let low = clipped_dimension(&traj, 200, 4, |_| Ok(0.3));
        assert_eq!(low, 1.0);
        let high = clipped_dimension(&traj, 200, 10, |_| Ok(9.0));
        assert_eq!(high, 5.0);
    }

    #[test]
    fn early_fall_takes_max_penalty() {
        let traj = make_traj(51, 1.0, 4);
        let dim = clipped_dimension(&traj, 200, 4, |_| Ok(1.3));
        assert_eq!(dim, 2.0);
    }

    #[test]
    fn estimator_failure_takes_max_penalty() {
        let traj = make_traj(300, 1.0, 4);
        let dim = clipped_dimension(&traj, 200, 6, |_| Err(crate::Error::DegenerateCurve));
        assert_eq!(dim, 3.0);
        let nan = clipped_dimension(&traj, 200, 6, |_| Ok(f64::NAN));
        assert_eq!(nan, 3.0);
    }

    #[test]
    fn identity_is_bit_exact() {
        let mut traj = make_traj(10, 0.0, 2);
        traj.rewards = vec![3141.59, -1.25, 0.66, 3.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        let stats = RunningStats::identity(2);
        let shaped = postprocess_return(
            &traj,
            &Postprocessor::identity(),
            &stats,
            &[0, 1],
            2,
        );
        assert_eq!(shaped.dimension_used, 1.0);
        assert_eq!(shaped.shaped.to_bits(), traj.raw_return().to_bits());
    }

    #[test]
    fn shaped_is_raw_over_dimension() {
        // A linear trajectory's madogram is slightly above 1 (the finite-n
        // closed form), so the clip passes it through and the shaped return
        // is exactly raw / dimension.
        let traj = make_traj(300, 1.0, 4);
        let stats = RunningStats::from_states(&traj.states).unwrap();
        let post = Postprocessor::new(PostprocessorKind::Madogram);
        let shaped = postprocess_return(&traj, &post, &stats, &[0, 1, 2, 3], 12);
        assert!(
            shaped.dimension_used > 1.0 && shaped.dimension_used < 1.05,
            "madogram {}",
            shaped.dimension_used
        );
        assert_eq!(shaped.shaped, shaped.raw_return / shaped.dimension_used);

        // A trajectory that freezes after the transient: the constant-series
        // convention gives dimension exactly 1 and leaves the return intact.
        let mut frozen = make_traj(300, 1.0, 4);
        let last = frozen.states[200].clone();
        for s in frozen.states[201..].iter_mut() {
            *s = last.clone();
        }
        let shaped = postprocess_return(&frozen, &post, &stats, &[0, 1, 2, 3], 12);
        assert_eq!(shaped.dimension_used, 1.0);
        assert_eq!(shaped.shaped, shaped.raw_return);
    }

    #[test]
    fn mesh_kinds_divide_the_return() {
        // A noisy 4-D trajectory: dimension lands inside (1, 2], so shaped
        // return is raw / dim.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let states: Vec<StateVector> = (0..700)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let steps = states.len() - 1;
        let traj = Trajectory {
            states,
            actions: vec![vec![0.0]; steps],
            rewards: vec![1.0; steps],
            terminated_early: false,
            nominal_length: steps,
        };
        let stats = RunningStats::from_states(&traj.states).unwrap();
        for kind in [PostprocessorKind::LowerMeshDim, PostprocessorKind::UpperMeshDim] {
            let post = Postprocessor::new(kind);
            let shaped = postprocess_return(&traj, &post, &stats, &[0, 1, 2, 3], 4);
            assert!(shaped.dimension_used >= 1.0 && shaped.dimension_used <= 2.0);
            assert_eq!(shaped.shaped, shaped.raw_return / shaped.dimension_used);
        }
    }

    #[test]
    fn dimension_always_in_clip_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..200 {
            let n_states = rng.random_range(1..600);
            let topo = rng.random_range(2..12usize);
            let traj = make_traj(n_states.max(1) + 1, 0.5, topo);
            let fake = rng.random_range(-5.0..50.0);
            let dim = clipped_dimension(&traj, 200, topo, |_| Ok(fake));
            assert!(dim >= 1.0 && dim <= topo as f64 / 2.0);
        }
    }

    #[test]
    fn shaped_return_non_increasing_in_dimension() {
        let traj = make_traj(300, 1.0, 4);
        let raw = traj.raw_return();
        assert!(raw > 0.0);
        let mut last = f64::INFINITY;
        for dim_est in [0.2, 1.0, 1.4, 2.0, 5.0] {
            let dim = clipped_dimension(&traj, 200, 4, |_| Ok(dim_est));
            let shaped = raw / dim;
            assert!(shaped <= last + 1e-12);
            last = shaped;
        }
    }

    #[test]
    fn kind_parsing_round_trips() {
        for kind in [
            PostprocessorKind::Identity,
            PostprocessorKind::LowerMeshDim,
            PostprocessorKind::UpperMeshDim,
            PostprocessorKind::Madogram,
            PostprocessorKind::Variogram,
        ] {
            let parsed: PostprocessorKind = kind.name().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("no-such".parse::<PostprocessorKind>().is_err());
    }
}
