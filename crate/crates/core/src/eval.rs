//! Post-training measurement: dimension reports over extended episodes,
//! failure rates under disturbances, and the grid-search calibration that
//! finds a disturbance level with a target failure rate.

use rayon::prelude::*;
use serde::Serialize;

use crate::env::{self, DisturbanceConfig, EnvSpec, Policy};
use crate::mesh;
use crate::seeding::{domain, mix};
use crate::trajectory::{post_transient, project_states, Trajectory};
use crate::variation;

/// Parameters of a dimension evaluation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub n_seeds: usize,
    pub rollouts_per_seed: usize,
    /// Extended episode length; dimension measurements use longer episodes
    /// than training for accuracy.
    pub episode_length: usize,
    pub transient_cutoff: usize,
    pub mesh_scale_factor: f64,
    pub mesh_initial_box: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n_seeds: 5,
            rollouts_per_seed: 5,
            episode_length: 10_000,
            transient_cutoff: 200,
            mesh_scale_factor: 1.5,
            mesh_initial_box: 1e-2,
            seed: 0,
        }
    }
}

/// Dimension measurements of one evaluation rollout. Estimates are NaN when
/// the rollout terminated before yielding three post-transient states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionRow {
    pub seed_index: usize,
    pub rollout_index: usize,
    pub lower_mesh_dim: f64,
    pub upper_mesh_dim: f64,
    pub madogram: f64,
    pub variogram: f64,
    pub raw_return: f64,
    pub steps: usize,
}

/// Mean ± std of one metric, with the number of contributing seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub seeds: usize,
}

/// Across-seed aggregates: each seed contributes the mean of its rollouts,
/// and the summary is the mean and population std of those per-seed means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionAggregate {
    pub lower_mesh_dim: MetricSummary,
    pub upper_mesh_dim: MetricSummary,
    pub madogram: MetricSummary,
    pub variogram: MetricSummary,
    pub raw_return: MetricSummary,
}

/// Per-rollout dimension rows plus their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub rows: Vec<DimensionRow>,
    pub rollouts_per_seed: usize,
    pub aggregate: DimensionAggregate,
}

fn summarize<F>(rows: &[DimensionRow], n_seeds: usize, metric: F) -> MetricSummary
where
    F: Fn(&DimensionRow) -> f64,
{
    let mut per_seed = Vec::with_capacity(n_seeds);
    for seed_index in 0..n_seeds {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.seed_index == seed_index)
            .map(&metric)
            .filter(|v| v.is_finite())
            .collect();
        if !values.is_empty() {
            per_seed.push(values.iter().sum::<f64>() / values.len() as f64);
        }
    }
    if per_seed.is_empty() {
        return MetricSummary {
            mean: f64::NAN,
            std: f64::NAN,
            seeds: 0,
        };
    }
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().sum::<f64>() / n;
    let var = per_seed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MetricSummary {
        mean,
        std: var.sqrt(),
        seeds: per_seed.len(),
    }
}

/// Recompute the aggregates from the stored rows; construction uses this
/// same fold, so reports are exactly recomputable.
pub fn aggregate_rows(rows: &[DimensionRow], n_seeds: usize) -> DimensionAggregate {
    DimensionAggregate {
        lower_mesh_dim: summarize(rows, n_seeds, |r| r.lower_mesh_dim),
        upper_mesh_dim: summarize(rows, n_seeds, |r| r.upper_mesh_dim),
        madogram: summarize(rows, n_seeds, |r| r.madogram),
        variogram: summarize(rows, n_seeds, |r| r.variogram),
        raw_return: summarize(rows, n_seeds, |r| r.raw_return),
    }
}

/// Dimension measurements of one trajectory under a frozen normalization
/// context: the meshed coordinates of the post-transient states feed both
/// the mesh curve and the variation estimators.
pub fn trajectory_dimensions(
    traj: &Trajectory,
    spec: &EnvSpec,
    norm: &crate::trajectory::RunningStats,
    cfg: &EvalConfig,
) -> (f64, f64, f64, f64) {
    let segment = post_transient(traj, cfg.transient_cutoff);
    if segment.len() < 3 {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let projected = project_states(segment, &spec.meshed_coords);
    let projected_stats = norm.project(&spec.meshed_coords);
    let (lower, upper) = match mesh::mesh_curve(
        &projected,
        cfg.mesh_scale_factor,
        cfg.mesh_initial_box,
        &projected_stats,
    ) {
        Ok(curve) => (
            mesh::lower_mesh_dim(&curve).unwrap_or(f64::NAN),
            mesh::upper_mesh_dim(&curve).unwrap_or(f64::NAN),
        ),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let madogram = variation::trajectory_variation_dim(&projected, 1.0).unwrap_or(f64::NAN);
    let variogram = variation::trajectory_variation_dim(&projected, 2.0).unwrap_or(f64::NAN);
    (lower, upper, madogram, variogram)
}

/// Measure a policy's dimensions over `n_seeds × rollouts_per_seed`
/// extended episodes, using the policy's frozen normalization statistics.
/// Early-terminated rollouts are reported with their achieved lengths.
pub fn evaluate_dimensions(
    policy: &crate::ars::LinearPolicy,
    spec: &EnvSpec,
    cfg: &EvalConfig,
    disturbance: &DisturbanceConfig,
) -> DimensionReport {
    let norm = policy.normalization();
    let jobs: Vec<(usize, usize)> = (0..cfg.n_seeds)
        .flat_map(|s| (0..cfg.rollouts_per_seed).map(move |r| (s, r)))
        .collect();
    let rows: Vec<DimensionRow> = jobs
        .par_iter()
        .map(|&(seed_index, rollout_index)| {
            let rollout_seed = mix(
                cfg.seed,
                &[domain::EVAL, seed_index as u64, rollout_index as u64],
            );
            let (traj, raw_return) =
                env::rollout(spec, policy, cfg.episode_length, disturbance, rollout_seed);
            let (lower, upper, madogram, variogram) =
                trajectory_dimensions(&traj, spec, &norm, cfg);
            DimensionRow {
                seed_index,
                rollout_index,
                lower_mesh_dim: lower,
                upper_mesh_dim: upper,
                madogram,
                variogram,
                raw_return,
                steps: traj.steps(),
            }
        })
        .collect();
    let aggregate = aggregate_rows(&rows, cfg.n_seeds);
    DimensionReport {
        rows,
        rollouts_per_seed: cfg.rollouts_per_seed,
        aggregate,
    }
}

/// Failure statistics of one disturbance setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub disturbance: DisturbanceConfig,
    pub n_rollouts: usize,
    pub failure_count: usize,
    pub failure_rate: f64,
}

/// Fraction of seeded rollouts terminating before `t` steps.
pub fn failure_rate<P>(
    policy: &P,
    spec: &EnvSpec,
    disturbance: &DisturbanceConfig,
    n_rollouts: usize,
    t: usize,
    seed: u64,
) -> RobustnessReport
where
    P: Policy + Sync,
{
    let failures: usize = (0..n_rollouts)
        .into_par_iter()
        .map(|i| {
            let rollout_seed = mix(seed, &[domain::FAILURE, i as u64]);
            let (traj, _) = env::rollout(spec, policy, t, disturbance, rollout_seed);
            usize::from(traj.terminated_early)
        })
        .sum();
    RobustnessReport {
        disturbance: *disturbance,
        n_rollouts,
        failure_count: failures,
        failure_rate: failures as f64 / n_rollouts as f64,
    }
}

/// Result of a disturbance grid search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchOutcome {
    /// Index into `reports` of the selected configuration.
    pub selected: usize,
    pub target: f64,
    pub reports: Vec<RobustnessReport>,
}

impl GridSearchOutcome {
    pub fn selected_config(&self) -> DisturbanceConfig {
        self.reports[self.selected].disturbance
    }

    pub fn selected_report(&self) -> &RobustnessReport {
        &self.reports[self.selected]
    }
}

/// Evaluate every grid cell with common random numbers (the same rollout
/// seeds per cell) and return the cell whose failure rate is closest to
/// `target`; ties go to the smaller disturbance intensity, then grid order.
pub fn disturbance_grid_search<P>(
    policy: &P,
    spec: &EnvSpec,
    grid: &[DisturbanceConfig],
    target: f64,
    n_rollouts: usize,
    t: usize,
    seed: u64,
) -> GridSearchOutcome
where
    P: Policy + Sync,
{
    assert!(!grid.is_empty(), "grid search needs at least one cell");
    let reports: Vec<RobustnessReport> = grid
        .iter()
        .map(|d| failure_rate(policy, spec, d, n_rollouts, t, seed))
        .collect();
    let mut selected = 0;
    for (i, report) in reports.iter().enumerate().skip(1) {
        let best = &reports[selected];
        let (da, db) = (
            (report.failure_rate - target).abs(),
            (best.failure_rate - target).abs(),
        );
        if da < db
            || (da == db && report.disturbance.intensity() < best.disturbance.intensity())
        {
            selected = i;
        }
    }
    GridSearchOutcome {
        selected,
        target,
        reports: reports.to_vec(),
    }
}

/// Default calibration grid: geometric ladders over each disturbance type,
/// anchored so the interesting failure regime for the built-in environments
/// is well inside the ladder.
pub fn default_calibration_grid() -> Vec<DisturbanceConfig> {
    let mut grid = vec![DisturbanceConfig::zero()];
    for &std in &[0.02, 0.05, 0.1, 0.2, 0.3, 0.45, 0.7, 1.0] {
        grid.push(DisturbanceConfig {
            action_noise_std: std,
            ..DisturbanceConfig::zero()
        });
    }
    for &std in &[0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8] {
        grid.push(DisturbanceConfig {
            obs_noise_std: std,
            ..DisturbanceConfig::zero()
        });
    }
    for &mag in &[60.0, 120.0, 200.0, 270.0, 360.0, 480.0, 650.0] {
        grid.push(DisturbanceConfig {
            push_magnitude: mag,
            push_rate: 0.2,
            ..DisturbanceConfig::zero()
        });
    }
    grid
}
