//! Augmented random search over linear policies: the normalized variant
//! with top-direction selection and reward-std step scaling, plus the
//! two-phase protocol (identity pretraining, then dimension-shaped
//! fine-tuning).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{self, DisturbanceConfig, EnvSpec, Policy};
use crate::eval::{self, DimensionReport, EvalConfig};
use crate::postprocess::{postprocess_return, Postprocessor, ShapedReturn};
use crate::seeding::{domain, mix};
use crate::trajectory::RunningStats;
use crate::{Error, Result};

/// A linear policy: action = clip(M · normalize(s), action bounds), with the
/// normalization statistics traveling with the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    /// Row-major weights, `action_dim` rows of `obs_dim` entries.
    pub weights: Vec<Vec<f64>>,
    pub obs_stats: RunningStats,
}

impl LinearPolicy {
    /// Zero-initialized policy for an environment: every action is 0 until
    /// the first update, which keeps initialization symmetric.
    pub fn zeros(spec: &EnvSpec) -> Self {
        Self {
            weights: vec![vec![0.0; spec.obs_dim]; spec.action_dim],
            obs_stats: RunningStats::new(spec.obs_dim),
        }
    }

    pub fn from_parts(weights: Vec<Vec<f64>>, obs_stats: RunningStats) -> Self {
        Self { weights, obs_stats }
    }

    pub fn action_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.weights.first().map(|r| r.len()).unwrap_or(0)
    }

    /// Normalization context for rollouts and dimension analysis: identity
    /// before any statistics exist (the very first epoch), the running stats
    /// afterward.
    pub fn normalization(&self) -> RunningStats {
        if self.obs_stats.count() == 0 {
            RunningStats::identity(self.obs_stats.dim())
        } else {
            self.obs_stats.clone()
        }
    }

    fn act_with(&self, spec: &EnvSpec, obs: &[f64], norm: &RunningStats) -> Vec<f64> {
        let z = norm.normalize(obs).expect("normalization context is usable");
        let mut action: Vec<f64> = self
            .weights
            .iter()
            .map(|row| row.iter().zip(&z).map(|(w, x)| w * x).sum())
            .collect();
        spec.clip_action(&mut action);
        action
    }

    /// Stable 64-bit fingerprint of weights and statistics, for histories
    /// and reproducibility checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |word: u64| {
            for b in word.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.action_dim() as u64);
        eat(self.obs_dim() as u64);
        for row in &self.weights {
            for w in row {
                eat(w.to_bits());
            }
        }
        eat(self.obs_stats.count());
        for v in self.obs_stats.mean() {
            eat(v.to_bits());
        }
        for v in self.obs_stats.m2() {
            eat(v.to_bits());
        }
        h
    }
}

impl Policy for LinearPolicy {
    fn act(&self, spec: &EnvSpec, obs: &[f64]) -> Vec<f64> {
        self.act_with(spec, obs, &self.normalization())
    }
}

/// Search hyperparameters. Defaults are the standard settings this pipeline
/// is tuned around: α = .02, σ = .025, N = 50, b = 20, 1000-step rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArsConfig {
    pub step_size: f64,
    pub explore_std: f64,
    pub n_directions: usize,
    pub top_directions: usize,
    pub epochs: usize,
    pub rollout_length: usize,
    /// Epoch interval for in-training dimension reports; 0 disables them.
    pub eval_interval: usize,
    pub seed: u64,
}

impl Default for ArsConfig {
    fn default() -> Self {
        Self {
            step_size: 0.02,
            explore_std: 0.025,
            n_directions: 50,
            top_directions: 20,
            epochs: 100,
            rollout_length: 1000,
            eval_interval: 0,
            seed: 0,
        }
    }
}

impl ArsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_directions == 0 || self.top_directions > self.n_directions {
            return Err(Error::InvalidConfig(format!(
                "top_directions must be in 1..={}, got {}",
                self.n_directions, self.top_directions
            )));
        }
        if !(self.step_size > 0.0) || !(self.explore_std > 0.0) {
            return Err(Error::InvalidConfig(
                "step_size and explore_std must be positive".into(),
            ));
        }
        if self.rollout_length == 0 {
            return Err(Error::InvalidConfig("rollout_length must be >= 1".into()));
        }
        Ok(())
    }
}

/// One epoch's summary statistics over all 2N rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_shaped_return: f64,
    pub mean_raw_return: f64,
    /// Fingerprint of the policy after this epoch's update.
    pub policy_fingerprint: u64,
}

/// A dimension report taken during training.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub epoch: usize,
    pub report: DimensionReport,
}

/// Per-epoch records plus any in-training dimension reports.
#[derive(Debug, Clone, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub evals: Vec<EvalRecord>,
    /// Epoch index where phase 2 began, for two-phase runs.
    pub phase_boundary: Option<usize>,
}

/// Direction matrices with the same shape as the policy weights.
type Direction = Vec<Vec<f64>>;

fn sample_direction(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Direction {
    (0..rows)
        .map(|_| (0..cols).map(|_| StandardNormal.sample(rng)).collect())
        .collect()
}

fn perturbed(base: &[Vec<f64>], delta: &Direction, scale: f64) -> Vec<Vec<f64>> {
    base.iter()
        .zip(delta)
        .map(|(row, drow)| row.iter().zip(drow).map(|(w, d)| w + scale * d).collect())
        .collect()
}

/// Select the top directions, compute the reward-std step scale, and apply
/// the rank-weighted update. Pure so the update rule is directly testable.
fn apply_update(
    weights: &mut [Vec<f64>],
    directions: &[Direction],
    shaped_plus: &[f64],
    shaped_minus: &[f64],
    top_directions: usize,
    step_size: f64,
    epoch: usize,
) -> Result<()> {
    let n = directions.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ka = shaped_plus[a].max(shaped_minus[a]);
        let kb = shaped_plus[b].max(shaped_minus[b]);
        kb.total_cmp(&ka).then(a.cmp(&b))
    });
    let retained = &order[..top_directions.min(n)];

    let mut returns = Vec::with_capacity(2 * retained.len());
    for &k in retained {
        returns.push(shaped_plus[k]);
        returns.push(shaped_minus[k]);
    }
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
        / returns.len() as f64;
    let reward_std = var.sqrt().max(1e-8);

    let scale = step_size / (retained.len() as f64 * reward_std);
    // Fold in ascending direction index so the result is independent of the
    // selection ordering.
    let mut sorted = retained.to_vec();
    sorted.sort_unstable();
    for &k in &sorted {
        let diff = shaped_plus[k] - shaped_minus[k];
        for (row, drow) in weights.iter_mut().zip(&directions[k]) {
            for (w, d) in row.iter_mut().zip(drow) {
                *w += scale * diff * d;
            }
        }
    }

    if weights
        .iter()
        .any(|row| row.iter().any(|w| !w.is_finite()))
    {
        return Err(Error::Diverged { epoch });
    }
    Ok(())
}

struct RolloutOutcome {
    shaped: ShapedReturn,
    local_stats: RunningStats,
}

fn shaped_rollout(
    spec: &EnvSpec,
    weights: Vec<Vec<f64>>,
    norm: &RunningStats,
    post: Option<&Postprocessor>,
    rollout_length: usize,
    seed: u64,
) -> RolloutOutcome {
    let policy = LinearPolicy::from_parts(weights, norm.clone());
    let (traj, raw) = env::rollout(
        spec,
        &policy,
        rollout_length,
        &DisturbanceConfig::zero(),
        seed,
    );
    let mut local_stats = RunningStats::new(spec.obs_dim);
    for s in &traj.states {
        local_stats.update(s).expect("observation dims are fixed");
    }
    let shaped = match post {
        None => ShapedReturn {
            raw_return: raw,
            dimension_used: 1.0,
            shaped: raw,
        },
        Some(p) => postprocess_return(
            &traj,
            p,
            norm,
            &spec.meshed_coords,
            spec.topological_dim(),
        ),
    };
    RolloutOutcome {
        shaped,
        local_stats,
    }
}

/// One search epoch: sample N directions, roll out the ± perturbations,
/// update the weights from the top directions, then fold all visited states
/// into the normalization statistics.
///
/// The normalization context is frozen for the whole epoch, and rollout
/// seeds are derived from (config seed, epoch, direction, sign), so the
/// result is independent of scheduling and worker count.
pub fn ars_epoch(
    policy: &mut LinearPolicy,
    spec: &EnvSpec,
    cfg: &ArsConfig,
    post: Option<&Postprocessor>,
    epoch: usize,
    direction_rng: &mut ChaCha8Rng,
) -> Result<EpochRecord> {
    cfg.validate()?;
    let norm = policy.normalization();
    let directions: Vec<Direction> = (0..cfg.n_directions)
        .map(|_| sample_direction(direction_rng, spec.action_dim, spec.obs_dim))
        .collect();

    let outcomes: Vec<(RolloutOutcome, RolloutOutcome)> = directions
        .par_iter()
        .enumerate()
        .map(|(k, delta)| {
            let plus = shaped_rollout(
                spec,
                perturbed(&policy.weights, delta, cfg.explore_std),
                &norm,
                post,
                cfg.rollout_length,
                mix(cfg.seed, &[domain::ROLLOUT, epoch as u64, 2 * k as u64]),
            );
            let minus = shaped_rollout(
                spec,
                perturbed(&policy.weights, delta, -cfg.explore_std),
                &norm,
                post,
                cfg.rollout_length,
                mix(cfg.seed, &[domain::ROLLOUT, epoch as u64, 2 * k as u64 + 1]),
            );
            (plus, minus)
        })
        .collect();

    let mut shaped_plus = Vec::with_capacity(cfg.n_directions);
    let mut shaped_minus = Vec::with_capacity(cfg.n_directions);
    let mut shaped_sum = 0.0;
    let mut raw_sum = 0.0;
    for (plus, minus) in &outcomes {
        for outcome in [plus, minus] {
            if outcome.shaped.raw_return < 0.0 {
                log::warn!(
                    "epoch {epoch}: shaped episode with negative raw return {}",
                    outcome.shaped.raw_return
                );
            }
            shaped_sum += outcome.shaped.shaped;
            raw_sum += outcome.shaped.raw_return;
        }
        shaped_plus.push(plus.shaped.shaped);
        shaped_minus.push(minus.shaped.shaped);
    }

    apply_update(
        &mut policy.weights,
        &directions,
        &shaped_plus,
        &shaped_minus,
        cfg.top_directions,
        cfg.step_size,
        epoch,
    )?;

    // Merge worker statistics in fixed direction order.
    for (plus, minus) in &outcomes {
        policy.obs_stats.merge(&plus.local_stats)?;
        policy.obs_stats.merge(&minus.local_stats)?;
    }

    let denom = (2 * cfg.n_directions) as f64;
    Ok(EpochRecord {
        epoch,
        mean_shaped_return: shaped_sum / denom,
        mean_raw_return: raw_sum / denom,
        policy_fingerprint: policy.fingerprint(),
    })
}

fn run_phase<F>(
    policy: &mut LinearPolicy,
    history: &mut TrainHistory,
    spec: &EnvSpec,
    cfg: &ArsConfig,
    post: Option<&Postprocessor>,
    seed: u64,
    epoch_offset: usize,
    on_epoch: &mut F,
) -> Result<()>
where
    F: FnMut(usize, &LinearPolicy, &EpochRecord),
{
    for j in 0..cfg.epochs {
        let epoch = epoch_offset + j;
        let mut dir_rng =
            ChaCha8Rng::seed_from_u64(mix(seed, &[domain::DIRECTIONS, epoch as u64]));
        let record = ars_epoch(policy, spec, cfg, post, epoch, &mut dir_rng)?;
        history.epochs.push(record);
        on_epoch(epoch, policy, &record);
        if cfg.eval_interval > 0 && (j + 1) % cfg.eval_interval == 0 {
            let eval_cfg = EvalConfig {
                n_seeds: 1,
                rollouts_per_seed: 5,
                episode_length: cfg.rollout_length,
                seed: mix(seed, &[domain::EVAL, epoch as u64]),
                ..EvalConfig::default()
            };
            let report =
                eval::evaluate_dimensions(policy, spec, &eval_cfg, &DisturbanceConfig::zero());
            history.evals.push(EvalRecord { epoch, report });
        }
    }
    Ok(())
}

/// Train from a zero-initialized policy with a postprocessing layer.
pub fn train(
    spec: &EnvSpec,
    cfg: &ArsConfig,
    post: &Postprocessor,
) -> Result<(LinearPolicy, TrainHistory)> {
    train_with_callback(spec, cfg, post, &mut |_, _, _| {})
}

/// [`train`] with a per-epoch callback (checkpointing, progress output).
pub fn train_with_callback<F>(
    spec: &EnvSpec,
    cfg: &ArsConfig,
    post: &Postprocessor,
    on_epoch: &mut F,
) -> Result<(LinearPolicy, TrainHistory)>
where
    F: FnMut(usize, &LinearPolicy, &EpochRecord),
{
    let mut policy = LinearPolicy::zeros(spec);
    let mut history = TrainHistory::default();
    run_phase(
        &mut policy,
        &mut history,
        spec,
        cfg,
        Some(post),
        cfg.seed,
        0,
        on_epoch,
    )?;
    Ok((policy, history))
}

/// Train with no postprocessing layer at all: rollout returns feed the
/// update rule directly. Exists so the identity postprocessor's neutrality
/// is a checkable claim rather than an assumption.
pub fn train_unshaped(spec: &EnvSpec, cfg: &ArsConfig) -> Result<(LinearPolicy, TrainHistory)> {
    let mut policy = LinearPolicy::zeros(spec);
    let mut history = TrainHistory::default();
    run_phase(
        &mut policy,
        &mut history,
        spec,
        cfg,
        None,
        cfg.seed,
        0,
        &mut |_, _, _| {},
    )?;
    Ok((policy, history))
}

/// Two-phase protocol: identity pretraining for `cfg_base.epochs`, then
/// continued training (same weights, same statistics, same seed stream)
/// with `post_tune` for `cfg_tune.epochs`. Phase 2 epoch indices continue
/// from phase 1, so tuning with the identity postprocessor reproduces a
/// single longer run exactly.
pub fn two_phase_train(
    spec: &EnvSpec,
    cfg_base: &ArsConfig,
    cfg_tune: &ArsConfig,
    post_tune: &Postprocessor,
) -> Result<(LinearPolicy, TrainHistory)> {
    two_phase_train_with_callback(spec, cfg_base, cfg_tune, post_tune, &mut |_, _, _| {})
}

/// [`two_phase_train`] with a per-epoch callback.
pub fn two_phase_train_with_callback<F>(
    spec: &EnvSpec,
    cfg_base: &ArsConfig,
    cfg_tune: &ArsConfig,
    post_tune: &Postprocessor,
    on_epoch: &mut F,
) -> Result<(LinearPolicy, TrainHistory)>
where
    F: FnMut(usize, &LinearPolicy, &EpochRecord),
{
    let identity = Postprocessor {
        kind: crate::postprocess::PostprocessorKind::Identity,
        ..*post_tune
    };
    let mut policy = LinearPolicy::zeros(spec);
    let mut history = TrainHistory::default();
    run_phase(
        &mut policy,
        &mut history,
        spec,
        cfg_base,
        Some(&identity),
        cfg_base.seed,
        0,
        on_epoch,
    )?;
    history.phase_boundary = Some(cfg_base.epochs);
    run_phase(
        &mut policy,
        &mut history,
        spec,
        cfg_tune,
        Some(post_tune),
        cfg_base.seed,
        cfg_base.epochs,
        on_epoch,
    )?;
    Ok((policy, history))
}
