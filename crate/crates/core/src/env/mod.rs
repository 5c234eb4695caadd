//! Deterministic, seedable desk-scale control environments with
//! action/observation noise and push-disturbance injection.
//!
//! Environments keep an internal physical state; policies only ever see
//! observations (possibly noise-corrupted), and trajectories record exactly
//! what the policy saw. Each noise source draws from its own RNG stream
//! derived from the rollout seed, so e.g. enabling pushes with zero
//! magnitude cannot perturb the action-noise sequence.

pub mod cartpole;
pub mod hopper;
pub mod pendulum;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::trajectory::{StateVector, Trajectory};
use crate::{Error, Result};

pub use hopper::REST_HEIGHT as HOPPER_REST_HEIGHT;

/// Disturbances applied during a rollout. All zeros means bit-reproducible
/// nominal dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisturbanceConfig {
    /// Std of zero-mean Gaussian noise added to each action coordinate.
    pub action_noise_std: f64,
    /// Std of zero-mean Gaussian noise added to each observation coordinate.
    pub obs_noise_std: f64,
    /// Magnitude of the random-direction push force.
    pub push_magnitude: f64,
    /// Per-step probability of a push being applied.
    pub push_rate: f64,
}

impl DisturbanceConfig {
    pub const fn zero() -> Self {
        Self {
            action_noise_std: 0.0,
            obs_noise_std: 0.0,
            push_magnitude: 0.0,
            push_rate: 0.0,
        }
    }

    /// The standard noise setting for noisy dimension evaluations:
    /// action std .001, observation std .01.
    pub const fn eval_noise() -> Self {
        Self {
            action_noise_std: 0.001,
            obs_noise_std: 0.01,
            push_magnitude: 0.0,
            push_rate: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Scalar summary used only to break ties between grid-search cells.
    pub fn intensity(&self) -> f64 {
        self.action_noise_std + self.obs_noise_std + self.push_magnitude * self.push_rate
    }
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self::zero()
    }
}

/// Result of one environment step: the (noisy) observation the policy will
/// act on next, the reward, and the failure flag.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: StateVector,
    pub reward: f64,
    pub done: bool,
}

/// The built-in environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Pendulum,
    CartpoleSwingup,
    Hopper1d,
}

/// Static description of an environment: dimensions, bounds, integration
/// step, and which observation coordinates enter dimension analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub action_bounds: Vec<(f64, f64)>,
    pub dt: f64,
    pub nominal_length: usize,
    /// Observation coordinates used for dimension analysis. Excludes
    /// translation-invariant coordinates (the cart position analog of a
    /// held-out forward position).
    pub meshed_coords: Vec<usize>,
    /// Hopper failure threshold on body height; unused by the other
    /// environments.
    pub fail_height: f64,
}

impl EnvSpec {
    /// Torque-limited pendulum swing-up. Observation [cos θ, sin θ, θ̇];
    /// never terminates.
    pub fn pendulum() -> Self {
        Self {
            kind: EnvKind::Pendulum,
            obs_dim: 3,
            action_dim: 1,
            action_bounds: vec![(-pendulum::MAX_TORQUE, pendulum::MAX_TORQUE)],
            dt: pendulum::DT,
            nominal_length: 1000,
            meshed_coords: vec![0, 1, 2],
            fail_height: 0.0,
        }
    }

    /// Cartpole swing-up. Observation [x, ẋ, cos θ, sin θ, θ̇]; fails when
    /// the cart leaves the track or, after a grace period, when the pole is
    /// far from upright. The cart position is held out of meshing.
    pub fn cartpole_swingup() -> Self {
        Self {
            kind: EnvKind::CartpoleSwingup,
            obs_dim: 5,
            action_dim: 1,
            action_bounds: vec![(-cartpole::MAX_FORCE, cartpole::MAX_FORCE)],
            dt: cartpole::DT,
            nominal_length: 1000,
            meshed_coords: vec![1, 2, 3, 4],
            fail_height: 0.0,
        }
    }

    /// One-dimensional spring-leg hopper. Observation
    /// [height, vertical velocity, leg length, leg velocity]; fails when the
    /// body drops below `fail_height`.
    pub fn hopper1d() -> Self {
        Self {
            kind: EnvKind::Hopper1d,
            obs_dim: 4,
            action_dim: 1,
            action_bounds: vec![(-1.0, 1.0)],
            dt: hopper::DT,
            nominal_length: 1000,
            meshed_coords: vec![0, 1, 2, 3],
            fail_height: 0.3 * hopper::REST_HEIGHT,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "pendulum" => Ok(Self::pendulum()),
            "cartpole_swingup" => Ok(Self::cartpole_swingup()),
            "hopper1d" => Ok(Self::hopper1d()),
            other => Err(Error::UnknownEnvironment(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            EnvKind::Pendulum => "pendulum",
            EnvKind::CartpoleSwingup => "cartpole_swingup",
            EnvKind::Hopper1d => "hopper1d",
        }
    }

    /// Dimensionality of the meshed state vector (the D_t of the clip rule).
    pub fn topological_dim(&self) -> usize {
        self.meshed_coords.len()
    }

    pub fn clip_action(&self, action: &mut [f64]) {
        for (a, &(lo, hi)) in action.iter_mut().zip(&self.action_bounds) {
            *a = a.clamp(lo, hi);
        }
    }
}

/// Anything that maps observations to actions.
pub trait Policy {
    fn act(&self, spec: &EnvSpec, obs: &[f64]) -> Vec<f64>;
}

impl<F> Policy for F
where
    F: Fn(&EnvSpec, &[f64]) -> Vec<f64>,
{
    fn act(&self, spec: &EnvSpec, obs: &[f64]) -> Vec<f64> {
        self(spec, obs)
    }
}

/// Independent RNG streams for the individual randomness sources of one
/// rollout.
struct RolloutRngs {
    reset: ChaCha8Rng,
    action: ChaCha8Rng,
    push: ChaCha8Rng,
    obs: ChaCha8Rng,
}

impl RolloutRngs {
    fn new(seed: u64) -> Self {
        let stream = |n: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n);
            rng
        };
        Self {
            reset: stream(0),
            action: stream(1),
            push: stream(2),
            obs: stream(3),
        }
    }
}

/// Initial physical state, drawn from a small uniform perturbation around
/// rest. Exposed so tests can assert the documented reset ranges.
pub fn reset_phys(spec: &EnvSpec, seed: u64) -> Vec<f64> {
    let mut rngs = RolloutRngs::new(seed);
    init_phys(spec, &mut rngs.reset)
}

/// Initial observation for a seed; deterministic, noise-free.
pub fn reset(spec: &EnvSpec, seed: u64) -> StateVector {
    observe(spec, &reset_phys(spec, seed))
}

fn init_phys(spec: &EnvSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match spec.kind {
        EnvKind::Pendulum => pendulum::init(rng),
        EnvKind::CartpoleSwingup => cartpole::init(rng),
        EnvKind::Hopper1d => hopper::init(rng),
    }
}

/// Noise-free observation of a physical state.
pub fn observe(spec: &EnvSpec, phys: &[f64]) -> StateVector {
    match spec.kind {
        EnvKind::Pendulum => pendulum::observe(phys),
        EnvKind::CartpoleSwingup => cartpole::observe(phys),
        EnvKind::Hopper1d => hopper::observe(phys),
    }
}

/// Advance the physical state by one step.
///
/// Order of operations: Gaussian action noise, clip to bounds, optional push
/// force at a uniform random angle, semi-implicit Euler integration, failure
/// predicate. Returns an error if integration produces a non-finite state.
pub fn step_phys(
    spec: &EnvSpec,
    phys: &[f64],
    action: &[f64],
    step_idx: usize,
    disturbance: &DisturbanceConfig,
    action_rng: &mut ChaCha8Rng,
    push_rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, bool)> {
    if action.len() != spec.action_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.action_dim,
            got: action.len(),
        });
    }
    let mut act = action.to_vec();
    if disturbance.action_noise_std > 0.0 {
        let noise = Normal::new(0.0, disturbance.action_noise_std)
            .expect("noise std validated nonnegative");
        for a in &mut act {
            *a += noise.sample(action_rng);
        }
    }
    spec.clip_action(&mut act);

    // The push, when triggered, is a force of fixed magnitude at a uniform
    // random angle; each environment maps the angle onto its own actuation
    // plane. Zero magnitude or zero rate leaves the dynamics untouched.
    let mut push_angle = None;
    if disturbance.push_rate > 0.0 && disturbance.push_magnitude > 0.0 {
        if push_rng.random::<f64>() < disturbance.push_rate {
            push_angle = Some(push_rng.random::<f64>() * std::f64::consts::TAU);
        }
    }

    let (next, reward, done) = match spec.kind {
        EnvKind::Pendulum => {
            pendulum::step(phys, act[0], push_angle, disturbance.push_magnitude)
        }
        EnvKind::CartpoleSwingup => cartpole::step(
            phys,
            act[0],
            push_angle,
            disturbance.push_magnitude,
            step_idx,
        ),
        EnvKind::Hopper1d => hopper::step(
            phys,
            act[0],
            push_angle,
            disturbance.push_magnitude,
            spec.fail_height,
        ),
    };

    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::DynamicsBlowup { step: step_idx });
    }
    Ok((next, reward, done))
}

fn observe_noisy(
    spec: &EnvSpec,
    phys: &[f64],
    obs_noise_std: f64,
    rng: &mut ChaCha8Rng,
) -> StateVector {
    let mut obs = observe(spec, phys);
    if obs_noise_std > 0.0 {
        let noise = Normal::new(0.0, obs_noise_std).expect("noise std validated nonnegative");
        for o in &mut obs {
            *o += noise.sample(rng);
        }
    }
    obs
}

/// Run a policy for up to `t` steps.
///
/// The trajectory stores the observations the policy saw (noisy when
/// observation noise is enabled) and the actions it commanded. Dynamics
/// blowups terminate the episode early and count as failures.
pub fn rollout(
    spec: &EnvSpec,
    policy: &dyn Policy,
    t: usize,
    disturbance: &DisturbanceConfig,
    seed: u64,
) -> (Trajectory, f64) {
    let mut rngs = RolloutRngs::new(seed);
    let mut phys = init_phys(spec, &mut rngs.reset);
    let mut obs = observe_noisy(spec, &phys, disturbance.obs_noise_std, &mut rngs.obs);

    let mut states = Vec::with_capacity(t + 1);
    states.push(obs.clone());
    let mut actions = Vec::with_capacity(t);
    let mut rewards = Vec::with_capacity(t);

    for step_idx in 0..t {
        let action = policy.act(spec, &obs);
        match step_phys(
            spec,
            &phys,
            &action,
            step_idx,
            disturbance,
            &mut rngs.action,
            &mut rngs.push,
        ) {
            Ok((next, reward, done)) => {
                phys = next;
                obs = observe_noisy(spec, &phys, disturbance.obs_noise_std, &mut rngs.obs);
                states.push(obs.clone());
                actions.push(action);
                rewards.push(reward);
                if done {
                    break;
                }
            }
            Err(_) => break, // blowup: drop the step, terminate early
        }
    }

    let terminated_early = rewards.len() < t;
    let traj = Trajectory {
        states,
        actions,
        rewards,
        terminated_early,
        nominal_length: t,
    };
    let raw_return = traj.raw_return();
    (traj, raw_return)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_policy() -> impl Policy {
        |spec: &EnvSpec, _obs: &[f64]| vec![0.0; spec.action_dim]
    }

    #[test]
    fn reset_is_deterministic_per_seed() {
        for spec in [
            EnvSpec::pendulum(),
            EnvSpec::cartpole_swingup(),
            EnvSpec::hopper1d(),
        ] {
            assert_eq!(reset(&spec, 7), reset(&spec, 7));
            assert_ne!(reset(&spec, 7), reset(&spec, 8));
        }
    }

    #[test]
    fn pendulum_reset_range() {
        let spec = EnvSpec::pendulum();
        for seed in 0..50 {
            let phys = reset_phys(&spec, seed);
            let theta = phys[0];
            let omega = phys[1];
            assert!(
                (theta - std::f64::consts::PI).abs() <= 0.05,
                "theta {theta}"
            );
            assert!(omega.abs() <= 0.05);
        }
    }

    #[test]
    fn hopper_reset_range() {
        let spec = EnvSpec::hopper1d();
        for seed in 0..50 {
            let phys = reset_phys(&spec, seed);
            let z = phys[0];
            assert!(z >= 0.95 * HOPPER_REST_HEIGHT && z <= 1.05 * HOPPER_REST_HEIGHT);
            assert!(phys[1].abs() <= 0.05 && phys[3].abs() <= 0.05);
        }
    }

    #[test]
    fn pendulum_rest_down_is_equilibrium() {
        let spec = EnvSpec::pendulum();
        let mut phys = vec![std::f64::consts::PI, 0.0];
        let mut rngs = RolloutRngs::new(0);
        let zero = DisturbanceConfig::zero();
        for step in 0..1000 {
            let (next, _, done) = step_phys(
                &spec, &phys, &[0.0], step, &zero, &mut rngs.action, &mut rngs.push,
            )
            .unwrap();
            assert!(!done);
            phys = next;
        }
        assert!((phys[0] - std::f64::consts::PI).abs() < 1e-9);
        assert!(phys[1].abs() < 1e-9);
    }

    #[test]
    fn push_with_zero_magnitude_matches_no_push() {
        let spec = EnvSpec::hopper1d();
        let base = DisturbanceConfig::zero();
        let pushy = DisturbanceConfig {
            push_rate: 1.0,
            push_magnitude: 0.0,
            ..DisturbanceConfig::zero()
        };
        let policy = zero_policy();
        let (a, _) = rollout(&spec, &policy, 500, &base, 33);
        let (b, _) = rollout(&spec, &policy, 500, &pushy, 33);
        assert_eq!(a, b);
    }

    #[test]
    fn rollouts_are_bit_reproducible() {
        let policy = zero_policy();
        let noisy = DisturbanceConfig {
            action_noise_std: 0.1,
            obs_noise_std: 0.05,
            push_magnitude: 2.0,
            push_rate: 0.3,
        };
        for spec in [
            EnvSpec::pendulum(),
            EnvSpec::cartpole_swingup(),
            EnvSpec::hopper1d(),
        ] {
            let (a, ra) = rollout(&spec, &policy, 400, &noisy, 99);
            let (b, rb) = rollout(&spec, &policy, 400, &noisy, 99);
            assert_eq!(a, b);
            assert_eq!(ra.to_bits(), rb.to_bits());
            a.validate().unwrap();
        }
    }

    #[test]
    fn pendulum_never_terminates() {
        let spec = EnvSpec::pendulum();
        let policy = zero_policy();
        let (traj, _) = rollout(&spec, &policy, 1000, &DisturbanceConfig::zero(), 3);
        assert_eq!(traj.steps(), 1000);
        assert!(!traj.terminated_early);
    }

    #[test]
    fn cartpole_fails_after_grace_when_hanging() {
        let spec = EnvSpec::cartpole_swingup();
        let policy = zero_policy();
        let (traj, _) = rollout(&spec, &policy, 1000, &DisturbanceConfig::zero(), 3);
        assert!(traj.terminated_early);
        assert!(traj.steps() <= cartpole::GRACE_STEPS + 1);
    }

    #[test]
    fn cartpole_fails_when_cart_leaves_track() {
        let spec = EnvSpec::cartpole_swingup();
        let policy = |spec: &EnvSpec, _obs: &[f64]| vec![spec.action_bounds[0].1];
        let (traj, _) = rollout(&spec, &policy, 1000, &DisturbanceConfig::zero(), 3);
        assert!(traj.terminated_early);
        assert!(traj.steps() < cartpole::GRACE_STEPS);
    }

    #[test]
    fn rewards_are_nonnegative_everywhere() {
        let noisy = DisturbanceConfig {
            action_noise_std: 0.3,
            obs_noise_std: 0.1,
            push_magnitude: 5.0,
            push_rate: 0.2,
        };
        for spec in [
            EnvSpec::pendulum(),
            EnvSpec::cartpole_swingup(),
            EnvSpec::hopper1d(),
        ] {
            for seed in 0..5 {
                let policy = zero_policy();
                let (traj, _) = rollout(&spec, &policy, 600, &noisy, seed);
                assert!(traj.rewards.iter().all(|&r| r >= 0.0));
            }
        }
    }

    #[test]
    fn env_names_round_trip() {
        for name in ["pendulum", "cartpole_swingup", "hopper1d"] {
            assert_eq!(EnvSpec::by_name(name).unwrap().name(), name);
        }
        assert!(EnvSpec::by_name("walker").is_err());
    }

    #[test]
    fn action_dimension_checked() {
        let spec = EnvSpec::pendulum();
        let mut rngs = RolloutRngs::new(0);
        let err = step_phys(
            &spec,
            &[0.0, 0.0],
            &[0.0, 0.0],
            0,
            &DisturbanceConfig::zero(),
            &mut rngs.action,
            &mut rngs.push,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
