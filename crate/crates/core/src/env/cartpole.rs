//! Cartpole swing-up with termination.
//!
//! Physical state `[x, ẋ, θ, θ̇]` with θ measured from hanging down, so the
//! swing-up target is θ = π. The observation is [x, ẋ, cos θ, sin θ, θ̇].
//! Failure: the cart leaves the track at any time, or the pole is far from
//! upright once the swing-up grace period has passed — which makes a policy
//! that never swings up terminate early and exercise the early-fall clip.
//!
//! A triggered push applies `magnitude · cos(angle)` horizontally to the
//! cart (the in-plane projection of a random-direction force).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::trajectory::StateVector;

pub const DT: f64 = 0.05;
pub const GRAVITY: f64 = 9.81;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
pub const POLE_HALF_LENGTH: f64 = 0.5;
pub const MAX_FORCE: f64 = 10.0;
pub const TRACK_LIMIT: f64 = 2.4;
/// Steps before the upright requirement starts being enforced.
pub const GRACE_STEPS: usize = 300;
/// Maximum angular distance from upright tolerated after the grace period.
pub const UPRIGHT_TOLERANCE: f64 = 0.9;
const MAX_CART_SPEED: f64 = 10.0;
const MAX_POLE_SPEED: f64 = 15.0;

pub fn init(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![
        rng.random_range(-0.05..=0.05),
        rng.random_range(-0.05..=0.05),
        rng.random_range(-0.05..=0.05),
        rng.random_range(-0.05..=0.05),
    ]
}

pub fn observe(phys: &[f64]) -> StateVector {
    vec![phys[0], phys[1], phys[2].cos(), phys[2].sin(), phys[3]]
}

/// Smallest-magnitude angular distance between two angles.
fn angular_distance(a: f64, b: f64) -> f64 {
    let d = a - b;
    d.sin().atan2(d.cos()).abs()
}

pub fn step(
    phys: &[f64],
    force: f64,
    push_angle: Option<f64>,
    push_magnitude: f64,
    step_idx: usize,
) -> (Vec<f64>, f64, bool) {
    let (x, v, theta, omega) = (phys[0], phys[1], phys[2], phys[3]);
    let mut f = force;
    if let Some(angle) = push_angle {
        f += push_magnitude * angle.cos();
    }

    let total_mass = CART_MASS + POLE_MASS;
    let pole_moment = POLE_MASS * POLE_HALF_LENGTH;
    // Standard pole-on-cart dynamics, rewritten for θ measured from the
    // hanging position.
    let temp = (f - pole_moment * omega * omega * theta.sin()) / total_mass;
    let theta_acc = (-GRAVITY * theta.sin() + theta.cos() * temp)
        / (POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * theta.cos() * theta.cos() / total_mass));
    let x_acc = temp + pole_moment * theta_acc * theta.cos() / total_mass;

    let new_v = (v + x_acc * DT).clamp(-MAX_CART_SPEED, MAX_CART_SPEED);
    let new_x = x + new_v * DT;
    let new_omega = (omega + theta_acc * DT).clamp(-MAX_POLE_SPEED, MAX_POLE_SPEED);
    let new_theta = theta + new_omega * DT;

    // Alive bonus plus an upright shaping term; strictly nonnegative.
    let upright = (1.0 - new_theta.cos()) / 2.0;
    let reward = 0.2 + 0.8 * upright;

    let off_track = new_x.abs() > TRACK_LIMIT;
    let steps_completed = step_idx + 1;
    let fell_after_grace = steps_completed > GRACE_STEPS
        && angular_distance(new_theta, std::f64::consts::PI) > UPRIGHT_TOLERANCE;
    let done = off_track || fell_after_grace;

    (vec![new_x, new_v, new_theta, new_omega], reward, done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hanging_is_stable_before_grace() {
        let mut phys = vec![0.0, 0.0, 0.01, 0.0];
        for step_idx in 0..GRACE_STEPS {
            let (next, _, done) = step(&phys, 0.0, None, 0.0, step_idx);
            assert!(!done, "terminated during grace at {step_idx}");
            phys = next;
            assert!(phys[2].abs() < 0.1);
        }
    }

    #[test]
    fn hanging_fails_right_after_grace() {
        let phys = vec![0.0, 0.0, 0.0, 0.0];
        let (_, _, done) = step(&phys, 0.0, None, 0.0, GRACE_STEPS);
        assert!(done);
    }

    #[test]
    fn balanced_upright_survives_after_grace() {
        let phys = vec![0.0, 0.0, std::f64::consts::PI, 0.0];
        let (next, reward, done) = step(&phys, 0.0, None, 0.0, GRACE_STEPS + 50);
        assert!(!done);
        assert!(reward > 0.99);
        // Upright is an (unstable) equilibrium.
        assert!((next[2] - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn full_force_leaves_track() {
        let mut phys = vec![0.0, 0.0, 0.0, 0.0];
        let mut done = false;
        for step_idx in 0..200 {
            let (next, _, d) = step(&phys, MAX_FORCE, None, 0.0, step_idx);
            phys = next;
            if d {
                done = true;
                break;
            }
        }
        assert!(done);
        assert!(phys[0] > TRACK_LIMIT);
    }

    #[test]
    fn angular_distance_wraps() {
        let two_pi = std::f64::consts::TAU;
        assert!(angular_distance(0.1, 0.1 + two_pi) < 1e-12);
        assert!((angular_distance(0.0, std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
    }
}
