//! Torque-limited pendulum swing-up.
//!
//! Physical state `[θ, θ̇]` with θ measured from upright, so θ = π is the
//! hanging rest position the episode starts near. The observation encodes
//! the angle as (cos θ, sin θ) to avoid wrap-around discontinuities in box
//! keys. There is no failure predicate and, deliberately, no damping, so an
//! unactuated swing conserves mechanical energy up to integrator error.
//!
//! A triggered push acts as an extra torque `magnitude · sin(angle)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::trajectory::StateVector;

pub const DT: f64 = 0.05;
pub const GRAVITY: f64 = 9.81;
pub const MASS: f64 = 1.0;
pub const LENGTH: f64 = 1.0;
pub const MAX_TORQUE: f64 = 2.0;
pub const MAX_SPEED: f64 = 8.0;

pub fn init(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let theta = std::f64::consts::PI + rng.random_range(-0.05..=0.05);
    let omega = rng.random_range(-0.05..=0.05);
    vec![theta, omega]
}

pub fn observe(phys: &[f64]) -> StateVector {
    vec![phys[0].cos(), phys[0].sin(), phys[1]]
}

/// Mechanical energy; used by integrator tests.
pub fn energy(phys: &[f64]) -> f64 {
    let inertia = MASS * LENGTH * LENGTH;
    0.5 * inertia * phys[1] * phys[1] + MASS * GRAVITY * LENGTH * phys[0].cos()
}

pub fn step(
    phys: &[f64],
    torque: f64,
    push_angle: Option<f64>,
    push_magnitude: f64,
) -> (Vec<f64>, f64, bool) {
    let theta = phys[0];
    let omega = phys[1];
    let mut total_torque = torque;
    if let Some(angle) = push_angle {
        total_torque += push_magnitude * angle.sin();
    }
    let inertia = MASS * LENGTH * LENGTH;
    let accel = GRAVITY / LENGTH * theta.sin() + total_torque / inertia;
    let new_omega = (omega + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
    let new_theta = theta + new_omega * DT;
    // Upright bonus in [0, 1]: 1 at the top, 0 hanging down.
    let reward = (1.0 + new_theta.cos()) / 2.0;
    (vec![new_theta, new_omega], reward, false)
}
