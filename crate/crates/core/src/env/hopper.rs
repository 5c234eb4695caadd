//! One-dimensional spring-leg hopper.
//!
//! A body mass rides on an actuated leg spring whose foot meets the ground
//! through a stiff unilateral contact. Physical state
//! `[z_body, v_body, z_foot, v_foot]`; the observation reports the leg as a
//! length/velocity pair `[z, ż, l, l̇]` with `l = z_body − z_foot`. The
//! action shifts the spring's rest length, which is how the policy pumps
//! energy into a hop. Stance and flight alternate without an explicit mode
//! variable, giving the hybrid limit-cycle structure of legged gaits.
//!
//! Failure: body height below `fail_height`. A triggered push applies
//! `magnitude · sin(angle)` vertically to the body (the vertical projection
//! of a random-direction force on a one-dimensional body).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::trajectory::StateVector;

pub const DT: f64 = 0.01;
pub const GRAVITY: f64 = 9.81;
pub const BODY_MASS: f64 = 1.0;
pub const FOOT_MASS: f64 = 0.2;
pub const LEG_STIFFNESS: f64 = 300.0;
pub const LEG_DAMPING: f64 = 0.3;
pub const GROUND_STIFFNESS: f64 = 800.0;
pub const GROUND_DAMPING: f64 = 25.0;
pub const REST_LEG_LENGTH: f64 = 1.0;
/// Rest-length shift per unit action, asymmetric like a real leg's
/// flexion/extension ranges: l_rest = L0 + EXTEND·a for a ≥ 0 and
/// L0 + RETRACT·a for a < 0, a ∈ [-1, 1]. Deep retraction makes hard
/// stomp landings reachable while extension thrust stays moderate.
pub const EXTEND_GAIN: f64 = 0.2;
pub const RETRACT_GAIN: f64 = 0.45;
/// Quadratic drag on the body: negligible during normal hops, but it caps
/// runaway bounce amplitudes so gaits stay bounded over long horizons.
pub const BODY_DRAG: f64 = 0.5;
/// Leg travel limits: a stiff stop spring engages outside [MIN, MAX] so the
/// leg cannot invert or extend without bound.
pub const LEG_TRAVEL_MIN: f64 = 0.3;
pub const LEG_TRAVEL_MAX: f64 = 1.7;
pub const STOP_STIFFNESS: f64 = 1500.0;
/// Velocity bounds keeping the state space compact.
pub const MAX_BODY_SPEED: f64 = 10.0;
pub const MAX_FOOT_SPEED: f64 = 8.0;

/// Static standing height of the body: rest leg length minus leg-spring sag
/// minus ground penetration under the total weight.
pub const REST_HEIGHT: f64 = REST_LEG_LENGTH
    - BODY_MASS * GRAVITY / LEG_STIFFNESS
    - (BODY_MASS + FOOT_MASS) * GRAVITY / GROUND_STIFFNESS;

pub fn init(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let z = REST_HEIGHT * rng.random_range(0.95..=1.05);
    let v = rng.random_range(-0.05..=0.05);
    vec![z, v, 0.0, 0.0]
}

pub fn observe(phys: &[f64]) -> StateVector {
    vec![phys[0], phys[1], phys[0] - phys[2], phys[1] - phys[3]]
}

pub fn step(
    phys: &[f64],
    action: f64,
    push_angle: Option<f64>,
    push_magnitude: f64,
    fail_height: f64,
) -> (Vec<f64>, f64, bool) {
    let (z_b, v_b, z_f, v_f) = (phys[0], phys[1], phys[2], phys[3]);

    let rest_length = if action >= 0.0 {
        REST_LEG_LENGTH + EXTEND_GAIN * action
    } else {
        REST_LEG_LENGTH + RETRACT_GAIN * action
    };
    let leg_length = z_b - z_f;
    let leg_rate = v_b - v_f;
    // Positive pushes body and foot apart.
    let mut leg_force = LEG_STIFFNESS * (rest_length - leg_length) - LEG_DAMPING * leg_rate;
    if leg_length < LEG_TRAVEL_MIN {
        leg_force += STOP_STIFFNESS * (LEG_TRAVEL_MIN - leg_length);
    } else if leg_length > LEG_TRAVEL_MAX {
        leg_force -= STOP_STIFFNESS * (leg_length - LEG_TRAVEL_MAX);
    }

    // Unilateral penalty ground: pushes the foot up only while penetrating.
    let ground_force = if z_f < 0.0 {
        (-GROUND_STIFFNESS * z_f - GROUND_DAMPING * v_f).max(0.0)
    } else {
        0.0
    };

    let mut body_force = leg_force - BODY_MASS * GRAVITY - BODY_DRAG * v_b * v_b.abs();
    if let Some(angle) = push_angle {
        body_force += push_magnitude * angle.sin();
    }
    let foot_force = -leg_force + ground_force - FOOT_MASS * GRAVITY;

    let new_v_b = (v_b + body_force / BODY_MASS * DT).clamp(-MAX_BODY_SPEED, MAX_BODY_SPEED);
    let new_z_b = z_b + new_v_b * DT;
    let new_v_f = (v_f + foot_force / FOOT_MASS * DT).clamp(-MAX_FOOT_SPEED, MAX_FOOT_SPEED);
    let new_z_f = z_f + new_v_f * DT;

    // Alive bonus plus a capped vertical-activity bonus: hopping pays better
    // than standing, but the bonus saturates so moderate rhythmic hops are
    // as good as huge ballistic ones.
    let reward = 0.5 + (new_v_b.abs() / 1.5).min(1.0);

    let done = new_z_b < fail_height;
    (vec![new_z_b, new_v_b, new_z_f, new_v_f], reward, done)
}
