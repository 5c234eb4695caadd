//! End-to-end training and robustness behavior: crash fixtures, failure
//! monotonicity, and learning progress on the shaped objective.

use dimshape_core::ars::{train, ArsConfig};
use dimshape_core::env::{self, DisturbanceConfig, EnvSpec};
use dimshape_core::eval::failure_rate;
use dimshape_core::postprocess::Postprocessor;

/// Resonant leg pumping with hard landings; reliably crashes the hopper.
fn crash_policy() -> impl env::Policy {
    |_: &EnvSpec, obs: &[f64]| vec![if obs[3] > 0.0 { 1.0 } else { -1.0 }]
}

#[test]
fn pump_policy_always_falls() {
    let spec = EnvSpec::hopper1d();
    let policy = crash_policy();
    for seed in 0..10 {
        let (traj, _) = env::rollout(&spec, &policy, 1000, &DisturbanceConfig::zero(), seed);
        assert!(traj.terminated_early, "seed {seed} survived");
        assert!(traj.steps() < 1000);
    }
    let report = failure_rate(&policy, &spec, &DisturbanceConfig::zero(), 10, 1000, 5);
    assert_eq!(report.failure_rate, 1.0);
}

#[test]
fn lowering_fail_threshold_never_adds_failures() {
    // The same seeded batch re-run with decreasing height thresholds: a
    // rollout that stays above the higher bar also stays above the lower
    // one, so failure counts are non-increasing.
    let policy = crash_policy();
    let mut last_count = usize::MAX;
    for threshold_scale in [1.4, 1.0, 0.6] {
        let mut spec = EnvSpec::hopper1d();
        spec.fail_height *= threshold_scale;
        let report = failure_rate(&policy, &spec, &DisturbanceConfig::zero(), 30, 1000, 77);
        assert!(
            report.failure_count <= last_count,
            "threshold scale {threshold_scale}: count {} rose above {}",
            report.failure_count,
            last_count
        );
        last_count = report.failure_count;
    }
}

#[test]
fn failure_rate_monotone_in_push_magnitude() {
    // A trained hopper under the same seeded rollout batch with a rising
    // push ladder.
    let spec = EnvSpec::hopper1d();
    let cfg = ArsConfig {
        epochs: 80,
        seed: 5,
        ..ArsConfig::default()
    };
    let (policy, _) = train(&spec, &cfg, &Postprocessor::identity()).unwrap();
    let mut last = -1.0;
    let mut rates = Vec::new();
    for magnitude in [0.0, 350.0, 700.0] {
        let disturbance = DisturbanceConfig {
            push_magnitude: magnitude,
            push_rate: 0.2,
            ..DisturbanceConfig::zero()
        };
        let report = failure_rate(&policy, &spec, &disturbance, 40, 1000, 13);
        assert!(
            report.failure_rate >= last,
            "failure rate dropped along the ladder: {rates:?} then {}",
            report.failure_rate
        );
        last = report.failure_rate;
        rates.push(report.failure_rate);
    }
    assert_eq!(rates[0], 0.0);
    assert!(*rates.last().unwrap() > 0.3, "ladder too weak: {rates:?}");
}

#[test]
fn shaped_objective_improves_during_training() {
    // Median shaped return over a seeded batch of pendulum runs rises from
    // the first epoch to the last.
    let spec = EnvSpec::pendulum();
    let mut firsts = Vec::new();
    let mut lasts = Vec::new();
    for seed in 0..5 {
        let cfg = ArsConfig {
            epochs: 30,
            seed,
            ..ArsConfig::default()
        };
        let (_, history) = train(&spec, &cfg, &Postprocessor::identity()).unwrap();
        firsts.push(history.epochs[0].mean_shaped_return);
        lasts.push(history.epochs.last().unwrap().mean_shaped_return);
    }
    firsts.sort_by(f64::total_cmp);
    lasts.sort_by(f64::total_cmp);
    assert!(
        lasts[2] >= firsts[2],
        "no progress: first medians {firsts:?}, last medians {lasts:?}"
    );
}
