use dimshape_core::ars::{two_phase_train, train, ArsConfig};
use dimshape_core::env::{DisturbanceConfig, EnvSpec};
use dimshape_core::eval::{default_calibration_grid, disturbance_grid_search, evaluate_dimensions, failure_rate, EvalConfig};
use dimshape_core::postprocess::{Postprocessor, PostprocessorKind};

fn median(mut v: Vec<f64>) -> f64 { v.sort_by(f64::total_cmp); v[v.len() / 2] }

#[test]
#[ignore]
fn probe_final_env() {
    let spec = EnvSpec::hopper1d();
    let mut sl = Vec::new(); let mut il = Vec::new();
    let mut sr = Vec::new(); let mut ir = Vec::new();
    let mut sn = Vec::new(); let mut inn = Vec::new();
    let mut first_identity = None;
    for seed in 0..3u64 {
        let base = ArsConfig { epochs: 200, seed, ..ArsConfig::default() };
        let tune = ArsConfig { epochs: 100, seed, ..ArsConfig::default() };
        let p01 = Postprocessor { mesh_initial_box: 0.1, ..Postprocessor::new(PostprocessorKind::LowerMeshDim) };
        let (sp, _) = two_phase_train(&spec, &base, &tune, &p01).unwrap();
        let (ip, _) = two_phase_train(&spec, &base, &tune, &Postprocessor::identity()).unwrap();
        let ec = EvalConfig { n_seeds: 1, rollouts_per_seed: 5, seed: 900 + seed, ..EvalConfig::default() };
        let s = evaluate_dimensions(&sp, &spec, &ec, &DisturbanceConfig::zero());
        let i = evaluate_dimensions(&ip, &spec, &ec, &DisturbanceConfig::zero());
        let snr = evaluate_dimensions(&sp, &spec, &ec, &DisturbanceConfig::eval_noise());
        let inr = evaluate_dimensions(&ip, &spec, &ec, &DisturbanceConfig::eval_noise());
        println!("seed {seed} shaped steps {:?} ident steps {:?}",
            s.rows.iter().map(|r| r.steps).collect::<Vec<_>>(),
            i.rows.iter().map(|r| r.steps).collect::<Vec<_>>());
        for r in &s.rows { sl.push(r.lower_mesh_dim); sr.push(r.raw_return); }
        for r in &i.rows { il.push(r.lower_mesh_dim); ir.push(r.raw_return); }
        for r in &snr.rows { sn.push(r.lower_mesh_dim); }
        for r in &inr.rows { inn.push(r.lower_mesh_dim); }
        if first_identity.is_none() { first_identity = Some(ip); }
    }
    println!("c8 clean: shaped {:.3} < ident {:.3} ? {} | ret ratio {:.2}",
        median(sl.clone()), median(il.clone()), median(sl) < median(il),
        median(sr) / median(ir));
    println!("c9 noisy: shaped {:.3} <= ident {:.3} ? {}",
        median(sn.clone()), median(inn.clone()), median(sn) <= median(inn));
    let ip = first_identity.unwrap();
    let outcome = disturbance_grid_search(&ip, &spec, &default_calibration_grid(), 0.2, 100, 1000, 17);
    let sel = outcome.selected_report();
    println!("c10: push ({:.0},{:.1}) act {:.2} obs {:.2} rate {:.2}",
        sel.disturbance.push_magnitude, sel.disturbance.push_rate,
        sel.disturbance.action_noise_std, sel.disturbance.obs_noise_std, sel.failure_rate);
    for mag in [120.0, 200.0, 270.0, 360.0] {
        let d = DisturbanceConfig { push_magnitude: mag, push_rate: 0.2, ..DisturbanceConfig::zero() };
        print!(" push{mag}:{:.2}", failure_rate(&ip, &spec, &d, 50, 1000, 23).failure_rate);
    }
    println!();
}
