use std::ffi::{c_int, c_void};
use std::ptr;

use softgait_ffi::*;

fn eval() -> SgEvalConfig {
    SgEvalConfig { step_delay: 0.1, cycles_per_eval: 3, per_eval_overhead: 0.0 }
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { sg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn new_sim(seed: u64, noisy: bool) -> *mut SgSim {
    unsafe {
        let mut cfg = std::mem::zeroed::<SgSimConfig>();
        assert_eq!(sg_sim_config_default(&mut cfg), SgStatus::Ok);
        cfg.seed = seed;
        if !noisy {
            cfg.noise_sigma = SgPose::default();
        }
        let mut sim = ptr::null_mut();
        assert_eq!(sg_sim_new(&cfg, &mut sim), SgStatus::Ok);
        sim
    }
}

#[test]
fn reward_and_presets() {
    let mut k = SgCoefficients::default();
    assert_eq!(unsafe { sg_preset(SgAxis::PlusX, &mut k) }, SgStatus::Ok);
    assert_eq!((k.a, k.e, k.f), (1.0, -0.1, -0.1));
    let d = SgDisplacement { dx: 0.5, dy: 0.1, dtheta: -0.2 };
    assert!((unsafe { sg_reward(&d, &k) } - 0.47).abs() < 1e-12);
    assert!(unsafe { sg_reward(ptr::null(), &k) }.is_nan());
    assert_eq!(unsafe { sg_preset(SgAxis::MinusY, ptr::null_mut()) }, SgStatus::NullPointer);
    assert_eq!(last_error(), "out is null");
}

#[test]
fn budget_and_time() {
    assert_eq!(sg_evals_required(4, 7), 196);
    assert_eq!(sg_evals_required(2, 3), 18);
    let mut t = 0.0;
    assert_eq!(unsafe { sg_estimate_training_time(&eval(), 4, 7, 1, &mut t) }, SgStatus::Ok);
    assert!((t - 176.4).abs() < 1e-9);
    let bad = SgEvalConfig { step_delay: -1.0, ..eval() };
    assert_eq!(unsafe { sg_estimate_training_time(&bad, 4, 7, 1, &mut t) }, SgStatus::InvalidConfig);
}

#[test]
fn servo_targets_end_neutral() {
    let mut g = SgAssignment::default();
    g.pairs[1] = SgPair { first: 1, second: 2 };
    let mut out = [9.0; SG_SERVO_TARGET_COUNT];
    assert_eq!(unsafe { sg_servo_targets(&g, out.as_mut_ptr()) }, SgStatus::Ok);
    assert!(out[32..].iter().all(|&a| a == 0.0));
    assert!(out.iter().all(|a| [-1.25, 0.0, 1.25].contains(a)));
    assert!(out[4..8].iter().all(|&a| a != 0.0));
    g.pairs[0].first = 7;
    assert_eq!(unsafe { sg_servo_targets(&g, out.as_mut_ptr()) }, SgStatus::InvalidArgument);
}

#[test]
fn sim_lifecycle() {
    let sim = new_sim(3, false);
    let mut pose = SgPose::default();
    let mut d = SgDisplacement::default();
    let neutral = SgAssignment::default();
    unsafe {
        assert_eq!(sg_sim_execute(sim, &neutral, &eval(), &mut d), SgStatus::Ok);
        assert_eq!(d, SgDisplacement::default());
        let mut g = neutral;
        g.pairs[2] = SgPair { first: 3, second: 4 };
        assert_eq!(sg_sim_execute(sim, &g, &eval(), &mut d), SgStatus::Ok);
        assert_ne!(d, SgDisplacement::default());
        assert_eq!(sg_sim_pose(sim, &mut pose), SgStatus::Ok);
        assert_ne!(pose, SgPose::default());
        assert_eq!(sg_sim_reset_pose(sim, SgPose::default()), SgStatus::Ok);
        assert_eq!(sg_sim_pose(sim, &mut pose), SgStatus::Ok);
        assert_eq!(pose, SgPose::default());
        sg_sim_free(sim);
        sg_sim_free(ptr::null_mut());

        let mut cfg = std::mem::zeroed::<SgSimConfig>();
        sg_sim_config_default(&mut cfg);
        cfg.wear_rate = -1.0;
        let mut out = ptr::null_mut();
        assert_eq!(sg_sim_new(&cfg, &mut out), SgStatus::InvalidConfig);
        assert!(out.is_null());
        assert!(last_error().contains("wear_rate"));
    }
}

unsafe extern "C" fn count(user: *mut c_void, index: u64, _: *const SgAssignment, _: f64) -> c_int {
    let n = &mut *(user as *mut u64);
    assert_eq!(index, *n);
    *n += 1;
    0
}

unsafe extern "C" fn stop_after_ten(user: *mut c_void, index: u64, _: *const SgAssignment, _: f64) -> c_int {
    *(user as *mut u64) = index + 1;
    (index >= 9) as c_int
}

#[test]
fn tree_search_runs_full_budget() {
    let sim = new_sim(8, false);
    let mut k = SgCoefficients::default();
    let mut best = SgAssignment::default();
    let mut r = 0.0;
    let mut n: u64 = 0;
    unsafe {
        sg_preset(SgAxis::PlusX, &mut k);
        let status = sg_tree_search(
            sim,
            &k,
            &eval(),
            ptr::null(),
            &SgAssignment::default(),
            1,
            Some(count),
            &mut n as *mut u64 as *mut c_void,
            &mut best,
            &mut r,
        );
        assert_eq!(status, SgStatus::Ok);
        assert_eq!(n, 196);
        assert!(r > 0.0);

        // refinement never ends below the re-measured incumbent on a noise-free sim
        let mut refined = SgAssignment::default();
        let mut r2 = 0.0;
        let status = sg_refine(sim, &k, &eval(), ptr::null(), &best, 2, None, ptr::null_mut(), &mut refined, &mut r2);
        assert_eq!(status, SgStatus::Ok);
        assert!(r2 >= r);
        sg_sim_free(sim);
    }
}

#[test]
fn reduced_space_and_abort() {
    let sim = new_sim(1, true);
    let mut k = SgCoefficients::default();
    let mut best = SgAssignment::default();
    let mut r = 0.0;
    let mut n: u64 = 0;
    unsafe {
        sg_preset(SgAxis::PlusTheta, &mut k);
        let mut search = sg_search_config_default();
        search.leg_order = [2, 2, 0, 1];
        search.n_legs = 2;
        search.n_prims = 3;
        let status = sg_tree_search(
            sim,
            &k,
            &eval(),
            &search,
            &best.clone(),
            1,
            Some(count),
            &mut n as *mut u64 as *mut c_void,
            &mut best,
            &mut r,
        );
        assert_eq!(status, SgStatus::InvalidArgument, "duplicate legs");
        assert_eq!(n, 0);
        search.leg_order = [2, 1, 0, 0];
        assert_eq!(
            sg_tree_search(
                sim,
                &k,
                &eval(),
                &search,
                &SgAssignment::default(),
                1,
                Some(count),
                &mut n as *mut u64 as *mut c_void,
                &mut best,
                &mut r
            ),
            SgStatus::Ok
        );
        assert_eq!(n, 18);
        assert_eq!((best.pairs[0], best.pairs[3]), (SgPair::default(), SgPair::default()));
        assert!(best.pairs.iter().all(|p| p.first < 3 && p.second < 3));

        let mut seen: u64 = 0;
        let status = sg_tree_search(
            sim,
            &k,
            &eval(),
            ptr::null(),
            &SgAssignment::default(),
            1,
            Some(stop_after_ten),
            &mut seen as *mut u64 as *mut c_void,
            &mut best,
            &mut r,
        );
        assert_eq!(status, SgStatus::SearchAborted);
        assert_eq!(seen, 10);
        assert!(last_error().contains("aborted"));
        sg_sim_free(sim);
    }
}
