use std::ffi::CStr;
use std::ptr;

use skdescent_ffi::*;

fn last_error() -> String {
    let p = sk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(n: usize, seed: u64) -> *mut SkInstance {
    let mut inst = ptr::null_mut();
    assert_eq!(
        unsafe { sk_instance_generate(n, seed, &mut inst) },
        SkStatus::Ok
    );
    assert!(!inst.is_null());
    inst
}

#[test]
fn versions_are_nul_terminated() {
    let v = unsafe { CStr::from_ptr(sk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let g = unsafe { CStr::from_ptr(sk_generator_version()) };
    assert_eq!(g.to_str().unwrap(), skdescent::GENERATOR_VERSION);
}

#[test]
fn instance_matches_core() {
    let inst = generate(16, 9);
    let core = skdescent::generate_couplings(16, 9).unwrap();
    unsafe {
        assert_eq!(sk_instance_size(inst), 16);
        for i in 0..16 {
            for j in 0..16 {
                let mut v = f64::NAN;
                assert_eq!(sk_instance_coupling(inst, i, j, &mut v), SkStatus::Ok);
                assert_eq!(v.to_bits(), core.get(i, j).to_bits());
            }
        }
        let mut v = 0.0;
        assert_eq!(
            sk_instance_coupling(inst, 16, 0, &mut v),
            SkStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));
        sk_instance_free(inst);
    }
}

#[test]
fn hand_built_energy() {
    // J01 = 1, J02 = -0.5, J12 = 2
    let upper = [1.0, -0.5, 2.0];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(
            sk_instance_from_upper(3, upper.as_ptr(), 3, &mut inst),
            SkStatus::Ok
        );
        let spins: [i8; 3] = [1, 1, -1];
        let mut e = 0.0;
        assert_eq!(sk_energy(inst, spins.as_ptr(), 3, &mut e), SkStatus::Ok);
        assert!((e - -(1.0 + 0.5 - 2.0)).abs() < 1e-15);

        let mut stable = false;
        assert_eq!(
            sk_is_one_flip_stable(inst, spins.as_ptr(), 3, &mut stable),
            SkStatus::Ok
        );
        let expected = skdescent::is_one_flip_stable(
            &skdescent::CouplingMatrix::from_upper(3, &upper).unwrap(),
            &skdescent::SpinConfig::new(spins.to_vec()).unwrap(),
        )
        .unwrap();
        assert_eq!(stable, expected);

        sk_instance_free(inst);
        let mut other = ptr::null_mut();
        assert_eq!(
            sk_instance_from_upper(3, upper.as_ptr(), 2, &mut other),
            SkStatus::DimensionMismatch
        );
        assert!(other.is_null());
    }
}

#[test]
fn invalid_inputs_report_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            sk_instance_generate(4, 1, ptr::null_mut()),
            SkStatus::NullPointer
        );
        assert!(last_error().contains("out"));

        let inst = generate(4, 1);
        let bad: [i8; 4] = [1, 0, 1, -1];
        let mut e = 0.0;
        assert_eq!(
            sk_energy(inst, bad.as_ptr(), 4, &mut e),
            SkStatus::InvalidArgument
        );
        let short: [i8; 3] = [1, 1, 1];
        assert_eq!(
            sk_energy(inst, short.as_ptr(), 3, &mut e),
            SkStatus::DimensionMismatch
        );
        assert_eq!(
            sk_energy(ptr::null(), short.as_ptr(), 3, &mut e),
            SkStatus::NullPointer
        );

        let stream = sk_stream_new(1);
        let mut d = 0.0;
        assert_eq!(
            sk_sample_depth(stream, 0.0, &mut d),
            SkStatus::InvalidArgument
        );
        assert_eq!(
            sk_sample_depth(stream, -1.0, &mut d),
            SkStatus::InvalidArgument
        );
        assert_eq!(
            sk_sample_depth(stream, f64::NAN, &mut d),
            SkStatus::InvalidArgument
        );

        let big = generate(25, 1);
        assert_eq!(
            sk_ground_state(big, &mut e, ptr::null_mut(), ptr::null_mut(), 0),
            SkStatus::SizeLimit
        );

        assert_eq!(
            sk_state_new(inst, short.as_ptr(), 3, &mut out),
            SkStatus::DimensionMismatch
        );

        // success clears the previous message
        assert_eq!(sk_sample_depth(stream, 1.0, &mut d), SkStatus::Ok);
        assert!(sk_last_error_message().is_null());

        sk_stream_free(stream);
        sk_instance_free(inst);
        sk_instance_free(big);
        sk_instance_free(ptr::null_mut());
        sk_stream_free(ptr::null_mut());
        sk_state_free(ptr::null_mut());
    }
}

#[test]
fn select_site_matches_examples() {
    let spec = [-0.3, 0.5, -1.2, -0.8];
    let mut k = 0i64;
    unsafe {
        assert_eq!(sk_select_site(spec.as_ptr(), 4, -1.0, &mut k), SkStatus::Ok);
        assert!(k == 2 || k == 3);
        assert_eq!(sk_select_site(spec.as_ptr(), 4, -0.1, &mut k), SkStatus::Ok);
        assert_eq!(k, 0);
        let pos = [0.1, 0.2];
        assert_eq!(sk_select_site(pos.as_ptr(), 2, -1.0, &mut k), SkStatus::Ok);
        assert_eq!(k, -1);
        assert_eq!(sk_select_site(ptr::null(), 0, -1.0, &mut k), SkStatus::Ok);
        assert_eq!(k, -1);
    }
}

#[test]
fn trajectory_matches_core() {
    let n = 30;
    let inst = generate(n, 5);
    let core = skdescent::generate_couplings(n, 5).unwrap();
    unsafe {
        let s = sk_stream_new(77);
        let mut spins0 = vec![0i8; n];
        assert_eq!(sk_random_config(s, n, spins0.as_mut_ptr()), SkStatus::Ok);
        let mut rec = SkRunRecord::default();
        let mut end = vec![0i8; n];
        assert_eq!(
            sk_run_trajectory(
                inst,
                spins0.as_ptr(),
                n,
                3.0,
                s,
                1_000_000,
                &mut rec,
                end.as_mut_ptr()
            ),
            SkStatus::Ok
        );
        sk_stream_free(s);

        let mut stream = skdescent::Stream::new(77);
        let c0 = skdescent::random_config(n, &mut stream).unwrap();
        assert_eq!(c0.as_slice(), &spins0[..]);
        let lam = skdescent::LambdaParam::new(3.0).unwrap();
        let t = skdescent::run_trajectory(&core, &c0, lam, &mut stream, 1_000_000).unwrap();
        assert_eq!(rec.flips, t.record.flips);
        assert!(rec.converged);
        assert_eq!(
            rec.final_energy_per_spin.to_bits(),
            t.record.final_energy_per_spin.to_bits()
        );
        assert_eq!(t.endpoint.spins().as_slice(), &end[..]);

        let mut stable = false;
        assert_eq!(
            sk_is_one_flip_stable(inst, end.as_ptr(), n, &mut stable),
            SkStatus::Ok
        );
        assert!(stable);
        sk_instance_free(inst);
    }
}

#[test]
fn stepping_a_state_reaches_stability() {
    let n = 20;
    let inst = generate(n, 2);
    unsafe {
        let stream = sk_stream_new(4);
        let mut spins = vec![0i8; n];
        sk_random_config(stream, n, spins.as_mut_ptr());
        let mut st = ptr::null_mut();
        assert_eq!(sk_state_new(inst, spins.as_ptr(), n, &mut st), SkStatus::Ok);
        let mut prev = sk_state_energy(st);
        let mut spec = vec![0.0; n];
        loop {
            assert_eq!(
                sk_state_delta_spectrum(st, spec.as_mut_ptr(), n),
                SkStatus::Ok
            );
            let mut k = 0i64;
            assert_eq!(sk_state_step(st, inst, 10.0, stream, &mut k), SkStatus::Ok);
            if k < 0 {
                assert!(spec.iter().all(|&d| d >= 0.0));
                break;
            }
            assert!(spec[k as usize] < 0.0);
            let e = sk_state_energy(st);
            assert!((e - (prev + 2.0 * spec[k as usize])).abs() < 1e-9);
            prev = e;
        }
        let flips = sk_state_flips(st);
        assert!(flips > 0);

        sk_state_spins(st, spins.as_mut_ptr(), n);
        let mut direct = 0.0;
        sk_energy(inst, spins.as_ptr(), n, &mut direct);
        assert!((direct - sk_state_energy(st)).abs() < 1e-9);

        // a manual flip moves the state off the local minimum
        assert_eq!(sk_state_apply_flip(st, inst, 0), SkStatus::Ok);
        assert!(sk_state_energy(st) >= prev - 1e-12);
        assert_eq!(sk_state_flips(st), flips + 1);
        assert_eq!(sk_state_apply_flip(st, inst, n), SkStatus::InvalidArgument);

        sk_state_free(st);
        sk_stream_free(stream);
        sk_instance_free(inst);
    }
}

#[test]
fn ground_state_is_a_lower_bound() {
    let n = 12;
    let inst = generate(n, 11);
    unsafe {
        let mut e0 = 0.0;
        let mut nstable = 0u64;
        let mut gs = vec![0i8; n];
        assert_eq!(
            sk_ground_state(inst, &mut e0, &mut nstable, gs.as_mut_ptr(), n),
            SkStatus::Ok
        );
        assert_eq!(gs[0], 1);
        assert!(nstable >= 2);
        let mut e = 0.0;
        sk_energy(inst, gs.as_ptr(), n, &mut e);
        assert!((e / n as f64 - e0).abs() < 1e-12);

        let mut stats = SkEnergyStats::default();
        assert_eq!(
            sk_protocol_fixed_starts_instance(inst, 1.0, 12, 3, 8, &mut stats),
            SkStatus::Ok
        );
        assert!(stats.has_h_n && stats.has_tau);
        assert!(stats.h_n >= e0 - 1e-12);
        assert_eq!(stats.runs, 36);
        sk_instance_free(inst);
    }
}

#[test]
fn protocols_match_core() {
    let src = skdescent::GaussianInstances::new(21);
    let lam = skdescent::LambdaParam::new(2.0).unwrap();
    let expect = skdescent::protocol_fixed_starts(&src, 24, lam, 5, 4, 99).unwrap();
    let mut got = SkEnergyStats::default();
    unsafe {
        assert_eq!(
            sk_protocol_fixed_starts(24, 2.0, 5, 4, 21, 99, &mut got),
            SkStatus::Ok
        );
    }
    assert_eq!(got.runs, expect.runs);
    assert_eq!(got.tau.to_bits(), expect.tau.unwrap().to_bits());
    assert_eq!(got.h_n.to_bits(), expect.h_n.unwrap().to_bits());
    assert_eq!(got.nreal, 4);
    assert_eq!(got.starts_or_budget, 5);

    let expect = skdescent::protocol_fixed_budget(&src, 24, lam, 2_000, 4, 99).unwrap();
    unsafe {
        assert_eq!(
            sk_protocol_fixed_budget(24, 2.0, 2_000, 4, 21, 99, &mut got),
            SkStatus::Ok
        );
    }
    assert_eq!(got.h_n.to_bits(), expect.h_n.unwrap().to_bits());
    assert_eq!(got.discarded_runs, expect.discarded_runs);
    assert_eq!(got.flagged_realizations, 0);
}

#[test]
fn fit_recovers_power_law() {
    let sizes: Vec<usize> = vec![10, 20, 40, 80, 160];
    let taus: Vec<f64> = sizes.iter().map(|&n| 0.5 * (n as f64).powf(1.5)).collect();
    let exclude = [160usize];
    let mut fit = SkScalingFit::default();
    unsafe {
        assert_eq!(
            sk_fit_scaling(
                1.0,
                sizes.as_ptr(),
                taus.as_ptr(),
                5,
                exclude.as_ptr(),
                1,
                &mut fit
            ),
            SkStatus::Ok
        );
    }
    assert!((fit.exponent - 1.5).abs() < 1e-10);
    assert!((fit.prefactor - 0.5).abs() < 1e-10);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert_eq!((fit.sizes_used, fit.sizes_excluded), (4, 1));

    unsafe {
        assert_eq!(
            sk_fit_scaling(
                1.0,
                sizes.as_ptr(),
                taus.as_ptr(),
                1,
                ptr::null(),
                0,
                &mut fit
            ),
            SkStatus::InvalidArgument
        );
    }
}
