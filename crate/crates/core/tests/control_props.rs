use proptest::prelude::*;
use sqzsim_core::control::{
    delta, delta_shift, ellipse_rotation, operating_point_rotation, readout_corotation,
    resonance_curve, ControlConfig, ReadoutMode, SqueezingChain, ThermalCoupling,
};
use sqzsim_core::opo::{calibrate, quadrature_variances, to_decibel, SqueezingEllipse};
use sqzsim_core::optics::{CavityParams, Detuning};

const P0: f64 = 0.0345;

fn chain() -> SqueezingChain {
    let thermal = ThermalCoupling::default();
    let opo = calibrate(-9.3, 16.75).unwrap().into_opo(P0).unwrap();
    SqueezingChain::new(
        CavityParams::default(),
        opo,
        thermal,
        ControlConfig::default(),
    )
    .unwrap()
}

fn sqz(c: &SqueezingChain, p: f64, mode: ReadoutMode) -> f64 {
    c.detected_squeezing(p, mode).unwrap().squeezing_db
}

#[test]
fn thermal_anchor_and_sign() {
    let t = ThermalCoupling::default();
    assert!((t.coefficient / 8.695_652e8 - 1.0).abs() < 1e-6);
    assert!((t.detuning_from_pump(0.00345).hz() - 3.0e6).abs() < 1e-6);
    assert!((t.detuning_from_pump(-0.00345).hz() + 3.0e6).abs() < 1e-6);
}

#[test]
fn frozen_angles_at_default_parameters() {
    let c = CavityParams::default();
    let cfg = ControlConfig::default();
    let cases = [
        (
            3e6,
            0.459_432_916_987_740,
            0.084_105_984_382_324_7,
            -0.024_021_768_260_142_3,
        ),
        (
            1.5e6,
            0.241_438_488_321_644,
            0.041_335_059_161_568_7,
            -0.005_899_413_929_274_53,
        ),
    ];
    for (f, theta_a, theta_lo, shift) in cases {
        let d = Detuning(f);
        assert!((ellipse_rotation(d, &c).unwrap() - theta_a).abs() < 1e-12);
        assert!((readout_corotation(d, &cfg, &c).unwrap() - theta_lo).abs() < 1e-12);
        assert!((delta_shift(d, &cfg, &c).unwrap() - shift).abs() < 1e-12);
    }
}

#[test]
fn delta_shift_reaches_a_plateau() {
    let c = CavityParams::default();
    let cfg = ControlConfig::default();
    let frozen = [
        (20e6, -1.619_211_495_18),
        (50e6, -2.277_674_479_60),
        (80e6, -2.329_295_878_66),
        (150e6, -2.351_349_443_51),
        (300e6, -2.357_391_052_87),
    ];
    for (f, v) in frozen {
        assert!(
            (delta_shift(Detuning(f), &cfg, &c).unwrap() - v).abs() < 1e-9,
            "{f}"
        );
    }
    // increments shrink once the detuning clears the linewidth
    let steps: Vec<f64> = frozen.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    assert!(steps.windows(2).all(|w| w[1] < w[0]));
    assert!(steps.last().unwrap() < &0.01);
    let d0 = delta(Detuning(0.0), &cfg, &c).unwrap();
    assert!((d0 - 2.0 * c.transmission_phase_unwrapped(cfg.f_ccf).unwrap()).abs() < 1e-15);
}

#[test]
fn set_point_agrees_with_variance_model() {
    let c = chain();
    for kappa in [0.0, 1e-4, 0.5] {
        let (ra, rs) =
            quadrature_variances(c.opo.pump_ratio, c.opo.detection_efficiency, kappa).unwrap();
        for mode in ReadoutMode::ALL {
            let d = c.detected_squeezing_with_kappa(P0, mode, kappa).unwrap();
            assert!((10f64.powf(d.squeezing_db / 10.0) - rs).abs() < 1e-10);
            assert!((10f64.powf(d.antisqueezing_db / 10.0) - ra).abs() < 1e-10);
        }
    }
}

#[test]
fn mode_a_degrades_monotonically() {
    let c = chain();
    let mut prev = sqz(&c, P0, ReadoutMode::FixedAngle);
    for i in 1..=400 {
        let p = P0 * (1.0 + 0.1 * i as f64 / 400.0);
        let angle = c
            .detected_squeezing(p, ReadoutMode::FixedAngle)
            .unwrap()
            .ellipse_angle;
        assert!(angle.abs() < std::f64::consts::FRAC_PI_2);
        let next = sqz(&c, p, ReadoutMode::FixedAngle);
        assert!(next > prev, "step {i}");
        prev = next;
    }
}

#[test]
fn corotation_compensates_at_ten_percent() {
    let c = chain();
    for p in [0.9 * P0, 1.1 * P0] {
        let a = sqz(&c, p, ReadoutMode::FixedAngle);
        let d = sqz(&c, p, ReadoutMode::CoRotatingReadout);
        assert!(d < a, "p = {p}: d {d} vs a {a}");
        assert!(a > -9.3, "set point value must be the best in mode a");
    }
}

#[test]
fn traces_b_and_c_differ_from_a() {
    let c = chain();
    for p in [0.9 * P0, 1.1 * P0] {
        let a = sqz(&c, p, ReadoutMode::FixedAngle);
        assert!((sqz(&c, p, ReadoutMode::DetunedOutput) - a).abs() > 0.1);
        assert!((sqz(&c, p, ReadoutMode::PumpDependentGain) - a).abs() > 0.1);
    }
}

#[test]
fn resonance_curve_unimodal() {
    let c = CavityParams::default();
    let t = ThermalCoupling::default();
    let powers: Vec<f64> = (0..=400)
        .map(|i| P0 * (0.8 + 0.4 * i as f64 / 400.0))
        .collect();
    let curve = resonance_curve(&powers, &t, &c).unwrap();
    let peak = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .unwrap()
        .0;
    assert!((curve[peak].0 - P0).abs() < 1e-15);
    assert!(curve[..peak].windows(2).all(|w| w[1].1 > w[0].1));
    assert!(curve[peak..].windows(2).all(|w| w[1].1 < w[0].1));
    let ends = resonance_curve(&[0.9 * P0, 1.1 * P0], &t, &c).unwrap();
    for (_, v) in ends {
        assert!((v - 0.813_388_780_164_088).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn angles_and_detuning_are_odd(dp in -0.01f64..0.01) {
        let t = ThermalCoupling::default();
        let c = CavityParams::default();
        let cfg = ControlConfig::default();
        prop_assert_eq!(t.detuning_from_pump(-dp).hz(), -t.detuning_from_pump(dp).hz());
        let f = t.detuning_from_pump(dp);
        prop_assert!((ellipse_rotation(f, &c).unwrap() + ellipse_rotation(-f, &c).unwrap()).abs() < 1e-12);
        prop_assert!((readout_corotation(f, &cfg, &c).unwrap() + readout_corotation(-f, &cfg, &c).unwrap()).abs() < 1e-12);
        // the differential shift is even, not odd
        prop_assert!((delta_shift(f, &cfg, &c).unwrap() - delta_shift(-f, &cfg, &c).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mode_a_is_even(u in 0.0f64..0.2) {
        let c = chain();
        let hi = sqz(&c, P0 * (1.0 + u), ReadoutMode::FixedAngle);
        let lo = sqz(&c, P0 * (1.0 - u), ReadoutMode::FixedAngle);
        prop_assert!((hi - lo).abs() < 1e-8, "{hi} vs {lo}");
    }

    #[test]
    fn corotation_never_overshoots(f in -3e6f64..3e6) {
        let c = CavityParams::default();
        let cfg = ControlConfig::default();
        let a = ellipse_rotation(Detuning(f), &c).unwrap();
        let lo = readout_corotation(Detuning(f), &cfg, &c).unwrap();
        prop_assert!((a - lo).abs() <= a.abs());
    }

    #[test]
    fn small_angle_is_second_order(vs in 0.05f64..1.0, excess in 0.0f64..50.0, theta in -0.05f64..0.05) {
        let va = (1.0 + excess) / vs;
        let e = SqueezingEllipse::new(vs, va, 0.0).unwrap();
        let (_, read) = e.rotate_readout(theta);
        prop_assert!(read - vs <= (va - vs) * theta * theta + 1e-6);
    }

    #[test]
    fn operating_point_neutral_cases(r in 0.01f64..10.0, s in -0.99f64..0.99) {
        let zero = ControlConfig::default();
        prop_assert_eq!(operating_point_rotation(r, &zero).unwrap(), 0.0);
        let cfg = ControlConfig { operating_point_offset: s, ..ControlConfig::default() };
        prop_assert_eq!(operating_point_rotation(1.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn detected_levels_physical(u in -0.3f64..0.3, mode_idx in 0usize..4) {
        let c = chain();
        let mode = ReadoutMode::ALL[mode_idx];
        let p = P0 * (1.0 + u);
        let d = c.detected_squeezing(p, mode).unwrap();
        let theta = d.ellipse_angle - d.readout_angle;
        if theta.abs() <= std::f64::consts::FRAC_PI_4 {
            prop_assert!(d.antisqueezing_db >= 0.0);
        }
        // zero dB is crossed only once the rotation mixes in enough anti-squeezing
        let x = match mode {
            ReadoutMode::FixedAngle | ReadoutMode::DetunedOutput => c.opo.pump_ratio,
            _ => c.opo.pump_ratio * p / P0,
        };
        let (ra, rs) = quadrature_variances(x, c.opo.detection_efficiency, 0.0).unwrap();
        if theta.tan().powi(2) <= (1.0 - rs) / (ra - 1.0) {
            prop_assert!(d.squeezing_db <= 1e-12);
        }
        // the detuned chain never beats the undetuned state at the same pump
        prop_assert!(d.squeezing_db >= to_decibel(rs).unwrap() - 1e-12);
    }
}
