use proptest::prelude::*;
use sqzsim_core::optics::{principal_value, unwrap_phases, CavityParams, SPEED_OF_LIGHT};

fn cavity_strategy() -> impl Strategy<Value = CavityParams> {
    (0.005f64..0.3, 0.0005f64..0.05, 0.1f64..3.0, 0.05f64..1.0).prop_map(|(t, loss, len, frac)| {
        let input = frac * (1.0 - (-loss).exp());
        CavityParams::from_power(input, t, loss, len).unwrap()
    })
}

/// Independent Airy evaluation from the textbook intensity form.
fn airy_reference(c: &CavityParams, f: f64) -> f64 {
    let g = c.rho1 * c.rho2;
    let phi = 2.0 * std::f64::consts::PI * f * c.roundtrip_length / SPEED_OF_LIGHT;
    let coeff = 4.0 * g / (1.0 - g).powi(2);
    1.0 / (1.0 + coeff * (phi / 2.0).sin().powi(2))
}

fn fwhm_by_bisection(c: &CavityParams) -> f64 {
    let (mut lo, mut hi) = (0.0, c.free_spectral_range() / 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if airy_reference(c, mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo
}

proptest! {
    #[test]
    fn phase_odd_buildup_even(c in cavity_strategy(), frac in -0.5f64..0.5) {
        let f = frac * c.free_spectral_range();
        let p = c.transmission_phase(f).unwrap();
        let m = c.transmission_phase(-f).unwrap();
        // principal values: the pair may straddle the ±π cut
        prop_assert!(principal_value(p + m).abs() < 1e-12);
        prop_assert!((c.airy_buildup(f).unwrap() - c.airy_buildup(-f).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fsr_periodic(c in cavity_strategy(), frac in -0.5f64..0.5) {
        let fsr = c.free_spectral_range();
        let f = frac * fsr;
        let a = c.airy_buildup(f).unwrap();
        let b = c.airy_buildup(f + fsr).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
        let p = c.transmission_phase(f).unwrap();
        let q = c.transmission_phase(f + fsr).unwrap();
        prop_assert!(principal_value(p - q).abs() <= 1e-9 * p.abs().max(1.0));
    }

    #[test]
    fn buildup_matches_reference_and_range(c in cavity_strategy(), frac in -2.0f64..2.0) {
        let f = frac * c.free_spectral_range();
        let a = c.airy_buildup(f).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!((a - airy_reference(&c, f)).abs() < 1e-12);
    }

    #[test]
    fn buildup_decreasing_on_half_fsr(c in cavity_strategy()) {
        let half = c.free_spectral_range() / 2.0;
        let n = 2000;
        let mut prev = c.airy_buildup(0.0).unwrap();
        for i in 1..n {
            let next = c.airy_buildup(half * i as f64 / n as f64).unwrap();
            prop_assert!(next < prev);
            prev = next;
        }
    }

    #[test]
    fn fwhm_tracks_decay_rate_when_finesse_high(c in cavity_strategy()) {
        prop_assume!(c.finesse() > 50.0);
        let measured = fwhm_by_bisection(&c);
        let predicted = c.decay_rate() / (2.0 * std::f64::consts::PI);
        prop_assert!((measured / predicted - 1.0).abs() < 0.02, "{measured} vs {predicted}");
        prop_assert!((c.fwhm() / measured - 1.0).abs() < 1e-9);
        prop_assert!((c.airy_buildup(measured / 2.0).unwrap() - 0.5).abs() < 0.005);
    }

    #[test]
    fn unwrapped_agrees_with_principal(c in cavity_strategy(), f in -1e9f64..1e9) {
        let u = c.transmission_phase_unwrapped(f).unwrap();
        let p = c.transmission_phase(f).unwrap();
        prop_assert!(principal_value(u - p).abs() < 1e-9);
    }

    #[test]
    fn unwrap_removes_jumps(start in -10.0f64..10.0, step in -3.0f64..3.0, n in 2usize..200) {
        let truth: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        let mut wrapped: Vec<f64> = truth.iter().map(|&v| principal_value(v)).collect();
        unwrap_phases(&mut wrapped);
        let shift = wrapped[0] - truth[0];
        for (w, t) in wrapped.iter().zip(&truth) {
            prop_assert!((w - t - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn non_finite_rejected(c in cavity_strategy()) {
        prop_assert!(c.transmission_phase(f64::NAN).is_err());
        prop_assert!(c.airy_buildup(f64::INFINITY).is_err());
        prop_assert!(c.normalized_frequency(f64::NEG_INFINITY).is_err());
    }
}

#[test]
fn decay_rate_hand_value() {
    let c = CavityParams::default();
    assert!((c.decay_rate() - SPEED_OF_LIGHT * 0.105 / 0.4).abs() < 1e-6);
    assert!((c.decay_rate() / 7.87e7 - 1.0).abs() < 1e-3);
    let long = CavityParams::from_power(0.002, 0.10, 0.005, 0.8).unwrap();
    assert!((long.decay_rate() * 2.0 - c.decay_rate()).abs() < 1e-6);
}

#[test]
fn normalized_frequency_examples() {
    let c = CavityParams::default();
    assert_eq!(c.normalized_frequency(0.0).unwrap(), 0.0);
    let unit = c.decay_rate() / (2.0 * std::f64::consts::PI);
    assert!((c.normalized_frequency(unit).unwrap() - 1.0).abs() < 1e-15);
    let k = c.normalized_frequency(10e3).unwrap();
    assert!((k / 8e-4 - 1.0).abs() < 0.01, "{k}");
}

#[test]
fn large_detuning_phase_offset() {
    // far from resonance the unwrapped phase approaches the propagation ramp
    // plus a constant, so ±15 MHz differ by twice that offset
    let c = CavityParams::default();
    let p = c.transmission_phase(15e6).unwrap();
    let m = c.transmission_phase(-15e6).unwrap();
    assert!((p - 1.238_727_203_014_32).abs() < 1e-12);
    assert!((p + m).abs() < 1e-15);
}
