//! Passive two-mirror resonator: transmission phase, normalized intracavity
//! buildup, linewidth and the normalized sideband frequency.
//!
//! Frequencies are offsets (Hz) of the field from the cavity resonance. The
//! round-trip phase is `2π f l / c` with `l` the optical round-trip length,
//! so resonances repeat every free spectral range `c / l`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Resonator described by its mirror amplitudes plus the power quantities
/// that set its energy decay rate.
///
/// `intracavity_loss` collects every round-trip power loss other than the
/// output coupler, including transmission through the input mirror. The
/// amplitude reflectivities satisfy `rho1 * rho2 = exp(-(T + L) / 2)`, which
/// makes the Airy linewidth agree with [`CavityParams::decay_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub rho1: f64,
    pub rho2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub roundtrip_length: f64,
    pub intracavity_loss: f64,
    pub output_transmittance: f64,
}

/// Offset of a field from the cavity resonance, in Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Detuning(pub f64);

impl Detuning {
    pub fn hz(self) -> f64 {
        self.0
    }
}

impl std::ops::Neg for Detuning {
    type Output = Detuning;
    fn neg(self) -> Detuning {
        Detuning(-self.0)
    }
}

const CONSISTENCY_TOLERANCE: f64 = 1e-9;

impl CavityParams {
    /// Builds a cavity from the power figures experimenters quote.
    ///
    /// * `input_transmittance`: power transmission of the back mirror; it is
    ///   part of the round-trip loss and must not exceed `1 - exp(-L)`.
    /// * `output_transmittance`: output coupler `T`.
    /// * `intracavity_loss`: total non-output round-trip loss `L`.
    /// * `roundtrip_length`: optical round-trip length in meters.
    pub fn from_power(
        input_transmittance: f64,
        output_transmittance: f64,
        intracavity_loss: f64,
        roundtrip_length: f64,
    ) -> Result<Self> {
        ensure_finite("input_transmittance", input_transmittance)?;
        ensure_finite("output_transmittance", output_transmittance)?;
        ensure_finite("intracavity_loss", intracavity_loss)?;
        ensure_finite("roundtrip_length", roundtrip_length)?;
        if !(0.0..1.0).contains(&intracavity_loss) {
            return Err(Error::invalid("intracavity_loss", "must lie in [0, 1)"));
        }
        let back_reflectance = (-intracavity_loss).exp();
        if !(input_transmittance > 0.0 && input_transmittance <= 1.0 - back_reflectance) {
            return Err(Error::invalid(
                "input_transmittance",
                format!(
                    "must lie in (0, 1 - exp(-L)] = (0, {:.6e}] because it counts toward the round-trip loss",
                    1.0 - back_reflectance
                ),
            ));
        }
        if !(output_transmittance > 0.0 && output_transmittance < 1.0) {
            return Err(Error::invalid("output_transmittance", "must lie in (0, 1)"));
        }
        let coupler_reflectance = (-output_transmittance).exp();
        Self::new(
            back_reflectance.sqrt(),
            coupler_reflectance.sqrt(),
            input_transmittance.sqrt(),
            (1.0 - coupler_reflectance).sqrt(),
            roundtrip_length,
            intracavity_loss,
            output_transmittance,
        )
    }

    /// Validated construction from raw amplitudes.
    pub fn new(
        rho1: f64,
        rho2: f64,
        tau1: f64,
        tau2: f64,
        roundtrip_length: f64,
        intracavity_loss: f64,
        output_transmittance: f64,
    ) -> Result<Self> {
        let cavity = Self {
            rho1,
            rho2,
            tau1,
            tau2,
            roundtrip_length,
            intracavity_loss,
            output_transmittance,
        };
        cavity.validate()?;
        cavity.check_consistency()?;
        Ok(cavity)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("roundtrip_length", self.roundtrip_length),
            ("intracavity_loss", self.intracavity_loss),
            ("output_transmittance", self.output_transmittance),
        ] {
            ensure_finite(name, value)?;
        }
        for (name, rho, tau) in [
            ("mirror 1", self.rho1, self.tau1),
            ("mirror 2", self.rho2, self.tau2),
        ] {
            if !(rho > 0.0 && rho < 1.0 && tau > 0.0 && tau < 1.0) {
                return Err(Error::invalid(
                    "mirror",
                    format!("{name}: amplitudes must lie in (0, 1)"),
                ));
            }
            // one ulp of slack for amplitudes derived from exact power splits
            if rho * rho + tau * tau > 1.0 + 4.0 * f64::EPSILON {
                return Err(Error::invalid(
                    "mirror",
                    format!("{name}: rho^2 + tau^2 exceeds 1"),
                ));
            }
        }
        if self.roundtrip_length <= 0.0 {
            return Err(Error::invalid("roundtrip_length", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.intracavity_loss) {
            return Err(Error::invalid("intracavity_loss", "must lie in [0, 1)"));
        }
        if !(self.output_transmittance > 0.0 && self.output_transmittance < 1.0) {
            return Err(Error::invalid("output_transmittance", "must lie in (0, 1)"));
        }
        let finesse = self.finesse();
        if !(finesse.is_finite() && finesse > 0.0) {
            return Err(Error::invalid(
                "mirror",
                "finesse is not finite and positive",
            ));
        }
        Ok(())
    }

    /// Checks that the mirror amplitudes agree with `(T, L)`.
    pub fn check_consistency(&self) -> Result<()> {
        let expected = (-(self.output_transmittance + self.intracavity_loss) / 2.0).exp();
        let rel = (self.roundtrip_gain() - expected).abs() / expected;
        if rel > CONSISTENCY_TOLERANCE {
            return Err(Error::invalid(
                "mirror",
                format!(
                    "rho1*rho2 = {} disagrees with exp(-(T+L)/2) = {expected} (relative error {rel:.3e})",
                    self.roundtrip_gain()
                ),
            ));
        }
        Ok(())
    }

    /// Round-trip amplitude factor `ρ₁ρ₂`.
    pub fn roundtrip_gain(&self) -> f64 {
        self.rho1 * self.rho2
    }

    pub fn free_spectral_range(&self) -> f64 {
        SPEED_OF_LIGHT / self.roundtrip_length
    }

    pub fn finesse(&self) -> f64 {
        let g = self.roundtrip_gain();
        PI * g.sqrt() / (1.0 - g)
    }

    /// Round-trip optical phase at offset `f`.
    pub fn roundtrip_phase(&self, f: f64) -> f64 {
        TAU * f * self.roundtrip_length / SPEED_OF_LIGHT
    }

    /// Transmitted-field phase, principal value in (−π, π].
    pub fn transmission_phase(&self, f: f64) -> Result<f64> {
        ensure_finite("frequency", f)?;
        let phase = self.roundtrip_phase(f);
        let numerator = Complex64::from_polar(self.tau1 * self.tau2, phase);
        let denominator = 1.0 - self.roundtrip_gain() * Complex64::cis(phase);
        Ok(principal_value((numerator / denominator).arg()))
    }

    /// Transmission phase continued across branch cuts.
    ///
    /// `1 - ρ₁ρ₂e^{iφ}` has positive real part, so its argument never wraps;
    /// the only wrapping in the principal value comes from the propagation
    /// term, which is kept linear here.
    pub fn transmission_phase_unwrapped(&self, f: f64) -> Result<f64> {
        ensure_finite("frequency", f)?;
        let phase = self.roundtrip_phase(f);
        let denominator = 1.0 - self.roundtrip_gain() * Complex64::cis(phase);
        Ok(phase - denominator.arg())
    }

    /// Intracavity power relative to its on-resonance value, in (0, 1].
    pub fn airy_buildup(&self, f: f64) -> Result<f64> {
        ensure_finite("frequency", f)?;
        let g = self.roundtrip_gain();
        let denominator = 1.0 - g * Complex64::cis(self.roundtrip_phase(f));
        Ok((1.0 - g).powi(2) / denominator.norm_sqr())
    }

    /// Energy decay rate `γ = c(T + L)/l` in rad/s.
    pub fn decay_rate(&self) -> f64 {
        SPEED_OF_LIGHT * (self.output_transmittance + self.intracavity_loss) / self.roundtrip_length
    }

    /// `κ = 2πf/γ`.
    pub fn normalized_frequency(&self, f: f64) -> Result<f64> {
        ensure_finite("frequency", f)?;
        Ok(TAU * f / self.decay_rate())
    }

    /// Full width at half maximum of [`airy_buildup`](Self::airy_buildup), in Hz.
    pub fn fwhm(&self) -> f64 {
        let g = self.roundtrip_gain();
        let half_phase = 2.0 * ((1.0 - g) / (2.0 * g.sqrt())).asin();
        2.0 * half_phase * SPEED_OF_LIGHT / (TAU * self.roundtrip_length)
    }
}

impl Default for CavityParams {
    fn default() -> Self {
        Self::from_power(0.002, 0.10, 0.005, 0.4).expect("default cavity is valid")
    }
}

/// Wraps an angle into (−π, π].
pub fn principal_value(angle: f64) -> f64 {
    let wrapped = angle - TAU * ((angle + PI) / TAU).floor();
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Removes 2π jumps from a sampled phase sequence in place.
pub fn unwrap_phases(phases: &mut [f64]) {
    let mut offset = 0.0;
    for i in 1..phases.len() {
        let raw = phases[i] + offset;
        let step = raw - phases[i - 1];
        let correction = -TAU * ((step + PI) / TAU).floor();
        offset += correction;
        phases[i] = raw + correction;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_half_maximum(cavity: &CavityParams) -> f64 {
        let (mut lo, mut hi) = (0.0, cavity.free_spectral_range() / 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let p = cavity.airy_buildup(mid).unwrap();
            if p > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn resonance_phase_is_zero_and_buildup_is_one() {
        let cavity = CavityParams::default();
        assert_eq!(cavity.transmission_phase(0.0).unwrap(), 0.0);
        assert_eq!(cavity.airy_buildup(0.0).unwrap(), 1.0);
    }

    #[test]
    fn default_cavity_decay_rate() {
        // 2.99792458e8 * 0.105 / 0.4
        let cavity = CavityParams::default();
        assert!((cavity.decay_rate() - 7.869_552_022_5e7).abs() < 1e-3);
        assert!((cavity.finesse() - 59.832_988_386_87).abs() < 1e-9);
    }

    #[test]
    fn decay_rate_scaling() {
        let short = CavityParams::from_power(0.002, 0.1, 0.005, 0.4).unwrap();
        let long = CavityParams::from_power(0.002, 0.1, 0.005, 0.8).unwrap();
        assert!((short.decay_rate() / long.decay_rate() - 2.0).abs() < 1e-14);

        let tight = CavityParams::from_power(1e-9, 1e-7, 1e-8, 0.4).unwrap();
        assert!(tight.decay_rate() < 100.0);
    }

    #[test]
    fn normalized_frequency_examples() {
        let cavity = CavityParams::default();
        assert_eq!(cavity.normalized_frequency(0.0).unwrap(), 0.0);
        let f = cavity.decay_rate() / TAU;
        assert!((cavity.normalized_frequency(f).unwrap() - 1.0).abs() < 1e-15);
        let audio = cavity.normalized_frequency(10e3).unwrap();
        assert!((audio - 7.984e-4).abs() < 1e-6, "{audio}");
    }

    #[test]
    fn half_maximum_matches_bisection() {
        let cavity = CavityParams::default();
        let half = bisect_half_maximum(&cavity);
        assert!((cavity.fwhm() / 2.0 - half).abs() / half < 1e-9);
        let p = cavity.airy_buildup(cavity.fwhm() / 2.0).unwrap();
        assert!((p - 0.5).abs() < 0.005);
        // bisection on the exact expression, frozen at high precision
        assert!((2.0 * half - 1.252_765_882_03e7).abs() < 1.0);
    }

    #[test]
    fn rejects_non_finite_frequency() {
        let cavity = CavityParams::default();
        assert_eq!(
            cavity.transmission_phase(f64::NAN),
            Err(Error::NonFinite("frequency"))
        );
        assert!(cavity.airy_buildup(f64::INFINITY).is_err());
    }

    #[test]
    fn rejects_bad_mirrors() {
        assert!(CavityParams::from_power(0.01, 0.1, 0.005, 0.4).is_err());
        assert!(CavityParams::from_power(0.002, 1.0, 0.005, 0.4).is_err());
        assert!(CavityParams::from_power(0.002, 0.1, 0.005, 0.0).is_err());
        assert!(CavityParams::from_power(0.002, 0.1, 1.0, 0.4).is_err());
        let good = CavityParams::default();
        let lossy = CavityParams::new(0.9, 0.9, 0.5, 0.5, 0.4, 0.005, 0.1);
        assert!(lossy.is_err());
        let inconsistent = CavityParams::new(
            good.rho1 * 0.99,
            good.rho2,
            good.tau1,
            good.tau2,
            0.4,
            0.005,
            0.1,
        );
        assert!(inconsistent.is_err());
    }

    #[test]
    fn principal_value_range() {
        assert_eq!(principal_value(-PI), PI);
        assert_eq!(principal_value(PI), PI);
        assert!((principal_value(3.0 * PI) - PI).abs() < 1e-12);
        assert!((principal_value(0.5 + 4.0 * TAU) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unwrap_recovers_linear_ramp() {
        let truth: Vec<f64> = (0..200).map(|i| -3.0 + 0.2 * i as f64).collect();
        let mut wrapped: Vec<f64> = truth.iter().map(|&p| principal_value(p)).collect();
        unwrap_phases(&mut wrapped);
        for (a, b) in wrapped.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unwrapped_matches_principal_value() {
        let cavity = CavityParams::default();
        let fsr = cavity.free_spectral_range();
        for i in -50..=50 {
            let f = fsr * i as f64 / 37.0;
            let a = principal_value(cavity.transmission_phase_unwrapped(f).unwrap());
            let b = cavity.transmission_phase(f).unwrap();
            assert!(principal_value(a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_unwrap_agrees_with_continuous_phase() {
        let cavity = CavityParams::default();
        let fsr = cavity.free_spectral_range();
        let freqs: Vec<f64> = (0..=2000).map(|i| -fsr + fsr * i as f64 / 1000.0).collect();
        let mut sampled: Vec<f64> = freqs
            .iter()
            .map(|&f| cavity.transmission_phase(f).unwrap())
            .collect();
        unwrap_phases(&mut sampled);
        let offset = cavity.transmission_phase_unwrapped(freqs[0]).unwrap() - sampled[0];
        for (f, s) in freqs.iter().zip(&sampled) {
            let continuous = cavity.transmission_phase_unwrapped(*f).unwrap();
            assert!((continuous - s - offset).abs() < 1e-9);
        }
    }
}
