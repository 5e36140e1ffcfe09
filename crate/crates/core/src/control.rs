//! Pump power → thermal detuning → sideband phases → ellipse and readout
//! rotation → detected squeezing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::opo::{quadrature_variances, to_decibel, OpoParams, SqueezingEllipse};
use crate::optics::{CavityParams, Detuning};

/// Default pump set point in W.
pub const DEFAULT_SET_POINT: f64 = 0.0345;
/// 3 MHz of detuning per 10 % of the set-point power.
pub const DEFAULT_THERMAL_COEFFICIENT: f64 = 3.0e6 / (0.1 * DEFAULT_SET_POINT);
/// Coherent-control offset frequency in Hz.
pub const DEFAULT_CCF: f64 = 15.2e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalCoupling {
    /// Hz of detuning per W of pump deviation.
    #[serde(default = "default_coefficient")]
    pub coefficient: f64,
    /// W.
    #[serde(default = "default_set_point")]
    pub set_point_power: f64,
}

fn default_coefficient() -> f64 {
    DEFAULT_THERMAL_COEFFICIENT
}

fn default_set_point() -> f64 {
    DEFAULT_SET_POINT
}

impl Default for ThermalCoupling {
    fn default() -> Self {
        Self {
            coefficient: DEFAULT_THERMAL_COEFFICIENT,
            set_point_power: DEFAULT_SET_POINT,
        }
    }
}

impl ThermalCoupling {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("thermal.coefficient", self.coefficient)?;
        ensure_finite("thermal.set_point_power", self.set_point_power)?;
        if self.set_point_power <= 0.0 {
            return Err(Error::invalid(
                "thermal.set_point_power",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// Linear, instantaneous map from pump deviation (W) to detuning.
    pub fn detuning_from_pump(&self, delta_p: f64) -> Detuning {
        Detuning(self.coefficient * delta_p)
    }

    /// Detuning at absolute pump power `p`.
    pub fn detuning_at(&self, pump_power: f64) -> Detuning {
        self.detuning_from_pump(pump_power - self.set_point_power)
    }
}

/// Which parts of the chain act on the detected quadrature.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub enum ReadoutMode {
    /// Set-point variances, fixed readout angle.
    #[serde(rename = "a")]
    FixedAngle,
    /// Variances reduced by the detuned resonant enhancement.
    #[serde(rename = "b")]
    DetunedOutput,
    /// As `b`, with the pump ratio following the actual pump power.
    #[serde(rename = "c")]
    PumpDependentGain,
    /// As `c`, with the homodyne lock co-rotating the readout quadrature.
    #[serde(rename = "d")]
    #[default]
    CoRotatingReadout,
}

impl ReadoutMode {
    pub const ALL: [ReadoutMode; 4] = [
        ReadoutMode::FixedAngle,
        ReadoutMode::DetunedOutput,
        ReadoutMode::PumpDependentGain,
        ReadoutMode::CoRotatingReadout,
    ];

    pub fn letter(self) -> char {
        match self {
            ReadoutMode::FixedAngle => 'a',
            ReadoutMode::DetunedOutput => 'b',
            ReadoutMode::PumpDependentGain => 'c',
            ReadoutMode::CoRotatingReadout => 'd',
        }
    }

    /// Parses a comma-separated list such as `a,c,d`. Order is kept and
    /// duplicates are rejected.
    pub fn parse_list(list: &str) -> Result<Vec<ReadoutMode>> {
        let mut modes = Vec::new();
        for item in list.split(',') {
            let mode: ReadoutMode = item.trim().parse()?;
            if modes.contains(&mode) {
                return Err(Error::Usage(format!(
                    "trace `{}` listed twice",
                    mode.letter()
                )));
            }
            modes.push(mode);
        }
        Ok(modes)
    }
}

impl FromStr for ReadoutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(ReadoutMode::FixedAngle),
            "b" => Ok(ReadoutMode::DetunedOutput),
            "c" => Ok(ReadoutMode::PumpDependentGain),
            "d" => Ok(ReadoutMode::CoRotatingReadout),
            other => Err(Error::Usage(format!(
                "unknown trace `{other}`; expected one of a, b, c, d"
            ))),
        }
    }
}

impl fmt::Display for ReadoutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    /// Hz.
    #[serde(default = "default_ccf")]
    pub f_ccf: f64,
    #[serde(default)]
    pub readout_mode: ReadoutMode,
    /// Electronic offset over error-signal magnitude at the set point.
    #[serde(default)]
    pub operating_point_offset: f64,
}

fn default_ccf() -> f64 {
    DEFAULT_CCF
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            f_ccf: DEFAULT_CCF,
            readout_mode: ReadoutMode::default(),
            operating_point_offset: 0.0,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("control.f_ccf", self.f_ccf)?;
        ensure_finite(
            "control.operating_point_offset",
            self.operating_point_offset,
        )?;
        if self.f_ccf <= 0.0 {
            return Err(Error::invalid("control.f_ccf", "must be positive"));
        }
        if self.operating_point_offset.abs() >= 1.0 {
            return Err(Error::invalid(
                "control.operating_point_offset",
                "must lie in (-1, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedSqueezing {
    /// Variance of the locked readout quadrature, dB.
    pub squeezing_db: f64,
    /// Variance of the conjugate quadrature, dB.
    pub antisqueezing_db: f64,
    pub ellipse_angle: f64,
    pub readout_angle: f64,
}

/// Unwrapped transmission phases `(Φ₊, Φ₋)` of the upper and lower CCF
/// sidebands at carrier detuning `f_det`.
pub fn sideband_phase_pair(
    f_det: Detuning,
    cfg: &ControlConfig,
    cavity: &CavityParams,
) -> Result<(f64, f64)> {
    ensure_finite("detuning", f_det.hz())?;
    Ok((
        cavity.transmission_phase_unwrapped(f_det.hz() + cfg.f_ccf)?,
        cavity.transmission_phase_unwrapped(f_det.hz() - cfg.f_ccf)?,
    ))
}

/// Differential sideband phase `Δ = Φ₊ − Φ₋`.
pub fn delta(f_det: Detuning, cfg: &ControlConfig, cavity: &CavityParams) -> Result<f64> {
    let (plus, minus) = sideband_phase_pair(f_det, cfg, cavity)?;
    Ok(plus - minus)
}

/// `Δ(f_det) − Δ(0)`: change of the differential sideband phase seen by the
/// 2f_CCF error signal. Even in `f_det`.
pub fn delta_shift(f_det: Detuning, cfg: &ControlConfig, cavity: &CavityParams) -> Result<f64> {
    Ok(delta(f_det, cfg, cavity)? - delta(Detuning(0.0), cfg, cavity)?)
}

/// Rotation of the squeezing ellipse: the detuned cavity's transmission phase
/// for the squeezed carrier itself.
pub fn ellipse_rotation(f_det: Detuning, cavity: &CavityParams) -> Result<f64> {
    cavity.transmission_phase_unwrapped(f_det.hz())
}

/// Readout-quadrature co-rotation `Θ_LO`: mean sideband phase.
pub fn readout_corotation(
    f_det: Detuning,
    cfg: &ControlConfig,
    cavity: &CavityParams,
) -> Result<f64> {
    let (plus, minus) = sideband_phase_pair(f_det, cfg, cavity)?;
    Ok(0.5 * (plus + minus))
}

/// Shift of the homodyne lock point when the error-signal magnitude changes
/// by `buildup_ratio` while the electronic offset stays fixed.
pub fn operating_point_rotation(buildup_ratio: f64, cfg: &ControlConfig) -> Result<f64> {
    ensure_finite("buildup_ratio", buildup_ratio)?;
    if buildup_ratio <= 0.0 {
        return Err(Error::invalid("buildup_ratio", "must be positive"));
    }
    let s = cfg.operating_point_offset;
    if s == 0.0 {
        return Ok(0.0);
    }
    let scaled = s / buildup_ratio;
    if scaled.abs() > 1.0 {
        return Err(Error::LockPointLost {
            offset: s,
            ratio: buildup_ratio,
        });
    }
    Ok(scaled.asin() - s.asin())
}

/// Normalized transmission versus pump power, one entry per input power.
pub fn resonance_curve(
    pump_powers: &[f64],
    thermal: &ThermalCoupling,
    cavity: &CavityParams,
) -> Result<Vec<(f64, f64)>> {
    if pump_powers.is_empty() {
        return Err(Error::Usage("pump power list is empty".into()));
    }
    pump_powers
        .iter()
        .map(|&p| {
            ensure_finite("pump_power", p)?;
            Ok((p, cavity.airy_buildup(thermal.detuning_at(p).hz())?))
        })
        .collect()
}

/// Validated bundle of everything the detection chain needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingChain {
    pub cavity: CavityParams,
    pub opo: OpoParams,
    pub thermal: ThermalCoupling,
    pub control: ControlConfig,
}

/// Relative tolerance between `pump_ratio` and `set_point / threshold`.
const SET_POINT_TOLERANCE: f64 = 1e-9;

impl SqueezingChain {
    pub fn new(
        cavity: CavityParams,
        opo: OpoParams,
        thermal: ThermalCoupling,
        control: ControlConfig,
    ) -> Result<Self> {
        cavity.validate()?;
        opo.validate()?;
        thermal.validate()?;
        control.validate()?;
        let implied = thermal.set_point_power / opo.threshold_power;
        if (implied - opo.pump_ratio).abs() > SET_POINT_TOLERANCE * opo.pump_ratio.max(1e-300) {
            return Err(Error::Config(format!(
                "pump_ratio {} disagrees with set_point_power / threshold_power = {implied}",
                opo.pump_ratio
            )));
        }
        Ok(Self {
            cavity,
            opo,
            thermal,
            control,
        })
    }

    /// Detected squeezing at the audio-band limit `κ = 0`.
    pub fn detected_squeezing(
        &self,
        pump_power: f64,
        mode: ReadoutMode,
    ) -> Result<DetectedSqueezing> {
        self.detected_squeezing_with_kappa(pump_power, mode, 0.0)
    }

    /// Detected squeezing at sideband frequency `freq` (Hz).
    pub fn detected_squeezing_at(
        &self,
        pump_power: f64,
        mode: ReadoutMode,
        freq: f64,
    ) -> Result<DetectedSqueezing> {
        let kappa = self.cavity.normalized_frequency(freq)?.abs();
        self.detected_squeezing_with_kappa(pump_power, mode, kappa)
    }

    pub fn detected_squeezing_with_kappa(
        &self,
        pump_power: f64,
        mode: ReadoutMode,
        kappa: f64,
    ) -> Result<DetectedSqueezing> {
        ensure_finite("pump_power", pump_power)?;
        if pump_power < 0.0 {
            return Err(Error::invalid("pump_power", "must be non-negative"));
        }
        let f_det = self.thermal.detuning_at(pump_power);
        let ellipse_angle = ellipse_rotation(f_det, &self.cavity)?;
        let x0 = self.opo.pump_ratio;
        let pump_ratio = match mode {
            ReadoutMode::FixedAngle => x0,
            ReadoutMode::DetunedOutput => x0 * self.cavity.airy_buildup(f_det.hz())?,
            ReadoutMode::PumpDependentGain | ReadoutMode::CoRotatingReadout => {
                x0 * (pump_power / self.thermal.set_point_power)
                    * self.cavity.airy_buildup(f_det.hz())?
            }
        };
        let readout_angle = match mode {
            ReadoutMode::CoRotatingReadout => {
                let ratio = self.cavity.airy_buildup(f_det.hz())?.sqrt();
                readout_corotation(f_det, &self.control, &self.cavity)?
                    + operating_point_rotation(ratio, &self.control)?
            }
            _ => 0.0,
        };
        let (v_anti, v_sqz) =
            quadrature_variances(pump_ratio, self.opo.detection_efficiency, kappa)?;
        let ellipse = SqueezingEllipse::new(v_sqz, v_anti, ellipse_angle)?;
        let (read_anti, read_sqz) = ellipse.rotate_readout(ellipse_angle - readout_angle);
        Ok(DetectedSqueezing {
            squeezing_db: to_decibel(read_sqz)?,
            antisqueezing_db: to_decibel(read_anti)?,
            ellipse_angle,
            readout_angle,
        })
    }
}
