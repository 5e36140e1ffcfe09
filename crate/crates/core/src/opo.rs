//! Below-threshold OPO: quadrature variances, homodyne readout mixing,
//! decibel conversion and calibration from a measured dB pair.
//!
//! Variances are linear and relative to shot noise (vacuum = 1). Decibels
//! appear only at the edges.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpoParams {
    /// `x = P / P_th` at the set-point pump power.
    pub pump_ratio: f64,
    /// Lumped detection efficiency `η_tot`.
    pub detection_efficiency: f64,
    /// OPO threshold power in W.
    pub threshold_power: f64,
}

impl OpoParams {
    pub fn new(pump_ratio: f64, detection_efficiency: f64, threshold_power: f64) -> Result<Self> {
        let opo = Self {
            pump_ratio,
            detection_efficiency,
            threshold_power,
        };
        opo.validate()?;
        Ok(opo)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("pump_ratio", self.pump_ratio)?;
        ensure_finite("detection_efficiency", self.detection_efficiency)?;
        ensure_finite("threshold_power", self.threshold_power)?;
        if self.pump_ratio < 0.0 {
            return Err(Error::invalid("pump_ratio", "must be non-negative"));
        }
        if self.pump_ratio >= 1.0 {
            return Err(Error::AboveThreshold(self.pump_ratio));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            return Err(Error::invalid("detection_efficiency", "must lie in [0, 1]"));
        }
        if self.threshold_power <= 0.0 {
            return Err(Error::invalid("threshold_power", "must be positive"));
        }
        Ok(())
    }

    /// Pump ratio for an absolute pump power.
    pub fn ratio_at(&self, pump_power: f64) -> f64 {
        pump_power / self.threshold_power
    }

    /// `(R_a, R_s)` at the set-point pump ratio.
    pub fn quadrature_variances(&self, kappa: f64) -> Result<(f64, f64)> {
        quadrature_variances(self.pump_ratio, self.detection_efficiency, kappa)
    }
}

/// Anti-squeezed and squeezed variances `(R_a, R_s)` for pump ratio `x`,
/// efficiency `η` and normalized frequency `κ`.
pub fn quadrature_variances(pump_ratio: f64, efficiency: f64, kappa: f64) -> Result<(f64, f64)> {
    ensure_finite("pump_ratio", pump_ratio)?;
    ensure_finite("detection_efficiency", efficiency)?;
    ensure_finite("kappa", kappa)?;
    if pump_ratio < 0.0 {
        return Err(Error::invalid("pump_ratio", "must be non-negative"));
    }
    if pump_ratio >= 1.0 {
        return Err(Error::AboveThreshold(pump_ratio));
    }
    if kappa < 0.0 {
        return Err(Error::invalid("kappa", "must be non-negative"));
    }
    let s = pump_ratio.sqrt();
    let k2 = 4.0 * kappa * kappa;
    let lower = (1.0 - s).powi(2) + k2;
    let upper = (1.0 + s).powi(2) + k2;
    let anti = 1.0 + efficiency * 4.0 * s / lower;
    // 1 − 4ηs/upper rewritten as a sum of non-negative terms: near threshold
    // the difference form loses most significant digits
    let sqz = (lower + 4.0 * (1.0 - efficiency) * s) / upper;
    Ok((anti, sqz))
}

/// Squeezed state seen by a homodyne detector whose quadrature is rotated by
/// `angle` from the squeezed axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingEllipse {
    pub v_squeezed: f64,
    pub v_antisqueezed: f64,
    pub angle: f64,
}

impl SqueezingEllipse {
    pub fn new(v_squeezed: f64, v_antisqueezed: f64, angle: f64) -> Result<Self> {
        ensure_finite("v_squeezed", v_squeezed)?;
        ensure_finite("v_antisqueezed", v_antisqueezed)?;
        ensure_finite("angle", angle)?;
        if !(v_squeezed > 0.0 && v_squeezed <= 1.0 && v_antisqueezed >= 1.0) {
            return Err(Error::invalid(
                "ellipse",
                format!("need 0 < V_s <= 1 <= V_a, got V_s = {v_squeezed}, V_a = {v_antisqueezed}"),
            ));
        }
        // products just below one are rounding on pure states
        if v_squeezed * v_antisqueezed < 1.0 - 1e-12 {
            return Err(Error::invalid(
                "ellipse",
                "V_a * V_s below the uncertainty bound",
            ));
        }
        Ok(Self {
            v_squeezed,
            v_antisqueezed,
            angle,
        })
    }

    /// Readout variances `(V'_a, V'_s)` for rotation `theta`.
    pub fn rotate_readout(&self, theta: f64) -> (f64, f64) {
        let (sin, cos) = theta.sin_cos();
        let (c2, s2) = (cos * cos, sin * sin);
        (
            self.v_antisqueezed * c2 + self.v_squeezed * s2,
            self.v_squeezed * c2 + self.v_antisqueezed * s2,
        )
    }

    /// Readout at the ellipse's own angle.
    pub fn readout(&self) -> (f64, f64) {
        self.rotate_readout(self.angle)
    }
}

pub fn to_decibel(variance: f64) -> Result<f64> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::NonPositiveVariance(variance));
    }
    Ok(10.0 * variance.log10())
}

pub fn from_decibel(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Result of inverting the variance model at `κ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub pump_ratio: f64,
    pub detection_efficiency: f64,
    /// False in the no-pump limit, where any efficiency fits.
    pub efficiency_constrained: bool,
}

impl Calibration {
    /// Attaches a threshold power so the set point sits at `pump_ratio`.
    pub fn into_opo(self, set_point_power: f64) -> Result<OpoParams> {
        if self.pump_ratio <= 0.0 {
            return Err(Error::Calibration(
                "zero pump ratio leaves the threshold power undetermined".into(),
            ));
        }
        OpoParams::new(
            self.pump_ratio,
            self.detection_efficiency,
            set_point_power / self.pump_ratio,
        )
    }

    /// Largest dB deviation of the forward model from the target pair.
    pub fn forward_residual_db(&self, sqz_db: f64, antisqz_db: f64) -> Result<f64> {
        let (anti, sqz) = quadrature_variances(self.pump_ratio, self.detection_efficiency, 0.0)?;
        Ok((to_decibel(sqz)? - sqz_db)
            .abs()
            .max((to_decibel(anti)? - antisqz_db).abs()))
    }
}

/// Levels this close to 0 dB are treated as the unpumped state.
const NO_PUMP_DB: f64 = 1e-12;

/// Finds `(x, η)` reproducing a squeezing / anti-squeezing pair at `κ = 0`.
///
/// With `a = R_a − 1`, `b = 1 − R_s`, `A = 4√x/(1−√x)²` and
/// `B = 4√x/(1+√x)²`, the identity `1/B − 1/A = 1` fixes `η = ab/(a − b)`;
/// `√x` then solves `A = a/η`.
pub fn calibrate(sqz_db: f64, antisqz_db: f64) -> Result<Calibration> {
    ensure_finite("squeezing_db", sqz_db)?;
    ensure_finite("antisqueezing_db", antisqz_db)?;
    if sqz_db.abs() <= NO_PUMP_DB && antisqz_db.abs() <= NO_PUMP_DB {
        return Ok(Calibration {
            pump_ratio: 0.0,
            detection_efficiency: 1.0,
            efficiency_constrained: false,
        });
    }
    if !(sqz_db < 0.0 && antisqz_db > 0.0) {
        return Err(Error::Calibration(format!(
            "need squeezing below 0 dB and anti-squeezing above 0 dB, got ({sqz_db}, {antisqz_db})"
        )));
    }
    let anti = from_decibel(antisqz_db);
    let sqz = from_decibel(sqz_db);
    if anti * sqz < 1.0 - 1e-12 {
        return Err(Error::Calibration(format!(
            "pair violates the uncertainty bound: R_a * R_s = {:.6} < 1",
            anti * sqz
        )));
    }
    let a = anti - 1.0;
    let b = 1.0 - sqz;
    let mut efficiency = a * b / (a - b);
    if efficiency > 1.0 {
        if efficiency - 1.0 > 1e-12 {
            return Err(Error::Calibration(format!(
                "implied detection efficiency {efficiency:.6} exceeds 1"
            )));
        }
        efficiency = 1.0;
    }
    let q = a / efficiency;
    // smaller root of q s² − (2q + 4) s + q = 0, written without cancellation
    let root = q / ((q + 1.0).sqrt() + 1.0).powi(2);
    Ok(Calibration {
        pump_ratio: root * root,
        detection_efficiency: efficiency,
        efficiency_constrained: true,
    })
}
