//! TOML run configuration. Units are fixed per field: W, Hz, m, s, dB.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{ControlConfig, SqueezingChain, ThermalCoupling};
use crate::error::{Error, ErrorKind, Result};
use crate::longrun::{LockParams, LongRunConfig, NoiseProcess, SpectrogramConfig, StabilizerLoop};
use crate::opo::{calibrate, Calibration, OpoParams};
use crate::optics::CavityParams;

/// Cavity in the power quantities experimenters quote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavitySpec {
    pub input_transmittance: f64,
    pub output_transmittance: f64,
    /// Round-trip loss other than the output coupler, including the input mirror.
    pub intracavity_loss: f64,
    /// Optical round-trip length, m.
    pub roundtrip_length: f64,
}

impl Default for CavitySpec {
    fn default() -> Self {
        Self {
            input_transmittance: 0.002,
            output_transmittance: 0.10,
            intracavity_loss: 0.005,
            roundtrip_length: 0.4,
        }
    }
}

impl CavitySpec {
    pub fn build(&self) -> Result<CavityParams> {
        CavityParams::from_power(
            self.input_transmittance,
            self.output_transmittance,
            self.intracavity_loss,
            self.roundtrip_length,
        )
    }
}

/// Either a measured dB pair or explicit OPO parameters, never both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpoSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezing_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antisqueezing_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_efficiency: Option<f64>,
    /// W.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_power: Option<f64>,
}

impl Default for OpoSpec {
    fn default() -> Self {
        Self {
            squeezing_db: Some(-9.3),
            antisqueezing_db: Some(16.75),
            pump_ratio: None,
            detection_efficiency: None,
            threshold_power: None,
        }
    }
}

impl OpoSpec {
    /// Resolves to OPO parameters; the calibration is returned when a dB pair
    /// was given.
    pub fn resolve(&self, set_point_power: f64) -> Result<(OpoParams, Option<Calibration>)> {
        let pair = [self.squeezing_db, self.antisqueezing_db];
        let explicit = [
            self.pump_ratio,
            self.detection_efficiency,
            self.threshold_power,
        ];
        let pair_given = pair.iter().any(Option::is_some);
        let explicit_given = explicit.iter().any(Option::is_some);
        match (pair, explicit, pair_given, explicit_given) {
            ([Some(sqz), Some(anti)], _, true, false) => {
                let cal = calibrate(sqz, anti)?;
                Ok((cal.into_opo(set_point_power)?, Some(cal)))
            }
            (_, [Some(x), Some(eta), Some(p_th)], false, true) => {
                Ok((OpoParams::new(x, eta, p_th)?, None))
            }
            _ => Err(Error::Config(
                "[opo] needs exactly one of {squeezing_db, antisqueezing_db} or \
                 {pump_ratio, detection_efficiency, threshold_power}, each set complete"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// s.
    pub duration: f64,
    /// s.
    pub dt: f64,
    pub cavity: CavitySpec,
    pub opo: OpoSpec,
    pub thermal: ThermalCoupling,
    pub control: ControlConfig,
    pub noise: NoiseProcess,
    #[serde(rename = "loop")]
    pub stabilizer: StabilizerLoop,
    pub lock: LockParams,
    pub spectrogram: SpectrogramConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let longrun = LongRunConfig::default();
        Self {
            seed: longrun.seed,
            duration: longrun.duration,
            dt: longrun.dt,
            cavity: CavitySpec::default(),
            opo: OpoSpec::default(),
            thermal: ThermalCoupling::default(),
            control: ControlConfig::default(),
            noise: longrun.noise,
            stabilizer: longrun.stabilizer,
            lock: longrun.lock,
            spectrogram: longrun.spectrogram,
            output: OutputConfig::default(),
        }
    }
}

/// Re-labels every failure while assembling a configuration as a
/// configuration error.
fn as_config(err: Error) -> Error {
    match err.kind() {
        ErrorKind::Config => err,
        _ => Error::Config(err.to_string()),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn cavity_params(&self) -> Result<CavityParams> {
        self.cavity.build().map_err(as_config)
    }

    pub fn opo_params(&self) -> Result<(OpoParams, Option<Calibration>)> {
        self.thermal.validate().map_err(as_config)?;
        self.opo
            .resolve(self.thermal.set_point_power)
            .map_err(as_config)
    }

    pub fn chain(&self) -> Result<SqueezingChain> {
        let (opo, _) = self.opo_params()?;
        SqueezingChain::new(self.cavity_params()?, opo, self.thermal, self.control)
            .map_err(as_config)
    }

    pub fn longrun(&self) -> LongRunConfig {
        LongRunConfig {
            seed: self.seed,
            duration: self.duration,
            dt: self.dt,
            noise: self.noise,
            stabilizer: self.stabilizer,
            lock: self.lock,
            spectrogram: self.spectrogram.clone(),
        }
    }

    /// Checks every section without running anything.
    pub fn validate(&self) -> Result<()> {
        self.chain()?;
        self.longrun().validate().map_err(as_config)?;
        Ok(())
    }
}
