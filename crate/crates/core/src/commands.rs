//! Subcommand bodies shared by the binary and the tests. Each returns data;
//! writing files is left to the caller.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::control::{
    delta_shift, ellipse_rotation, readout_corotation, resonance_curve, ReadoutMode,
};
use crate::error::{Error, Result};
use crate::longrun::{run, sweep, LockEvent, RunOutput, Sample, Spectrogram};
use crate::opo::calibrate;
use crate::optics::Detuning;
use crate::table::{CurveTable, Span};

/// Set point ±20 %.
pub fn default_resonance_span(set_point: f64) -> Span {
    Span {
        start: 0.8 * set_point,
        stop: 1.2 * set_point,
        points: 201,
    }
}

/// ±50 MHz.
pub fn default_phase_span() -> Span {
    Span {
        start: -50e6,
        stop: 50e6,
        points: 401,
    }
}

/// Set point ±10 %.
pub fn default_fig4_span(set_point: f64) -> Span {
    Span {
        start: 0.9 * set_point,
        stop: 1.1 * set_point,
        points: 201,
    }
}

fn describe(span: &Span) -> String {
    format!("{}:{}:{}", span.start, span.stop, span.points)
}

/// Normalized transmission versus pump power.
pub fn cmd_resonance(cfg: &RunConfig, span: Option<Span>) -> Result<CurveTable> {
    let cavity = cfg.cavity_params()?;
    cfg.thermal.validate()?;
    let span = span.unwrap_or_else(|| default_resonance_span(cfg.thermal.set_point_power));
    let mut table = CurveTable::new(
        vec![
            "pump_power_w".into(),
            "detuning_hz".into(),
            "transmission".into(),
        ],
        format!("sqzsim resonance span={}", describe(&span)),
    );
    for (p, t) in resonance_curve(&span.values(), &cfg.thermal, &cavity)? {
        table.push(vec![p, cfg.thermal.detuning_at(p).hz(), t])?;
    }
    Ok(table)
}

/// Carrier phase, differential sideband shift, ellipse and readout angles
/// versus detuning.
pub fn cmd_phase(cfg: &RunConfig, span: Option<Span>) -> Result<CurveTable> {
    let cavity = cfg.cavity_params()?;
    cfg.control.validate()?;
    let span = span.unwrap_or_else(default_phase_span);
    let mut table = CurveTable::new(
        ["detuning_hz", "phi", "delta_shift", "theta_a", "theta_lo"]
            .map(String::from)
            .to_vec(),
        format!(
            "sqzsim phase span={} f_ccf={}",
            describe(&span),
            cfg.control.f_ccf
        ),
    );
    for f in span.values() {
        let d = Detuning(f);
        table.push(vec![
            f,
            cavity.transmission_phase_unwrapped(f)?,
            delta_shift(d, &cfg.control, &cavity)?,
            ellipse_rotation(d, &cavity)?,
            readout_corotation(d, &cfg.control, &cavity)?,
        ])?;
    }
    Ok(table)
}

/// Detected squeezing per readout mode versus pump power.
pub fn cmd_fig4(cfg: &RunConfig, span: Option<Span>, traces: &[ReadoutMode]) -> Result<CurveTable> {
    if traces.is_empty() {
        return Err(Error::Usage("no traces selected".into()));
    }
    let chain = cfg.chain()?;
    let span = span.unwrap_or_else(|| default_fig4_span(cfg.thermal.set_point_power));
    let mut columns = vec!["pump_power_w".to_string(), "detuning_hz".to_string()];
    columns.extend(traces.iter().map(|m| format!("trace_{m}_db")));
    let letters: Vec<String> = traces.iter().map(ToString::to_string).collect();
    let mut table = CurveTable::new(
        columns,
        format!(
            "sqzsim fig4 span={} traces={}",
            describe(&span),
            letters.join(",")
        ),
    );
    let rows = span
        .values()
        .par_iter()
        .map(|&p| {
            let mut row = vec![p, chain.thermal.detuning_at(p).hz()];
            for &mode in traces {
                row.push(chain.detected_squeezing(p, mode)?.squeezing_db);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    for row in rows {
        table.push(row)?;
    }
    Ok(table)
}

pub fn cmd_longrun(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    run(&cfg.chain()?, &cfg.longrun())
}

/// Runs seeds `seed, seed + 1, …` and returns outputs in seed order.
pub fn cmd_longrun_sweep(cfg: &RunConfig, runs: usize) -> Result<Vec<RunOutput>> {
    if runs == 0 {
        return Err(Error::Usage("sweep needs at least one run".into()));
    }
    cfg.validate()?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    sweep(&cfg.chain()?, &cfg.longrun(), &seeds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    pub detection_efficiency: f64,
    pub efficiency_constrained: bool,
    pub pump_ratio: f64,
    pub set_point_power: f64,
    /// W; absent when the pump ratio is zero.
    pub threshold_power: Option<f64>,
    /// Largest dB mismatch of the forward model.
    pub residual_db: f64,
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "squeezing_db = {}", self.squeezing_db)?;
        writeln!(f, "antisqueezing_db = {}", self.antisqueezing_db)?;
        if self.efficiency_constrained {
            writeln!(f, "detection_efficiency = {}", self.detection_efficiency)?;
        } else {
            writeln!(f, "detection_efficiency = unconstrained")?;
        }
        writeln!(f, "pump_ratio = {}", self.pump_ratio)?;
        match self.threshold_power {
            Some(p) => writeln!(
                f,
                "threshold_power_w = {p} (set point {} W)",
                self.set_point_power
            )?,
            None => writeln!(f, "threshold_power_w = undetermined")?,
        }
        write!(f, "forward_residual_db = {:e}", self.residual_db)
    }
}

pub fn cmd_calibrate(
    sqz_db: f64,
    antisqz_db: f64,
    set_point_power: f64,
) -> Result<CalibrationReport> {
    let cal = calibrate(sqz_db, antisqz_db)?;
    let threshold_power = cal
        .into_opo(set_point_power)
        .ok()
        .map(|opo| opo.threshold_power);
    Ok(CalibrationReport {
        squeezing_db: sqz_db,
        antisqueezing_db: antisqz_db,
        detection_efficiency: cal.detection_efficiency,
        efficiency_constrained: cal.efficiency_constrained,
        pump_ratio: cal.pump_ratio,
        set_point_power,
        threshold_power,
        residual_db: cal.forward_residual_db(sqz_db, antisqz_db)?,
    })
}

/// Rows are time bins, the first column is the bin start in seconds and the
/// remaining headers are frequencies in Hz.
pub fn spectrogram_table(spec: &Spectrogram) -> Result<CurveTable> {
    let mut columns = vec!["bin_start_s".to_string()];
    columns.extend(spec.frequencies.iter().map(|f| f.to_string()));
    let mut table = CurveTable::new(
        columns,
        format!(
            "sqzsim longrun spectrogram bin_duration={} fft_segment={} values=dB",
            spec.bin_duration, spec.fft_segment
        ),
    );
    for (start, row) in spec.bin_starts.iter().zip(&spec.values) {
        let mut r = vec![*start];
        r.extend_from_slice(row);
        table.push(r)?;
    }
    Ok(table)
}

pub fn events_csv(events: &[LockEvent]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["time_s", "event", "cause"])
        .expect("in-memory write");
    for e in events {
        let kind = match e.kind {
            crate::longrun::EventKind::Lockloss => "lockloss",
            crate::longrun::EventKind::Relock => "relock",
        };
        writer
            .write_record([e.time.to_string().as_str(), kind, e.cause.as_str()])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8")
}

/// One row every `every` samples.
pub fn timeseries_table(samples: &[Sample], every: usize) -> Result<CurveTable> {
    let mut table = CurveTable::new(
        [
            "time_s",
            "raw_deviation",
            "residual_deviation",
            "pump_power_w",
            "detuning_hz",
            "locked",
            "squeezing_db",
        ]
        .map(String::from)
        .to_vec(),
        format!("sqzsim longrun timeseries every={every}"),
    );
    for s in samples.iter().step_by(every.max(1)) {
        table.push(vec![
            s.time,
            s.raw_deviation,
            s.residual_deviation,
            s.pump_power,
            s.detuning_hz,
            f64::from(u8::from(s.state == crate::longrun::LockState::Locked)),
            s.squeezing_db,
        ])?;
    }
    Ok(table)
}

/// Summary row per seed.
pub fn sweep_table(outputs: &[RunOutput]) -> Result<CurveTable> {
    let mut table = CurveTable::new(
        [
            "seed",
            "duty_cycle",
            "n_locklosses",
            "n_saturations",
            "longest_lock_s",
            "mean_squeezing_db",
        ]
        .map(String::from)
        .to_vec(),
        "sqzsim longrun sweep",
    );
    for out in outputs {
        let s = &out.stats;
        table.push(vec![
            out.seed as f64,
            s.duty_cycle,
            s.n_locklosses as f64,
            s.n_saturations as f64,
            s.longest_lock,
            s.mean_squeezing_db,
        ])?;
    }
    Ok(table)
}
