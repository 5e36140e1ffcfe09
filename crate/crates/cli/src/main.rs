use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqzsim_core::commands::{
    cmd_calibrate, cmd_fig4, cmd_longrun, cmd_longrun_sweep, cmd_phase, cmd_resonance, events_csv,
    spectrogram_table, sweep_table, timeseries_table,
};
use sqzsim_core::config::RunConfig;
use sqzsim_core::control::ReadoutMode;
use sqzsim_core::table::{CurveTable, Span};
use sqzsim_core::{Error, ErrorKind};

/// Audio-band squeezed-light source simulator.
#[derive(Debug, Parser)]
#[command(name = "sqzsim", version, about)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory. Tables go to stdout when neither this nor
    /// `[output] directory` is set; longrun falls back to `sqzsim-out`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized cavity transmission versus pump power.
    Resonance {
        /// Pump power span in W, `start:stop:points`.
        #[arg(long, allow_hyphen_values = true)]
        span: Option<Span>,
    },
    /// Sideband and ellipse phases versus detuning.
    Phase {
        /// Detuning span in Hz, `start:stop:points`.
        #[arg(long, allow_hyphen_values = true)]
        span: Option<Span>,
    },
    /// Detected squeezing per readout mode versus pump power.
    Fig4 {
        /// Pump power span in W, `start:stop:points`.
        #[arg(long, allow_hyphen_values = true)]
        span: Option<Span>,
        /// Comma-separated subset of a, b, c, d.
        #[arg(long, default_value = "a,b,c,d", value_parser = parse_traces)]
        traces: Traces,
    },
    /// Long-run stabilized operation with lock statistics and spectrogram.
    Longrun {
        /// Run this many consecutive seeds and write only a summary table.
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
    },
    /// Fits pump ratio and detection efficiency to a measured dB pair.
    Calibrate {
        #[arg(long, allow_negative_numbers = true)]
        squeezing: f64,
        #[arg(long, allow_negative_numbers = true)]
        antisqueezing: f64,
    },
}

#[derive(Debug, Clone)]
struct Traces(Vec<ReadoutMode>);

fn parse_traces(s: &str) -> Result<Traces, Error> {
    ReadoutMode::parse_list(s).map(Traces)
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err.kind() {
            ErrorKind::Usage => 1,
            ErrorKind::Config => 2,
            ErrorKind::Model => 3,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn io_failure(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {err}", path.display()),
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_failure(&path, e))
}

fn emit_table(table: &CurveTable, out: Option<&Path>, name: &str) -> Result<(), Failure> {
    let text = table.to_csv_string();
    match out {
        Some(dir) => write_file(dir, name, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text.into_bytes()
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().or_else(|| cfg.output.directory.clone());
    match cli.command {
        Command::Resonance { span } => {
            emit_table(&cmd_resonance(&cfg, span)?, out.as_deref(), "resonance.csv")
        }
        Command::Phase { span } => emit_table(&cmd_phase(&cfg, span)?, out.as_deref(), "phase.csv"),
        Command::Fig4 { span, traces } => emit_table(
            &cmd_fig4(&cfg, span, &traces.0)?,
            out.as_deref(),
            "fig4.csv",
        ),
        Command::Longrun { sweep } => {
            let dir = out.unwrap_or_else(|| PathBuf::from("sqzsim-out"));
            if let Some(runs) = sweep {
                let outputs = cmd_longrun_sweep(&cfg, runs)?;
                for o in &outputs {
                    for w in &o.warnings {
                        eprintln!("warning (seed {}): {w}", o.seed);
                    }
                }
                return write_file(
                    &dir,
                    "sweep.csv",
                    sweep_table(&outputs)?.to_csv_string().as_bytes(),
                );
            }
            let output = cmd_longrun(&cfg)?;
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            let every = ((60.0 / cfg.dt).round() as usize).max(1);
            write_file(
                &dir,
                "spectrogram.csv",
                spectrogram_table(&output.spectrogram)?
                    .to_csv_string()
                    .as_bytes(),
            )?;
            write_file(&dir, "spectrogram.json", &to_json(&output.spectrogram))?;
            write_file(&dir, "stats.json", &to_json(&output.stats))?;
            write_file(&dir, "events.csv", events_csv(&output.events).as_bytes())?;
            write_file(
                &dir,
                "timeseries.csv",
                timeseries_table(&output.samples, every)?
                    .to_csv_string()
                    .as_bytes(),
            )?;
            let s = output.stats;
            println!(
                "duty_cycle = {:.6}  locklosses = {}  longest_lock_s = {}  mean_squeezing_db = {:.4}",
                s.duty_cycle, s.n_locklosses, s.longest_lock, s.mean_squeezing_db
            );
            Ok(())
        }
        Command::Calibrate {
            squeezing,
            antisqueezing,
        } => {
            cfg.thermal.validate()?;
            let report = cmd_calibrate(squeezing, antisqueezing, cfg.thermal.set_point_power)?;
            println!("{report}");
            match out {
                Some(dir) => write_file(&dir, "calibration.json", &to_json(&report)),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
