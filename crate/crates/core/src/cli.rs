//! Command-line front end.
//!
//! Exit codes: 0 clean, 1 usage or input error, 2 constraint violation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::abacus::{self, fan_in_with_circuit, FanInReport};
use crate::attenuator::{self, transfer_curve};
use crate::column::{self, Attenuation, SimOptions, SpikeSchedule};
use crate::config::{default_config_text, parse_capacitance, ToolConfig};
use crate::device::find_device;
use crate::error::{Error, Limit, Result};
use crate::export;
use crate::units::{format_eng, parse_quantity};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONSTRAINT: i32 = 2;

fn quantity(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s).map_err(|e| e.to_string())
}

fn capacitance(s: &str) -> std::result::Result<f64, String> {
    parse_capacitance(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "fanin",
    version,
    about = "Fan-in co-design toolkit for eNVM crossbar output circuits"
)]
pub struct Cli {
    /// Configuration file (TOML); built-in reference values when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Emit CSV instead of aligned text where both are available.
    #[arg(long, global = true)]
    pub csv: bool,

    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Print the reference configuration file and exit.
    #[arg(long)]
    pub print_default_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fan-in of one device at its configured operating point.
    Fanin(FaninArgs),
    /// Abacus over capacitances and devices, as CSV.
    Sweep(SweepArgs),
    /// Attenuator transfer curve (i_in, i_out, sdf), as CSV.
    Attenuate(AttenuateArgs),
    /// Time-stepped column simulation.
    Simulate(SimulateArgs),
    /// Constraint checklist for every configured device.
    Check(CheckArgs),
    /// Print the reference configuration file.
    PrintDefaultConfig,
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Scaling-down factor (defaults to the device's configured SDF).
    #[arg(long, value_parser = quantity)]
    pub sdf: Option<f64>,
    /// Membrane capacitance; accepts cmem_paper_1..4.
    #[arg(long, value_parser = capacitance)]
    pub c_mem: Option<f64>,
    /// Firing threshold.
    #[arg(long, value_parser = quantity)]
    pub v_th: Option<f64>,
    /// Constant neuron leak current.
    #[arg(long, value_parser = quantity)]
    pub i_leak: Option<f64>,
    /// Device LRS resistance.
    #[arg(long, value_parser = quantity)]
    pub r_lrs: Option<f64>,
    /// Read pulse width.
    #[arg(long, value_parser = quantity)]
    pub pulse_width: Option<f64>,
    /// Read pulse amplitude.
    #[arg(long, value_parser = quantity)]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FaninArgs {
    #[arg(long)]
    pub device: String,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated device names (default: all configured).
    #[arg(long, value_delimiter = ',')]
    pub devices: Option<Vec<String>>,
    /// Comma-separated capacitances (default: from the config).
    #[arg(long, value_delimiter = ',', value_parser = capacitance, num_args = 0..)]
    pub capacitances: Option<Vec<f64>>,
    /// One SDF applied to every device.
    #[arg(long, value_parser = quantity)]
    pub sdf: Option<f64>,
    /// Extra rows per device spread over [r_lrs, r_hrs].
    #[arg(long)]
    pub resistance_samples: Option<usize>,
    /// Constant neuron leak current.
    #[arg(long, value_parser = quantity)]
    pub i_leak: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AttenuateArgs {
    #[arg(long, value_parser = quantity)]
    pub imin: f64,
    #[arg(long, value_parser = quantity)]
    pub imax: f64,
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Comma-separated bias dividers; one curve per value.
    #[arg(long, value_delimiter = ',', value_parser = quantity)]
    pub bias_divider: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Device whose LRS is read by every event.
    #[arg(long)]
    pub device: Option<String>,
    /// Number of back-to-back LRS events.
    #[arg(long, requires = "device", conflicts_with = "schedule")]
    pub count: Option<usize>,
    /// Schedule CSV: t_start_s,width_s,amplitude_v,resistance_ohms.
    #[arg(long, value_name = "PATH")]
    pub schedule: Option<PathBuf>,
    /// Integration step (default: pulse width / 100).
    #[arg(long, value_parser = quantity)]
    pub dt: Option<f64>,
    /// Use the tanh attenuator tuned to the SDF instead of an ideal divider.
    #[arg(long)]
    pub tanh: bool,
    /// Write the spike list CSV here.
    #[arg(long, value_name = "PATH")]
    pub spikes: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// SDF applied to every device.
    #[arg(long, value_parser = quantity)]
    pub sdf: Option<f64>,
    /// Constant neuron leak current.
    #[arg(long, value_parser = quantity)]
    pub i_leak: Option<f64>,
}

/// Runs the CLI with explicit streams and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_CLEAN
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Infeasible(_) | Error::LeakDominated { .. } | Error::NeverFires { .. } => {
                    EXIT_CONSTRAINT
                }
                _ => EXIT_INPUT,
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ToolConfig> {
    match &cli.config {
        Some(p) => ToolConfig::from_path(p),
        None => Ok(ToolConfig::default()),
    }
}

fn open_output(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Routes primary output to `--output` when given, else to stdout.
fn with_output<F>(cli: &Cli, stdout: &mut dyn Write, f: F) -> Result<i32>
where
    F: FnOnce(&mut dyn Write) -> Result<i32>,
{
    match &cli.output {
        Some(p) => {
            let mut w = open_output(p)?;
            let code = f(&mut w)?;
            w.flush()?;
            Ok(code)
        }
        None => f(stdout),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    if cli.print_default_config {
        return with_output(cli, stdout, print_default_config);
    }
    let Some(command) = &cli.command else {
        return Err(Error::invalid(
            "command",
            "no subcommand given (see --help)",
        ));
    };
    if let Command::PrintDefaultConfig = command {
        return with_output(cli, stdout, print_default_config);
    }
    let cfg = load_config(cli)?;
    match command {
        Command::Fanin(a) => cmd_fanin(cli, &cfg, a, stdout),
        Command::Sweep(a) => cmd_sweep(cli, &cfg, a, stdout),
        Command::Attenuate(a) => cmd_attenuate(cli, &cfg, a, stdout),
        Command::Simulate(a) => cmd_simulate(cli, &cfg, a, stdout, stderr),
        Command::Check(a) => cmd_check(cli, &cfg, a, stdout),
        Command::PrintDefaultConfig => unreachable!(),
    }
}

fn print_default_config(out: &mut dyn Write) -> Result<i32> {
    out.write_all(default_config_text().as_bytes())?;
    Ok(EXIT_CLEAN)
}

/// Applies per-command overrides to a copy of the configuration.
fn apply_overrides(cfg: &ToolConfig, o: &Overrides) -> Result<ToolConfig> {
    let mut cfg = cfg.clone();
    if let Some(c) = o.c_mem {
        cfg.neuron.c_mem = c;
    }
    if let Some(v) = o.v_th {
        cfg.neuron.v_th = v;
    }
    if let Some(i) = o.i_leak {
        cfg.neuron.i_leak = i;
    }
    if let Some(w) = o.pulse_width {
        cfg.pulse.width = w;
        cfg.pulse.period = cfg.pulse.period.max(w);
    }
    if let Some(a) = o.amplitude {
        cfg.pulse.amplitude = a;
    }
    cfg.pulse =
        abacus::ReadPulse::with_period(cfg.pulse.amplitude, cfg.pulse.width, cfg.pulse.period)?;
    cfg.neuron.validate()?;
    Ok(cfg)
}

fn device_point(
    cfg: &ToolConfig,
    name: &str,
    o: &Overrides,
) -> Result<(crate::device::EnvmDeviceModel, f64)> {
    let mut device = find_device(&cfg.devices, name)?.clone();
    if let Some(r) = o.r_lrs {
        device = device.with_lrs(r);
        device.validate()?;
    }
    let sdf = o
        .sdf
        .or_else(|| cfg.sdf_for(&device.name))
        .unwrap_or(device.default_sdf);
    Ok((device, sdf))
}

fn circuit_report(
    cfg: &ToolConfig,
    neuron: &crate::neuron::NeuronConfig,
    device: &crate::device::EnvmDeviceModel,
    sdf: f64,
) -> Result<FanInReport> {
    fan_in_with_circuit(neuron, device, sdf, &cfg.pulse, &cfg.attenuator, cfg.band)
}

fn cmd_fanin(cli: &Cli, cfg: &ToolConfig, a: &FaninArgs, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = apply_overrides(cfg, &a.overrides)?;
    let (device, sdf) = device_point(&cfg, &a.device, &a.overrides)?;
    let report = circuit_report(&cfg, &cfg.neuron, &device, sdf)?;
    let cap = abacus::sdf_cap(&cfg.neuron, &device, &cfg.pulse)?;
    let code = if report.is_clean() {
        EXIT_CLEAN
    } else {
        EXIT_CONSTRAINT
    };
    with_output(cli, stdout, |out| {
        if cli.csv {
            export::write_sweep_csv(std::slice::from_ref(&report), out)?;
        } else {
            write_fanin_text(&report, cap, cfg.neuron.t_refractory, out)?;
        }
        Ok(code)
    })
}

fn write_fanin_text(
    r: &FanInReport,
    cap: Limit,
    t_refractory: f64,
    out: &mut dyn Write,
) -> Result<()> {
    let fan_in = r
        .fan_in
        .map_or_else(|| "undefined (leak dominated)".into(), |n| n.to_string());
    let scale = r.scale().map_or("n/a", |s| s.label());
    let flags = if r.flags.is_empty() {
        "none".to_string()
    } else {
        r.flags.joined()
    };
    let cap = match cap {
        Limit::Finite(v) => format!("{v:.6e}"),
        Limit::Unbounded => "unbounded (no leak)".into(),
    };
    let rows = [
        ("device", r.device.clone()),
        ("c_mem", format_eng(r.c_mem, "F")),
        ("v_th", format_eng(r.v_th, "V")),
        ("i_leak", format_eng(r.i_leak, "A")),
        (
            "t_refractory",
            if t_refractory == 0.0 {
                "0 s (assumed; not part of the abacus)".to_string()
            } else {
                format_eng(t_refractory, "s")
            },
        ),
        ("r_lrs", format_eng(r.r_lrs, "Ω")),
        (
            "pulse",
            format!(
                "{} / {}",
                format_eng(r.pulse.amplitude, "V"),
                format_eng(r.pulse.width, "s")
            ),
        ),
        ("sdf", format!("{}", r.sdf)),
        ("max_sdf", cap),
        ("i_input_attenuated", format_eng(r.i_input_attenuated, "A")),
        ("delta_v_mem", format_eng(r.delta_v_mem, "V")),
        ("fan_in", fan_in),
        ("scale", scale.to_string()),
        ("flags", flags),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<20}{v}")?;
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, cfg: &ToolConfig, a: &SweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = cfg.clone();
    if let Some(i) = a.i_leak {
        cfg.neuron.i_leak = i;
        cfg.neuron.validate()?;
    }
    let capacitances = a
        .capacitances
        .clone()
        .unwrap_or_else(|| cfg.sweep.capacitances.clone());
    if capacitances.is_empty() {
        return Err(Error::invalid("capacitances", "grid is empty"));
    }
    let names: Vec<String> = match &a.devices {
        Some(list) => list.iter().filter(|s| !s.is_empty()).cloned().collect(),
        None => cfg.devices.iter().map(|d| d.name.clone()).collect(),
    };
    if names.is_empty() {
        return Err(Error::invalid("devices", "grid is empty"));
    }
    let mut devices = Vec::with_capacity(names.len());
    let mut sdfs = Vec::with_capacity(names.len());
    for n in &names {
        let d = find_device(&cfg.devices, n)?.clone();
        sdfs.push(
            a.sdf
                .or_else(|| cfg.sdf_for(&d.name))
                .unwrap_or(d.default_sdf),
        );
        devices.push(d);
    }
    cfg.devices = devices;
    cfg.sweep.sdfs = Some(sdfs);
    cfg.sweep.capacitances = capacitances;
    if let Some(n) = a.resistance_samples {
        cfg.sweep.resistance_samples = n;
    }
    let rows = sweep_rows(&cfg)?;
    with_output(cli, stdout, |out| {
        export::write_sweep_csv(&rows, out)?;
        Ok(EXIT_CLEAN)
    })
}

/// The configured sweep grid with circuit checks attached to every cell.
///
/// Rows follow device order, capacitances from largest to smallest, then the
/// optional resistance samples for each device at the largest capacitance.
pub fn sweep_rows(cfg: &ToolConfig) -> Result<Vec<FanInReport>> {
    cfg.validate()?;
    let capacitances = &cfg.sweep.capacitances;
    if capacitances.is_empty() {
        return Err(Error::invalid("capacitances", "grid is empty"));
    }
    let sdfs = cfg.device_sdfs();
    let neurons: Vec<_> = capacitances
        .iter()
        .map(|&c| cfg.neuron.with_c_mem(c))
        .collect();
    for n in &neurons {
        n.validate()?;
    }
    // Same cell order as the library sweep.
    let order = abacus::sweep(&neurons, &cfg.devices, &sdfs, &cfg.pulse)?;
    let mut rows: Vec<FanInReport> = order
        .par_iter()
        .map(|r| {
            let d = find_device(&cfg.devices, &r.device)?;
            circuit_report(cfg, &cfg.neuron.with_c_mem(r.c_mem), d, r.sdf)
        })
        .collect::<Result<_>>()?;

    let samples = cfg.sweep.resistance_samples;
    if samples > 0 {
        let c_top = capacitances
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let neuron = cfg.neuron.with_c_mem(c_top);
        for (d, &sdf) in cfg.devices.iter().zip(&sdfs) {
            let extra: Vec<FanInReport> =
                abacus::resistance_sweep(&neuron, d, sdf, &cfg.pulse, samples)?
                    .par_iter()
                    .map(|r| circuit_report(cfg, &neuron, &d.with_lrs(r.r_lrs), sdf))
                    .collect::<Result<_>>()?;
            rows.extend(extra);
        }
    }
    Ok(rows)
}

fn cmd_attenuate(
    cli: &Cli,
    cfg: &ToolConfig,
    a: &AttenuateArgs,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let curves = match &a.bias_divider {
        None => vec![(
            None,
            transfer_curve(&cfg.attenuator, a.imin, a.imax, a.points)?,
        )],
        Some(list) => list
            .iter()
            .map(|&b| {
                let c = cfg.attenuator.with_bias_divider(b);
                c.validate()?;
                Ok((Some(b), transfer_curve(&c, a.imin, a.imax, a.points)?))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    with_output(cli, stdout, |out| {
        export::write_band_csv(&curves, out)?;
        Ok(EXIT_CLEAN)
    })
}

fn cmd_simulate(
    cli: &Cli,
    cfg: &ToolConfig,
    a: &SimulateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let cfg = apply_overrides(cfg, &a.overrides)?;
    let point = match &a.device {
        Some(name) => Some(device_point(&cfg, name, &a.overrides)?),
        None => None,
    };
    let schedule = match (&a.schedule, a.count, &point) {
        (Some(path), _, _) => {
            let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let s = export::read_schedule_csv(f)?;
            if let Some((d, _)) = &point {
                s.bind(d)?;
            }
            s
        }
        (None, Some(n), Some((d, _))) => SpikeSchedule::periodic(cfg.pulse, d.r_lrs, n)?,
        _ => {
            return Err(Error::invalid(
                "schedule source",
                "give --device with --count, or --schedule",
            ))
        }
    };
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "is empty"));
    }
    let sdf = match (&point, a.overrides.sdf) {
        (_, Some(s)) => s,
        (Some((_, s)), None) => *s,
        (None, None) => return Err(Error::invalid("sdf", "give --sdf or --device")),
    };
    let atten = if a.tanh {
        Attenuation::Tanh(cfg.attenuator.tuned_for_sdf(sdf)?)
    } else {
        Attenuation::Ideal { sdf }
    };
    let dt =
        a.dt.unwrap_or_else(|| schedule.events()[0].pulse.width / 100.0);
    let trace = column::simulate_with(&cfg.neuron, &atten, &schedule, SimOptions::with_dt(dt))?;

    let analytic = match &point {
        Some((d, s)) => abacus::fan_in(&cfg.neuron, d, *s, &cfg.pulse)?.fan_in,
        None => None,
    };
    let mut summary = String::new();
    match trace.first_fire_event {
        Some(k) => summary.push_str(&format!(
            "first fire at event {k} ({} inputs completed); {} spikes over {} events",
            k - 1,
            trace.spikes.len(),
            schedule.len()
        )),
        None => summary.push_str(&format!("no fire after {} events", schedule.len())),
    }
    match (analytic, trace.first_fire_event) {
        (Some(n), Some(k)) => summary.push_str(&format!(
            "; analytic fan_in {n}; difference {:+}",
            k as i64 - n as i64
        )),
        (Some(n), None) => summary.push_str(&format!("; analytic fan_in {n}")),
        _ => {}
    }

    if let Some(p) = &a.spikes {
        let mut w = open_output(p)?;
        export::write_spikes_csv(&trace, &mut w)?;
        w.flush()?;
    }
    match (&cli.output, cli.csv) {
        (Some(p), _) => {
            let mut w = open_output(p)?;
            export::write_trace_csv(&trace, &mut w)?;
            w.flush()?;
            writeln!(stdout, "{summary}")?;
        }
        (None, true) => {
            export::write_trace_csv(&trace, &mut *stdout)?;
            writeln!(stderr, "{summary}")?;
        }
        (None, false) => writeln!(stdout, "{summary}")?,
    }
    Ok(EXIT_CLEAN)
}

/// One row of the constraint checklist.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub device: String,
    pub sdf: f64,
    pub max_sdf: Limit,
    pub saturation: attenuator::SaturationCheck,
    pub sdf_reachable: bool,
    pub band: Option<attenuator::BandReport>,
    pub report: FanInReport,
}

impl CheckRow {
    pub fn failures(&self) -> Vec<String> {
        let mut f = Vec::new();
        if !self.saturation.passed {
            f.push(format!(
                "saturation margin {:.4e} V",
                self.saturation.margin
            ));
        }
        if self.max_sdf.is_exceeded_by(self.sdf) {
            f.push(format!(
                "SDF {:e} exceeds max_sdf {}",
                self.sdf, self.max_sdf
            ));
        }
        if !self.sdf_reachable {
            f.push(format!("attenuator cannot reach SDF {:e}", self.sdf));
        }
        if let Some(b) = &self.band {
            if !b.flat {
                f.push(format!("SDF spread {:.3e} over read band", b.spread));
            }
            if !b.above_leak {
                f.push("attenuated HRS current below leak".into());
            }
        }
        if self.report.fan_in.is_none() {
            f.push("leak dominated".into());
        }
        f
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

pub fn check_rows(cfg: &ToolConfig) -> Result<Vec<CheckRow>> {
    let sdfs = cfg.device_sdfs();
    cfg.devices
        .iter()
        .zip(sdfs)
        .map(|(d, sdf)| {
            let report = abacus::fan_in(&cfg.neuron, d, sdf, &cfg.pulse)?;
            let max_sdf = abacus::sdf_cap(&cfg.neuron, d, &cfg.pulse)?;
            let saturation = attenuator::check_saturation(&cfg.attenuator);
            let (sdf_reachable, band) = match cfg.attenuator.tuned_for_sdf(sdf) {
                Ok(t) => (
                    true,
                    Some(attenuator::continuity_band(
                        &t,
                        d,
                        cfg.neuron.i_leak,
                        cfg.band.rel_tolerance,
                        cfg.band.samples,
                    )?),
                ),
                Err(_) => (false, None),
            };
            Ok(CheckRow {
                device: d.name.clone(),
                sdf,
                max_sdf,
                saturation,
                sdf_reachable,
                band,
                report,
            })
        })
        .collect()
}

fn cmd_check(cli: &Cli, cfg: &ToolConfig, a: &CheckArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = cfg.clone();
    if let Some(i) = a.i_leak {
        cfg.neuron.i_leak = i;
        cfg.neuron.validate()?;
    }
    if let Some(s) = a.sdf {
        cfg.sweep.sdfs = Some(vec![s; cfg.devices.len()]);
    }
    let rows = check_rows(&cfg)?;
    let code = if rows.iter().all(CheckRow::passed) {
        EXIT_CLEAN
    } else {
        EXIT_CONSTRAINT
    };
    with_output(cli, stdout, |out| {
        if cli.csv {
            write_check_csv(&rows, out)?;
        } else {
            write_check_text(&rows, out)?;
        }
        Ok(code)
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn write_check_text(rows: &[CheckRow], out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "{:<12}{:>10}{:>14}{:>22}{:>11}{:>14}{:>8}{:>9}{:>13}  status",
        "device",
        "sdf",
        "max_sdf",
        "saturation(margin V)",
        "reachable",
        "band_spread",
        "leak",
        "fan_in",
        "scale"
    )?;
    for r in rows {
        let (spread, leak) = match &r.band {
            Some(b) => (format!("{:.3e}", b.spread), yes_no(b.above_leak)),
            None => ("n/a".into(), "n/a"),
        };
        let cap = match r.max_sdf {
            Limit::Finite(v) => format!("{v:.4e}"),
            Limit::Unbounded => "unbounded".into(),
        };
        writeln!(
            out,
            "{:<12}{:>10}{:>14}{:>22}{:>11}{:>14}{:>8}{:>9}{:>13}  {}",
            r.device,
            r.sdf,
            cap,
            format!(
                "{} ({:+.4})",
                yes_no(r.saturation.passed),
                r.saturation.margin
            ),
            yes_no(r.sdf_reachable),
            spread,
            leak,
            r.report.fan_in.map_or("n/a".into(), |n| n.to_string()),
            r.report.scale().map_or("n/a", |s| s.label()),
            if r.passed() { "ok" } else { "FAIL" }
        )?;
    }
    for r in rows {
        for f in r.failures() {
            writeln!(out, "{}: {f}", r.device)?;
        }
    }
    Ok(())
}

fn write_check_csv(rows: &[CheckRow], out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "device,sdf,max_sdf,saturation_pass,saturation_margin_v,sdf_reachable,band_spread,band_flat,band_above_leak,fan_in,scale_class,status"
    )?;
    for r in rows {
        let (spread, flat, leak) = match &r.band {
            Some(b) => (
                format!("{:e}", b.spread),
                b.flat.to_string(),
                b.above_leak.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{:e},{},{},{:e},{},{},{},{},{},{},{}",
            r.device,
            r.sdf,
            r.max_sdf,
            r.saturation.passed,
            r.saturation.margin,
            r.sdf_reachable,
            spread,
            flat,
            leak,
            r.report
                .fan_in
                .map_or(export::NOT_AVAILABLE.into(), |n| n.to_string()),
            r.report
                .scale()
                .map_or(export::NOT_AVAILABLE, |s| s.label()),
            if r.passed() { "ok" } else { "FAIL" }
        )?;
    }
    Ok(())
}

/// Entry point for the binary.
pub fn main_with_std() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    code
}
