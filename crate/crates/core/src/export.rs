//! CSV formats: sweep table, attenuator curves, simulation traces, spike
//! lists and schedule ingestion.
//!
//! Numbers are written in shortest round-trip scientific notation, so a
//! parsed value is bit-identical to the one written.

use std::io::{Read, Write};

use crate::abacus::{self, Constraint, FanInReport, ReadPulse};
use crate::attenuator::BandSample;
use crate::column::{SimulationTrace, SpikeEvent, SpikeSchedule};
use crate::device::{EnvmDeviceModel, Technology};
use crate::error::{Error, Result};
use crate::neuron::NeuronConfig;
use crate::units::parse_quantity;

pub const SWEEP_HEADER: [&str; 12] = [
    "device",
    "c_mem_farads",
    "sdf",
    "r_lrs_ohms",
    "pulse_width_s",
    "pulse_amplitude_v",
    "i_leak_amps",
    "v_th_v",
    "delta_v_mem_v",
    "fan_in",
    "scale_class",
    "flags",
];

pub const BAND_HEADER: [&str; 3] = ["i_in_amps", "i_out_amps", "sdf"];
pub const TRACE_HEADER: [&str; 3] = ["t_s", "v_mem_v", "i_in_a"];
pub const SPIKES_HEADER: [&str; 2] = ["fire_time_s", "input_events_so_far"];
pub const SCHEDULE_HEADER: [&str; 4] = ["t_start_s", "width_s", "amplitude_v", "resistance_ohms"];

/// Marker for an undefined fan-in or scale class.
pub const NOT_AVAILABLE: &str = "NA";

fn sci(v: f64) -> String {
    format!("{v:e}")
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::parse(line, e.to_string())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn sweep_record(r: &FanInReport) -> [String; 12] {
    [
        r.device.clone(),
        sci(r.c_mem),
        sci(r.sdf),
        sci(r.r_lrs),
        sci(r.pulse.width),
        sci(r.pulse.amplitude),
        sci(r.i_leak),
        sci(r.v_th),
        sci(r.delta_v_mem),
        r.fan_in
            .map_or_else(|| NOT_AVAILABLE.into(), |n| n.to_string()),
        r.scale()
            .map_or_else(|| NOT_AVAILABLE.into(), |s| s.label().into()),
        r.flags.joined(),
    ]
}

pub fn write_sweep_csv<W: Write>(rows: &[FanInReport], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(sweep_record(r)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub device: String,
    pub c_mem: f64,
    pub sdf: f64,
    pub r_lrs: f64,
    pub pulse_width: f64,
    pub pulse_amplitude: f64,
    pub i_leak: f64,
    pub v_th: f64,
    pub delta_v_mem: f64,
    pub fan_in: Option<u64>,
    pub scale_class: Option<String>,
    pub flags: Constraint,
}

impl SweepRow {
    /// Re-evaluates the abacus from this row's input columns.
    pub fn recompute(&self) -> Result<FanInReport> {
        let neuron = NeuronConfig::new(self.c_mem, 2.0 * self.v_th)
            .with_threshold(self.v_th)
            .with_constant_leak(self.i_leak);
        let device = EnvmDeviceModel::new(
            Technology::from_label(&self.device),
            self.device.clone(),
            self.r_lrs,
            self.r_lrs,
            self.pulse_amplitude,
            1.0,
        )?;
        let pulse = ReadPulse::new(self.pulse_amplitude, self.pulse_width)?;
        abacus::fan_in(&neuron, &device, self.sdf, &pulse)
    }
}

fn opt_field(s: &str) -> Option<&str> {
    (s != NOT_AVAILABLE && !s.is_empty()).then_some(s)
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(Error::parse(Some(1), "unexpected sweep header"));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map(|p| p.line() as usize);
            let num = |i: usize| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| Error::parse(line, format!("{}: {e}", SWEEP_HEADER[i])))
            };
            Ok(SweepRow {
                device: rec[0].to_string(),
                c_mem: num(1)?,
                sdf: num(2)?,
                r_lrs: num(3)?,
                pulse_width: num(4)?,
                pulse_amplitude: num(5)?,
                i_leak: num(6)?,
                v_th: num(7)?,
                delta_v_mem: num(8)?,
                fan_in: opt_field(&rec[9])
                    .map(|s| s.parse::<u64>())
                    .transpose()
                    .map_err(|e| Error::parse(line, format!("fan_in: {e}")))?,
                scale_class: opt_field(&rec[10]).map(str::to_string),
                flags: Constraint::parse_joined(&rec[11]).map_err(|_| {
                    Error::parse(line, format!("flags: cannot parse `{}`", &rec[11]))
                })?,
            })
        })
        .collect()
}

/// Attenuator curve; a leading `bias_divider` column is added when given.
pub fn write_band_csv<W: Write>(curves: &[(Option<f64>, Vec<BandSample>)], out: W) -> Result<()> {
    let mut w = writer(out);
    let with_divider = curves.iter().any(|(d, _)| d.is_some());
    if with_divider {
        w.write_record(std::iter::once("bias_divider").chain(BAND_HEADER))
            .map_err(csv_err)?;
    } else {
        w.write_record(BAND_HEADER).map_err(csv_err)?;
    }
    for (divider, samples) in curves {
        for s in samples {
            let mut rec = Vec::with_capacity(4);
            if with_divider {
                rec.push(divider.map_or_else(String::new, sci));
            }
            rec.extend([sci(s.i_in), sci(s.i_out), sci(s.sdf)]);
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(trace: &SimulationTrace, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for s in &trace.samples {
        w.write_record([sci(s.t), sci(s.v_mem), sci(s.i_in)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spikes_csv<W: Write>(trace: &SimulationTrace, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SPIKES_HEADER).map_err(csv_err)?;
    for s in &trace.spikes {
        w.write_record([sci(s.t), s.events_completed.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `t_start_s,width_s,amplitude_v,resistance_ohms` rows. Values may use
/// engineering suffixes. Errors carry the offending line number.
pub fn read_schedule_csv<R: Read>(input: R) -> Result<SpikeSchedule> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SCHEDULE_HEADER.iter().copied()) {
        return Err(Error::parse(
            Some(1),
            format!("expected header `{}`", SCHEDULE_HEADER.join(",")),
        ));
    }
    let mut events = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize);
        let field = |i: usize| {
            parse_quantity(&rec[i]).map_err(|_| {
                Error::parse(line, format!("bad {} `{}`", SCHEDULE_HEADER[i], &rec[i]))
            })
        };
        let pulse =
            ReadPulse::new(field(2)?, field(1)?).map_err(|e| Error::parse(line, e.to_string()))?;
        events.push(SpikeEvent {
            t_start: field(0)?,
            pulse,
            resistance: field(3)?,
        });
    }
    SpikeSchedule::new(events)
}
