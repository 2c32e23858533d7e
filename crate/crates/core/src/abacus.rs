//! Fan-in abacus: membrane increment per LRS read pulse and the number of
//! such pulses a neuron absorbs before firing.
//!
//! ```text
//! dV     = (V_read / (R_lrs * SDF) - I_leak) * t_pulse / C_mem
//! fan_in = floor(V_th / dV)
//! ```
//!
//! Leak between pulses is not part of the abacus; `column::leak_gap_report`
//! measures what that omission costs.

use std::fmt;

use bitflags::bitflags;
use rayon::prelude::*;

use crate::attenuator::{self, AttenuatorConfig};
use crate::device::EnvmDeviceModel;
use crate::error::{ensure_finite, Error, Limit, Result};
use crate::neuron::{LeakMode, NeuronConfig};
use crate::units::log_space;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadPulse {
    /// Read voltage, V.
    pub amplitude: f64,
    /// Pulse width, s.
    pub width: f64,
    /// Repetition period for spike trains, s.
    pub period: f64,
}

impl ReadPulse {
    pub fn new(amplitude: f64, width: f64) -> Result<Self> {
        Self::with_period(amplitude, width, width)
    }

    pub fn with_period(amplitude: f64, width: f64, period: f64) -> Result<Self> {
        ensure_finite(amplitude, "pulse amplitude")?;
        ensure_finite(width, "pulse width")?;
        ensure_finite(period, "pulse period")?;
        if !(amplitude > 0.0) {
            return Err(Error::invalid("pulse amplitude", "must be positive"));
        }
        if !(width > 0.0) {
            return Err(Error::invalid("pulse width", "must be positive"));
        }
        if period < width {
            return Err(Error::invalid(
                "pulse period",
                "must not be shorter than the width",
            ));
        }
        Ok(Self {
            amplitude,
            width,
            period,
        })
    }

    /// 0.1 V, 1 µs, back to back.
    pub fn reference() -> Self {
        Self {
            amplitude: 0.1,
            width: 1e-6,
            period: 1e-6,
        }
    }

    /// Fraction of each period during which the pulse is high.
    pub fn duty(&self) -> f64 {
        self.width / self.period
    }
}

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct Constraint: u32 {
        /// Leak consumes the whole attenuated input: no fan-in exists.
        const LEAK_DOMINATED = 1 << 0;
        /// SDF above the cap set by the neuron leak.
        const SDF_EXCEEDS_MAX = 1 << 1;
        /// Attenuator tail transistor out of saturation.
        const SATURATION_VIOLATED = 1 << 2;
        /// SDF not constant over the device read range.
        const BAND_NOT_FLAT = 1 << 3;
        /// No bias divider in (0, 1] gives the attenuator this SDF.
        const SDF_UNREACHABLE = 1 << 4;
    }
}

impl Constraint {
    const NAMES: [(Constraint, &'static str); 5] = [
        (Constraint::LEAK_DOMINATED, "LEAK_DOMINATED"),
        (Constraint::SDF_EXCEEDS_MAX, "SDF_EXCEEDS_MAX"),
        (Constraint::SATURATION_VIOLATED, "SATURATION_VIOLATED"),
        (Constraint::BAND_NOT_FLAT, "BAND_NOT_FLAT"),
        (Constraint::SDF_UNREACHABLE, "SDF_UNREACHABLE"),
    ];

    /// Semicolon-joined flag names, empty when clean.
    pub fn joined(self) -> String {
        Self::NAMES
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|(_, n)| *n)
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_joined(text: &str) -> Result<Self> {
        text.split(';')
            .filter(|s| !s.is_empty())
            .try_fold(Constraint::empty(), |acc, name| {
                Self::NAMES
                    .iter()
                    .find(|(_, n)| *n == name)
                    .map(|(f, _)| acc | *f)
                    .ok_or_else(|| Error::parse(None, format!("unknown flag `{name}`")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScaleClass {
    SubSmall,
    Small,
    Large,
    AboveLarge,
}

impl ScaleClass {
    pub fn label(self) -> &'static str {
        match self {
            ScaleClass::SubSmall => "SUB_SMALL",
            ScaleClass::Small => "SMALL",
            ScaleClass::Large => "LARGE",
            ScaleClass::AboveLarge => "ABOVE_LARGE",
        }
    }
}

impl fmt::Display for ScaleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Small-scale networks take 10 to 100 inputs per neuron, large-scale ones
/// 100 to 1000. Both lower edges are inclusive.
pub fn classify_scale(fan_in: u64) -> ScaleClass {
    match fan_in {
        0..=9 => ScaleClass::SubSmall,
        10..=99 => ScaleClass::Small,
        100..=1000 => ScaleClass::Large,
        _ => ScaleClass::AboveLarge,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanInReport {
    pub device: String,
    pub c_mem: f64,
    pub sdf: f64,
    pub r_lrs: f64,
    pub pulse: ReadPulse,
    pub i_leak: f64,
    pub v_th: f64,
    /// Membrane increment per LRS pulse, V.
    pub delta_v_mem: f64,
    /// `None` when leak dominated.
    pub fan_in: Option<u64>,
    /// `V_read / (R_lrs * SDF)`, A.
    pub i_input_attenuated: f64,
    pub flags: Constraint,
}

impl FanInReport {
    pub fn scale(&self) -> Option<ScaleClass> {
        self.fan_in.map(classify_scale)
    }

    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Attenuated input current `amplitude / (r_lrs * sdf)`.
pub fn attenuated_current(pulse: &ReadPulse, r_lrs: f64, sdf: f64) -> f64 {
    pulse.amplitude / (r_lrs * sdf)
}

/// Membrane increment per pulse for an LRS read through an ideal SDF.
pub fn increment_per_pulse(neuron: &NeuronConfig, r_lrs: f64, sdf: f64, pulse: &ReadPulse) -> f64 {
    (attenuated_current(pulse, r_lrs, sdf) - neuron.i_leak) * pulse.width / neuron.c_mem
}

/// `floor(v_th / delta_v)`, or `None` when the increment is not positive.
/// Zero means a single pulse already reaches threshold.
pub fn fan_in_count(v_th: f64, delta_v: f64) -> Option<u64> {
    (delta_v > 0.0).then(|| (v_th / delta_v).floor() as u64)
}

/// Evaluates one abacus point at the device's LRS.
pub fn fan_in(
    neuron: &NeuronConfig,
    device: &EnvmDeviceModel,
    sdf: f64,
    pulse: &ReadPulse,
) -> Result<FanInReport> {
    ensure_finite(sdf, "sdf")?;
    if !(sdf >= 1.0) {
        return Err(Error::invalid("sdf", "must be at least 1"));
    }
    if neuron.leak_mode != LeakMode::ConstantCurrent {
        return Err(Error::invalid(
            "leak_mode",
            "the abacus requires constant-current leak",
        ));
    }
    neuron.validate()?;
    device.validate()?;

    let i_input = attenuated_current(pulse, device.r_lrs, sdf);
    let dv = increment_per_pulse(neuron, device.r_lrs, sdf, pulse);
    let count = fan_in_count(neuron.v_th, dv);

    let mut flags = Constraint::empty();
    if count.is_none() {
        flags |= Constraint::LEAK_DOMINATED;
    }
    let cap = attenuator::max_sdf(pulse.amplitude / device.r_lrs, neuron.i_leak)?;
    if cap.is_exceeded_by(sdf) {
        flags |= Constraint::SDF_EXCEEDS_MAX;
    }

    Ok(FanInReport {
        device: device.name.clone(),
        c_mem: neuron.c_mem,
        sdf,
        r_lrs: device.r_lrs,
        pulse: *pulse,
        i_leak: neuron.i_leak,
        v_th: neuron.v_th,
        delta_v_mem: dv,
        fan_in: count,
        i_input_attenuated: i_input,
        flags,
    })
}

/// Band analysis settings used when attaching circuit checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSettings {
    pub rel_tolerance: f64,
    pub samples: usize,
}

impl Default for BandSettings {
    fn default() -> Self {
        Self {
            rel_tolerance: attenuator::DEFAULT_BAND_TOLERANCE,
            samples: attenuator::DEFAULT_BAND_SAMPLES,
        }
    }
}

/// Abacus point plus the attenuator checks, with the attenuator's bias
/// divider tuned to realise `sdf`. The band check is skipped when no divider
/// reaches that SDF; the point is flagged `SDF_UNREACHABLE` instead.
pub fn fan_in_with_circuit(
    neuron: &NeuronConfig,
    device: &EnvmDeviceModel,
    sdf: f64,
    pulse: &ReadPulse,
    atten: &AttenuatorConfig,
    band: BandSettings,
) -> Result<FanInReport> {
    let mut report = fan_in(neuron, device, sdf, pulse)?;
    atten.validate()?;
    if !attenuator::check_saturation(atten).passed {
        report.flags |= Constraint::SATURATION_VIOLATED;
    }
    match atten.tuned_for_sdf(sdf) {
        Ok(tuned) => {
            let b = attenuator::continuity_band(
                &tuned,
                device,
                neuron.i_leak,
                band.rel_tolerance,
                band.samples,
            )?;
            if !b.flat {
                report.flags |= Constraint::BAND_NOT_FLAT;
            }
        }
        Err(Error::Infeasible(_)) => report.flags |= Constraint::SDF_UNREACHABLE,
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// SDF cap for a device and neuron: LRS read current over the leak.
pub fn sdf_cap(
    neuron: &NeuronConfig,
    device: &EnvmDeviceModel,
    pulse: &ReadPulse,
) -> Result<Limit> {
    attenuator::max_sdf(pulse.amplitude / device.r_lrs, neuron.i_leak)
}

/// Cartesian product of neurons and devices. Rows follow the device order
/// given, and within a device run from the largest membrane capacitance down.
pub fn sweep(
    neurons: &[NeuronConfig],
    devices: &[EnvmDeviceModel],
    sdfs: &[f64],
    pulse: &ReadPulse,
) -> Result<Vec<FanInReport>> {
    if neurons.is_empty() || devices.is_empty() {
        return Err(Error::invalid(
            "sweep grid",
            "needs at least one neuron and one device",
        ));
    }
    if sdfs.len() != devices.len() {
        return Err(Error::invalid("sdfs", "need exactly one SDF per device"));
    }
    let mut ordered: Vec<&NeuronConfig> = neurons.iter().collect();
    ordered.sort_by(|a, b| b.c_mem.total_cmp(&a.c_mem));

    let cells: Vec<(&EnvmDeviceModel, f64, &NeuronConfig)> = devices
        .iter()
        .zip(sdfs)
        .flat_map(|(d, &s)| ordered.iter().map(move |n| (d, s, *n)))
        .collect();
    cells
        .par_iter()
        .map(|(d, s, n)| fan_in(n, d, *s, pulse))
        .collect()
}

/// Abacus rows at `samples` resistances spread logarithmically over the
/// device's read range.
pub fn resistance_sweep(
    neuron: &NeuronConfig,
    device: &EnvmDeviceModel,
    sdf: f64,
    pulse: &ReadPulse,
    samples: usize,
) -> Result<Vec<FanInReport>> {
    log_space(device.r_lrs, device.r_hrs, samples)
        .par_iter()
        .map(|&r| fan_in(neuron, &device.with_lrs(r), sdf, pulse))
        .collect()
}
