//! eNVM technology models and the read-pulse to synaptic-current conversion.
//!
//! Only fan-in figures are published for the reference technologies, not
//! their resistances. The built-in LRS values are therefore obtained by
//! inverting the fan-in abacus at the published operating points (864.5 fF,
//! 0.9 V threshold, 1 µs / 0.1 V pulse, zero leak). STT-MRAM has no
//! published figure and so no built-in resistance.

use crate::abacus::{fan_in_count, increment_per_pulse, ReadPulse};
use crate::error::{ensure_finite, Error, Result, Side};
use crate::neuron::{LeakMode, NeuronConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technology {
    Pcm,
    Oxram,
    SttMram,
    SotMram,
    Custom,
}

impl Technology {
    /// Technology implied by a device label; anything unrecognised is custom.
    pub fn from_label(label: &str) -> Self {
        match label.to_ascii_lowercase().replace('-', "_").as_str() {
            "pcm" | "pcram" => Technology::Pcm,
            "oxram" | "rram" => Technology::Oxram,
            "stt" | "stt_mram" => Technology::SttMram,
            "sot" | "sot_mram" => Technology::SotMram,
            _ => Technology::Custom,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Technology::Pcm => "PCM",
            Technology::Oxram => "OXRAM",
            Technology::SttMram => "STT_MRAM",
            Technology::SotMram => "SOT_MRAM",
            Technology::Custom => "CUSTOM",
        }
    }
}

/// Published operating point of a technology: fan-in reached at a given SDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedPoint {
    pub technology: Technology,
    pub label: &'static str,
    pub fan_in: u64,
    pub sdf: f64,
}

pub const PUBLISHED_POINTS: [PublishedPoint; 3] = [
    PublishedPoint {
        technology: Technology::Pcm,
        label: "pcm",
        fan_in: 3560,
        sdf: 6000.0,
    },
    PublishedPoint {
        technology: Technology::Oxram,
        label: "oxram",
        fan_in: 350,
        sdf: 9000.0,
    },
    PublishedPoint {
        technology: Technology::SotMram,
        label: "sot_mram",
        fan_in: 88200,
        sdf: 1000.0,
    },
];

/// SDF recommended for STT-MRAM. Its resistances must come from the user.
pub const STT_DEFAULT_SDF: f64 = 9000.0;

/// Read voltage of the reference read pulse.
pub const DEFAULT_READ_VOLTAGE: f64 = 0.1;

/// HRS placeholder for built-in devices: one decade above LRS.
pub const DEFAULT_HRS_WINDOW: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvmDeviceModel {
    pub technology: Technology,
    /// Lookup key, e.g. `oxram`.
    pub name: String,
    /// Low resistance state, Ω.
    pub r_lrs: f64,
    /// High resistance state, Ω.
    pub r_hrs: f64,
    /// Read voltage, V.
    pub read_voltage: f64,
    pub default_sdf: f64,
}

impl EnvmDeviceModel {
    pub fn new(
        technology: Technology,
        name: impl Into<String>,
        r_lrs: f64,
        r_hrs: f64,
        read_voltage: f64,
        default_sdf: f64,
    ) -> Result<Self> {
        let d = Self {
            technology,
            name: name.into(),
            r_lrs,
            r_hrs,
            read_voltage,
            default_sdf,
        };
        d.validate()?;
        Ok(d)
    }

    /// STT-MRAM with caller-supplied resistances.
    pub fn stt_mram(r_lrs: f64, r_hrs: f64) -> Result<Self> {
        Self::new(
            Technology::SttMram,
            "stt_mram",
            r_lrs,
            r_hrs,
            DEFAULT_READ_VOLTAGE,
            STT_DEFAULT_SDF,
        )
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.r_lrs, "r_lrs")?;
        ensure_finite(self.r_hrs, "r_hrs")?;
        ensure_finite(self.read_voltage, "read_voltage")?;
        ensure_finite(self.default_sdf, "default_sdf")?;
        if !(self.r_lrs > 0.0) {
            return Err(Error::invalid("r_lrs", "must be positive"));
        }
        if self.r_hrs < self.r_lrs {
            return Err(Error::invalid("r_hrs", "must not be below r_lrs"));
        }
        if !(self.read_voltage > 0.0) {
            return Err(Error::invalid("read_voltage", "must be positive"));
        }
        if !(self.default_sdf >= 1.0) {
            return Err(Error::invalid("default_sdf", "must be at least 1"));
        }
        Ok(())
    }

    /// Same device with a different LRS (HRS raised if needed to stay valid).
    pub fn with_lrs(&self, r_lrs: f64) -> Self {
        Self {
            r_lrs,
            r_hrs: self.r_hrs.max(r_lrs),
            ..self.clone()
        }
    }

    /// Read current in the low resistance state.
    pub fn lrs_current(&self) -> f64 {
        self.read_voltage / self.r_lrs
    }

    /// Read current in the high resistance state.
    pub fn hrs_current(&self) -> f64 {
        self.read_voltage / self.r_hrs
    }

    /// Built-in PCM, OxRAM and SOT-MRAM models at the reference operating point.
    pub fn builtin() -> Vec<Self> {
        let neuron = NeuronConfig::default();
        let pulse = ReadPulse::reference();
        PUBLISHED_POINTS
            .iter()
            .map(|p| {
                let r_lrs = centered_lrs_for_fanin(p.fan_in, p.sdf, &neuron, &pulse)
                    .expect("reference operating point is feasible");
                Self {
                    technology: p.technology,
                    name: p.label.to_string(),
                    r_lrs,
                    r_hrs: r_lrs * DEFAULT_HRS_WINDOW,
                    read_voltage: pulse.amplitude,
                    default_sdf: p.sdf,
                }
            })
            .collect()
    }
}

/// Synaptic read current `read_voltage / resistance`.
pub fn synaptic_current(device: &EnvmDeviceModel, resistance: f64) -> Result<f64> {
    ensure_finite(resistance, "resistance")?;
    if resistance < device.r_lrs {
        return Err(Error::OutOfRange {
            quantity: "resistance",
            value: resistance,
            side: Side::Lower,
            limit: device.r_lrs,
        });
    }
    if resistance > device.r_hrs {
        return Err(Error::OutOfRange {
            quantity: "resistance",
            value: resistance,
            side: Side::Upper,
            limit: device.r_hrs,
        });
    }
    Ok(device.read_voltage / resistance)
}

fn check_inversion_inputs(
    target_fan_in: u64,
    sdf: f64,
    neuron: &NeuronConfig,
    pulse: &ReadPulse,
) -> Result<()> {
    if target_fan_in < 1 {
        return Err(Error::invalid("target_fan_in", "must be at least 1"));
    }
    if !(sdf >= 1.0) {
        return Err(Error::invalid("sdf", "must be at least 1"));
    }
    if !(pulse.width > 0.0) {
        return Err(Error::invalid("pulse width", "must be positive"));
    }
    if neuron.leak_mode != LeakMode::ConstantCurrent {
        return Err(Error::invalid(
            "leak_mode",
            "inversion requires constant-current leak",
        ));
    }
    neuron.validate()
}

fn lrs_for_increments(
    count: f64,
    sdf: f64,
    neuron: &NeuronConfig,
    pulse: &ReadPulse,
) -> Result<f64> {
    let attenuated = neuron.v_th * neuron.c_mem / (count * pulse.width) + neuron.i_leak;
    if !(attenuated > 0.0) {
        return Err(Error::Infeasible(format!(
            "required attenuated current {attenuated:e} A is not positive"
        )));
    }
    Ok(pulse.amplitude / (sdf * attenuated))
}

/// LRS resistance at which the abacus yields exactly `target_fan_in`.
///
/// Closed-form inversion of the membrane increment, then nudged by a few ulps
/// if rounding would put the floored quotient one count short.
pub fn derive_lrs_from_fanin(
    target_fan_in: u64,
    sdf: f64,
    neuron: &NeuronConfig,
    pulse: &ReadPulse,
) -> Result<f64> {
    check_inversion_inputs(target_fan_in, sdf, neuron, pulse)?;
    let mut r = lrs_for_increments(target_fan_in as f64, sdf, neuron, pulse)?;
    let count_at = |r: f64| fan_in_count(neuron.v_th, increment_per_pulse(neuron, r, sdf, pulse));
    for _ in 0..256 {
        match count_at(r) {
            Some(n) if n == target_fan_in => return Ok(r),
            Some(n) if n > target_fan_in => r = r.next_down(),
            _ => r = r.next_up(),
        }
    }
    Err(Error::Infeasible(format!(
        "no resistance reproduces fan-in {target_fan_in} at SDF {sdf:e}"
    )))
}

/// LRS resistance that puts `threshold / increment` at `target_fan_in + 0.5`,
/// the middle of the interval that floors to `target_fan_in`.
pub fn centered_lrs_for_fanin(
    target_fan_in: u64,
    sdf: f64,
    neuron: &NeuronConfig,
    pulse: &ReadPulse,
) -> Result<f64> {
    check_inversion_inputs(target_fan_in, sdf, neuron, pulse)?;
    lrs_for_increments(target_fan_in as f64 + 0.5, sdf, neuron, pulse)
}

/// Looks a device up by name, case-insensitively.
pub fn find_device<'a>(devices: &'a [EnvmDeviceModel], name: &str) -> Result<&'a EnvmDeviceModel> {
    devices
        .iter()
        .find(|d| d.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownDevice {
            name: name.to_string(),
            available: devices
                .iter()
                .map(|d| d.name.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        })
}
