//! Tool configuration file.
//!
//! A TOML document with `[neuron]`, `[attenuator]`, `[pulse]`, `[sweep]`,
//! `[band]` sections and one `[[device]]` table per eNVM technology. Numeric
//! values may be plain numbers or strings with engineering suffixes
//! (`"864.5f"`, `"5k"`). Capacitances also accept the presets
//! `cmem_paper_1` .. `cmem_paper_4`. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::abacus::{BandSettings, ReadPulse};
use crate::attenuator::AttenuatorConfig;
use crate::device::{EnvmDeviceModel, Technology, PUBLISHED_POINTS, STT_DEFAULT_SDF};
use crate::error::{Error, Result};
use crate::neuron::{capacitance_preset, LeakMode, NeuronConfig, REFERENCE_CAPACITANCES};
use crate::units::parse_quantity;

/// Parses an engineering quantity, also accepting capacitance preset names.
pub fn parse_capacitance(text: &str) -> Result<f64> {
    match capacitance_preset(text.trim()) {
        Some(c) => Ok(c),
        None => parse_quantity(text),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Quantity(f64);

#[derive(Debug, Clone, Copy, PartialEq)]
struct Capacitance(f64);

struct NumberVisitor {
    parse: fn(&str) -> Result<f64>,
}

impl Visitor<'_> for NumberVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number or a string with an engineering suffix")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        (self.parse)(v).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(NumberVisitor {
            parse: parse_quantity,
        })
        .map(Quantity)
    }
}

impl<'de> Deserialize<'de> for Capacitance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(NumberVisitor {
            parse: parse_capacitance,
        })
        .map(Capacitance)
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    neuron: Option<RawNeuron>,
    attenuator: Option<RawAttenuator>,
    pulse: Option<RawPulse>,
    sweep: Option<RawSweep>,
    band: Option<RawBand>,
    device: Option<Vec<RawDevice>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNeuron {
    c_mem: Option<Capacitance>,
    v_dd: Option<Quantity>,
    v_th: Option<Quantity>,
    leak_mode: Option<LeakMode>,
    i_leak: Option<Quantity>,
    g_leak: Option<Quantity>,
    v_reset: Option<Quantity>,
    t_refractory: Option<Quantity>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAttenuator {
    i_b: Option<Quantity>,
    kappa_n: Option<Quantity>,
    u_t: Option<Quantity>,
    r_n9: Option<Quantity>,
    bias_divider: Option<Quantity>,
    v_d_n10: Option<Quantity>,
    v_d_n11: Option<Quantity>,
    v_g_n20: Option<Quantity>,
    kappa_n20: Option<Quantity>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    amplitude: Option<Quantity>,
    width: Option<Quantity>,
    period: Option<Quantity>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    capacitances: Option<Vec<Capacitance>>,
    sdfs: Option<Vec<Quantity>>,
    resistance_samples: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBand {
    tolerance: Option<Quantity>,
    samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    name: String,
    r_lrs: Quantity,
    r_hrs: Quantity,
    read_voltage: Option<Quantity>,
    default_sdf: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    /// Membrane capacitances to evaluate, F.
    pub capacitances: Vec<f64>,
    /// One SDF per device, in device order. `None` uses each device's default.
    pub sdfs: Option<Vec<f64>>,
    /// Extra rows per device spread over its resistance range.
    pub resistance_samples: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            capacitances: REFERENCE_CAPACITANCES.to_vec(),
            sdfs: None,
            resistance_samples: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolConfig {
    pub devices: Vec<EnvmDeviceModel>,
    pub neuron: NeuronConfig,
    pub attenuator: AttenuatorConfig,
    pub pulse: ReadPulse,
    pub sweep: SweepGrid,
    pub band: BandSettings,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            devices: EnvmDeviceModel::builtin(),
            neuron: NeuronConfig::default(),
            attenuator: AttenuatorConfig::default(),
            pulse: ReadPulse::reference(),
            sweep: SweepGrid::default(),
            band: BandSettings::default(),
        }
    }
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::parse(line, e.message().to_string())
}

fn default_sdf_for(tech: Technology) -> Option<f64> {
    if tech == Technology::SttMram {
        return Some(STT_DEFAULT_SDF);
    }
    PUBLISHED_POINTS
        .iter()
        .find(|p| p.technology == tech)
        .map(|p| p.sdf)
}

impl ToolConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
        let base = ToolConfig::default();
        let q = |v: Option<Quantity>, d: f64| v.map_or(d, |q| q.0);

        let rn = raw.neuron.unwrap_or_default();
        let v_dd = q(rn.v_dd, base.neuron.v_dd);
        let neuron = NeuronConfig {
            c_mem: rn.c_mem.map_or(base.neuron.c_mem, |c| c.0),
            v_dd,
            v_th: q(rn.v_th, v_dd / 2.0),
            leak_mode: rn.leak_mode.unwrap_or_default(),
            i_leak: q(rn.i_leak, 0.0),
            g_leak: q(rn.g_leak, 0.0),
            v_reset: q(rn.v_reset, 0.0),
            t_refractory: q(rn.t_refractory, 0.0),
        };

        let ra = raw.attenuator.unwrap_or_default();
        let b = base.attenuator;
        let attenuator = AttenuatorConfig {
            i_b: q(ra.i_b, b.i_b),
            kappa_n: q(ra.kappa_n, b.kappa_n),
            u_t: q(ra.u_t, b.u_t),
            r_n9: q(ra.r_n9, b.r_n9),
            bias_divider: q(ra.bias_divider, b.bias_divider),
            v_d_n10: q(ra.v_d_n10, b.v_d_n10),
            v_d_n11: q(ra.v_d_n11, b.v_d_n11),
            v_g_n20: q(ra.v_g_n20, b.v_g_n20),
            kappa_n20: q(ra.kappa_n20, b.kappa_n20),
        };

        let rp = raw.pulse.unwrap_or_default();
        let width = q(rp.width, base.pulse.width);
        let pulse = ReadPulse::with_period(
            q(rp.amplitude, base.pulse.amplitude),
            width,
            q(rp.period, width),
        )?;

        let rs = raw.sweep.unwrap_or_default();
        let sweep = SweepGrid {
            capacitances: rs.capacitances.map_or(base.sweep.capacitances, |v| {
                v.into_iter().map(|c| c.0).collect()
            }),
            sdfs: rs.sdfs.map(|v| v.into_iter().map(|s| s.0).collect()),
            resistance_samples: rs.resistance_samples.unwrap_or(0),
        };

        let rb = raw.band.unwrap_or_default();
        let band = BandSettings {
            rel_tolerance: q(rb.tolerance, base.band.rel_tolerance),
            samples: rb.samples.unwrap_or(base.band.samples),
        };

        let devices = match raw.device {
            None => base.devices,
            Some(list) => list
                .into_iter()
                .map(|d| {
                    let tech = Technology::from_label(&d.name);
                    let sdf = match d.default_sdf {
                        Some(s) => s.0,
                        None => default_sdf_for(tech).ok_or_else(|| {
                            Error::invalid(
                                "default_sdf",
                                format!("required for device `{}`", d.name),
                            )
                        })?,
                    };
                    EnvmDeviceModel::new(
                        tech,
                        d.name,
                        d.r_lrs.0,
                        d.r_hrs.0,
                        q(d.read_voltage, pulse.amplitude),
                        sdf,
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        };

        let cfg = ToolConfig {
            devices,
            neuron,
            attenuator,
            pulse,
            sweep,
            band,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.neuron.validate()?;
        self.attenuator.validate()?;
        for d in &self.devices {
            d.validate()?;
        }
        for (i, d) in self.devices.iter().enumerate() {
            if self.devices[..i]
                .iter()
                .any(|o| o.name.eq_ignore_ascii_case(&d.name))
            {
                return Err(Error::invalid(
                    "device",
                    format!("duplicate name `{}`", d.name),
                ));
            }
        }
        if let Some(sdfs) = &self.sweep.sdfs {
            if sdfs.len() != self.devices.len() {
                return Err(Error::invalid(
                    "sweep.sdfs",
                    "need exactly one SDF per device",
                ));
            }
        }
        if self.sweep.capacitances.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::invalid("sweep.capacitances", "must all be positive"));
        }
        if !(self.band.rel_tolerance > 0.0) {
            return Err(Error::invalid("band.tolerance", "must be positive"));
        }
        if self.band.samples < 2 {
            return Err(Error::invalid("band.samples", "need at least 2"));
        }
        Ok(())
    }

    /// SDF configured for each device, in device order.
    pub fn device_sdfs(&self) -> Vec<f64> {
        match &self.sweep.sdfs {
            Some(s) => s.clone(),
            None => self.devices.iter().map(|d| d.default_sdf).collect(),
        }
    }

    /// Configured SDF of the named device.
    pub fn sdf_for(&self, name: &str) -> Option<f64> {
        let idx = self
            .devices
            .iter()
            .position(|d| d.name.eq_ignore_ascii_case(name))?;
        Some(self.device_sdfs()[idx])
    }
}

/// Configuration file reproducing the reference operating points.
///
/// Resistances are printed in shortest round-trip form, so parsing this text
/// yields exactly `ToolConfig::default()`.
pub fn default_config_text() -> String {
    let cfg = ToolConfig::default();
    let n = cfg.neuron;
    let a = cfg.attenuator;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# eNVM crossbar output circuit: reference operating points.
#
# Numbers may carry engineering suffixes (f p n u m k M G); capacitances
# also accept cmem_paper_1 .. cmem_paper_4 (864.5f, 86.4f, 8.6f, 1.4f).
# Neuron leak is zero: the published fan-in figures do not state the leak
# current, and the built-in resistances were derived assuming none.

[neuron]
c_mem = \"cmem_paper_1\"
v_dd = {v_dd}
v_th = {v_th}
leak_mode = \"constant_current\"
i_leak = {i_leak}
g_leak = {g_leak}
v_reset = {v_reset}
t_refractory = {t_ref}

[attenuator]
i_b = \"50n\"
kappa_n = {kn}
u_t = {ut}
r_n9 = \"10k\"
bias_divider = {bd}
v_d_n10 = {vd10}
v_d_n11 = {vd11}
v_g_n20 = {vg20}
kappa_n20 = {kn20}

[pulse]
amplitude = {amp}
width = \"1u\"
period = \"1u\"

[sweep]
capacitances = [\"864.5f\", \"86.4f\", \"8.6f\", \"1.4f\"]
resistance_samples = 0

[band]
tolerance = {tol}
samples = {samples}

# LRS values invert the fan-in abacus at 864.5 fF, 0.9 V threshold and a
# 1 us / 0.1 V pulse, centred on 3560 (PCM), 350 (OxRAM) and 88200 (SOT)
# pulses. HRS is a one-decade placeholder.
#
# STT-MRAM has no built-in resistances. To include it, add:
# [[device]]
# name = \"stt_mram\"
# r_lrs = ...
# r_hrs = ...
# default_sdf = 9000",
        v_dd = n.v_dd,
        v_th = n.v_th,
        i_leak = n.i_leak,
        g_leak = n.g_leak,
        v_reset = n.v_reset,
        t_ref = n.t_refractory,
        kn = a.kappa_n,
        ut = a.u_t,
        bd = a.bias_divider,
        vd10 = a.v_d_n10,
        vd11 = a.v_d_n11,
        vg20 = a.v_g_n20,
        kn20 = a.kappa_n20,
        amp = cfg.pulse.amplitude,
        tol = cfg.band.rel_tolerance,
        samples = cfg.band.samples,
    );
    for d in &cfg.devices {
        let _ = writeln!(
            s,
            "\n[[device]]\nname = \"{}\"\nr_lrs = {:e}\nr_hrs = {:e}\nread_voltage = {}\ndefault_sdf = {}",
            d.name, d.r_lrs, d.r_hrs, d.read_voltage, d.default_sdf
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_text_round_trips() {
        let parsed = ToolConfig::from_toml(&default_config_text()).unwrap();
        assert_eq!(parsed, ToolConfig::default());
    }

    #[test]
    fn empty_document_is_default() {
        assert_eq!(ToolConfig::from_toml("").unwrap(), ToolConfig::default());
    }

    #[test]
    fn suffixes_and_presets() {
        let cfg = ToolConfig::from_toml(
            r#"
[neuron]
c_mem = "cmem_paper_3"
i_leak = "2n"
[pulse]
width = "500n"
[[device]]
name = "mine"
r_lrs = "5k"
r_hrs = "100kΩ"
default_sdf = 9000
"#,
        )
        .unwrap();
        assert_eq!(cfg.neuron.c_mem, 8.6e-15);
        assert!((cfg.neuron.i_leak - 2e-9).abs() < 1e-24);
        assert_eq!(cfg.neuron.v_th, 0.9);
        assert!((cfg.pulse.width - 500e-9).abs() < 1e-20);
        assert_eq!(cfg.pulse.period, cfg.pulse.width);
        assert_eq!(cfg.devices.len(), 1);
        assert_eq!(cfg.devices[0].r_lrs, 5e3);
        assert_eq!(cfg.devices[0].technology, Technology::Custom);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = ToolConfig::from_toml("[neuron]\nc_mme = 1\n").unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, Some(2));
                assert!(msg.contains("c_mme"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        assert!(ToolConfig::from_toml("[nueron]\n").is_err());
    }

    #[test]
    fn bad_values_are_errors() {
        assert!(ToolConfig::from_toml("[neuron]\nc_mem = \"lots\"\n").is_err());
        assert!(ToolConfig::from_toml("[neuron]\nc_mem = -1\n").is_err());
        assert!(ToolConfig::from_toml("[attenuator]\nbias_divider = 2\n").is_err());
        let custom_without_sdf = "[[device]]\nname = \"x\"\nr_lrs = 1\nr_hrs = 2\n";
        assert!(ToolConfig::from_toml(custom_without_sdf).is_err());
        let dup = "[[device]]\nname = \"pcm\"\nr_lrs = 1\nr_hrs = 2\n[[device]]\nname = \"PCM\"\nr_lrs = 1\nr_hrs = 2\n";
        assert!(ToolConfig::from_toml(dup).is_err());
        assert!(ToolConfig::from_toml("[sweep]\nsdfs = [1000]\n").is_err());
    }

    #[test]
    fn stt_gets_its_default_sdf() {
        let cfg = ToolConfig::from_toml(
            "[[device]]\nname = \"stt_mram\"\nr_lrs = \"3k\"\nr_hrs = \"6k\"\n",
        )
        .unwrap();
        assert_eq!(cfg.devices[0].default_sdf, 9000.0);
        assert_eq!(cfg.sdf_for("STT_MRAM"), Some(9000.0));
    }
}
