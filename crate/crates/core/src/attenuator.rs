//! Behavioral model of the subthreshold current attenuator.
//!
//! The series transistor turns the synaptic current into a voltage drop that
//! drives a differential pair biased at `i_b`, so the output follows
//!
//! ```text
//! i_out = i_b * tanh( (kappa_n / (2 u_t)) * (r_n9 * alpha * i_in / 2) )
//! ```
//!
//! where `alpha` (`bias_divider`) stands in for the source-bias adjustment of
//! the diode-connected input pair. In the linear regime the ratio
//! `i_in / i_out` is the constant `4 u_t / (i_b kappa_n r_n9 alpha)`.

use serde::Serialize;

use crate::device::EnvmDeviceModel;
use crate::error::{ensure_finite, Error, Limit, Result};
use crate::units::log_space;

/// Thermal voltage kT/q at 300 K.
pub const THERMAL_VOLTAGE_300K: f64 = 0.02585;

pub const DEFAULT_BAND_SAMPLES: usize = 256;
pub const DEFAULT_BAND_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuatorConfig {
    /// Differential pair bias current, A.
    pub i_b: f64,
    /// Subthreshold slope factor of the pair.
    pub kappa_n: f64,
    /// Thermal voltage, V.
    pub u_t: f64,
    /// Operating-point resistance of the series transistor, Ω.
    pub r_n9: f64,
    /// Fraction of the synaptic current reaching the series transistor, in (0, 1].
    pub bias_divider: f64,
    pub v_d_n10: f64,
    pub v_d_n11: f64,
    pub v_g_n20: f64,
    pub kappa_n20: f64,
}

impl Default for AttenuatorConfig {
    /// Bias point whose full-divider SDF (about 295) sits below every
    /// technology's default SDF, with the tail device saturated.
    fn default() -> Self {
        Self {
            i_b: 50e-9,
            kappa_n: 0.7,
            u_t: THERMAL_VOLTAGE_300K,
            r_n9: 10e3,
            bias_divider: 1.0,
            v_d_n10: 0.3,
            v_d_n11: 0.3,
            v_g_n20: 0.2,
            kappa_n20: 0.7,
        }
    }
}

impl AttenuatorConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.i_b, "i_b"),
            (self.kappa_n, "kappa_n"),
            (self.u_t, "u_t"),
            (self.r_n9, "r_n9"),
            (self.bias_divider, "bias_divider"),
            (self.v_d_n10, "v_d_n10"),
            (self.v_d_n11, "v_d_n11"),
            (self.v_g_n20, "v_g_n20"),
            (self.kappa_n20, "kappa_n20"),
        ] {
            ensure_finite(v, name)?;
        }
        if self.i_b <= 0.0 {
            return Err(Error::invalid("i_b", "must be positive"));
        }
        if self.u_t <= 0.0 {
            return Err(Error::invalid("u_t", "must be positive"));
        }
        if self.r_n9 <= 0.0 {
            return Err(Error::invalid("r_n9", "must be positive"));
        }
        if !(self.kappa_n > 0.0 && self.kappa_n <= 1.0) {
            return Err(Error::invalid("kappa_n", "must lie in (0, 1]"));
        }
        if !(self.bias_divider > 0.0 && self.bias_divider <= 1.0) {
            return Err(Error::invalid("bias_divider", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn with_bias_divider(mut self, bias_divider: f64) -> Self {
        self.bias_divider = bias_divider;
        self
    }

    /// Argument of the tanh for input `i_in`.
    pub fn tanh_argument(&self, i_in: f64) -> f64 {
        self.kappa_n / (2.0 * self.u_t) * (self.r_n9 * (self.bias_divider * i_in) / 2.0)
    }

    /// Linear-regime SDF, `4 u_t / (i_b kappa_n r_n9 bias_divider)`.
    pub fn small_signal_sdf(&self) -> f64 {
        4.0 * self.u_t / (self.i_b * self.kappa_n * self.r_n9 * self.bias_divider)
    }

    /// Same bias point with the divider chosen so the small-signal SDF equals
    /// `sdf`. Fails when that would need a divider above 1.
    pub fn tuned_for_sdf(&self, sdf: f64) -> Result<Self> {
        let floor = self.with_bias_divider(1.0).small_signal_sdf();
        if !(sdf >= floor) {
            return Err(Error::Infeasible(format!(
                "SDF {sdf:e} is below the attenuator's minimum {floor:e} at full bias divider"
            )));
        }
        Ok(self.with_bias_divider(floor / sdf))
    }
}

fn check_input(i_in: f64) -> Result<f64> {
    ensure_finite(i_in, "attenuator input current")?;
    if i_in < 0.0 {
        return Err(Error::OutOfRange {
            quantity: "attenuator input current",
            value: i_in,
            side: crate::error::Side::Lower,
            limit: 0.0,
        });
    }
    Ok(i_in)
}

pub fn output_current(cfg: &AttenuatorConfig, i_in: f64) -> Result<f64> {
    let i_in = check_input(i_in)?;
    Ok(cfg.i_b * cfg.tanh_argument(i_in).tanh())
}

/// `i_in / i_out`. At zero input the small-signal limit is returned.
pub fn scaling_down_factor(cfg: &AttenuatorConfig, i_in: f64) -> Result<f64> {
    let i_in = check_input(i_in)?;
    if i_in == 0.0 {
        return Ok(cfg.small_signal_sdf());
    }
    let out = output_current(cfg, i_in)?;
    if out == 0.0 {
        // Underflowed tanh: still deep in the linear regime.
        return Ok(cfg.small_signal_sdf());
    }
    Ok(i_in / out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationCheck {
    pub passed: bool,
    /// Right-hand side minus `4 u_t`, V. Positive means saturated.
    pub margin: f64,
    /// `(kappa_n (v_d_n10 + v_d_n11) - kappa_n20 v_g_n20) / 2`, V.
    pub rhs: f64,
}

/// Tail-transistor saturation condition `4 u_t < rhs` (strict).
pub fn check_saturation(cfg: &AttenuatorConfig) -> SaturationCheck {
    let rhs = (cfg.kappa_n * (cfg.v_d_n10 + cfg.v_d_n11) - cfg.kappa_n20 * cfg.v_g_n20) / 2.0;
    let threshold = 4.0 * cfg.u_t;
    SaturationCheck {
        passed: threshold < rhs,
        margin: rhs - threshold,
        rhs,
    }
}

/// Largest SDF that keeps the attenuated `i_input_min` above the neuron leak.
pub fn max_sdf(i_input_min: f64, i_leak: f64) -> Result<Limit> {
    ensure_finite(i_input_min, "minimum input current")?;
    ensure_finite(i_leak, "leak current")?;
    if !(i_input_min > 0.0) {
        return Err(Error::invalid("i_input_min", "must be positive"));
    }
    if i_leak < 0.0 {
        return Err(Error::invalid("i_leak", "must be non-negative"));
    }
    if i_leak == 0.0 {
        return Ok(Limit::Unbounded);
    }
    Ok(Limit::Finite(i_input_min / i_leak))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSample {
    pub i_in: f64,
    pub i_out: f64,
    pub sdf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub i_in_min: f64,
    pub i_in_max: f64,
    pub sdf_min: f64,
    pub sdf_max: f64,
    /// Relative SDF spread `(max - min) / min` across the band.
    pub spread: f64,
    pub flat: bool,
    /// Attenuated current at the bottom of the band exceeds the leak.
    pub above_leak: bool,
    pub admissible: bool,
    pub samples: Vec<BandSample>,
}

/// SDF continuity over a device's read range, sampled logarithmically.
pub fn continuity_band(
    cfg: &AttenuatorConfig,
    device: &EnvmDeviceModel,
    i_leak: f64,
    rel_tolerance: f64,
    n_samples: usize,
) -> Result<BandReport> {
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", "need at least 2 samples"));
    }
    let i_lo = device.read_voltage / device.r_hrs;
    let i_hi = device.read_voltage / device.r_lrs;
    let currents = if device.r_lrs == device.r_hrs {
        vec![i_hi]
    } else {
        log_space(i_lo, i_hi, n_samples)
    };
    band_from_currents(cfg, &currents, i_leak, rel_tolerance)
}

/// Band analysis over an explicit set of input currents, in any order.
pub fn band_from_currents(
    cfg: &AttenuatorConfig,
    currents: &[f64],
    i_leak: f64,
    rel_tolerance: f64,
) -> Result<BandReport> {
    if !(rel_tolerance > 0.0) {
        return Err(Error::invalid("rel_tolerance", "must be positive"));
    }
    if currents.is_empty() {
        return Err(Error::invalid("currents", "band is empty"));
    }
    let samples = currents
        .iter()
        .map(|&i_in| {
            Ok(BandSample {
                i_in,
                i_out: output_current(cfg, i_in)?,
                sdf: scaling_down_factor(cfg, i_in)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fold = |f: fn(f64, f64) -> f64, init: f64, key: fn(&BandSample) -> f64| {
        samples.iter().map(key).fold(init, f)
    };
    let i_in_min = fold(f64::min, f64::INFINITY, |s| s.i_in);
    let i_in_max = fold(f64::max, f64::NEG_INFINITY, |s| s.i_in);
    let sdf_min = fold(f64::min, f64::INFINITY, |s| s.sdf);
    let sdf_max = fold(f64::max, f64::NEG_INFINITY, |s| s.sdf);
    let spread = (sdf_max - sdf_min) / sdf_min;
    let flat = spread <= rel_tolerance;
    let above_leak = output_current(cfg, i_in_min)? > i_leak;
    Ok(BandReport {
        i_in_min,
        i_in_max,
        sdf_min,
        sdf_max,
        spread,
        flat,
        above_leak,
        admissible: flat && above_leak,
        samples,
    })
}

/// Log-spaced transfer curve `(i_in, i_out, sdf)` between two currents.
pub fn transfer_curve(
    cfg: &AttenuatorConfig,
    i_min: f64,
    i_max: f64,
    points: usize,
) -> Result<Vec<BandSample>> {
    if !(i_min > 0.0 && i_max > i_min) {
        return Err(Error::invalid("current range", "need 0 < imin < imax"));
    }
    if points == 0 {
        return Err(Error::invalid("points", "need at least one point"));
    }
    log_space(i_min, i_max, points)
        .into_iter()
        .map(|i_in| {
            Ok(BandSample {
                i_in,
                i_out: output_current(cfg, i_in)?,
                sdf: scaling_down_factor(cfg, i_in)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Technology;

    fn textbook() -> AttenuatorConfig {
        AttenuatorConfig {
            i_b: 1e-9,
            kappa_n: 0.7,
            u_t: 0.02585,
            r_n9: 100e3,
            ..AttenuatorConfig::default()
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_input_gives_zero_output() {
        assert_eq!(output_current(&textbook(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn saturates_at_bias_current() {
        let cfg = textbook();
        // x = 20 needs i_in = 20 * 4 u_t / (kappa r)
        let i_in = 20.0 * 4.0 * cfg.u_t / (cfg.kappa_n * cfg.r_n9);
        let out = output_current(&cfg, i_in).unwrap();
        assert!(out <= cfg.i_b);
        assert!(rel(out, cfg.i_b) < 1e-6);
    }

    #[test]
    fn small_signal_output_matches_series() {
        let cfg = textbook();
        let out = output_current(&cfg, 10e-12).unwrap();
        let gain = cfg.i_b * cfg.kappa_n * cfg.r_n9 / (4.0 * cfg.u_t);
        assert!(rel(gain, 6.770e-4) < 1e-4, "{gain}");
        assert!(rel(out, 10e-12 * gain) < 1e-4);
        assert!(rel(out, 6.770e-15) < 1e-4, "{out}");
    }

    #[test]
    fn negative_input_is_rejected() {
        assert!(output_current(&textbook(), -1e-12).is_err());
        assert!(scaling_down_factor(&textbook(), -1e-12).is_err());
    }

    #[test]
    fn sdf_small_signal_limit() {
        let cfg = textbook();
        let expected = 4.0 * 0.02585 / (1e-9 * 0.7 * 1e5);
        assert!(rel(expected, 1477.1) < 1e-4);
        assert_eq!(
            scaling_down_factor(&cfg, 0.0).unwrap(),
            cfg.small_signal_sdf()
        );
        assert!(rel(scaling_down_factor(&cfg, 1e-15).unwrap(), expected) < 1e-9);
    }

    #[test]
    fn halving_divider_doubles_sdf() {
        let cfg = textbook();
        let half = cfg.with_bias_divider(0.5);
        assert!(rel(half.small_signal_sdf(), 2.0 * cfg.small_signal_sdf()) < 1e-15);
    }

    #[test]
    fn sdf_grows_in_saturation() {
        let cfg = textbook();
        let a = scaling_down_factor(&cfg, 1e-5).unwrap();
        let b = scaling_down_factor(&cfg, 1e-4).unwrap();
        assert!(b > a && a > cfg.small_signal_sdf());
    }

    #[test]
    fn tuning_hits_requested_sdf() {
        let cfg = AttenuatorConfig::default();
        let tuned = cfg.tuned_for_sdf(9000.0).unwrap();
        assert!(rel(tuned.small_signal_sdf(), 9000.0) < 1e-12);
        assert!(tuned.validate().is_ok());
        assert!(cfg.tuned_for_sdf(10.0).is_err());
    }

    #[test]
    fn saturation_examples() {
        let cfg = AttenuatorConfig {
            u_t: 0.02585,
            kappa_n: 0.7,
            v_d_n10: 0.3,
            v_d_n11: 0.3,
            kappa_n20: 0.7,
            v_g_n20: 0.2,
            ..AttenuatorConfig::default()
        };
        let s = check_saturation(&cfg);
        assert!(s.passed);
        assert!((s.rhs - 0.14).abs() < 1e-12);
        assert!((s.margin - 0.0366).abs() < 1e-9, "{}", s.margin);

        let zero = AttenuatorConfig {
            v_d_n10: 0.0,
            v_d_n11: 0.0,
            v_g_n20: 0.0,
            ..cfg
        };
        let s = check_saturation(&zero);
        assert!(!s.passed);
        assert_eq!(s.margin, -4.0 * cfg.u_t);

        // rhs == 4 u_t exactly: kappa_n = 1, v_g = 0, v_d sum = 8 u_t
        let edge = AttenuatorConfig {
            kappa_n: 1.0,
            u_t: 0.025,
            v_d_n10: 0.1,
            v_d_n11: 0.1,
            v_g_n20: 0.0,
            ..cfg
        };
        let s = check_saturation(&edge);
        assert_eq!(s.margin, 0.0);
        assert!(!s.passed);
    }

    #[test]
    fn max_sdf_examples() {
        assert_eq!(max_sdf(20e-6, 2e-9).unwrap(), Limit::Finite(10000.0));
        assert_eq!(max_sdf(3e-9, 3e-9).unwrap(), Limit::Finite(1.0));
        assert_eq!(max_sdf(3e-9, 0.0).unwrap(), Limit::Unbounded);
        assert!(max_sdf(0.0, 1e-9).is_err());
    }

    fn oxram() -> EnvmDeviceModel {
        EnvmDeviceModel::new(Technology::Oxram, "oxram", 5e3, 50e3, 0.1, 9000.0).unwrap()
    }

    #[test]
    fn band_flat_in_linear_regime() {
        let cfg = AttenuatorConfig::default().tuned_for_sdf(9000.0).unwrap();
        let b = continuity_band(&cfg, &oxram(), 0.0, 0.05, 256).unwrap();
        assert_eq!(b.samples.len(), 256);
        assert!(b.flat && b.above_leak && b.admissible, "{b:?}");
        assert!(rel(b.sdf_min, 9000.0) < 1e-2);
    }

    #[test]
    fn band_not_flat_in_saturation() {
        // i_b so small the top of the band is deep in tanh saturation.
        let cfg = AttenuatorConfig {
            i_b: 0.5e-9,
            r_n9: 1e6,
            ..AttenuatorConfig::default()
        }
        .tuned_for_sdf(9000.0)
        .unwrap();
        let b = continuity_band(&cfg, &oxram(), 0.0, 0.05, 256).unwrap();
        assert!(!b.flat);
        // Top-of-band SDF from a direct tanh evaluation.
        let x = cfg.tanh_argument(20e-6);
        let direct = 20e-6 / (cfg.i_b * x.tanh());
        assert!(rel(b.sdf_max, direct) < 1e-12);
        assert!(direct > 1.05 * cfg.small_signal_sdf());
    }

    #[test]
    fn band_leak_flag() {
        let cfg = AttenuatorConfig::default().tuned_for_sdf(9000.0).unwrap();
        // attenuated HRS current is about 0.22 nA
        let b = continuity_band(&cfg, &oxram(), 1e-9, 0.05, 64).unwrap();
        assert!(!b.above_leak);
        assert!(!b.admissible);
    }

    #[test]
    fn degenerate_band_is_flat() {
        let d = EnvmDeviceModel::new(Technology::Custom, "x", 5e3, 5e3, 0.1, 9000.0).unwrap();
        let cfg = AttenuatorConfig::default();
        let b = continuity_band(&cfg, &d, 0.0, 0.05, 16).unwrap();
        assert_eq!(b.samples.len(), 1);
        assert!(b.flat);
    }

    #[test]
    fn band_argument_checks() {
        let cfg = AttenuatorConfig::default();
        assert!(continuity_band(&cfg, &oxram(), 0.0, 0.0, 16).is_err());
        assert!(continuity_band(&cfg, &oxram(), 0.0, 0.05, 1).is_err());
    }

    #[test]
    fn transfer_curve_shapes() {
        let cfg = AttenuatorConfig::default();
        assert_eq!(transfer_curve(&cfg, 1e-9, 1e-6, 1).unwrap().len(), 1);
        assert!(transfer_curve(&cfg, 1e-6, 1e-9, 4).is_err());
        assert!(transfer_curve(&cfg, 0.0, 1e-9, 4).is_err());
    }
}
