//! Ideal leaky integrate-and-fire neuron.
//!
//! Two leak flavours are supported. `LeakMode::ConstantCurrent` drains a fixed
//! current and is the one the fan-in abacus uses; `LeakMode::Conductance`
//! drains `g_leak * v` and gives the neuron an RC time constant.

use serde::{Deserialize, Serialize};

use crate::abacus::ReadPulse;
use crate::error::{ensure_finite, Error, Limit, Result};

/// Membrane capacitances of the reference neuron designs, largest first.
/// The last one is the parasitic capacitance of the input node alone.
pub const REFERENCE_CAPACITANCES: [f64; 4] = [864.5e-15, 86.4e-15, 8.6e-15, 1.4e-15];

/// Resolves `cmem_paper_1` .. `cmem_paper_4` to a capacitance.
pub fn capacitance_preset(name: &str) -> Option<f64> {
    let idx: usize = name.strip_prefix("cmem_paper_")?.parse().ok()?;
    REFERENCE_CAPACITANCES.get(idx.checked_sub(1)?).copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LeakMode {
    #[default]
    ConstantCurrent,
    Conductance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronConfig {
    /// Membrane capacitance, F.
    pub c_mem: f64,
    /// Supply voltage, V.
    pub v_dd: f64,
    /// Firing threshold, V.
    pub v_th: f64,
    pub leak_mode: LeakMode,
    /// Leak current in constant-current mode, A.
    pub i_leak: f64,
    /// Leak conductance in conductance mode, S.
    pub g_leak: f64,
    /// Membrane voltage right after a spike, V.
    pub v_reset: f64,
    /// Refractory period, s.
    pub t_refractory: f64,
}

impl Default for NeuronConfig {
    /// The 864.5 fF design with a 1.8 V supply, threshold at half supply and no leak.
    fn default() -> Self {
        Self::new(REFERENCE_CAPACITANCES[0], 1.8)
    }
}

impl NeuronConfig {
    /// Leak-free neuron with the threshold at half the supply.
    pub fn new(c_mem: f64, v_dd: f64) -> Self {
        Self {
            c_mem,
            v_dd,
            v_th: v_dd / 2.0,
            leak_mode: LeakMode::ConstantCurrent,
            i_leak: 0.0,
            g_leak: 0.0,
            v_reset: 0.0,
            t_refractory: 0.0,
        }
    }

    pub fn with_c_mem(mut self, c_mem: f64) -> Self {
        self.c_mem = c_mem;
        self
    }

    pub fn with_threshold(mut self, v_th: f64) -> Self {
        self.v_th = v_th;
        self
    }

    pub fn with_constant_leak(mut self, i_leak: f64) -> Self {
        self.leak_mode = LeakMode::ConstantCurrent;
        self.i_leak = i_leak;
        self
    }

    pub fn with_conductance_leak(mut self, g_leak: f64) -> Self {
        self.leak_mode = LeakMode::Conductance;
        self.g_leak = g_leak;
        self
    }

    pub fn with_refractory(mut self, t_refractory: f64) -> Self {
        self.t_refractory = t_refractory;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.c_mem, "c_mem"),
            (self.v_dd, "v_dd"),
            (self.v_th, "v_th"),
            (self.i_leak, "i_leak"),
            (self.g_leak, "g_leak"),
            (self.v_reset, "v_reset"),
            (self.t_refractory, "t_refractory"),
        ] {
            ensure_finite(v, name)?;
        }
        if self.c_mem <= 0.0 {
            return Err(Error::invalid("c_mem", "must be positive"));
        }
        if !(self.v_th > 0.0 && self.v_th <= self.v_dd) {
            return Err(Error::invalid("v_th", "must lie in (0, v_dd]"));
        }
        if self.i_leak < 0.0 {
            return Err(Error::invalid("i_leak", "must be non-negative"));
        }
        if self.g_leak < 0.0 {
            return Err(Error::invalid("g_leak", "must be non-negative"));
        }
        if self.t_refractory < 0.0 {
            return Err(Error::invalid("t_refractory", "must be non-negative"));
        }
        if self.v_reset >= self.v_th {
            return Err(Error::invalid("v_reset", "must be below v_th"));
        }
        Ok(())
    }

    fn require_constant_leak(&self) -> Result<()> {
        match self.leak_mode {
            LeakMode::ConstantCurrent => Ok(()),
            LeakMode::Conductance => Err(Error::invalid(
                "leak_mode",
                "operation requires constant-current leak",
            )),
        }
    }

    fn leak_current(&self, v_mem: f64) -> f64 {
        match self.leak_mode {
            LeakMode::ConstantCurrent => self.i_leak,
            LeakMode::Conductance => self.g_leak * v_mem,
        }
    }
}

/// Membrane increment produced by one pulse of input current, leak included.
/// Negative when the leak dominates.
pub fn delta_v_mem(neuron: &NeuronConfig, i_input: f64, pulse: &ReadPulse) -> Result<f64> {
    neuron.require_constant_leak()?;
    if !(pulse.width > 0.0) {
        return Err(Error::invalid("pulse width", "must be positive"));
    }
    Ok((i_input - neuron.i_leak) * pulse.width / neuron.c_mem)
}

/// Time for a constant drive to charge the membrane from reset to threshold.
pub fn time_to_fire(neuron: &NeuronConfig, i_const: f64) -> Result<f64> {
    neuron.require_constant_leak()?;
    let net = i_const - neuron.i_leak;
    if !(net > 0.0) {
        return Err(Error::NeverFires {
            drive: i_const,
            leak: neuron.i_leak,
        });
    }
    Ok(neuron.c_mem * (neuron.v_th - neuron.v_reset) / net)
}

pub fn firing_frequency(neuron: &NeuronConfig, i_const: f64) -> Result<f64> {
    Ok(1.0 / (time_to_fire(neuron, i_const)? + neuron.t_refractory))
}

/// RC time constant `c_mem / g_leak` of a conductance-leak neuron.
pub fn time_constant(neuron: &NeuronConfig) -> Result<Limit> {
    if neuron.leak_mode != LeakMode::Conductance {
        return Err(Error::invalid(
            "leak_mode",
            "time constant requires conductance leak",
        ));
    }
    if neuron.g_leak == 0.0 {
        return Ok(Limit::Unbounded);
    }
    Ok(Limit::Finite(neuron.c_mem / neuron.g_leak))
}

/// Reset-to-threshold time under constant drive for either leak mode, or
/// `None` when the drive never reaches threshold.
pub fn estimated_time_to_fire(neuron: &NeuronConfig, i_const: f64) -> Option<f64> {
    match neuron.leak_mode {
        LeakMode::ConstantCurrent => time_to_fire(neuron, i_const).ok(),
        LeakMode::Conductance if neuron.g_leak == 0.0 => {
            (i_const > 0.0).then(|| neuron.c_mem * (neuron.v_th - neuron.v_reset) / i_const)
        }
        LeakMode::Conductance => {
            let v_inf = i_const / neuron.g_leak;
            if v_inf <= neuron.v_th {
                return None;
            }
            let tau = neuron.c_mem / neuron.g_leak;
            Some(tau * ((v_inf - neuron.v_reset) / (v_inf - neuron.v_th)).ln())
        }
    }
}

/// Integration step used when the caller does not choose one:
/// `min(pulse width, time to fire) / 10^4`.
pub fn default_dt(neuron: &NeuronConfig, pulse: &ReadPulse, i_const: f64) -> f64 {
    match estimated_time_to_fire(neuron, i_const) {
        Some(t) => pulse.width.min(t) / 1e4,
        None => pulse.width / 1e4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    pub v_mem: f64,
    pub t: f64,
    pub spike_count: u64,
    pub refractory_until: f64,
}

impl NeuronState {
    /// Membrane at reset, clock at zero.
    pub fn at_rest(neuron: &NeuronConfig) -> Self {
        Self {
            v_mem: neuron.v_reset,
            t: 0.0,
            spike_count: 0,
            refractory_until: f64::NEG_INFINITY,
        }
    }

    pub fn is_refractory(&self) -> bool {
        self.t < self.refractory_until
    }
}

/// One explicit-Euler step. Returns the next state and whether it fired.
pub fn step(
    state: NeuronState,
    neuron: &NeuronConfig,
    i_in_now: f64,
    dt: f64,
) -> Result<(NeuronState, bool)> {
    ensure_finite(i_in_now, "input current")?;
    ensure_finite(dt, "time step")?;
    ensure_finite(state.v_mem, "membrane voltage")?;
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let mut next = state;
    next.t = state.t + dt;

    if state.is_refractory() {
        next.v_mem = neuron.v_reset;
        return Ok((next, false));
    }

    let mut v = state.v_mem + (i_in_now - neuron.leak_current(state.v_mem)) * dt / neuron.c_mem;
    if neuron.leak_mode == LeakMode::ConstantCurrent {
        v = v.max(neuron.v_reset);
    }
    ensure_finite(v, "membrane voltage")?;

    if v >= neuron.v_th {
        next.v_mem = neuron.v_reset;
        next.spike_count += 1;
        next.refractory_until = next.t + neuron.t_refractory;
        Ok((next, true))
    } else {
        next.v_mem = v;
        Ok((next, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: f64 = 864.5e-15;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn us_pulse() -> ReadPulse {
        ReadPulse::new(0.1, 1e-6).unwrap()
    }

    #[test]
    fn presets_resolve() {
        assert_eq!(capacitance_preset("cmem_paper_1"), Some(864.5e-15));
        assert_eq!(capacitance_preset("cmem_paper_4"), Some(1.4e-15));
        assert_eq!(capacitance_preset("cmem_paper_0"), None);
        assert_eq!(capacitance_preset("cmem_paper_5"), None);
        assert_eq!(capacitance_preset("cmem"), None);
    }

    #[test]
    fn default_threshold_is_half_supply() {
        let n = NeuronConfig::default();
        assert_eq!(n.v_th, 0.9);
        assert!(n.validate().is_ok());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let n = NeuronConfig::default();
        assert!(n.with_c_mem(0.0).validate().is_err());
        assert!(n.with_threshold(2.0).validate().is_err());
        assert!(n.with_constant_leak(-1e-9).validate().is_err());
        assert!(n.with_refractory(-1.0).validate().is_err());
        let mut bad = n;
        bad.v_reset = 0.9;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn delta_v_examples() {
        let n = NeuronConfig::default();
        let dv = delta_v_mem(&n, 1e-9, &us_pulse()).unwrap();
        assert!(rel(dv, 1.1567e-3) < 1e-4, "{dv}");

        let leaky = n.with_constant_leak(1e-9);
        assert_eq!(delta_v_mem(&leaky, 1e-9, &us_pulse()).unwrap(), 0.0);

        let leaky = n.with_constant_leak(2e-9);
        let dv = delta_v_mem(&leaky, 0.0, &us_pulse()).unwrap();
        assert!(rel(dv, -2.313e-3) < 1e-3, "{dv}");
    }

    #[test]
    fn delta_v_requires_constant_leak() {
        let n = NeuronConfig::default().with_conductance_leak(1e-9);
        assert!(delta_v_mem(&n, 1e-9, &us_pulse()).is_err());
    }

    #[test]
    fn time_to_fire_examples() {
        let n = NeuronConfig::default();
        let t = time_to_fire(&n, 1e-9).unwrap();
        assert!(rel(t, 778.05e-6) < 1e-9, "{t}");
        let f = firing_frequency(&n, 1e-9).unwrap();
        assert!(rel(f, 1285.264) < 1e-6, "{f}");

        let half = n.with_c_mem(C / 2.0);
        assert!(rel(time_to_fire(&half, 1e-9).unwrap(), t / 2.0) < 1e-15);

        let leaky = n.with_constant_leak(1e-9);
        assert!(matches!(
            time_to_fire(&leaky, 1e-9),
            Err(Error::NeverFires { .. })
        ));
        assert!(firing_frequency(&leaky, 0.5e-9).is_err());
    }

    #[test]
    fn frequency_saturates_at_refractory_limit() {
        let n = NeuronConfig::default().with_refractory(1e-6);
        let f = firing_frequency(&n, 1.0).unwrap();
        assert!(rel(f, 1e6) < 1e-6);
        let lo = firing_frequency(&n, 1e-9).unwrap();
        let hi = firing_frequency(&n, 2e-9).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn time_constant_examples() {
        let n = NeuronConfig::default().with_conductance_leak(1e-9);
        let tau = time_constant(&n).unwrap().finite().unwrap();
        assert!(rel(tau, 864.5e-6) < 1e-12);
        let n2 = NeuronConfig::default().with_conductance_leak(2e-9);
        assert!(rel(time_constant(&n2).unwrap().finite().unwrap(), tau / 2.0) < 1e-15);
        let n0 = NeuronConfig::default().with_conductance_leak(0.0);
        assert_eq!(time_constant(&n0).unwrap(), Limit::Unbounded);
        assert!(time_constant(&NeuronConfig::default()).is_err());
    }

    #[test]
    fn zero_input_zero_leak_step_is_identity() {
        let n = NeuronConfig::default();
        let s0 = NeuronState::at_rest(&n);
        let (s1, fired) = step(s0, &n, 0.0, 1e-7).unwrap();
        assert!(!fired);
        assert_eq!(s1.v_mem, s0.v_mem);
        assert_eq!(s1.spike_count, 0);
        assert_eq!(s1.t, 1e-7);
    }

    #[test]
    fn single_step_reproduces_delta_v() {
        let n = NeuronConfig::default().with_constant_leak(0.2e-9);
        let p = us_pulse();
        let (s1, _) = step(NeuronState::at_rest(&n), &n, 1e-9, p.width).unwrap();
        assert_eq!(s1.v_mem, delta_v_mem(&n, 1e-9, &p).unwrap());
    }

    #[test]
    fn clamp_holds_membrane_at_reset() {
        let n = NeuronConfig::default().with_constant_leak(1e-6);
        let mut s = NeuronState::at_rest(&n);
        for _ in 0..100 {
            s = step(s, &n, 1e-9, 1e-6).unwrap().0;
            assert!(s.v_mem >= n.v_reset);
        }
    }

    #[test]
    fn refractory_holds_then_releases() {
        let n = NeuronConfig::default().with_refractory(4.5e-6);
        let s = NeuronState {
            v_mem: 0.899,
            ..NeuronState::at_rest(&n)
        };
        let (s, fired) = step(s, &n, 1e-6, 1e-6).unwrap();
        assert!(fired);
        assert_eq!(s.spike_count, 1);
        let mut s = s;
        for _ in 0..5 {
            s = step(s, &n, 1e-6, 1e-6).unwrap().0;
            assert_eq!(s.v_mem, n.v_reset);
        }
        let (s, _) = step(s, &n, 1e-9, 1e-6).unwrap();
        assert!(s.v_mem > 0.0);
    }

    #[test]
    fn step_rejects_non_finite() {
        let n = NeuronConfig::default();
        let s = NeuronState::at_rest(&n);
        assert!(step(s, &n, f64::NAN, 1e-6).is_err());
        assert!(step(s, &n, 1e-9, f64::INFINITY).is_err());
        assert!(step(s, &n, 1e-9, 0.0).is_err());
    }

    #[test]
    fn conductance_estimate_matches_closed_form() {
        let n = NeuronConfig::default().with_conductance_leak(1e-9);
        assert_eq!(estimated_time_to_fire(&n, 0.5e-9), None);
        let t = estimated_time_to_fire(&n, 2e-9).unwrap();
        let tau = 864.5e-6;
        assert!(rel(t, tau * (2.0f64 / 1.1).ln()) < 1e-12);
    }
}
