//! Time-stepped simulation of a single crossbar column.
//!
//! Each schedule event is one presynaptic spike reading one synapse. The read
//! current `amplitude / resistance` goes through either an ideal divider or
//! the tanh attenuator and is integrated by the neuron with explicit Euler.
//! Input is piecewise constant, so Euler is exact between events and the
//! step size only sets how finely threshold crossings are located.

use rayon::prelude::*;

use crate::abacus::{self, ReadPulse};
use crate::attenuator::{self, AttenuatorConfig};
use crate::device::EnvmDeviceModel;
use crate::error::{ensure_finite, Error, Result};
use crate::neuron::{self, NeuronConfig, NeuronState};

/// Upper bound on recorded trace samples per run.
pub const MAX_TRACE_SAMPLES: usize = 100_000;

/// Relative slack, in units of pulse width, when testing events for overlap.
const OVERLAP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    pub t_start: f64,
    pub pulse: ReadPulse,
    /// Resistance of the synapse being read, Ω.
    pub resistance: f64,
}

impl SpikeEvent {
    pub fn end(&self) -> f64 {
        self.t_start + self.pulse.width
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpikeSchedule {
    events: Vec<SpikeEvent>,
}

impl SpikeSchedule {
    /// Events must be sorted by start time.
    pub fn new(events: Vec<SpikeEvent>) -> Result<Self> {
        for e in &events {
            ensure_finite(e.t_start, "event start")?;
            ensure_finite(e.resistance, "event resistance")?;
            if !(e.resistance > 0.0) {
                return Err(Error::invalid("event resistance", "must be positive"));
            }
        }
        if let Some(i) = events.windows(2).position(|w| w[1].t_start < w[0].t_start) {
            return Err(Error::invalid(
                "schedule",
                format!("event {} starts before event {}", i + 1, i),
            ));
        }
        Ok(Self { events })
    }

    /// `count` reads of the same resistance, one per pulse period from t = 0.
    pub fn periodic(pulse: ReadPulse, resistance: f64, count: usize) -> Result<Self> {
        Self::new(
            (0..count)
                .map(|k| SpikeEvent {
                    t_start: k as f64 * pulse.period,
                    pulse,
                    resistance,
                })
                .collect(),
        )
    }

    /// Checks every resistance lies in the device's read range.
    pub fn bind(&self, device: &EnvmDeviceModel) -> Result<()> {
        for e in &self.events {
            crate::device::synaptic_current(device, e.resistance)?;
        }
        Ok(())
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// How synaptic current reaches the neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attenuation {
    /// Divide by a fixed scaling-down factor.
    Ideal { sdf: f64 },
    /// Full tanh transfer curve.
    Tanh(AttenuatorConfig),
}

impl Attenuation {
    pub fn apply(&self, i_syn: f64) -> Result<f64> {
        match self {
            Attenuation::Ideal { sdf } => Ok(i_syn / sdf),
            Attenuation::Tanh(cfg) => attenuator::output_current(cfg, i_syn),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Attenuation::Ideal { sdf } if !(*sdf >= 1.0) => {
                Err(Error::invalid("sdf", "must be at least 1"))
            }
            Attenuation::Ideal { .. } => Ok(()),
            Attenuation::Tanh(cfg) => cfg.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub v_mem: f64,
    /// Current delivered to the neuron during the step ending at `t`.
    pub i_in: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeRecord {
    pub t: f64,
    /// Events fully completed before this spike.
    pub events_completed: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationTrace {
    pub samples: Vec<TraceSample>,
    pub spikes: Vec<SpikeRecord>,
    /// 1-based index of the event during which the neuron first fired.
    pub first_fire_event: Option<usize>,
    /// Events completed before the first fire.
    pub first_fire_after_n_inputs: Option<usize>,
    pub final_state: Option<NeuronState>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub stop_at_first_fire: bool,
    pub max_samples: usize,
}

impl SimOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            stop_at_first_fire: false,
            max_samples: MAX_TRACE_SAMPLES,
        }
    }

    /// `pulse.width / 100`.
    pub fn for_pulse(pulse: &ReadPulse) -> Self {
        Self::with_dt(pulse.width / 100.0)
    }
}

/// One constant-input stretch of the timeline.
struct Segment {
    duration: f64,
    current: f64,
    /// 1-based event index, or `None` for an idle gap.
    event: Option<usize>,
}

fn steps_for(duration: f64, dt: f64) -> usize {
    ((duration / dt) - 1e-9).ceil().max(1.0) as usize
}

fn build_segments(schedule: &SpikeSchedule, atten: &Attenuation) -> Result<Vec<Segment>> {
    let mut segments = Vec::with_capacity(2 * schedule.len());
    let mut clock = 0.0_f64;
    for (idx, e) in schedule.events().iter().enumerate() {
        let slack = OVERLAP_SLACK * e.pulse.width;
        if e.t_start < clock - slack {
            return Err(Error::OverlappingEvents {
                index: idx,
                start: e.t_start,
                previous_end: clock,
            });
        }
        let gap = e.t_start - clock;
        if gap > slack {
            segments.push(Segment {
                duration: gap,
                current: 0.0,
                event: None,
            });
        }
        let i_syn = e.pulse.amplitude / e.resistance;
        segments.push(Segment {
            duration: e.pulse.width,
            current: atten.apply(i_syn)?,
            event: Some(idx + 1),
        });
        clock = clock.max(e.t_start) + e.pulse.width;
    }
    Ok(segments)
}

pub fn simulate_column(
    neuron: &NeuronConfig,
    atten: &Attenuation,
    schedule: &SpikeSchedule,
    dt: f64,
) -> Result<SimulationTrace> {
    simulate_with(neuron, atten, schedule, SimOptions::with_dt(dt))
}

pub fn simulate_with(
    neuron: &NeuronConfig,
    atten: &Attenuation,
    schedule: &SpikeSchedule,
    opts: SimOptions,
) -> Result<SimulationTrace> {
    ensure_finite(opts.dt, "dt")?;
    if !(opts.dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "is empty"));
    }
    neuron.validate()?;
    atten.validate()?;

    let segments = build_segments(schedule, atten)?;
    let total_steps: usize = segments
        .iter()
        .map(|s| steps_for(s.duration, opts.dt))
        .sum();
    let stride = total_steps.div_ceil(opts.max_samples.max(1)).max(1);

    let mut trace = SimulationTrace {
        samples: Vec::with_capacity(total_steps / stride + 1),
        ..SimulationTrace::default()
    };
    let mut state = NeuronState::at_rest(neuron);
    let mut completed = 0usize;
    let mut step_idx = 0usize;
    let mut seg_start = 0.0_f64;

    'segments: for seg in &segments {
        let n = steps_for(seg.duration, opts.dt);
        let h = seg.duration / n as f64;
        for _ in 0..n {
            let (next, fired) = neuron::step(state, neuron, seg.current, h)?;
            state = next;
            step_idx += 1;
            if step_idx.is_multiple_of(stride) {
                trace.samples.push(TraceSample {
                    t: state.t,
                    v_mem: state.v_mem,
                    i_in: seg.current,
                });
            }
            if fired {
                trace.spikes.push(SpikeRecord {
                    t: state.t,
                    events_completed: completed,
                });
                if trace.first_fire_event.is_none() {
                    trace.first_fire_event = Some(seg.event.unwrap_or(completed + 1));
                    trace.first_fire_after_n_inputs = Some(completed);
                    if opts.stop_at_first_fire {
                        break 'segments;
                    }
                }
            }
        }
        // Pin the clock to the segment boundary so rounding does not drift.
        seg_start += seg.duration;
        state.t = seg_start;
        if seg.event.is_some() {
            completed += 1;
        }
    }
    trace.final_state = Some(state);
    Ok(trace)
}

/// Firing frequency under constant drive, by simulation.
///
/// Each point runs until ten inter-spike intervals have elapsed and reports
/// `(spikes - 1) / (last - first)`. Drives that never reach threshold give 0 Hz.
pub fn frequency_curve(neuron: &NeuronConfig, i_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    neuron.validate()?;
    for &i in i_values {
        ensure_finite(i, "drive current")?;
        if i < 0.0 {
            return Err(Error::invalid("drive current", "must be non-negative"));
        }
    }
    i_values
        .par_iter()
        .map(|&i| Ok((i, simulated_frequency(neuron, i)?)))
        .collect()
}

const FREQUENCY_INTERVALS: u64 = 10;
const STEPS_PER_INTERVAL: f64 = 1e4;

fn simulated_frequency(neuron: &NeuronConfig, i: f64) -> Result<f64> {
    let Some(t_fire) = neuron::estimated_time_to_fire(neuron, i) else {
        return Ok(0.0);
    };
    let interval = t_fire + neuron.t_refractory;
    let dt = interval / STEPS_PER_INTERVAL;
    let budget = ((FREQUENCY_INTERVALS + 2) as f64 * STEPS_PER_INTERVAL * 1.5) as u64;

    let mut state = NeuronState::at_rest(neuron);
    let mut first = None;
    let mut last = 0.0;
    for _ in 0..budget {
        let (next, fired) = neuron::step(state, neuron, i, dt)?;
        state = next;
        if fired {
            first.get_or_insert(state.t);
            last = state.t;
            if state.spike_count > FREQUENCY_INTERVALS {
                break;
            }
        }
    }
    match first {
        Some(t0) if state.spike_count >= 2 => Ok((state.spike_count - 1) as f64 / (last - t0)),
        _ => Ok(0.0),
    }
}

/// Relative error of the abacus when pulses are spaced out and the neuron
/// leaks between them: `(simulated first-fire event - fan_in) / fan_in`.
pub fn leak_gap_report(
    neuron: &NeuronConfig,
    sdf: f64,
    device: &EnvmDeviceModel,
    pulse: &ReadPulse,
    duty: f64,
) -> Result<f64> {
    ensure_finite(duty, "duty")?;
    if !(duty > 0.0 && duty <= 1.0) {
        return Err(Error::invalid("duty", "must lie in (0, 1]"));
    }
    let report = abacus::fan_in(neuron, device, sdf, pulse)?;
    let fan_in = match report.fan_in {
        None => {
            return Err(Error::LeakDominated {
                delta_v: report.delta_v_mem,
            })
        }
        Some(0) => {
            return Err(Error::invalid("fan-in", "a single pulse already fires"));
        }
        Some(n) => n,
    };
    let spaced = ReadPulse::with_period(pulse.amplitude, pulse.width, pulse.width / duty)?;

    // Net charge per period must be positive or the neuron never fires.
    let i_att = report.i_input_attenuated;
    let net_per_period = i_att * spaced.width - neuron.i_leak * spaced.period;
    if !(net_per_period > 0.0) {
        return Err(Error::NeverFires {
            drive: i_att * duty,
            leak: neuron.i_leak,
        });
    }
    let expected = neuron.c_mem * (neuron.v_th - neuron.v_reset) / net_per_period;
    let budget = (expected * 1.5).ceil() as usize + fan_in as usize + 10;

    let schedule = SpikeSchedule::periodic(spaced, device.r_lrs, budget)?;
    let opts = SimOptions {
        stop_at_first_fire: true,
        ..SimOptions::for_pulse(pulse)
    };
    let trace = simulate_with(neuron, &Attenuation::Ideal { sdf }, &schedule, opts)?;
    let fired_at = trace.first_fire_event.ok_or(Error::NeverFires {
        drive: i_att * duty,
        leak: neuron.i_leak,
    })?;
    Ok((fired_at as f64 - fan_in as f64) / fan_in as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{find_device, Technology};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn oxram() -> EnvmDeviceModel {
        let devs = EnvmDeviceModel::builtin();
        find_device(&devs, "oxram").unwrap().clone()
    }

    #[test]
    fn oxram_fires_on_event_after_fan_in() {
        let n = NeuronConfig::default();
        let pulse = ReadPulse::reference();
        let d = oxram();
        let schedule = SpikeSchedule::periodic(pulse, d.r_lrs, 400).unwrap();
        let trace = simulate_column(
            &n,
            &Attenuation::Ideal { sdf: 9000.0 },
            &schedule,
            pulse.width / 100.0,
        )
        .unwrap();
        assert_eq!(trace.first_fire_event, Some(351));
        assert_eq!(trace.first_fire_after_n_inputs, Some(350));
        assert_eq!(trace.spikes[0].events_completed, 350);
    }

    #[test]
    fn sub_threshold_event_does_not_fire() {
        let n = NeuronConfig::default();
        let pulse = ReadPulse::reference();
        let schedule = SpikeSchedule::periodic(pulse, oxram().r_lrs, 1).unwrap();
        let trace =
            simulate_column(&n, &Attenuation::Ideal { sdf: 9000.0 }, &schedule, 1e-8).unwrap();
        assert!(trace.spikes.is_empty());
        assert_eq!(trace.first_fire_event, None);
        assert!(trace.final_state.unwrap().v_mem > 0.0);
    }

    #[test]
    fn overlapping_events_are_rejected() {
        let pulse = ReadPulse::reference();
        let events = vec![
            SpikeEvent {
                t_start: 0.0,
                pulse,
                resistance: 5e3,
            },
            SpikeEvent {
                t_start: 0.5e-6,
                pulse,
                resistance: 5e3,
            },
        ];
        let schedule = SpikeSchedule::new(events).unwrap();
        let err = simulate_column(
            &NeuronConfig::default(),
            &Attenuation::Ideal { sdf: 9000.0 },
            &schedule,
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingEvents { index: 1, .. }));
    }

    #[test]
    fn unsorted_schedule_rejected() {
        let pulse = ReadPulse::reference();
        let events = vec![
            SpikeEvent {
                t_start: 2e-6,
                pulse,
                resistance: 5e3,
            },
            SpikeEvent {
                t_start: 0.0,
                pulse,
                resistance: 5e3,
            },
        ];
        assert!(SpikeSchedule::new(events).is_err());
    }

    #[test]
    fn empty_schedule_rejected() {
        let schedule = SpikeSchedule::default();
        assert!(simulate_column(
            &NeuronConfig::default(),
            &Attenuation::Ideal { sdf: 1.0 },
            &schedule,
            1e-8
        )
        .is_err());
    }

    #[test]
    fn schedule_binding_checks_range() {
        let d = oxram();
        let pulse = ReadPulse::reference();
        let ok = SpikeSchedule::periodic(pulse, d.r_lrs, 3).unwrap();
        assert!(ok.bind(&d).is_ok());
        let bad = SpikeSchedule::periodic(pulse, d.r_lrs / 2.0, 3).unwrap();
        assert!(bad.bind(&d).is_err());
    }

    #[test]
    fn trace_is_decimated() {
        let n = NeuronConfig::default();
        let pulse = ReadPulse::reference();
        let schedule = SpikeSchedule::periodic(pulse, oxram().r_lrs, 2000).unwrap();
        let trace =
            simulate_column(&n, &Attenuation::Ideal { sdf: 9000.0 }, &schedule, 1e-9).unwrap();
        assert!(trace.samples.len() <= MAX_TRACE_SAMPLES);
        assert!(trace.samples.len() > MAX_TRACE_SAMPLES / 2);
        assert!(trace.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(trace.spikes.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(trace.spikes.len(), 5);
    }

    #[test]
    fn idle_gaps_carry_zero_current() {
        let n = NeuronConfig::default();
        let pulse = ReadPulse::with_period(0.1, 1e-6, 4e-6).unwrap();
        let schedule = SpikeSchedule::periodic(pulse, 5e3, 2).unwrap();
        let trace =
            simulate_column(&n, &Attenuation::Ideal { sdf: 9000.0 }, &schedule, 1e-7).unwrap();
        // 10 steps, 30 idle steps, 10 steps
        assert_eq!(trace.samples.len(), 50);
        assert!(trace.samples[10..40].iter().all(|s| s.i_in == 0.0));
        assert!(trace.samples[40..].iter().all(|s| s.i_in > 0.0));
    }

    #[test]
    fn tanh_linear_band_matches_ideal() {
        let n = NeuronConfig::default();
        let pulse = ReadPulse::reference();
        let d = oxram();
        let cfg = AttenuatorConfig::default().tuned_for_sdf(9000.0).unwrap();
        let schedule = SpikeSchedule::periodic(pulse, d.r_lrs, 400).unwrap();
        let dt = pulse.width / 100.0;
        let ideal = simulate_column(
            &n,
            &Attenuation::Ideal {
                sdf: cfg.small_signal_sdf(),
            },
            &schedule,
            dt,
        )
        .unwrap();
        // Deep linear regime: shrink the signal so tanh(x)/x is 1 to 1e-9.
        let deep = AttenuatorConfig { i_b: 1e-3, ..cfg }
            .tuned_for_sdf(9000.0)
            .unwrap();
        let tanh = simulate_column(&n, &Attenuation::Tanh(deep), &schedule, dt).unwrap();
        assert_eq!(ideal.first_fire_event, tanh.first_fire_event);
    }

    #[test]
    fn frequency_matches_analytic() {
        let n = NeuronConfig::default()
            .with_constant_leak(0.1e-9)
            .with_refractory(50e-6);
        let pts = frequency_curve(&n, &[0.05e-9, 0.1e-9, 1e-9, 10e-9]).unwrap();
        assert_eq!(pts[0].1, 0.0);
        assert_eq!(pts[1].1, 0.0);
        for &(i, f) in &pts[2..] {
            let analytic = neuron::firing_frequency(&n, i).unwrap();
            assert!(rel(f, analytic) < 1e-3, "{i}: {f} vs {analytic}");
        }
    }

    #[test]
    fn frequency_curve_from_lower_operating_bound() {
        let n = NeuronConfig::default();
        let currents = crate::units::log_space(20e-12, 20e-9, 12);
        let pts = frequency_curve(&n, &currents).unwrap();
        assert!(pts.iter().all(|p| p.1 >= 0.0));
        assert!(pts.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn frequency_curve_conductance_mode() {
        let n = NeuronConfig::default().with_conductance_leak(1e-9);
        let pts = frequency_curve(&n, &[0.5e-9, 5e-9]).unwrap();
        assert_eq!(pts[0].1, 0.0);
        let t = neuron::estimated_time_to_fire(&n, 5e-9).unwrap();
        assert!(rel(pts[1].1, 1.0 / t) < 1e-3);
    }

    #[test]
    fn frequency_curve_rejects_negative() {
        assert!(frequency_curve(&NeuronConfig::default(), &[-1e-9]).is_err());
    }

    #[test]
    fn leak_gap_back_to_back_and_leakless() {
        let d = oxram();
        let pulse = ReadPulse::reference();
        let n = NeuronConfig::default();
        let allowed = [0.0, 1.0 / 350.0];
        let g = leak_gap_report(&n, 9000.0, &d, &pulse, 1.0).unwrap();
        assert!(allowed.contains(&g), "{g}");
        let g = leak_gap_report(&n, 9000.0, &d, &pulse, 0.1).unwrap();
        assert!(allowed.contains(&g), "{g}");
    }

    #[test]
    fn leak_gap_grows_as_duty_shrinks() {
        let d = EnvmDeviceModel::new(Technology::Custom, "x", 5e3, 50e3, 0.1, 9000.0).unwrap();
        let pulse = ReadPulse::reference();
        let n = NeuronConfig::default().with_constant_leak(2e-12);
        let g_sparse = leak_gap_report(&n, 9000.0, &d, &pulse, 0.01).unwrap();
        let g_sparser = leak_gap_report(&n, 9000.0, &d, &pulse, 0.005).unwrap();
        assert!(g_sparse > 0.0);
        assert!(g_sparser > g_sparse);
    }

    #[test]
    fn leak_gap_errors() {
        let d = oxram();
        let pulse = ReadPulse::reference();
        let n = NeuronConfig::default().with_constant_leak(1e-6);
        assert!(matches!(
            leak_gap_report(&n, 9000.0, &d, &pulse, 0.5),
            Err(Error::LeakDominated { .. })
        ));
        assert!(leak_gap_report(&NeuronConfig::default(), 9000.0, &d, &pulse, 0.0).is_err());
        // fires back to back, never with a long gap
        let n = NeuronConfig::default()
            .with_c_mem(8.6e-15)
            .with_constant_leak(1e-9);
        assert!(matches!(
            leak_gap_report(&n, 9000.0, &d, &pulse, 0.01),
            Err(Error::NeverFires { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let n = NeuronConfig::default().with_constant_leak(1e-12);
        let pulse = ReadPulse::with_period(0.1, 1e-6, 3e-6).unwrap();
        let schedule = SpikeSchedule::periodic(pulse, 5e3, 500).unwrap();
        let a = simulate_column(&n, &Attenuation::Ideal { sdf: 9000.0 }, &schedule, 1e-8).unwrap();
        let b = simulate_column(&n, &Attenuation::Ideal { sdf: 9000.0 }, &schedule, 1e-8).unwrap();
        assert_eq!(a, b);
    }
}
