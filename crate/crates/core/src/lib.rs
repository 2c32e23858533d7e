//! Behavioral co-design toolkit for eNVM crossbar output circuits.
//!
//! A crossbar column reads its synapses with short voltage pulses; the
//! resulting currents pass through a subthreshold current attenuator and are
//! integrated by a leaky integrate-and-fire neuron. This crate models each
//! stage and answers the sizing question that ties them together: how many
//! LRS synapse reads (the fan-in) a neuron absorbs before it fires.
//!
//! - [`device`]: eNVM technology models and built-in operating points
//! - [`attenuator`]: tanh attenuator, SDF, saturation and continuity checks
//! - [`neuron`]: LIF analytics and the Euler integrator
//! - [`abacus`]: fan-in evaluation and design-space sweeps
//! - [`column`]: brute-force column simulator used as an oracle
//! - [`config`], [`export`], [`cli`]: file formats and the command line

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abacus;
pub mod attenuator;
pub mod cli;
pub mod column;
pub mod config;
pub mod device;
pub mod error;
pub mod export;
pub mod neuron;
pub mod units;

pub use abacus::{classify_scale, fan_in, sweep, Constraint, FanInReport, ReadPulse, ScaleClass};
pub use attenuator::AttenuatorConfig;
pub use device::{EnvmDeviceModel, Technology};
pub use error::{Error, Limit, Result};
pub use neuron::{LeakMode, NeuronConfig, NeuronState};
