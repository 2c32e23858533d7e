//! C ABI for the fanin toolkit.
//!
//! Configurations are opaque handles created by `fanin_config_default` or
//! `fanin_config_from_toml` and released with `fanin_config_free`. Every
//! fallible call returns a [`FaninStatus`]; on failure a description is
//! available from `fanin_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fanin::abacus::{self, ScaleClass};
use fanin::attenuator;
use fanin::column::{self, Attenuation, SimOptions, SpikeSchedule};
use fanin::config::ToolConfig;
use fanin::device::{derive_lrs_from_fanin, find_device};
use fanin::neuron;
use fanin::{Constraint, Error};

pub const FANIN_FLAG_LEAK_DOMINATED: u32 = 1;
pub const FANIN_FLAG_SDF_EXCEEDS_MAX: u32 = 2;
pub const FANIN_FLAG_SATURATION_VIOLATED: u32 = 4;
pub const FANIN_FLAG_BAND_NOT_FLAT: u32 = 8;
pub const FANIN_FLAG_SDF_UNREACHABLE: u32 = 16;

const _: () = {
    assert!(FANIN_FLAG_LEAK_DOMINATED == Constraint::LEAK_DOMINATED.bits());
    assert!(FANIN_FLAG_SDF_EXCEEDS_MAX == Constraint::SDF_EXCEEDS_MAX.bits());
    assert!(FANIN_FLAG_SATURATION_VIOLATED == Constraint::SATURATION_VIOLATED.bits());
    assert!(FANIN_FLAG_BAND_NOT_FLAT == Constraint::BAND_NOT_FLAT.bits());
    assert!(FANIN_FLAG_SDF_UNREACHABLE == Constraint::SDF_UNREACHABLE.bits());
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaninStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Infeasible = 4,
    LeakDominated = 5,
    NeverFires = 6,
    UnknownDevice = 7,
    Parse = 8,
    Io = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaninScale {
    /// No fan-in: the leak dominates.
    None = 0,
    SubSmall = 1,
    Small = 2,
    Large = 3,
    AboveLarge = 4,
}

impl From<Option<ScaleClass>> for FaninScale {
    fn from(s: Option<ScaleClass>) -> Self {
        match s {
            None => FaninScale::None,
            Some(ScaleClass::SubSmall) => FaninScale::SubSmall,
            Some(ScaleClass::Small) => FaninScale::Small,
            Some(ScaleClass::Large) => FaninScale::Large,
            Some(ScaleClass::AboveLarge) => FaninScale::AboveLarge,
        }
    }
}

/// One abacus point with its circuit checks.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaninReport {
    pub c_mem: f64,
    pub sdf: f64,
    pub r_lrs: f64,
    pub i_leak: f64,
    pub v_th: f64,
    pub delta_v_mem: f64,
    pub i_input_attenuated: f64,
    /// Valid only when `has_fan_in` is true.
    pub fan_in: u64,
    pub has_fan_in: bool,
    /// Bitwise OR of the `FANIN_FLAG_*` constants.
    pub flags: u32,
    pub scale: FaninScale,
}

impl Default for FaninReport {
    fn default() -> Self {
        Self {
            c_mem: 0.0,
            sdf: 0.0,
            r_lrs: 0.0,
            i_leak: 0.0,
            v_th: 0.0,
            delta_v_mem: 0.0,
            i_input_attenuated: 0.0,
            fan_in: 0,
            has_fan_in: false,
            flags: 0,
            scale: FaninScale::None,
        }
    }
}

/// Opaque tool configuration.
pub struct FaninConfig(ToolConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(FaninStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::OutOfRange { .. } => FaninStatus::OutOfRange,
            Error::InvalidParameter { .. }
            | Error::NonFinite(_)
            | Error::OverlappingEvents { .. } => FaninStatus::InvalidArgument,
            Error::Infeasible(_) => FaninStatus::Infeasible,
            Error::LeakDominated { .. } => FaninStatus::LeakDominated,
            Error::NeverFires { .. } => FaninStatus::NeverFires,
            Error::UnknownDevice { .. } => FaninStatus::UnknownDevice,
            Error::Parse { .. } => FaninStatus::Parse,
            Error::Io(_) => FaninStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FaninStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic for `fanin_last_error_message`.
fn guard<F>(f: F) -> FaninStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FaninStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            FaninStatus::Panic
        }
    }
}

unsafe fn config_ref<'a>(cfg: *const FaninConfig) -> Result<&'a ToolConfig, Failure> {
    cfg.as_ref().map(|c| &c.0).ok_or_else(|| null("config"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        Failure(
            FaninStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the most recent failed call on this thread, or NULL.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn fanin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fanin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in reference configuration. Free with `fanin_config_free`.
#[no_mangle]
pub extern "C" fn fanin_config_default() -> *mut FaninConfig {
    Box::into_raw(Box::new(FaninConfig(ToolConfig::default())))
}

/// Parses a TOML configuration. On success `*out` owns a new handle.
///
/// # Safety
/// `toml` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_config_from_toml(
    toml: *const c_char,
    out: *mut *mut FaninConfig,
) -> FaninStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let text = str_arg(toml, "toml")?;
        let cfg = ToolConfig::from_toml(text)?;
        out.write(Box::into_raw(Box::new(FaninConfig(cfg))));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fanin_config_free(cfg: *mut FaninConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of configured devices, or 0 for NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fanin_config_device_count(cfg: *const FaninConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.devices.len())
}

/// Fan-in of a named device. `sdf <= 0` selects the configured SDF.
///
/// # Safety
/// `cfg` must be a live handle, `device` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_evaluate(
    cfg: *const FaninConfig,
    device: *const c_char,
    sdf: f64,
    out: *mut FaninReport,
) -> FaninStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let name = str_arg(device, "device")?;
        let d = find_device(&cfg.devices, name)?;
        let sdf = if sdf > 0.0 {
            sdf
        } else {
            cfg.sdf_for(&d.name).unwrap_or(d.default_sdf)
        };
        let r = abacus::fan_in_with_circuit(
            &cfg.neuron,
            d,
            sdf,
            &cfg.pulse,
            &cfg.attenuator,
            cfg.band,
        )?;
        let report = FaninReport {
            c_mem: r.c_mem,
            sdf: r.sdf,
            r_lrs: r.r_lrs,
            i_leak: r.i_leak,
            v_th: r.v_th,
            delta_v_mem: r.delta_v_mem,
            i_input_attenuated: r.i_input_attenuated,
            fan_in: r.fan_in.unwrap_or(0),
            has_fan_in: r.fan_in.is_some(),
            flags: r.flags.bits(),
            scale: r.scale().into(),
        };
        write_out(out, report, "out")
    })
}

/// LRS resistance that reproduces `target_fan_in` with the configured
/// neuron and pulse.
///
/// # Safety
/// `cfg` must be a live handle and `out_ohms` writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_derive_lrs(
    cfg: *const FaninConfig,
    target_fan_in: u64,
    sdf: f64,
    out_ohms: *mut f64,
) -> FaninStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let r = derive_lrs_from_fanin(target_fan_in, sdf, &cfg.neuron, &cfg.pulse)?;
        write_out(out_ohms, r, "out_ohms")
    })
}

/// Attenuator output current and SDF at input `i_in`. Either output may be
/// NULL when not wanted.
///
/// # Safety
/// `cfg` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_attenuate(
    cfg: *const FaninConfig,
    i_in: f64,
    out_i_out: *mut f64,
    out_sdf: *mut f64,
) -> FaninStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let i_out = attenuator::output_current(&cfg.attenuator, i_in)?;
        let sdf = attenuator::scaling_down_factor(&cfg.attenuator, i_in)?;
        if !out_i_out.is_null() {
            out_i_out.write(i_out);
        }
        if !out_sdf.is_null() {
            out_sdf.write(sdf);
        }
        Ok(())
    })
}

/// Steady firing frequency of the configured neuron under constant drive.
///
/// # Safety
/// `cfg` must be a live handle and `out_hz` writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_firing_frequency(
    cfg: *const FaninConfig,
    i_const: f64,
    out_hz: *mut f64,
) -> FaninStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let f = neuron::firing_frequency(&cfg.neuron, i_const)?;
        write_out(out_hz, f, "out_hz")
    })
}

/// Simulates `count` back-to-back LRS reads of a device through an ideal
/// attenuator. `*out_event` receives the 1-based event of the first fire,
/// or 0 when the neuron never fires. `sdf <= 0` selects the configured SDF
/// and `dt <= 0` uses a hundredth of the pulse width.
///
/// # Safety
/// `cfg` must be a live handle, `device` NUL-terminated, `out_event` writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_simulate_first_fire(
    cfg: *const FaninConfig,
    device: *const c_char,
    count: usize,
    sdf: f64,
    dt: f64,
    out_event: *mut usize,
) -> FaninStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let name = str_arg(device, "device")?;
        let d = find_device(&cfg.devices, name)?;
        let sdf = if sdf > 0.0 {
            sdf
        } else {
            cfg.sdf_for(&d.name).unwrap_or(d.default_sdf)
        };
        let schedule = SpikeSchedule::periodic(cfg.pulse, d.r_lrs, count)?;
        let opts = SimOptions {
            stop_at_first_fire: true,
            ..if dt > 0.0 {
                SimOptions::with_dt(dt)
            } else {
                SimOptions::for_pulse(&cfg.pulse)
            }
        };
        let trace =
            column::simulate_with(&cfg.neuron, &Attenuation::Ideal { sdf }, &schedule, opts)?;
        write_out(out_event, trace.first_fire_event.unwrap_or(0), "out_event")
    })
}

/// Runs the configured sweep grid and returns it as CSV text. Release the
/// string with `fanin_string_free`.
///
/// # Safety
/// `cfg` must be a live handle and `out_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn fanin_sweep_csv(
    cfg: *const FaninConfig,
    out_csv: *mut *mut c_char,
) -> FaninStatus {
    guard(|| {
        if out_csv.is_null() {
            return Err(null("out_csv"));
        }
        out_csv.write(ptr::null_mut());
        let cfg = config_ref(cfg)?;
        let rows = fanin::cli::sweep_rows(cfg)?;
        let mut buf = Vec::new();
        fanin::export::write_sweep_csv(&rows, &mut buf)?;
        let text =
            CString::new(buf).map_err(|_| Failure(FaninStatus::Io, "CSV contains NUL".into()))?;
        out_csv.write(text.into_raw());
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fanin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
